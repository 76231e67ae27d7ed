// master_equation.hpp: driven Jaynes-Cummings Lindblad model, steady state and propagation

#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "cqed/linalg.hpp"
#include "cqed/operators.hpp"
#include "cqed/system.hpp"

namespace cqed {

class InvalidStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StateHealth {
    double hermiticity = 0.0;   // max |rho - rho^dag| entry
    double trace_error = 0.0;   // |Tr rho - 1|
    double min_eigenvalue = 0.0;

    bool within(double tol) const {
        return hermiticity <= tol && trace_error <= tol && min_eigenvalue >= -tol;
    }
};

StateHealth inspect(const MatrixXc& rho);

/// Density matrix checked at construction: Hermitian, unit trace and positive
/// semidefinite, each to `tol`.
class StateMatrix {
public:
    explicit StateMatrix(MatrixXc rho, double tol = 1e-9);

    static StateMatrix pure(const VectorXc& psi);

    const MatrixXc& matrix() const { return rho_; }
    Eigen::Index dimension() const { return rho_.rows(); }
    const StateHealth& health() const { return health_; }

private:
    MatrixXc rho_;
    StateHealth health_;
};

// Column stacking: vec(rho)[i + j*D] = rho(i, j), so vec(A rho B) = (B^T (x) A) vec(rho).
VectorXc vec(const MatrixXc& rho);
MatrixXc unvec(const VectorXc& v);

/// H/hbar = -delta_a s+s- - delta_c a^dag a + g (a^dag s- + a s+) + (Omega/2)(s+ + s-).
MatrixXc hamiltonian(const SystemParams& p, const OperatorSet& ops);

/// Superoperator of d rho/dt = -i[H, rho] + sum_k C_k rho C_k^dag - {C_k^dag C_k, rho}/2.
MatrixXc lindblad_superoperator(const MatrixXc& h, std::span<const MatrixXc> collapse);

/// Collapse channels sqrt(2 kappa) a and sqrt(2 gamma) sigma-.
MatrixXc liouvillian(const SystemParams& p, const OperatorSet& ops);

/// Null vector of L normalised to unit trace. One row of L/||L|| is replaced
/// by the trace functional and the system solved directly.
StateMatrix steady_state(const MatrixXc& liouvillian);

/// ||L vec(rho)|| / ||L||, infinity norms.
double steady_state_residual(const MatrixXc& liouvillian, const MatrixXc& rho);

/// exp(L t) vec(rho0) via scaling-and-squaring.
StateMatrix evolve(const MatrixXc& liouvillian, const StateMatrix& rho0, double t);

/// Propagates an arbitrary vectorised operator along a sorted grid of times,
/// reusing the step exponential whenever consecutive spacings repeat.
std::vector<VectorXc> propagate_grid(const MatrixXc& liouvillian, const VectorXc& v0,
                                     std::span<const double> times);

struct EmissionRates {
    double p_cavity = 0.0; // 2 kappa <a^dag a>, photons/s
    double p_free = 0.0;   // Gamma <s+ s->, photons/s
    double p_total = 0.0;
    double n_bar = 0.0;
    double pe = 0.0;
};

/// Real part of Tr[op rho]; throws when the imaginary part exceeds 1e-10.
double expectation_real(const MatrixXc& op, const MatrixXc& rho);

EmissionRates emission_rates(const StateMatrix& rho, const SystemParams& p,
                             const OperatorSet& ops);

struct SteadySolution {
    StateMatrix rho;
    EmissionRates rates;
    double residual = 0.0;
};

/// Builds the operators and Liouvillian for `p` and solves its steady state.
SteadySolution solve_steady(const SystemParams& p);

struct TruncationReport {
    int base_cutoff = 0;
    int extended_cutoff = 0;
    EmissionRates base;
    EmissionRates extended;
    double max_relative_change = 0.0;

    bool converged(double tol = 1e-6) const { return max_relative_change < tol; }
};

/// Compares every emission observable between cutoffs N and N + extra.
TruncationReport check_truncation(const SystemParams& p, int extra = 2);

double relative_change(double a, double b);

} // namespace cqed
