#include "cqed/master_equation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace cqed {

StateHealth inspect(const MatrixXc& rho) {
    StateHealth h;
    h.hermiticity = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    h.trace_error = std::abs(rho.trace() - Complex(1.0));
    const MatrixXc herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(herm, Eigen::EigenvaluesOnly);
    h.min_eigenvalue = es.eigenvalues().minCoeff();
    return h;
}

StateMatrix::StateMatrix(MatrixXc rho, double tol) : rho_(std::move(rho)) {
    if (rho_.rows() != rho_.cols() || rho_.rows() == 0)
        throw InvalidStateError("StateMatrix: density matrix must be square and non-empty");
    require_finite(rho_, "StateMatrix");
    health_ = inspect(rho_);
    if (health_.hermiticity > tol)
        throw InvalidStateError("StateMatrix: not Hermitian (" +
                                std::to_string(health_.hermiticity) + ")");
    if (health_.trace_error > tol)
        throw InvalidStateError("StateMatrix: trace deviates from 1 by " +
                                std::to_string(health_.trace_error));
    if (health_.min_eigenvalue < -tol)
        throw InvalidStateError("StateMatrix: negative eigenvalue " +
                                std::to_string(health_.min_eigenvalue));
}

StateMatrix StateMatrix::pure(const VectorXc& psi) {
    const VectorXc n = psi.normalized();
    return StateMatrix(n * n.adjoint());
}

VectorXc vec(const MatrixXc& rho) {
    return Eigen::Map<const VectorXc>(rho.data(), rho.size());
}

MatrixXc unvec(const VectorXc& v) {
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    if (d * d != v.size())
        throw std::invalid_argument("unvec: length is not a perfect square");
    // Eigen storage is column-major, matching the stacking convention.
    return Eigen::Map<const MatrixXc>(v.data(), d, d);
}

MatrixXc hamiltonian(const SystemParams& p, const OperatorSet& ops) {
    p.validate();
    const double omega = p.rabi();
    MatrixXc h = -p.delta_a * ops.pe_op - p.delta_c * ops.n_op +
                 p.g * (ops.a_dag * ops.sigma_minus + ops.a * ops.sigma_plus) +
                 (omega / 2.0) * (ops.sigma_plus + ops.sigma_minus);
    // symmetrise round-off
    h = 0.5 * (h + h.adjoint()).eval();
    return h;
}

MatrixXc lindblad_superoperator(const MatrixXc& h, std::span<const MatrixXc> collapse) {
    const Eigen::Index d = h.rows();
    const MatrixXc id = MatrixXc::Identity(d, d);
    const Complex i(0.0, 1.0);

    MatrixXc l = -i * (tensor(id, h) - tensor(h.transpose(), id));
    for (const MatrixXc& c : collapse) {
        const MatrixXc cdc = c.adjoint() * c;
        l += tensor(c.conjugate(), c);
        l -= 0.5 * tensor(id, cdc);
        l -= 0.5 * tensor(cdc.transpose(), id);
    }
    return l;
}

MatrixXc liouvillian(const SystemParams& p, const OperatorSet& ops) {
    const MatrixXc h = hamiltonian(p, ops);
    const std::array<MatrixXc, 2> collapse{std::sqrt(2.0 * p.kappa) * ops.a,
                                           std::sqrt(2.0 * p.gamma) * ops.sigma_minus};
    return lindblad_superoperator(h, collapse);
}

double steady_state_residual(const MatrixXc& liouvillian, const MatrixXc& rho) {
    const double norm = inf_norm(liouvillian);
    if (norm == 0.0)
        return 0.0;
    return (liouvillian * vec(rho)).lpNorm<Eigen::Infinity>() / norm;
}

StateMatrix steady_state(const MatrixXc& liouvillian) {
    const Eigen::Index n = liouvillian.rows();
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
    if (liouvillian.cols() != n || d * d != n)
        throw std::invalid_argument("steady_state: Liouvillian must be square of size D^2");

    const double norm = inf_norm(liouvillian);
    if (norm == 0.0)
        throw SingularMatrixError("steady_state: zero Liouvillian, no decay channel");

    MatrixXc system = liouvillian / norm;
    VectorXc rhs = VectorXc::Zero(n);
    system.row(0).setZero();
    for (Eigen::Index k = 0; k < d; ++k)
        system(0, k + k * d) = 1.0;
    rhs(0) = 1.0;

    VectorXc x;
    try {
        x = solve_linear(system, rhs);
    } catch (const SingularMatrixError& e) {
        throw SingularMatrixError(std::string("steady_state: no unique steady state (") +
                                  e.what() + ")");
    }

    MatrixXc rho = unvec(x);
    const double residual = steady_state_residual(liouvillian, rho);
    if (residual > 1e-9)
        throw SingularMatrixError("steady_state: residual " + std::to_string(residual));
    return StateMatrix(std::move(rho));
}

StateMatrix evolve(const MatrixXc& liouvillian, const StateMatrix& rho0, double t) {
    if (!(t >= 0.0))
        throw std::invalid_argument("evolve: t must be >= 0");
    if (liouvillian.rows() != rho0.dimension() * rho0.dimension())
        throw std::invalid_argument("evolve: dimension mismatch");
    if (t == 0.0)
        return rho0;
    const MatrixXc step = expm((liouvillian * t).eval());
    return StateMatrix(unvec(step * vec(rho0.matrix())));
}

std::vector<VectorXc> propagate_grid(const MatrixXc& liouvillian, const VectorXc& v0,
                                     std::span<const double> times) {
    std::vector<VectorXc> out;
    out.reserve(times.size());
    if (times.empty())
        return out;
    if (!std::is_sorted(times.begin(), times.end()) || times.front() < 0.0)
        throw std::invalid_argument("propagate_grid: times must be sorted and >= 0");

    MatrixXc step;
    double cached_dt = -1.0;
    auto advance = [&](const VectorXc& v, double dt) -> VectorXc {
        if (dt == 0.0)
            return v;
        if (cached_dt < 0.0 || std::abs(dt - cached_dt) > 1e-12 * dt) {
            step = expm((liouvillian * dt).eval());
            cached_dt = dt;
        }
        return step * v;
    };

    VectorXc current = advance(v0, times.front());
    out.push_back(current);
    for (std::size_t k = 1; k < times.size(); ++k) {
        current = advance(current, times[k] - times[k - 1]);
        out.push_back(current);
    }
    return out;
}

double expectation_real(const MatrixXc& op, const MatrixXc& rho) {
    const Complex v = (op * rho).trace();
    if (std::abs(v.imag()) > 1e-10)
        throw InvalidStateError("expectation value has imaginary part " +
                                std::to_string(v.imag()));
    return v.real();
}

EmissionRates emission_rates(const StateMatrix& rho, const SystemParams& p,
                             const OperatorSet& ops) {
    if (rho.dimension() != ops.spec.dimension())
        throw std::invalid_argument("emission_rates: state/operator dimension mismatch");
    EmissionRates r;
    // Clamp tiny negative round-off; StateMatrix already guarantees positivity to 1e-9.
    r.n_bar = std::max(0.0, expectation_real(ops.n_op, rho.matrix()));
    r.pe = std::max(0.0, expectation_real(ops.pe_op, rho.matrix()));
    r.p_cavity = 2.0 * p.kappa * r.n_bar;
    r.p_free = p.Gamma() * r.pe;
    r.p_total = r.p_cavity + r.p_free;
    return r;
}

SteadySolution solve_steady(const SystemParams& p) {
    p.validate();
    const OperatorSet ops = build_operators(p.hilbert());
    const MatrixXc l = liouvillian(p, ops);
    StateMatrix rho = steady_state(l);
    const double residual = steady_state_residual(l, rho.matrix());
    EmissionRates rates = emission_rates(rho, p, ops);
    return SteadySolution{std::move(rho), rates, residual};
}

double relative_change(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

TruncationReport check_truncation(const SystemParams& p, int extra) {
    if (extra < 1)
        throw std::invalid_argument("check_truncation: extra levels must be >= 1");
    TruncationReport report;
    report.base_cutoff = p.fock_cutoff;
    report.extended_cutoff = p.fock_cutoff + extra;

    SystemParams bigger = p;
    bigger.fock_cutoff = report.extended_cutoff;
    report.base = solve_steady(p).rates;
    report.extended = solve_steady(bigger).rates;

    const auto& a = report.base;
    const auto& b = report.extended;
    for (double change : {relative_change(a.p_cavity, b.p_cavity),
                          relative_change(a.p_free, b.p_free),
                          relative_change(a.p_total, b.p_total),
                          relative_change(a.n_bar, b.n_bar), relative_change(a.pe, b.pe)})
        report.max_relative_change = std::max(report.max_relative_change, change);
    return report;
}

} // namespace cqed
