// correlation.hpp: second-order correlation functions via the quantum regression theorem

#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "cqed/system.hpp"

namespace cqed {

struct CorrelationCurve {
    std::vector<double> tau; // seconds, sorted
    std::vector<double> values;
    bool convolved = false;

    std::size_t size() const { return tau.size(); }
    bool empty() const { return tau.empty(); }
    double at_zero() const; // value at the sample closest to tau = 0
};

class VanishingIntensityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Resonantly driven two-level emitter with its own population decay. Lets the
/// decay (e.g. a Purcell-enhanced Gamma') differ from the Gamma that defines
/// the Rabi frequency.
struct TwoLevelDrive {
    double rabi = 0.0;
    double detuning = 0.0; // omega_drive - omega_atom
    double decay = 0.0;    // population decay rate

    static TwoLevelDrive from(const SystemParams& p);
};

/// g2(tau) of the cavity field: Tr[a^dag a e^{L tau}(a rho a^dag)] / <a^dag a>^2.
CorrelationCurve g2_cavity(const SystemParams& p, std::span<const double> tau_grid);

/// Same regression on the bare 2x2 atom with sigma-/sigma+ in place of a/a^dag.
CorrelationCurve atom_g2(const TwoLevelDrive& drive, std::span<const double> tau_grid);

/// Atom-only g2 for parameters with g = 0.
CorrelationCurve atom_g2(const SystemParams& p, std::span<const double> tau_grid);

std::vector<double> uniform_grid(double start, double stop, std::size_t count);

} // namespace cqed
