// fixtures.hpp: shared parameter sets and independent reference formulas for the tests

#pragma once

#include <complex>
#include <random>

#include "cqed/system.hpp"
#include "cqed/units.hpp"

namespace fixtures {

// Ion-cavity parameters: g/2pi = 67 MHz, kappa/2pi = 2.4 GHz, gamma/2pi = 9.8 MHz.
inline cqed::SystemParams reference_system(double s = 2.8, int fock = 9) {
    using namespace cqed::units;
    cqed::SystemParams p;
    p.g = from_mhz(67.0);
    p.kappa = from_ghz(2.4);
    p.gamma = from_mhz(9.8);
    p.delta_a = -p.gamma; // -Gamma/2
    p.delta_c = 0.0;
    p.s = s;
    p.fock_cutoff = fock;
    return p;
}

// Two-level optical Bloch steady state, s on resonance: rho_ee = (s/2) / (1 + s + (2 delta/Gamma)^2).
inline double bloch_excited(double s, double delta, double Gamma) {
    const double x = 2.0 * delta / Gamma;
    return 0.5 * s / (1.0 + s + x * x);
}

struct LinearAmplitudes {
    std::complex<double> sigma; // <sigma->
    std::complex<double> a;     // <a>
};

// First-order (single-excitation) steady state of the coupled amplitudes:
//   0 = (i delta_a - gamma) s - i g a - i Omega/2
//   0 = (i delta_c - kappa) a - i g s
inline LinearAmplitudes weak_drive_amplitudes(const cqed::SystemParams& p) {
    using C = std::complex<double>;
    const C i(0.0, 1.0);
    const C da = i * p.delta_a - p.gamma;
    const C dc = i * p.delta_c - p.kappa;
    const C a_per_s = i * p.g / dc;
    const C sigma = (i * p.rabi() / 2.0) / (da - i * p.g * a_per_s);
    return {sigma, a_per_s * sigma};
}

} // namespace fixtures
