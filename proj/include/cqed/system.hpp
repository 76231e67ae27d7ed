// system.hpp: parameters of the driven ion-cavity system

#pragma once

#include "cqed/operators.hpp"

namespace cqed {

/// All rates and detunings in angular units (rad/s).
///
/// delta_a = omega_drive - omega_atom, delta_c = omega_drive - omega_cavity.
/// The drive strength is the on-resonance saturation parameter s = 2 Omega^2 / Gamma^2.
struct SystemParams {
    double g = 0.0;
    double kappa = 0.0; // cavity field decay
    double gamma = 0.0; // atomic dipole decay, Gamma = 2 gamma
    double delta_a = 0.0;
    double delta_c = 0.0;
    double s = 0.0;
    int fock_cutoff = 9;

    double Gamma() const { return 2.0 * gamma; }
    double rabi() const;
    double cooperativity() const;
    HilbertSpec hilbert() const { return HilbertSpec{.fock_cutoff = fock_cutoff}; }

    void validate() const;
};

} // namespace cqed
