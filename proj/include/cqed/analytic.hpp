// analytic.hpp: closed-form cavity relations: Purcell factor, back-action field,
// interference detunings, cavity geometry and detection efficiency.
//
// Every frequency argument and result is angular (rad/s).

#pragma once

#include <complex>

#include "cqed/system.hpp"

namespace cqed::analytic {

struct CavityGeometry {
    double length = 0.0;           // m
    double finesse = 0.0;
    double transmission_ppm = 0.0; // per mirror
    double loss_ppm = 0.0;         // per mirror
    double waist = 0.0;            // m, 1/e^2 intensity radius

    void validate() const;
};

struct EfficiencyChain {
    double impedance_matching = 1.0;
    double mode_matching = 1.0;
    double path = 1.0;
    double detector = 1.0;

    void validate() const;
};

struct BackactionField {
    std::complex<double> ratio; // E_cavity / E_drive at the emitter
    double phase = 0.0;         // unwrapped: pi + delta_c/kappa - delta_a/Gamma
    bool in_validity_region = false; // |delta_c| < kappa/2, |delta_a| < Gamma/2, C0 < 1

    double amplitude() const { return std::abs(ratio); }
};

struct InterferenceDetunings {
    double plus = 0.0;  // constructive; infinite when delta_a == 0
    double minus = 0.0; // destructive
    bool plus_unbounded = false;
};

struct LinearizedMinimum {
    double printed_slope = 0.0;   // -kappa / [Gamma (1 + 2 C0)]
    double expansion_slope = 0.0; // -kappa / [Gamma (1 + C0)], first order of the exact root
    double printed = 0.0;         // printed_slope * delta_a
    double expansion = 0.0;       // expansion_slope * delta_a
    bool in_window = false;       // |delta_a| <= Gamma / 4
};

double cooperativity(double g, double kappa, double gamma);

/// Field decay rate kappa = 2 pi c / (4 L F).
double kappa_from_geometry(const CavityGeometry& geom);

/// f_P = 2 C0 kappa^2 / (kappa^2 + delta_ac^2), delta_ac = omega_c - omega_a.
double purcell_factor(double c0, double kappa, double delta_ac);

double purcell_linewidth(double Gamma, double c0);
double broadened_width(double Gamma, double c0, double s);

BackactionField backaction_ratio(const SystemParams& p);

/// Roots of delta_a x^2 - Gamma (1 + C0) x - delta_a = 0 in x = delta_c / kappa,
/// scaled back to delta_c.
InterferenceDetunings interference_detunings(const SystemParams& p);

LinearizedMinimum linearized_minimum(const SystemParams& p);

double efficiency(const EfficiencyChain& chain);

/// Peak of P_c / P0 versus delta_c at delta_a = -Gamma/2 in the weak-drive limit.
double peak_cavity_output(double c0);

/// Mean intracavity photon number estimate 2 C0 Gamma / kappa.
double mean_photon_estimate(double c0, double Gamma, double kappa);

/// Saturating exponential: loss(t) = L0 + dL (1 - exp(-t / tau)).
double coating_loss_model(double t, double l0, double dl, double tau);

} // namespace cqed::analytic
