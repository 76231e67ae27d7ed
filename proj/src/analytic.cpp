#include "cqed/analytic.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "cqed/units.hpp"

namespace cqed::analytic {

void CavityGeometry::validate() const {
    if (!(length > 0.0) || !(finesse > 0.0) || !(waist > 0.0))
        throw std::invalid_argument("CavityGeometry: length, finesse and waist must be > 0");
    if (transmission_ppm < 0.0 || loss_ppm < 0.0)
        throw std::invalid_argument("CavityGeometry: mirror budget must be >= 0");
}

void EfficiencyChain::validate() const {
    for (double f : {impedance_matching, mode_matching, path, detector})
        if (!(f >= 0.0 && f <= 1.0))
            throw std::invalid_argument("EfficiencyChain: factors must lie in [0, 1]");
}

double cooperativity(double g, double kappa, double gamma) {
    if (!(kappa > 0.0) || !(gamma > 0.0))
        throw std::domain_error("cooperativity: kappa and gamma must be > 0");
    return g * g / (2.0 * kappa * gamma);
}

double kappa_from_geometry(const CavityGeometry& geom) {
    if (!(geom.length > 0.0) || !(geom.finesse > 0.0))
        throw std::invalid_argument("kappa_from_geometry: length and finesse must be > 0");
    return units::two_pi * units::speed_of_light / (4.0 * geom.length * geom.finesse);
}

double purcell_factor(double c0, double kappa, double delta_ac) {
    if (!(kappa > 0.0))
        throw std::domain_error("purcell_factor: kappa must be > 0");
    return 2.0 * c0 * kappa * kappa / (kappa * kappa + delta_ac * delta_ac);
}

double purcell_linewidth(double Gamma, double c0) { return Gamma * (2.0 * c0 + 1.0); }

double broadened_width(double Gamma, double c0, double s) {
    const double enhanced = 2.0 * c0 + 1.0;
    return Gamma * std::sqrt(enhanced * enhanced + s);
}

BackactionField backaction_ratio(const SystemParams& p) {
    const double c0 = p.cooperativity();
    const double Gamma = p.Gamma();
    const double lorentz = Gamma * Gamma / (Gamma * Gamma + p.delta_a * p.delta_a);
    const double phase = p.delta_c / p.kappa - p.delta_a / Gamma;

    BackactionField f;
    f.ratio = -c0 * lorentz * std::polar(1.0, phase);
    f.phase = std::numbers::pi + phase;
    f.in_validity_region =
        std::abs(p.delta_c) < p.kappa / 2.0 && std::abs(p.delta_a) < Gamma / 2.0 && c0 < 1.0;
    return f;
}

InterferenceDetunings interference_detunings(const SystemParams& p) {
    const double c0 = p.cooperativity();
    const double b = p.Gamma() * (c0 + 1.0);
    const double root = std::sqrt(4.0 * p.delta_a * p.delta_a + b * b);

    InterferenceDetunings d;
    // Rationalised minus branch: stable for small delta_a and exactly 0 at delta_a = 0.
    d.minus = p.kappa * (-2.0 * p.delta_a / (b + root));
    if (p.delta_a == 0.0) {
        d.plus = std::numeric_limits<double>::infinity();
        d.plus_unbounded = true;
    } else {
        d.plus = p.kappa * (b + root) / (2.0 * p.delta_a);
    }
    return d;
}

LinearizedMinimum linearized_minimum(const SystemParams& p) {
    const double c0 = p.cooperativity();
    const double Gamma = p.Gamma();
    LinearizedMinimum m;
    m.printed_slope = -p.kappa / (Gamma * (1.0 + 2.0 * c0));
    m.expansion_slope = -p.kappa / (Gamma * (1.0 + c0));
    m.printed = m.printed_slope * p.delta_a;
    m.expansion = m.expansion_slope * p.delta_a;
    m.in_window = std::abs(p.delta_a) <= Gamma / 4.0;
    return m;
}

double efficiency(const EfficiencyChain& chain) {
    chain.validate();
    return chain.impedance_matching * chain.mode_matching * chain.path * chain.detector;
}

double peak_cavity_output(double c0) {
    if (c0 < 0.0)
        throw std::invalid_argument("peak_cavity_output: C0 must be >= 0");
    return 2.0 * c0 / (1.0 + 2.0 * c0 + 2.0 * c0 * c0);
}

double mean_photon_estimate(double c0, double Gamma, double kappa) {
    return 2.0 * c0 * Gamma / kappa;
}

double coating_loss_model(double t, double l0, double dl, double tau) {
    if (!(tau > 0.0))
        throw std::invalid_argument("coating_loss_model: tau must be > 0");
    return l0 + dl * -std::expm1(-t / tau);
}

} // namespace cqed::analytic
