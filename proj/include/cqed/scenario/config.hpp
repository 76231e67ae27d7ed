// config.hpp: strict key = value scenario configuration
//
// Frequencies are linear (nu = omega / 2 pi): g, gamma and detunings in MHz,
// kappa in GHz. Conversion to angular units happens once, in to_system().

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cqed/analytic.hpp"
#include "cqed/detector.hpp"
#include "cqed/system.hpp"

namespace cqed::scenario {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Sweep {
    double start = 0.0; // MHz
    double stop = 0.0;  // MHz
    int points = 0;

    std::vector<double> values() const; // MHz
    void validate(std::string_view what) const;
};

struct ScenarioConfig {
    // system
    double g_mhz = 67.0;
    double kappa_ghz = 2.4;
    double gamma_mhz = 9.8; // dipole decay gamma/2pi; Gamma = 2 gamma
    double delta_a_mhz = -9.8; // -Gamma/2
    double delta_c_mhz = 0.0;
    double s = 2.8;
    int fock = 9;

    // sweeps
    Sweep sweep{-14400.0, 7200.0, 301};      // delta_c for sweep-cavity
    Sweep atom_sweep{-100.0, 100.0, 201};    // delta_a = delta_c for sweep-atom
    Sweep map{-39.2, 39.2, 9};
    std::vector<double> map_delta_a_mhz; // explicit list overrides `map`
    double map_range_kappa = 1.5;        // coarse search span for the minimum, |delta_c| / kappa
    int poly_degree = 4;
    double slope_probe_gamma = 0.02;

    // correlation
    std::string g2_model = "two-level"; // or "cavity"
    double g2_decay_mhz = 24.0;         // Gamma'/2pi used by the two-level model
    double tau_max_ns = 200.0;
    int tau_points = 2001;

    // detector
    double jitter_fwhm_ns = 3.2;
    double dark_rate = 0.0;      // counts/s per detector
    double signal_rate = 1.0e5;  // signal counts/s per detector

    // geometry and efficiency
    double length_um = 150.0;
    double finesse = 209.0;
    double transmission_ppm = 1000.0;
    double loss_ppm = 500.0;
    double waist_um = 3.1;
    double g_theory_mhz = 96.0;
    double eta_im = 0.033;
    double eta_mm = 0.5;
    double eta_path = 0.5;
    double eta_pmt = 0.14;
    double eta_fiber = 0.9;
    double rate_s = 14.0;             // drive used for the fiber output estimate
    double rate_delta_a_gamma = -1.0; // detuning (units of Gamma) for the fiber output estimate

    bool check_convergence = false;
    bool parallel = false;
    std::string output;

    SystemParams to_system() const;
    detector::DetectorModel detector_model() const;
    analytic::CavityGeometry geometry() const;
    analytic::EfficiencyChain efficiency_chain() const;

    double Gamma() const; // rad/s

    /// Every key with its resolved value, one "key = value" per entry, in schema order.
    std::vector<std::string> resolved() const;
};

/// Parses UTF-8 "key = value" lines; '#' starts a comment. Unknown keys,
/// duplicate keys and malformed values raise ConfigError with the line number.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::string& path);

/// Schema keys in documentation order.
const std::vector<std::string>& config_keys();

} // namespace cqed::scenario
