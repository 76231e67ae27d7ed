// commands.hpp: scenario commands: each composes the library into one table plus a scalar report

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cqed/master_equation.hpp"
#include "cqed/scenario/config.hpp"
#include "cqed/scenario/csv.hpp"

namespace cqed::scenario {

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CommandOutput {
    Table table;
    std::vector<std::pair<std::string, double>> report; // mirrored into table.summary

    void put(std::string key, double value);
    void note(std::string text);
    double value(std::string_view key) const;
    bool has(std::string_view key) const;
};

/// Worst-case state diagnostics over every density matrix a command produced.
struct HealthTally {
    double hermiticity = 0.0;
    double trace_error = 0.0;
    double min_eigenvalue = 0.0;
    std::size_t states = 0;

    void add(const StateHealth& h);
    void merge(const HealthTally& other);
    bool within(double tol) const {
        return hermiticity <= tol && trace_error <= tol && min_eigenvalue >= -tol;
    }
};

/// P_c, P_free, P_total over delta_c, normalised to the g = 0 free-space rate.
CommandOutput sweep_cavity(const ScenarioConfig& cfg);

/// delta_a = delta_c sweep of the free-space rate with a Lorentzian width fit.
CommandOutput sweep_atom(const ScenarioConfig& cfg);

struct MinimumSearch {
    double coarse_range_kappa = 1.5;
    int coarse_points = 121;
    int fine_points = 41;
    int degree = 4;
};

/// Local minimum of the free-space rate over delta_c at fixed parameters (rad/s).
double free_space_minimum(SystemParams p, const MinimumSearch& search, HealthTally* health = nullptr);

/// Free-space minima versus delta_a compared with the closed-form roots and both slopes.
CommandOutput minima_map(const ScenarioConfig& cfg);

/// Ideal, jitter-convolved and dark-count-corrected g2 curves.
CommandOutput g2(const ScenarioConfig& cfg);

/// Derived cavity parameters against reference values.
CommandOutput geometry(const ScenarioConfig& cfg);

/// Fits "lorentzian", "exp-loss" or "poly-min" to two-column CSV text.
CommandOutput fit_data(const ScenarioConfig& cfg, std::string_view csv_text, std::string_view model);

/// Header lines shared by every command: command name, units and the resolved config.
std::vector<std::string> metadata_block(std::string_view command, const ScenarioConfig& cfg);

} // namespace cqed::scenario
