#include "cqed/scenario/commands.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "cqed/analytic.hpp"
#include "cqed/correlation.hpp"
#include "cqed/detector.hpp"
#include "cqed/fitting.hpp"
#include "cqed/units.hpp"

namespace cqed::scenario {

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Runs body(k) for k in [0, n); results must be written to per-index slots.
template <class Body>
void for_each_index(std::size_t n, bool parallel, Body body) {
    const std::size_t workers =
        parallel ? std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency())) : 1;
    if (workers <= 1) {
        for (std::size_t k = 0; k < n; ++k)
            body(k);
        return;
    }
    std::exception_ptr failure;
    std::mutex guard;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t k = w; k < n; k += workers) {
                try {
                    body(k);
                } catch (...) {
                    std::lock_guard lock(guard);
                    if (!failure)
                        failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

struct Point {
    EmissionRates rates;
    HealthTally health;
    double truncation = 0.0;
};

Point solve_point(const SystemParams& p, bool check) {
    Point out;
    const SteadySolution sol = solve_steady(p);
    out.rates = sol.rates;
    out.health.add(sol.rho.health());
    if (check) {
        const TruncationReport rep = check_truncation(p, 2);
        out.truncation = rep.max_relative_change;
        if (!rep.converged())
            throw ConvergenceError("Fock cutoff " + std::to_string(p.fock_cutoff) +
                                   " not converged: relative change " +
                                   format_number(rep.max_relative_change) + " at delta_c/2pi = " +
                                   format_number(units::to_mhz(p.delta_c)) + " MHz");
    }
    return out;
}

double baseline_free_rate(SystemParams p) {
    p.g = 0.0;
    const double p0 = solve_steady(p).rates.p_free;
    if (!(p0 > 0.0))
        throw std::domain_error("baseline free-space rate is zero; the drive must be nonzero");
    return p0;
}

void put_health(CommandOutput& out, const HealthTally& h) {
    out.put("states_checked", static_cast<double>(h.states));
    out.put("max_hermiticity_error", h.hermiticity);
    out.put("max_trace_error", h.trace_error);
    out.put("min_eigenvalue", h.min_eigenvalue);
}

std::vector<double> sweep_values(const Sweep& s, std::string_view what) {
    s.validate(what);
    return s.values();
}

std::size_t argmin(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

std::size_t argmax(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    const auto it = std::lower_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin())
        return ys.front();
    if (it == xs.end())
        return ys.back();
    const auto k = static_cast<std::size_t>(it - xs.begin());
    const double w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    return (1.0 - w) * ys[k - 1] + w * ys[k];
}

} // namespace

void CommandOutput::put(std::string key, double value) {
    table.summary.push_back(key + " = " + format_number(value));
    report.emplace_back(std::move(key), value);
}

void CommandOutput::note(std::string text) { table.summary.push_back(std::move(text)); }

double CommandOutput::value(std::string_view key) const {
    for (const auto& [k, v] : report)
        if (k == key)
            return v;
    throw std::out_of_range("no report entry " + std::string(key));
}

bool CommandOutput::has(std::string_view key) const {
    return std::any_of(report.begin(), report.end(), [&](const auto& e) { return e.first == key; });
}

void HealthTally::add(const StateHealth& h) {
    hermiticity = std::max(hermiticity, h.hermiticity);
    trace_error = std::max(trace_error, h.trace_error);
    min_eigenvalue = states == 0 ? h.min_eigenvalue : std::min(min_eigenvalue, h.min_eigenvalue);
    ++states;
}

void HealthTally::merge(const HealthTally& other) {
    if (other.states == 0)
        return;
    hermiticity = std::max(hermiticity, other.hermiticity);
    trace_error = std::max(trace_error, other.trace_error);
    min_eigenvalue = states == 0 ? other.min_eigenvalue : std::min(min_eigenvalue, other.min_eigenvalue);
    states += other.states;
}

std::vector<std::string> metadata_block(std::string_view command, const ScenarioConfig& cfg) {
    std::vector<std::string> m;
    m.push_back("cqed " + std::string(kVersion));
    m.push_back("command = " + std::string(command));
    m.push_back("units: frequencies are nu = omega/2pi; MHz unless the column says otherwise; "
                "rates normalised to the g = 0 free-space rate P0");
    m.push_back("resolved configuration:");
    for (const auto& line : cfg.resolved())
        m.push_back("  " + line);
    return m;
}

CommandOutput sweep_cavity(const ScenarioConfig& cfg) {
    const SystemParams base = cfg.to_system();
    const auto detunings = sweep_values(cfg.sweep, "sweep");
    const double p0 = baseline_free_rate(base);

    std::vector<Point> points(detunings.size());
    for_each_index(detunings.size(), cfg.parallel, [&](std::size_t k) {
        SystemParams p = base;
        p.delta_c = units::from_mhz(detunings[k]);
        points[k] = solve_point(p, cfg.check_convergence);
    });

    CommandOutput out;
    out.table.metadata = metadata_block("sweep-cavity", cfg);
    out.table.columns = {"delta_a_mhz", "delta_c_mhz", "P_c_norm", "P_free_norm", "P_total_norm", "n_bar"};
    std::vector<double> pc, pf, pt;
    HealthTally health;
    double truncation = 0.0;
    for (std::size_t k = 0; k < detunings.size(); ++k) {
        const EmissionRates& r = points[k].rates;
        pc.push_back(r.p_cavity / p0);
        pf.push_back(r.p_free / p0);
        pt.push_back(r.p_total / p0);
        out.table.add_row({cfg.delta_a_mhz, detunings[k], pc.back(), pf.back(), pt.back(), r.n_bar});
        health.merge(points[k].health);
        truncation = std::max(truncation, points[k].truncation);
    }

    const std::size_t peak = argmax(pc);
    const std::size_t free_min = argmin(pf);
    out.put("P0_per_s", p0);
    out.put("cooperativity", base.cooperativity());
    out.put("peak_P_c_norm", pc[peak]);
    out.put("peak_delta_c_mhz", detunings[peak]);
    out.put("free_min_P_free_norm", pf[free_min]);
    out.put("free_min_delta_c_mhz", detunings[free_min]);
    out.put("total_min", *std::min_element(pt.begin(), pt.end()));
    out.put("total_max", *std::max_element(pt.begin(), pt.end()));
    out.put("peak_formula", analytic::peak_cavity_output(base.cooperativity()));
    out.put("shift_estimate_mhz", base.cooperativity() * units::to_mhz(base.kappa));
    put_health(out, health);
    if (cfg.check_convergence)
        out.put("max_truncation_change", truncation);
    return out;
}

CommandOutput sweep_atom(const ScenarioConfig& cfg) {
    const SystemParams base = cfg.to_system();
    const auto detunings = sweep_values(cfg.atom_sweep, "atom_sweep");
    SystemParams resonant = base;
    resonant.delta_a = 0.0;
    const double p0 = baseline_free_rate(resonant);

    std::vector<Point> points(detunings.size());
    for_each_index(detunings.size(), cfg.parallel, [&](std::size_t k) {
        SystemParams p = base;
        p.delta_a = units::from_mhz(detunings[k]);
        p.delta_c = p.delta_a;
        points[k] = solve_point(p, cfg.check_convergence);
    });

    CommandOutput out;
    out.table.metadata = metadata_block("sweep-atom", cfg);
    out.table.columns = {"delta_a_mhz", "delta_c_mhz", "P_free_norm", "P_c_norm", "P_total_norm", "n_bar"};
    std::vector<double> pf;
    HealthTally health;
    double truncation = 0.0;
    for (std::size_t k = 0; k < detunings.size(); ++k) {
        const EmissionRates& r = points[k].rates;
        pf.push_back(r.p_free / p0);
        out.table.add_row({detunings[k], detunings[k], pf.back(), r.p_cavity / p0, r.p_total / p0, r.n_bar});
        health.merge(points[k].health);
        truncation = std::max(truncation, points[k].truncation);
    }

    const fit::FitResult f = fit::fit_lorentzian(detunings, pf);
    const double Gamma_mhz = units::to_mhz(base.Gamma());
    const double c0 = base.cooperativity();
    const double width = std::abs(f["w"]);
    const double formula = analytic::broadened_width(Gamma_mhz, c0, base.s);
    const double deconvolved_sq = width * width - base.s * Gamma_mhz * Gamma_mhz;

    out.put("P0_per_s", p0);
    out.put("cooperativity", c0);
    out.put("fit_converged", f.converged ? 1.0 : 0.0);
    out.put("fit_amplitude", f["A"]);
    out.put("fit_center_mhz", f["x0"]);
    out.put("fit_offset", f["B"]);
    out.put("fit_width_mhz", width);
    out.put("formula_width_mhz", formula);
    out.put("width_relative_error", std::abs(width - formula) / formula);
    out.put("gamma_prime_mhz", deconvolved_sq > 0.0 ? std::sqrt(deconvolved_sq) : kNaN);
    out.put("gamma_prime_formula_mhz", analytic::purcell_linewidth(Gamma_mhz, c0));
    if (!f.converged)
        out.note("fit diagnostic: " + f.diagnostic);
    put_health(out, health);
    if (cfg.check_convergence)
        out.put("max_truncation_change", truncation);
    return out;
}

double free_space_minimum(SystemParams p, const MinimumSearch& search, HealthTally* health) {
    const double range = search.coarse_range_kappa * p.kappa;
    auto scan = [&](double lo, double hi, int count, std::vector<double>& xs, std::vector<double>& ys) {
        xs = uniform_grid(lo, hi, static_cast<std::size_t>(count));
        ys.resize(xs.size());
        for (std::size_t k = 0; k < xs.size(); ++k) {
            p.delta_c = xs[k];
            const SteadySolution sol = solve_steady(p);
            if (health)
                health->add(sol.rho.health());
            ys[k] = sol.rates.p_free;
        }
    };

    std::vector<double> xs, ys;
    scan(-range, range, search.coarse_points, xs, ys);
    const std::size_t k = argmin(ys);
    if (k == 0 || k + 1 == xs.size())
        throw fit::NoMinimumError("free-space minimum lies on the edge of the search window");
    const double step = xs[1] - xs[0];
    scan(xs[k] - 2.0 * step, xs[k] + 2.0 * step, search.fine_points, xs, ys);

    // work in units of kappa so the polynomial fit is well scaled
    std::vector<double> u(xs.size()), v(ys.size());
    const double y0 = *std::max_element(ys.begin(), ys.end());
    for (std::size_t j = 0; j < xs.size(); ++j) {
        u[j] = xs[j] / p.kappa;
        v[j] = ys[j] / y0;
    }
    return fit::fit_poly_minimum(u, v, search.degree).x_min * p.kappa;
}

CommandOutput minima_map(const ScenarioConfig& cfg) {
    const SystemParams base = cfg.to_system();
    if (base.s > 0.1)
        throw ConfigError("minima-map needs a weak drive: s must be <= 0.1 (got " + format_number(base.s) + ")");
    std::vector<double> grid = cfg.map_delta_a_mhz;
    if (grid.empty())
        grid = sweep_values(cfg.map, "map");
    std::sort(grid.begin(), grid.end());

    const MinimumSearch search{.coarse_range_kappa = cfg.map_range_kappa, .degree = cfg.poly_degree};
    const double Gamma = base.Gamma();
    const double probe = cfg.slope_probe_gamma * Gamma;
    std::vector<double> delta_a(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
        delta_a[k] = units::from_mhz(grid[k]);
    delta_a.push_back(-probe);
    delta_a.push_back(probe);

    std::vector<double> minima(delta_a.size());
    std::vector<HealthTally> health(delta_a.size());
    for_each_index(delta_a.size(), cfg.parallel, [&](std::size_t k) {
        SystemParams p = base;
        p.delta_a = delta_a[k];
        minima[k] = free_space_minimum(p, search, &health[k]);
    });

    double truncation = 0.0;
    if (cfg.check_convergence) {
        std::vector<double> extended(delta_a.size());
        for_each_index(delta_a.size(), cfg.parallel, [&](std::size_t k) {
            SystemParams p = base;
            p.delta_a = delta_a[k];
            p.fock_cutoff += 2;
            extended[k] = free_space_minimum(p, search);
        });
        for (std::size_t k = 0; k < delta_a.size(); ++k)
            truncation = std::max(truncation, relative_change(minima[k], extended[k]));
        if (truncation >= 1e-6)
            throw ConvergenceError("Fock cutoff " + std::to_string(base.fock_cutoff) +
                                   " not converged: free-space minima change by " + format_number(truncation));
    }

    CommandOutput out;
    out.table.metadata = metadata_block("minima-map", cfg);
    out.table.columns = {"delta_a_mhz",       "delta_c_min_numeric_mhz", "delta_c_min_root_mhz",
                         "delta_c_min_linear_mhz", "delta_c_min_expansion_mhz", "relative_error"};
    HealthTally tally;
    double worst = 0.0, worst_product = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        SystemParams p = base;
        p.delta_a = delta_a[k];
        const auto roots = analytic::interference_detunings(p);
        const auto lin = analytic::linearized_minimum(p);
        const double err = roots.minus != 0.0 ? std::abs(minima[k] - roots.minus) / std::abs(roots.minus)
                                              : std::abs(minima[k]) / p.kappa;
        worst = std::max(worst, err);
        if (!roots.plus_unbounded)
            worst_product = std::max(worst_product,
                                     std::abs(roots.plus * roots.minus + p.kappa * p.kappa) / (p.kappa * p.kappa));
        out.table.add_row({grid[k], units::to_mhz(minima[k]), units::to_mhz(roots.minus),
                           units::to_mhz(lin.printed), units::to_mhz(lin.expansion), err});
    }
    for (const auto& h : health)
        tally.merge(h);

    SystemParams probe_params = base;
    probe_params.delta_a = probe;
    const auto lin = analytic::linearized_minimum(probe_params);
    const std::size_t n = minima.size();
    const double slope = (minima[n - 1] - minima[n - 2]) / (2.0 * probe) * (Gamma / base.kappa);
    const double printed = lin.printed_slope * Gamma / base.kappa;
    const double expansion = lin.expansion_slope * Gamma / base.kappa;
    const bool expansion_wins = std::abs(slope - expansion) < std::abs(slope - printed);

    out.put("max_relative_error", worst);
    out.put("root_product_error", worst_product);
    out.put("slope_numeric", slope);
    out.put("slope_one_plus_two_c0", printed);
    out.put("slope_one_plus_c0", expansion);
    out.put("slope_winner_is_one_plus_c0", expansion_wins ? 1.0 : 0.0);
    out.note(std::string("slope winner: ") + (expansion_wins ? "-kappa/[Gamma (1 + C0)]" : "-kappa/[Gamma (1 + 2 C0)]") +
             " (slopes in units of kappa/Gamma)");
    put_health(out, tally);
    if (cfg.check_convergence)
        out.put("max_truncation_change", truncation);
    return out;
}

CommandOutput g2(const ScenarioConfig& cfg) {
    const SystemParams p = cfg.to_system();
    const detector::DetectorModel model = cfg.detector_model();
    if (!(cfg.tau_max_ns > 0.0) || cfg.tau_points < 2)
        throw ConfigError("tau_max_ns must be > 0 and tau_points >= 2");

    const double tau_max = cfg.tau_max_ns * 1e-9;
    std::size_t count = static_cast<std::size_t>(cfg.tau_points);
    if (model.jitter_fwhm > 0.0) {
        const auto needed = static_cast<std::size_t>(std::ceil(tau_max / (model.jitter_fwhm / 8.0))) + 1;
        count = std::max(count, needed);
    }
    const auto grid = uniform_grid(0.0, tau_max, count);

    CorrelationCurve ideal;
    if (cfg.g2_model == "cavity") {
        ideal = g2_cavity(p, grid);
    } else {
        const TwoLevelDrive drive{.rabi = p.rabi(), .detuning = p.delta_a, .decay = units::from_mhz(cfg.g2_decay_mhz)};
        ideal = atom_g2(drive, grid);
    }
    const CorrelationCurve full = detector::mirror_symmetric(ideal);
    const CorrelationCurve convolved = detector::convolve_jitter(full, model);
    const CorrelationCurve measured = detector::apply_dark_counts(convolved, model);

    CommandOutput out;
    out.table.metadata = metadata_block("g2", cfg);
    out.table.columns = {"tau_ns", "g2_ideal", "g2_convolved", "g2_measured"};
    for (std::size_t k = 0; k < convolved.size(); ++k) {
        const double t = convolved.tau[k];
        out.table.add_row({t * 1e9, interpolate(full.tau, full.values, t), convolved.values[k], measured.values[k]});
    }
    out.put("g2_ideal_0", ideal.at_zero());
    out.put("g2_convolved_0", convolved.at_zero());
    out.put("dark_count_floor", detector::dark_count_floor(model));
    out.put("g2_measured_0", measured.at_zero());
    out.put("g2_ideal_tau_max", ideal.values.back());
    out.put("decay_mhz", cfg.g2_model == "cavity" ? kNaN : cfg.g2_decay_mhz);
    out.put("rabi_mhz", units::to_mhz(p.rabi()));
    return out;
}

CommandOutput geometry(const ScenarioConfig& cfg) {
    const SystemParams p = cfg.to_system();
    const analytic::CavityGeometry geom = cfg.geometry();
    const analytic::EfficiencyChain chain = cfg.efficiency_chain();
    geom.validate();
    chain.validate();

    CommandOutput out;
    out.table.metadata = metadata_block("geometry", cfg);
    out.table.label_column = "quantity";
    out.table.columns = {"value", "reference", "low", "high", "pass"};
    int failures = 0;
    auto row = [&](const std::string& name, double value, double ref, double low, double high) {
        const bool ok = std::isnan(ref) || (value >= low && value <= high);
        failures += ok ? 0 : 1;
        out.table.add_row({value, ref, low, high, ok ? 1.0 : 0.0}, name);
    };
    auto rel = [&](const std::string& name, double value, double ref, double tol) {
        row(name, value, ref, ref * (1.0 - tol), ref * (1.0 + tol));
    };
    auto info = [&](const std::string& name, double value) { row(name, value, kNaN, kNaN, kNaN); };

    const double kappa_geom = analytic::kappa_from_geometry(geom);
    const double c0 = p.cooperativity();
    const double c0_theory = analytic::cooperativity(units::from_mhz(cfg.g_theory_mhz), p.kappa, p.gamma);
    const double Gamma = p.Gamma();
    const double eta = analytic::efficiency(chain);
    const double escape = detector::symmetric_escape(geom.transmission_ppm, geom.loss_ppm);

    SystemParams bright = p;
    bright.s = cfg.rate_s;
    bright.delta_a = cfg.rate_delta_a_gamma * Gamma;
    bright.delta_c = bright.delta_a;
    const double p_cavity = solve_steady(bright).rates.p_cavity;
    const double r_out = detector::fiber_output_rate(p_cavity, escape, cfg.eta_mm * cfg.eta_fiber);
    const double r_chain =
        detector::fiber_output_rate(p_cavity, cfg.eta_im, cfg.eta_mm * cfg.eta_fiber);

    rel("kappa_geometry_ghz", units::to_ghz(kappa_geom), 2.4, 0.04);
    row("cooperativity", c0, 0.094, 0.089, 0.099);
    rel("cooperativity_theory_g", c0_theory, 0.2, 0.05);
    rel("gamma_prime_mhz", units::to_mhz(analytic::purcell_linewidth(Gamma, c0)), 23.3, 0.02);
    info("purcell_factor_resonant", analytic::purcell_factor(c0, p.kappa, 0.0));
    info("n_bar_estimate", analytic::mean_photon_estimate(c0, Gamma, p.kappa));
    rel("efficiency", eta, 1.16e-3, 0.01);
    info("escape_probability", escape);
    info("P_c_at_rate_point_per_s", p_cavity);
    row("R_out_symmetric_escape_per_s", r_out, 2.1e5, 2.1e5 / 5.0, 2.1e5 * 5.0);
    info("R_out_impedance_chain_per_s", r_chain);

    out.put("kappa_geometry_ghz", units::to_ghz(kappa_geom));
    out.put("cooperativity", c0);
    out.put("cooperativity_theory_g", c0_theory);
    out.put("efficiency", eta);
    out.put("escape_probability", escape);
    out.put("R_out_per_s", r_out);
    out.put("R_out_impedance_chain_per_s", r_chain);
    out.put("failures", failures);
    return out;
}

CommandOutput fit_data(const ScenarioConfig& cfg, std::string_view csv_text, std::string_view model) {
    const auto [x, y] = read_two_columns(csv_text);

    CommandOutput out;
    out.table.metadata = metadata_block("fit", cfg);
    out.table.metadata.push_back("model = " + std::string(model));
    out.table.label_column = "parameter";
    out.table.columns = {"value", "std_error"};

    fit::FitResult f;
    if (model == "lorentzian") {
        f = fit::fit_lorentzian(x, y);
    } else if (model == "exp-loss") {
        f = fit::fit_exponential_loss(x, y);
    } else if (model == "poly-min") {
        const fit::PolyMinimum m = fit::fit_poly_minimum(x, y, cfg.poly_degree);
        f = m.fit;
        out.table.add_row({m.x_min, kNaN}, "x_min");
        out.table.add_row({m.value, kNaN}, "y_min");
        out.put("x_min", m.x_min);
        out.put("y_min", m.value);
    } else {
        throw std::invalid_argument("unknown fit model '" + std::string(model) +
                                    "' (expected lorentzian, exp-loss or poly-min)");
    }
    for (std::size_t k = 0; k < f.names.size(); ++k) {
        const double err = k < static_cast<std::size_t>(f.std_errors.size())
                               ? f.std_errors[static_cast<Eigen::Index>(k)]
                               : kNaN;
        out.table.add_row({f.params[static_cast<Eigen::Index>(k)], err}, f.names[k]);
        out.put(f.names[k], f.params[static_cast<Eigen::Index>(k)]);
    }
    out.put("samples", static_cast<double>(x.size()));
    out.put("converged", f.converged ? 1.0 : 0.0);
    out.put("iterations", f.iterations);
    out.put("residual_norm", f.residual_norm);
    if (!f.diagnostic.empty())
        out.note("diagnostic: " + f.diagnostic);
    return out;
}

} // namespace cqed::scenario
