#include "cqed/scenario/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "cqed/scenario/csv.hpp"
#include "cqed/units.hpp"

namespace cqed::scenario {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end || !std::isfinite(out))
        throw std::invalid_argument("expected a finite number, got '" + std::string(v) + "'");
    return out;
}

int parse_int(std::string_view v) {
    int out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end)
        throw std::invalid_argument("expected an integer, got '" + std::string(v) + "'");
    return out;
}

bool parse_bool(std::string_view v) {
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw std::invalid_argument("expected true/false, got '" + std::string(v) + "'");
}

std::vector<double> parse_list(std::string_view v) {
    std::vector<double> out;
    if (v.empty())
        return out;
    while (!v.empty()) {
        const auto comma = v.find(',');
        out.push_back(parse_double(trim(v.substr(0, comma))));
        if (comma == std::string_view::npos)
            break;
        v.remove_prefix(comma + 1);
    }
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k)
            out += ", ";
        out += format_number(v[k]);
    }
    return out;
}

struct Field {
    std::string key;
    std::function<void(ScenarioConfig&, std::string_view)> set;
    std::function<std::string(const ScenarioConfig&)> get;
    bool may_be_empty = false;
};

Field real(std::string key, double ScenarioConfig::*m) {
    return {std::move(key), [m](ScenarioConfig& c, std::string_view v) { c.*m = parse_double(v); },
            [m](const ScenarioConfig& c) { return format_number(c.*m); }};
}

Field integer(std::string key, int ScenarioConfig::*m) {
    return {std::move(key), [m](ScenarioConfig& c, std::string_view v) { c.*m = parse_int(v); },
            [m](const ScenarioConfig& c) { return std::to_string(c.*m); }};
}

Field flag(std::string key, bool ScenarioConfig::*m) {
    return {std::move(key), [m](ScenarioConfig& c, std::string_view v) { c.*m = parse_bool(v); },
            [m](const ScenarioConfig& c) { return std::string(c.*m ? "true" : "false"); }};
}

Field text(std::string key, std::string ScenarioConfig::*m) {
    return {std::move(key), [m](ScenarioConfig& c, std::string_view v) { c.*m = std::string(v); },
            [m](const ScenarioConfig& c) { return c.*m; }, true};
}

Field sweep_real(std::string key, Sweep ScenarioConfig::*s, double Sweep::*m) {
    return {std::move(key),
            [s, m](ScenarioConfig& c, std::string_view v) { (c.*s).*m = parse_double(v); },
            [s, m](const ScenarioConfig& c) { return format_number((c.*s).*m); }};
}

Field sweep_points(std::string key, Sweep ScenarioConfig::*s) {
    return {std::move(key),
            [s](ScenarioConfig& c, std::string_view v) { (c.*s).points = parse_int(v); },
            [s](const ScenarioConfig& c) { return std::to_string((c.*s).points); }};
}

const std::vector<Field>& schema() {
    using C = ScenarioConfig;
    static const std::vector<Field> fields = {
        real("g_mhz", &C::g_mhz),
        real("kappa_ghz", &C::kappa_ghz),
        real("gamma_mhz", &C::gamma_mhz),
        real("delta_a_mhz", &C::delta_a_mhz),
        real("delta_c_mhz", &C::delta_c_mhz),
        real("s", &C::s),
        integer("fock", &C::fock),
        sweep_real("sweep_start_mhz", &C::sweep, &Sweep::start),
        sweep_real("sweep_stop_mhz", &C::sweep, &Sweep::stop),
        sweep_points("sweep_points", &C::sweep),
        sweep_real("atom_sweep_start_mhz", &C::atom_sweep, &Sweep::start),
        sweep_real("atom_sweep_stop_mhz", &C::atom_sweep, &Sweep::stop),
        sweep_points("atom_sweep_points", &C::atom_sweep),
        sweep_real("map_start_mhz", &C::map, &Sweep::start),
        sweep_real("map_stop_mhz", &C::map, &Sweep::stop),
        sweep_points("map_points", &C::map),
        {"map_delta_a_mhz",
         [](C& c, std::string_view v) { c.map_delta_a_mhz = parse_list(v); },
         [](const C& c) { return join(c.map_delta_a_mhz); },
         true},
        real("map_range_kappa", &C::map_range_kappa),
        integer("poly_degree", &C::poly_degree),
        real("slope_probe_gamma", &C::slope_probe_gamma),
        text("g2_model", &C::g2_model),
        real("g2_decay_mhz", &C::g2_decay_mhz),
        real("tau_max_ns", &C::tau_max_ns),
        integer("tau_points", &C::tau_points),
        real("jitter_fwhm_ns", &C::jitter_fwhm_ns),
        real("dark_rate", &C::dark_rate),
        real("signal_rate", &C::signal_rate),
        real("length_um", &C::length_um),
        real("finesse", &C::finesse),
        real("transmission_ppm", &C::transmission_ppm),
        real("loss_ppm", &C::loss_ppm),
        real("waist_um", &C::waist_um),
        real("g_theory_mhz", &C::g_theory_mhz),
        real("eta_im", &C::eta_im),
        real("eta_mm", &C::eta_mm),
        real("eta_path", &C::eta_path),
        real("eta_pmt", &C::eta_pmt),
        real("eta_fiber", &C::eta_fiber),
        real("rate_s", &C::rate_s),
        real("rate_delta_a_gamma", &C::rate_delta_a_gamma),
        flag("check_convergence", &C::check_convergence),
        flag("parallel", &C::parallel),
        text("output", &C::output),
    };
    return fields;
}

} // namespace

std::vector<double> Sweep::values() const {
    std::vector<double> v(static_cast<std::size_t>(points));
    const double step = (stop - start) / static_cast<double>(points - 1);
    for (int k = 0; k < points; ++k)
        v[static_cast<std::size_t>(k)] = start + step * k;
    v.back() = stop;
    return v;
}

void Sweep::validate(std::string_view what) const {
    if (points < 2)
        throw ConfigError(std::string(what) + ": sweep needs at least 2 points");
    if (!(start < stop))
        throw ConfigError(std::string(what) + ": sweep start must be below stop");
}

SystemParams ScenarioConfig::to_system() const {
    SystemParams p;
    p.g = units::from_mhz(g_mhz);
    p.kappa = units::from_ghz(kappa_ghz);
    p.gamma = units::from_mhz(gamma_mhz);
    p.delta_a = units::from_mhz(delta_a_mhz);
    p.delta_c = units::from_mhz(delta_c_mhz);
    p.s = s;
    p.fock_cutoff = fock;
    try {
        p.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return p;
}

double ScenarioConfig::Gamma() const { return 2.0 * units::from_mhz(gamma_mhz); }

detector::DetectorModel ScenarioConfig::detector_model() const {
    detector::DetectorModel m{.jitter_fwhm = jitter_fwhm_ns * 1e-9,
                              .dark_rate = dark_rate,
                              .signal_rate = signal_rate};
    try {
        m.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return m;
}

analytic::CavityGeometry ScenarioConfig::geometry() const {
    return analytic::CavityGeometry{.length = length_um * 1e-6,
                                    .finesse = finesse,
                                    .transmission_ppm = transmission_ppm,
                                    .loss_ppm = loss_ppm,
                                    .waist = waist_um * 1e-6};
}

analytic::EfficiencyChain ScenarioConfig::efficiency_chain() const {
    return analytic::EfficiencyChain{.impedance_matching = eta_im,
                                     .mode_matching = eta_mm,
                                     .path = eta_path,
                                     .detector = eta_pmt};
}

std::vector<std::string> ScenarioConfig::resolved() const {
    std::vector<std::string> out;
    for (const Field& f : schema())
        out.push_back(f.key + " = " + f.get(*this));
    return out;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const Field& f : schema())
            k.push_back(f.key);
        return k;
    }();
    return keys;
}

ScenarioConfig parse_config(std::string_view text) {
    std::map<std::string, const Field*, std::less<>> index;
    for (const Field& f : schema())
        index.emplace(f.key, &f);

    ScenarioConfig cfg;
    std::set<std::string, std::less<>> seen;
    std::size_t line_no = 0;
    for (std::size_t pos = 0; pos <= text.size();) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;

        const auto eq = line.find('=');
        const std::string where = "config line " + std::to_string(line_no) + ": ";
        if (eq == std::string_view::npos)
            throw ConfigError(where + "expected 'key = value'");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        const auto it = index.find(key);
        if (it == index.end())
            throw ConfigError(where + "unknown key '" + std::string(key) + "'");
        if (!seen.emplace(key).second)
            throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
        if (value.empty() && !it->second->may_be_empty)
            throw ConfigError(where + "missing value for '" + std::string(key) + "'");
        try {
            it->second->set(cfg, value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where + std::string(key) + ": " + e.what());
        }
    }

    if (cfg.fock < 1)
        throw ConfigError("fock must be >= 1");
    if (cfg.g2_model != "two-level" && cfg.g2_model != "cavity")
        throw ConfigError("g2_model must be 'two-level' or 'cavity'");
    if (cfg.poly_degree < 2 || cfg.poly_degree > 6)
        throw ConfigError("poly_degree must lie in [2, 6]");
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace cqed::scenario
