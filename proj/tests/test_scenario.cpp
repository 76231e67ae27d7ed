#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cqed/analytic.hpp"
#include "cqed/fitting.hpp"
#include "cqed/scenario/commands.hpp"
#include "cqed/units.hpp"

using namespace cqed;
using namespace cqed::scenario;

namespace {

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

bool contains(const std::string& s, std::string_view part) { return s.find(part) != std::string::npos; }

ScenarioConfig small_sweep() {
    ScenarioConfig c;
    c.fock = 2;
    c.sweep = {-3000.0, 3000.0, 7};
    return c;
}

} // namespace

TEST_CASE("empty config yields the documented defaults") {
    const ScenarioConfig c = parse_config("");
    CHECK(c.g_mhz == 67.0);
    CHECK(c.kappa_ghz == 2.4);
    CHECK(c.delta_a_mhz == -9.8);
    CHECK(c.fock == 9);
    CHECK(c.resolved().size() == config_keys().size());
}

TEST_CASE("config parsing") {
    const ScenarioConfig c = parse_config(
        "# comment line\n"
        "  g_mhz = 96   # inline comment\n"
        "\n"
        "s=0.05\r\n"
        "fock = 4\n"
        "map_delta_a_mhz = -1, 2.5 ,3e1\n"
        "g2_model = cavity\n"
        "check_convergence = true\n");
    CHECK(c.g_mhz == 96.0);
    CHECK(c.s == 0.05);
    CHECK(c.fock == 4);
    CHECK(c.map_delta_a_mhz == std::vector<double>{-1.0, 2.5, 30.0});
    CHECK(c.g2_model == "cavity");
    CHECK(c.check_convergence);

    const SystemParams p = c.to_system();
    CHECK(p.g == doctest::Approx(units::two_pi * 96e6));
    CHECK(p.kappa == doctest::Approx(units::two_pi * 2.4e9));
    CHECK(p.gamma == doctest::Approx(units::two_pi * 9.8e6));
    CHECK(p.fock_cutoff == 4);
}

TEST_CASE("config strictness") {
    CHECK(contains(message_of([] { parse_config("g_mhz = 1\n\nkapa_ghz = 2\n"); }), "config line 3: unknown key 'kapa_ghz'"));
    CHECK(contains(message_of([] { parse_config("s = 1\ns = 2\n"); }), "duplicate key"));
    CHECK(contains(message_of([] { parse_config("s 1\n"); }), "config line 1"));
    CHECK(contains(message_of([] { parse_config("s =\n"); }), "missing value"));
    CHECK_THROWS_AS(parse_config("s = 1.2.3"), ConfigError);
    CHECK_THROWS_AS(parse_config("s = nan"), ConfigError);
    CHECK_THROWS_AS(parse_config("s = inf"), ConfigError);
    CHECK_THROWS_AS(parse_config("fock = 3.5"), ConfigError);
    CHECK_THROWS_AS(parse_config("fock = 0"), ConfigError);
    CHECK_THROWS_AS(parse_config("parallel = maybe"), ConfigError);
    CHECK_THROWS_AS(parse_config("g2_model = three-level"), ConfigError);
    CHECK_THROWS_AS(parse_config("poly_degree = 7"), ConfigError);
    CHECK_THROWS_AS(parse_config("map_delta_a_mhz = 1,,2"), ConfigError);
    CHECK_THROWS_AS(parse_config("g_mhz = -1").to_system(), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/cqed.cfg"), ConfigError);
}

TEST_CASE("resolved configuration parses back to itself") {
    ScenarioConfig c;
    c.g_mhz = 96.0;
    c.map_delta_a_mhz = {-1.5, 2.0};
    c.output = "out.csv";
    for (const ScenarioConfig& cfg : {ScenarioConfig{}, c}) {
        std::string text;
        for (const auto& line : cfg.resolved())
            text += line + "\n";
        CHECK(parse_config(text).resolved() == cfg.resolved());
    }
}

TEST_CASE("sweeps need two ordered points") {
    ScenarioConfig c = small_sweep();
    c.sweep.points = 1;
    CHECK_THROWS_AS(sweep_cavity(c), ConfigError);
    c.sweep = {5.0, 5.0, 3};
    CHECK_THROWS_AS(sweep_cavity(c), ConfigError);
    CHECK(Sweep{0.0, 1.0, 3}.values() == std::vector<double>{0.0, 0.5, 1.0});
}

TEST_CASE("number formatting uses 12 significant digits") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(1e-20) == "1e-20");
    CHECK(format_number(123456789012345.0) == "1.23456789012e+14");
    CHECK(format_number(-2.5) == "-2.5");
}

TEST_CASE("CSV layout") {
    Table t;
    t.metadata = {"a = 1"};
    t.columns = {"x", "y"};
    t.add_row({1.0, 0.5});
    t.add_row({2.0, 1.0 / 3.0});
    t.summary = {"done"};
    CHECK(to_csv(t) == "# a = 1\nx,y\n1,0.5\n2,0.333333333333\n# done\n");
    CHECK_THROWS_AS(t.add_row({1.0}), std::invalid_argument);
    CHECK(t.column_values("y")[0] == 0.5);
    CHECK_THROWS_AS(t.column("z"), std::out_of_range);

    Table l;
    l.label_column = "name";
    l.columns = {"v"};
    l.add_row({3.0}, "kappa");
    CHECK(to_csv(l) == "name,v\nkappa,3\n");

    const std::string svg = svg_line_chart(t, "x", {"y"});
    CHECK(contains(svg, "<svg"));
    CHECK(contains(svg, "<polyline"));
}

TEST_CASE("two-column CSV input") {
    const auto [x, y] = read_two_columns("# note\nx,y\n1,2\n\n3 , 4.5\n");
    CHECK(x == std::vector<double>{1.0, 3.0});
    CHECK(y == std::vector<double>{2.0, 4.5});

    auto where = [](std::string_view text) {
        try {
            read_two_columns(text);
        } catch (const CsvError& e) {
            return std::make_pair(e.line(), e.column());
        }
        return std::make_pair(std::size_t{0}, std::size_t{0});
    };
    CHECK(where("1,2\n3,abc\n") == std::make_pair(std::size_t{2}, std::size_t{2}));
    CHECK(where("x,y\n1,2\nfoo,3\n") == std::make_pair(std::size_t{3}, std::size_t{1}));
    CHECK(where("1,2\n3,4,5\n") == std::make_pair(std::size_t{2}, std::size_t{3}));
    CHECK(where("1,2\n3\n").first == 2);
    CHECK_THROWS_AS(read_two_columns(""), CsvError);
    CHECK(contains(message_of([] { read_two_columns("# only a comment\n"); }), "no data rows"));
}

TEST_CASE("uncoupled cavity reproduces the baseline") {
    ScenarioConfig c = small_sweep();
    c.g_mhz = 0.0;
    const CommandOutput out = sweep_cavity(c);
    for (double v : out.table.column_values("P_c_norm"))
        CHECK(v == 0.0);
    for (double v : out.table.column_values("P_free_norm"))
        CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("far-detuned cavity matches the g = 0 normalisation") {
    ScenarioConfig c = small_sweep();
    const double far = 100.0 * c.kappa_ghz * 1e3;
    c.sweep = {far, far + 1.0, 2};
    const CommandOutput out = sweep_cavity(c);
    CHECK(out.table.column_values("P_free_norm")[0] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("sweep output is deterministic and independent of parallelism") {
    ScenarioConfig c = small_sweep();
    const std::string first = to_csv(sweep_cavity(c).table);
    CHECK(first == to_csv(sweep_cavity(c).table));
    c.parallel = true;
    std::string parallel = to_csv(sweep_cavity(c).table);
    // the resolved config records the flag itself; everything else must match
    const auto strip = [](std::string s) {
        const auto k = s.find("parallel = ");
        return s.erase(k, s.find('\n', k) - k);
    };
    CHECK(strip(first) == strip(parallel));
}

TEST_CASE("every CSV embeds the resolved configuration") {
    const CommandOutput out = sweep_cavity(small_sweep());
    const std::string csv = to_csv(out.table);
    for (const auto& key : config_keys())
        CHECK(contains(csv, "#   " + key + " = "));
    CHECK(csv.rfind("# cqed", 0) == 0);
}

TEST_CASE("convergence check flags a too-small cutoff") {
    ScenarioConfig c = small_sweep();
    c.fock = 1;
    c.s = 14.0;
    c.g_mhz = 300.0;
    c.check_convergence = true;
    CHECK_THROWS_AS(sweep_cavity(c), ConvergenceError);
    c.fock = 5;
    c.s = 2.8;
    c.g_mhz = 67.0;
    CHECK(sweep_cavity(c).value("max_truncation_change") < 1e-6);
}

TEST_CASE("atom sweep without cavity gives the saturation-broadened width") {
    ScenarioConfig c;
    c.g_mhz = 0.0;
    c.s = 2.0;
    c.fock = 1;
    c.atom_sweep = {-100.0, 100.0, 81};
    const CommandOutput out = sweep_atom(c);
    const double Gamma_mhz = 2.0 * c.gamma_mhz;
    CHECK(out.value("fit_width_mhz") == doctest::Approx(Gamma_mhz * std::sqrt(3.0)).epsilon(1e-6));
    CHECK(out.value("gamma_prime_mhz") == doctest::Approx(Gamma_mhz).epsilon(1e-5));
}

TEST_CASE("minima map") {
    ScenarioConfig c;
    c.fock = 2;
    c.s = 0.05;
    c.map_delta_a_mhz = {-0.5, 0.5};
    const CommandOutput out = minima_map(c);
    const auto m = out.table.column_values("delta_c_min_numeric_mhz");
    CHECK(m[0] > 0.0);
    CHECK(m[1] < 0.0);
    CHECK(m[0] == doctest::Approx(-m[1]).epsilon(1e-6));
    CHECK(out.value("max_relative_error") < 0.05);
    c.s = 0.2;
    CHECK_THROWS_AS(minima_map(c), ConfigError);
}

TEST_CASE("g2 command") {
    ScenarioConfig c;
    c.s = 14.0;
    c.jitter_fwhm_ns = 0.0;
    c.tau_points = 201;
    CommandOutput out = g2(c);
    CHECK(out.value("g2_convolved_0") <= 1e-6);
    CHECK(out.value("dark_count_floor") == 0.0);
    const auto tau = out.table.column_values("tau_ns");
    CHECK(tau.front() == doctest::Approx(-c.tau_max_ns));
    CHECK(tau.back() == doctest::Approx(c.tau_max_ns));

    c.signal_rate = 1e5;
    c.dark_rate = (1.0 / std::sqrt(0.98) - 1.0) * 1e5;
    out = g2(c);
    CHECK(out.value("dark_count_floor") == doctest::Approx(0.02).epsilon(1e-9));
    CHECK(out.value("g2_measured_0") == doctest::Approx(0.02).epsilon(1e-4));

    c.jitter_fwhm_ns = 3.2;
    c.tau_points = 11;
    out = g2(c);
    const auto fine = out.table.column_values("tau_ns");
    CHECK(fine[1] - fine[0] <= 3.2 / 8.0 + 1e-12);
}

TEST_CASE("geometry report") {
    ScenarioConfig c;
    CommandOutput out = geometry(c);
    CHECK(out.value("kappa_geometry_ghz") == doctest::Approx(2.39).epsilon(1e-3));
    CHECK(out.value("efficiency") == doctest::Approx(1.155e-3));
    c.finesse = 2000.0;
    CHECK(geometry(c).value("kappa_geometry_ghz") == doctest::Approx(0.25).epsilon(0.01));
    c.eta_im = c.eta_mm = c.eta_path = c.eta_pmt = 1.0;
    CHECK(geometry(c).value("efficiency") == 1.0);
    c.length_um = 0.0;
    CHECK_THROWS(geometry(c));
}

TEST_CASE("fit command") {
    const ScenarioConfig c;
    std::string lor = "x,y\n";
    for (int k = -20; k <= 20; ++k) {
        const double x = 2.0 * k;
        lor += std::to_string(x) + "," + format_number(fit::lorentzian(x, 3.0, 1.0, 10.0, 0.5)) + "\n";
    }
    const CommandOutput l = fit_data(c, lor, "lorentzian");
    CHECK(l.value("w") == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(l.value("converged") == 1.0);

    std::string loss;
    for (int k = 0; k < 10; ++k)
        loss += std::to_string(10 * k) + "," + format_number(analytic::coating_loss_model(10 * k, 1750, 23600, 123)) + "\n";
    CHECK(fit_data(c, loss, "exp-loss").value("tau") == doctest::Approx(123.0).epsilon(0.01));

    std::string par;
    for (int k = 0; k <= 20; ++k)
        par += std::to_string(0.5 * k) + "," + format_number((0.5 * k - 4.0) * (0.5 * k - 4.0)) + "\n";
    CHECK(fit_data(c, par, "poly-min").value("x_min") == doctest::Approx(4.0).epsilon(1e-9));

    CHECK_THROWS_AS(fit_data(c, "", "lorentzian"), CsvError);
    CHECK_THROWS_AS(fit_data(c, lor, "spline"), std::invalid_argument);
}
