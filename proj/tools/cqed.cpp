// cqed: command-line front end for the scenario commands

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cqed/scenario/commands.hpp"

namespace sc = cqed::scenario;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const sc::CommandOutput& out, const std::string& path, const std::string& plot,
          const std::string& x, const std::vector<std::string>& ys) {
    if (path.empty() || path == "-") {
        sc::write_csv(std::cout, out.table);
    } else {
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot write '" + path + "'");
        sc::write_csv(f, out.table);
        for (const auto& line : out.table.summary)
            std::cerr << line << '\n';
    }
    if (!plot.empty()) {
        std::ofstream f(plot, std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot write '" + plot + "'");
        f << sc::svg_line_chart(out.table, x, ys);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Driven emitter-cavity simulations: emission sweeps, g2, geometry and fits"};
    app.require_subcommand(1);

    std::string config_path, out_path, plot_path;
    int fock = -1;
    bool check = false, parallel = false;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--out", out_path, "CSV output path (stdout when omitted)");
    app.add_option("--fock", fock, "Fock cutoff N (overrides the config)")->check(CLI::PositiveNumber);
    app.add_flag("--check-convergence", check, "verify every point against cutoff N + 2");
    app.add_flag("--parallel", parallel, "evaluate sweep points on all cores");
    app.add_option("--plot", plot_path, "also write an SVG line chart");

    auto* cavity = app.add_subcommand("sweep-cavity", "emission rates versus cavity detuning");
    auto* atom = app.add_subcommand("sweep-atom", "free-space rate versus atom detuning, cavity on resonance");
    auto* minima = app.add_subcommand("minima-map", "free-space minima versus atom detuning (s <= 0.1)");
    auto* corr = app.add_subcommand("g2", "intensity correlation with detector jitter and dark counts");
    auto* geom = app.add_subcommand("geometry", "cavity parameter chain and efficiency budget");
    auto* fitc = app.add_subcommand("fit", "fit a model to a two-column CSV file");
    std::string fit_file, fit_model = "lorentzian";
    fitc->add_option("file", fit_file, "two-column CSV (x,y)")->required();
    fitc->add_option("--model", fit_model, "lorentzian | exp-loss | poly-min")
        ->check(CLI::IsMember({"lorentzian", "exp-loss", "poly-min"}));

    for (auto* sub : {cavity, atom, minima, corr, geom, fitc})
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        sc::ScenarioConfig cfg = config_path.empty() ? sc::ScenarioConfig{} : sc::load_config(config_path);
        if (fock > 0)
            cfg.fock = fock;
        cfg.check_convergence = cfg.check_convergence || check;
        cfg.parallel = cfg.parallel || parallel;
        if (out_path.empty())
            out_path = cfg.output;
        if (!out_path.empty())
            cfg.output = out_path;

        if (cavity->parsed())
            emit(sc::sweep_cavity(cfg), out_path, plot_path, "delta_c_mhz",
                 {"P_c_norm", "P_free_norm", "P_total_norm"});
        else if (atom->parsed())
            emit(sc::sweep_atom(cfg), out_path, plot_path, "delta_a_mhz", {"P_free_norm"});
        else if (minima->parsed())
            emit(sc::minima_map(cfg), out_path, plot_path, "delta_a_mhz",
                 {"delta_c_min_numeric_mhz", "delta_c_min_root_mhz"});
        else if (corr->parsed())
            emit(sc::g2(cfg), out_path, plot_path, "tau_ns", {"g2_ideal", "g2_convolved"});
        else if (geom->parsed())
            emit(sc::geometry(cfg), out_path, "", "", {});
        else if (fitc->parsed())
            emit(sc::fit_data(cfg, read_file(fit_file), fit_model), out_path, "", "", {});
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
