#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "cem/analysis.hpp"

namespace {

constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitInfeasible = 3;

struct Options {
    std::string network_path;
    std::string scenario_path;
    std::string out_dir;
    std::string backend = "simplex";
    double eps = 1e-3;
    int max_iters = 25;
    double damping = 1.0;
    int loss_segments = cem::kDefaultLossSegments;
    unsigned seed = 0;  // reserved: every code path is deterministic today
    bool timings = false;
    bool no_sssc = false;
    bool skip_avoided = false;
    std::vector<double> caps_gvar;
};

void add_common(CLI::App* cmd, Options& opt) {
    cmd->add_option("network", opt.network_path, "network description (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("scenario", opt.scenario_path, "scenario description (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opt.out_dir, "directory for CSV/GeoJSON artifacts");
    cmd->add_option("--backend", opt.backend, "LP solver backend")->capture_default_str();
    cmd->add_option("--eps", opt.eps, "convergence tolerance, relative to the initial ratings")
        ->capture_default_str();
    cmd->add_option("--max-iters", opt.max_iters, "iteration budget for the capacity fixed point")
        ->capture_default_str();
    cmd->add_option("--damping", opt.damping, "fraction of each capacity step taken, (0, 1]")
        ->capture_default_str();
    cmd->add_option("--loss-segments", opt.loss_segments, "pieces in the loss envelope")
        ->capture_default_str();
    cmd->add_option("--seed", opt.seed, "random seed (reserved; the planner is deterministic)");
    cmd->add_flag("--timings", opt.timings, "record wall-clock seconds in iteration traces");
}

cem::ConvergenceConfig config_from(const Options& opt) {
    cem::ConvergenceConfig cfg;
    cfg.eps = opt.eps;
    cfg.max_iterations = opt.max_iters;
    cfg.damping = opt.damping;
    cfg.loss_segments = opt.loss_segments;
    cfg.backend = opt.backend;
    cfg.record_timing = opt.timings;
    return cfg;
}

std::string yes_no(bool v) { return v ? "yes" : "no"; }

void print_breakdown(const cem::CostBreakdown& c, const std::string& indent) {
    using cem::format_double;
    auto row = [&](const char* name, double v) {
        std::cout << indent << name << " " << format_double(v) << "\n";
    };
    row("generation fixed     ", c.gen_fix);
    row("generation variable  ", c.gen_var);
    row("ac lines             ", c.ac_lines);
    row("dc links             ", c.dc_links);
    row("storage charge power ", c.storage_char);
    row("storage discharge    ", c.storage_dis);
    row("storage energy       ", c.storage_energy);
    row("series compensation  ", c.sssc);
}

void print_plan(const cem::Network& net, const cem::PlanResult& pr) {
    using cem::format_double;
    std::cout << (pr.converged() ? "converged" : "NOT converged") << " after " << pr.state.n
              << " iteration" << (pr.state.n == 1 ? "" : "s") << "\n";
    std::cout << "objective $" << format_double(pr.solution.objective) << "/yr\n";
    print_breakdown(pr.solution.costs, "  ");
    const auto& cat = pr.lp.cat;
    for (std::size_t l = 0; l < net.ac_lines.size(); ++l) {
        const auto& line = net.ac_lines[l];
        std::cout << "ac line " << line.id << ": " << format_double(line.F0) << " -> "
                  << format_double(pr.solution.value(cat.F_l[l])) << " MW";
        const double q = line.base_mva * pr.solution.value(cat.Q_l[l]);
        if (q > 1e-9) std::cout << ", compensation " << format_double(q) << " MVAr";
        std::cout << "\n";
    }
    for (std::size_t i = 0; i < net.dc_links.size(); ++i) {
        const auto& link = net.dc_links[i];
        std::cout << "dc link " << link.id << ": " << format_double(link.F0) << " -> "
                  << format_double(pr.solution.value(cat.F_i[i])) << " MW\n";
    }
}

int run_plan(const Options& opt) {
    const cem::Network net = cem::load_network(opt.network_path);
    cem::Scenario sc = cem::load_scenario(opt.scenario_path);
    if (opt.no_sssc) sc.sssc = cem::SsscPolicy{};

    const cem::PlanResult pr = cem::plan(net, sc, net.time, config_from(opt));
    std::cout << "scenario " << sc.name << ": ";
    print_plan(net, pr);

    if (!opt.out_dir.empty()) {
        const std::filesystem::path dir(opt.out_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw cem::IoError("cannot create output directory '" + dir.string() + "'");
        cem::write_costs_csv(pr.solution.costs, pr.solution.objective, sc.name,
                             dir / "costs.csv");
        cem::write_lines_csv(net, pr, sc.name, dir / "lines.csv");
        cem::write_trace_csv(pr.state, (dir / "trace.csv").string());
        cem::write_network_geojson(net, &pr, dir / "network.geojson");
        std::cout << "artifacts written to " << dir.string() << "\n";
    }
    return pr.converged() ? 0 : kExitNotConverged;
}

int run_compare(const Options& opt) {
    const cem::Network net = cem::load_network(opt.network_path);
    const cem::Scenario sc = cem::load_scenario(opt.scenario_path);

    const cem::ValueReport rep =
        cem::run_pair(net, sc, net.time, config_from(opt), !opt.skip_avoided);
    using cem::format_double;
    std::cout << "scenario " << rep.scenario << "\n";
    std::cout << "  feasible: without " << yes_no(rep.no_sssc_feasible) << ", with "
              << yes_no(rep.with_sssc_feasible) << "\n";
    if (rep.no_sssc_feasible)
        std::cout << "  cost without compensation $" << format_double(rep.cost_no_sssc)
                  << "/yr\n";
    if (rep.with_sssc_feasible)
        std::cout << "  cost with compensation    $" << format_double(rep.cost_with_sssc)
                  << "/yr\n";
    if (rep.no_sssc_feasible && rep.with_sssc_feasible) {
        std::cout << "  saving $" << format_double(rep.cost_saving) << "/yr\n";
        std::cout << "  devices installed " << format_double(rep.installed_q_gvar)
                  << " GVAr costing $" << format_double(rep.sssc_invest_cost) << "/yr\n";
        if (rep.benefit_cost_ratio)
            std::cout << "  benefit-cost ratio " << format_double(*rep.benefit_cost_ratio)
                      << "\n";
        const auto round4 = [](double v) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.4g", v);
            return std::string(buf);
        };
        std::cout << "  ac fleet capacity factor " << round4(rep.ac_capacity_factor_no)
                  << " -> " << round4(rep.ac_capacity_factor_with) << " ("
                  << round4(rep.ac_capacity_factor_delta_pp) << " pp)\n";
        if (rep.avoided) {
            if (rep.avoided->attainable)
                std::cout << "  avoided transmission " << format_double(rep.avoided->tw_mile)
                          << " TW-mile (wires-only build needs "
                          << format_double(rep.avoided->budget_required_tw_mile)
                          << " TW-mile)\n";
            else
                std::cout << "  avoided transmission: unattainable -- no wires-only build "
                             "reaches the compensated cost\n";
        }
        std::cout << "  cost change by component ($/yr, with minus without):\n";
        print_breakdown(rep.cost_delta(), "    ");
    }

    if (!opt.out_dir.empty()) {
        cem::emit_report(net, {rep}, nullptr, nullptr, opt.out_dir);
        std::cout << "artifacts written to " << opt.out_dir << "\n";
    }
    if (!rep.no_sssc_feasible || !rep.with_sssc_feasible) return kExitInfeasible;
    if (!rep.no_sssc_converged || !rep.with_sssc_converged) return kExitNotConverged;
    return 0;
}

int run_sweep(const Options& opt) {
    const cem::Network net = cem::load_network(opt.network_path);
    const cem::Scenario sc = cem::load_scenario(opt.scenario_path);

    const cem::BcrCurve curve =
        cem::sweep_sssc_caps(net, sc, net.time, opt.caps_gvar, config_from(opt));
    using cem::format_double;
    std::cout << "scenario " << curve.scenario << ": cost without compensation $"
              << format_double(curve.cost_no_sssc) << "/yr\n";
    std::cout << "cap_gvar cost saving installed_gvar interval_bcr\n";
    bool all_converged = true;
    for (const cem::BcrPoint& p : curve.points) {
        std::cout << format_double(p.cap_gvar) << " " << format_double(p.cost) << " "
                  << format_double(p.cumulative_saving) << " "
                  << format_double(p.installed_q_gvar) << " "
                  << (p.interval_bcr ? format_double(*p.interval_bcr) : "-") << "\n";
        all_converged = all_converged && p.converged;
    }

    if (!opt.out_dir.empty()) {
        cem::emit_report(net, {}, &curve, nullptr, opt.out_dir);
        std::cout << "artifacts written to " << opt.out_dir << "\n";
    }
    return all_converged ? 0 : kExitNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"capacity expansion planning for meshed grids with series compensation"};
    app.require_subcommand(1);

    Options opt;
    CLI::App* plan_cmd = app.add_subcommand("plan", "optimize one scenario");
    add_common(plan_cmd, opt);
    plan_cmd->add_flag("--no-sssc", opt.no_sssc, "plan without series compensation");

    CLI::App* compare_cmd =
        app.add_subcommand("compare", "plan with and without compensation, report the value");
    add_common(compare_cmd, opt);
    compare_cmd->add_flag("--skip-avoided", opt.skip_avoided,
                          "skip the avoided-transmission bisection");

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "re-plan under a sequence of fleet compensation caps");
    add_common(sweep_cmd, opt);
    sweep_cmd->add_option("--caps", opt.caps_gvar, "fleet caps in GVAr, e.g. 0,1,10,50")
        ->required()
        ->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (plan_cmd->parsed()) return run_plan(opt);
        if (compare_cmd->parsed()) return run_compare(opt);
        return run_sweep(opt);
    } catch (const cem::InfeasibleScenario& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}
