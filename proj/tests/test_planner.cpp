#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cem/planner.hpp"

using namespace cem;

namespace {

Network triangle() { return load_network(TEST_DATA_DIR "/triangle-3bus.json"); }

// one heavily resistive line: its loss floor grows with the fitted range, so
// undamped refits flip between a small and a large rating
Network oscillator() {
    Network net;
    net.buses.push_back({"b1", "main", std::nullopt, ""});
    net.buses.push_back({"b2", "main", std::nullopt, "d2"});
    net.ac_lines.push_back({"Lab", "b1", "b2", 10.0, 100.0, 1e4, 0.8, 1.0, 1.0, false, 100.0});
    net.generators.push_back({"g1", "b1", 0.01, 1.0, 1e6, "", false, false, "gas"});
    net.time.periods.push_back({"p1", {"t1"}, {1.0}});
    net.profiles.series["d2"] = {80.0};
    return net;
}

Network cheap_remote_vs_local(double r0, double c_line) {
    Network net;
    net.buses.push_back({"b1", "main", std::nullopt, ""});
    net.buses.push_back({"b2", "main", std::nullopt, "d2"});
    net.ac_lines.push_back(
        {"Lab", "b1", "b2", 10.0, 100.0, 300.0, r0, 1.0, c_line, false, 100.0});
    net.generators.push_back({"g1", "b1", 1.0, 1.0, 1e6, "", false, false, "hydro"});
    net.generators.push_back({"g2", "b2", 1.0, 50.0, 1e6, "", false, false, "diesel"});
    net.time.periods.push_back({"p1", {"t1"}, {10.0}});
    net.profiles.series["d2"] = {250.0};
    return net;
}

}  // namespace

TEST_CASE("impedance rescaling is inverse in the new rating") {
    AcLine line;
    line.id = "L";
    line.F0 = 100.0;
    line.r0_pu = 0.02;
    line.x0_pu = 0.1;

    SUBCASE("unchanged at the existing rating") {
        const auto [r, x] = update_impedance(line, 100.0);
        CHECK(r == 0.02);
        CHECK(x == 0.1);
    }
    SUBCASE("doubling the rating halves the reactance") {
        const auto [r, x] = update_impedance(line, 200.0);
        CHECK(x == doctest::Approx(0.05).epsilon(1e-12));
    }
    SUBCASE("quadrupling the rating quarters the resistance") {
        const auto [r, x] = update_impedance(line, 400.0);
        CHECK(r == doctest::Approx(0.005).epsilon(1e-12));
    }
    SUBCASE("non-positive rating is rejected") {
        CHECK_THROWS_AS(update_impedance(line, 0.0), DomainError);
        CHECK_THROWS_AS(update_impedance(line, -5.0), DomainError);
    }
}

TEST_CASE("configuration bounds are enforced") {
    const Network net = triangle();
    ConvergenceConfig cfg;
    cfg.eps = 0.0;
    CHECK_THROWS_AS(plan(net, Scenario{}, net.time, cfg, SsscSpec::off()), DomainError);
    cfg = {};
    cfg.damping = 0.0;
    CHECK_THROWS_AS(plan(net, Scenario{}, net.time, cfg, SsscSpec::off()), DomainError);
    cfg = {};
    cfg.damping = 1.2;
    CHECK_THROWS_AS(plan(net, Scenario{}, net.time, cfg, SsscSpec::off()), DomainError);
    cfg = {};
    cfg.max_iterations = 0;
    CHECK_THROWS_AS(plan(net, Scenario{}, net.time, cfg, SsscSpec::off()), DomainError);
}

TEST_CASE("a zero expansion budget converges in one iteration") {
    const Network net = triangle();
    Scenario sc;
    sc.budget_tw_mile = 0.0;
    const auto res = plan(net, sc, net.time, ConvergenceConfig{}, SsscSpec::off());
    CHECK(res.converged());
    CHECK(res.state.n == 1);
    for (std::size_t l = 0; l < net.ac_lines.size(); ++l)
        CHECK(res.capacities_mw()[l] == doctest::Approx(net.ac_lines[l].F0).epsilon(1e-9));

    // a second pass from the same point reproduces the plan exactly
    const auto again = plan(net, sc, net.time, ConvergenceConfig{}, SsscSpec::off());
    CHECK(again.solution.objective == res.solution.objective);
    CHECK((again.solution.x - res.solution.x).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("non-expandable lines reduce to a single direct solve") {
    Network net = triangle();
    for (auto& l : net.ac_lines) l.F_max = l.F0;
    const auto res = plan(net, Scenario{}, net.time, ConvergenceConfig{}, SsscSpec::off());
    CHECK(res.converged());
    CHECK(res.state.n == 1);

    const auto fp = initial_fixed_params(net);
    const auto plp = build_lp(net, Scenario{}, net.time, fp, SsscSpec::off());
    const auto backend = make_backend("simplex");
    const auto direct = solve(plp, *backend);
    CHECK(res.solution.objective == direct.objective);
    CHECK((res.solution.x - direct.x).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("converged plans match a brute-force capacity grid with consistent impedance") {
    const Network net = cheap_remote_vs_local(0.1, 350.0);
    const auto backend = make_backend("simplex");

    auto forced_cost = [&](double F) {
        const auto fp = linearize(net, {F}, kDefaultLossSegments);
        auto plp = build_lp(net, Scenario{}, net.time, fp, SsscSpec::off());
        plp.lp.set_col_bounds(plp.cat.F_l[0], F, F);
        const auto sol = solve(plp, *backend);
        REQUIRE(sol.status == SolveStatus::Optimal);
        return sol.objective;
    };

    double best_F = -1.0, best_cost = 1e300;
    for (int F = 100; F <= 300; ++F) {
        const double c = forced_cost(F);
        if (c < best_cost) {
            best_cost = c;
            best_F = F;
        }
    }

    const auto res = plan(net, Scenario{}, net.time, ConvergenceConfig{}, SsscSpec::off());
    REQUIRE(res.converged());
    CHECK(std::abs(res.capacities_mw()[0] - best_F) <= 1.0);
    CHECK(res.solution.objective <= best_cost + 1e-6 * best_cost);

    SUBCASE("expensive wire: no expansion, single iteration") {
        const Network flat = cheap_remote_vs_local(0.1, 450.0);
        const auto direct = plan(flat, Scenario{}, flat.time, ConvergenceConfig{},
                                 SsscSpec::off());
        CHECK(direct.converged());
        CHECK(direct.state.n == 1);
        CHECK(direct.capacities_mw()[0] == doctest::Approx(100.0).epsilon(1e-9));
    }
}

TEST_CASE("damping settles a refit cycle that the undamped iteration cannot") {
    const Network net = oscillator();

    ConvergenceConfig undamped;
    const auto spin = plan(net, Scenario{}, net.time, undamped, SsscSpec::off());
    CHECK_FALSE(spin.converged());
    CHECK(spin.state.n == 25);
    // the iterate trace shows a persistent two-cycle, not a shrinking residual
    const auto& nd = spin.state.norm_delta;
    CHECK(nd.back() > 100.0);
    CHECK(nd[nd.size() - 2] == doctest::Approx(nd.back()).epsilon(1e-6));

    ConvergenceConfig damped;
    damped.damping = 0.5;
    const auto settled = plan(net, Scenario{}, net.time, damped, SsscSpec::off());
    CHECK(settled.converged());
    CHECK(settled.state.n < 25);
    CHECK(settled.capacities_mw()[0] == doctest::Approx(173.02).epsilon(1e-3));

    // converged answer is stable under one more refit; the spinning one is not
    const double ok_gap = self_consistency_gap(net, Scenario{}, net.time, damped,
                                               SsscSpec::off(), settled.capacities_mw());
    CHECK(ok_gap <= damped.eps * capacity_norm({100.0}, damped.norm) * 1.5 + 1e-9);
    const double bad_gap = self_consistency_gap(net, Scenario{}, net.time, undamped,
                                                SsscSpec::off(), spin.capacities_mw());
    CHECK(bad_gap > 100.0);
}

TEST_CASE("iterate histories stay consistent and above existing capacity") {
    const Network net = cheap_remote_vs_local(0.1, 350.0);
    const auto res = plan(net, Scenario{}, net.time, ConvergenceConfig{}, SsscSpec::off());
    const auto& st = res.state;
    REQUIRE(st.n == static_cast<int>(st.F_star.size()));
    CHECK(st.objective.size() == st.F_star.size());
    CHECK(st.norm_delta.size() == st.F_star.size());
    CHECK(st.wall_seconds.size() == st.F_star.size());
    for (const auto& Fs : st.F_star)
        for (std::size_t l = 0; l < Fs.size(); ++l) CHECK(Fs[l] >= net.ac_lines[l].F0 - 1e-9);
    for (double w : st.wall_seconds) CHECK(w == 0.0);  // timing off by default
    for (double f : st.F_fix) CHECK(f >= 100.0 - 1e-9);
}

TEST_CASE("unserveable demand raises the scenario error") {
    Network net;
    net.buses.push_back({"b1", "main", std::nullopt, "d1"});
    net.generators.push_back({"g1", "b1", 10.0, 0.0, 50.0, "", false, false, "gas"});
    net.time.periods.push_back({"p1", {"t1"}, {1.0}});
    net.profiles.series["d1"] = {100.0};
    CHECK_THROWS_AS(plan(net, Scenario{}, net.time, ConvergenceConfig{}, SsscSpec::off()),
                    InfeasibleScenario);
}

TEST_CASE("the scenario policy drives the compensation mode") {
    Network net = triangle();
    Scenario sc;
    sc.demand_scale = 4.0 / 3.0;  // 100 MW: needs compensation on the short line

    SUBCASE("forbidden: infeasible") {
        CHECK_THROWS_AS(plan(net, sc, net.time, ConvergenceConfig{}), InfeasibleScenario);
    }
    SUBCASE("allowed: builds the required rating") {
        sc.sssc.allowed = true;
        sc.sssc.cost_per_kvar_yr = 0.001;
        const auto res = plan(net, sc, net.time, ConvergenceConfig{});
        REQUIRE(res.converged());
        const int l13 = net.ac_line_index("L13");
        CHECK(res.solution.value(res.lp.cat.Q_l[l13]) == doctest::Approx(0.25).epsilon(1e-6));
    }
}

TEST_CASE("trace files carry one row per iteration") {
    const Network net = oscillator();
    ConvergenceConfig damped;
    damped.damping = 0.5;
    const auto res = plan(net, Scenario{}, net.time, damped, SsscSpec::off());

    const std::string path = "trace_test.csv";
    write_trace_csv(res.state, path);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    CHECK(line == "n,norm_delta,objective,wall_seconds");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == res.state.n);
    in.close();
    std::remove(path.c_str());
}
