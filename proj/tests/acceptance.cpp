// End-to-end acceptance checks. Each criterion prints exactly one PASS/FAIL
// line with its measured figure and pinned tolerance; the exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cem/analysis.hpp"

using namespace cem;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::vector<PlanResult> g_audit_pool;  // every reported optimum, audited by criterion 10

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s  criterion %2d  %s  [%s]\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

template <typename Fn>
void guarded(int id, const std::string& name, Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        report(id, name, false, std::string("exception: ") + e.what());
    }
}

std::string fmt(double v) { return format_double(v); }

double rnd(std::mt19937& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// ---------------------------------------------------------------- criterion 1

void criterion_cycles() {
    std::mt19937 rng(101u);
    const auto t0 = std::chrono::steady_clock::now();
    int graphs = 0;
    std::string mismatch;

    for (int trial = 0; trial < 100; ++trial) {
        Network net;
        net.time.periods.push_back({"p1", {"t1"}, {1.0}});
        const int components = 1 + static_cast<int>(rng() % 3);
        int edges = 0, vertices = 0, edge_id = 0, built = 0;
        for (int c = 0; c < components && vertices < 50; ++c, ++built) {
            const int budget = 50 - vertices;
            const int B = std::min(budget, 2 + static_cast<int>(rng() % 20));
            const int base = vertices;
            for (int b = 0; b < B; ++b)
                net.buses.push_back({"b" + std::to_string(base + b), "main", std::nullopt, ""});
            for (int b = 1; b < B; ++b) {
                const int u = base + static_cast<int>(rng() % b);
                net.ac_lines.push_back({"e" + std::to_string(edge_id++), net.buses[u].id,
                                        net.buses[base + b].id, 1.0, 100.0, 100.0, 0.0, 1.0,
                                        1.0, false, 100.0});
                ++edges;
            }
            const int extra = static_cast<int>(rng() % (B + 1));
            for (int e = 0; e < extra; ++e) {
                const int u = base + static_cast<int>(rng() % B);
                const int v = base + static_cast<int>(rng() % B);
                if (u == v) continue;
                net.ac_lines.push_back({"e" + std::to_string(edge_id++), net.buses[u].id,
                                        net.buses[v].id, 1.0, 100.0, 100.0, 0.0, 1.0, 1.0,
                                        false, 100.0});
                ++edges;
            }
            vertices += B;
        }
        const int expected = edges - vertices + built;
        const int got = static_cast<int>(build_cycle_basis(net).cycles.size());
        ++graphs;
        if (got != expected && mismatch.empty())
            mismatch = "trial " + std::to_string(trial) + ": got " + std::to_string(got) +
                       ", expected " + std::to_string(expected);
    }

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = mismatch.empty() && secs < 5.0;
    report(1, "cycle count equals |E|-|V|+components on random graphs", pass,
           mismatch.empty()
               ? std::to_string(graphs) + " graphs exact, " + fmt(secs) + " s (< 5 s)"
               : mismatch);
}

// ---------------------------------------------------------------- criterion 2

Network random_flow_net(std::mt19937& rng, bool mark_sssc) {
    const int B = 4 + static_cast<int>(rng() % 17);
    Network net;
    net.time.periods.push_back({"p1", {"t1"}, {1.0}});
    for (int b = 0; b < B; ++b) {
        const std::string id = "b" + std::to_string(100 + b);
        std::string ref;
        if (b > 0 && rng() % 2 == 0) {
            ref = "d" + id;
            net.profiles.series[ref] = {rnd(rng, 5.0, 50.0)};
        }
        net.buses.push_back({id, "main", std::nullopt, ref});
    }
    int edge_id = 0;
    auto add_line = [&](int u, int v) {
        net.ac_lines.push_back({"E" + std::to_string(100 + edge_id), net.buses[u].id,
                                net.buses[v].id, 10.0, 1e4, 1e4, 0.0, rnd(rng, 0.5, 2.0), 1.0,
                                mark_sssc && edge_id % 2 == 0, 100.0});
        ++edge_id;
    };
    for (int b = 1; b < B; ++b) add_line(static_cast<int>(rng() % b), b);
    const int extra = static_cast<int>(rng() % (B / 2 + 1));
    for (int e = 0; e < extra; ++e) {
        const int u = static_cast<int>(rng() % B), v = static_cast<int>(rng() % B);
        if (u != v) add_line(u, v);
    }
    net.generators.push_back({"g1", net.buses[0].id, 1.0, 1.0, 1e6, "", false, false, "gas"});
    net.generators.push_back(
        {"g2", net.buses[B / 2].id, 1.0, 1.5, 1e6, "", false, false, "gas"});
    return net;
}

void criterion_btheta() {
    std::mt19937 rng(202u);
    const auto backend = make_backend("simplex");
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Network net = random_flow_net(rng, false);
        const int B = static_cast<int>(net.buses.size());
        const auto fp = initial_fixed_params(net);
        const auto plp = build_lp(net, Scenario{}, net.time, fp, SsscSpec::off());
        const auto sol = solve(plp, *backend);
        if (sol.status != SolveStatus::Optimal)
            throw BackendError("random lossless network did not solve to optimality");

        Eigen::MatrixXd inj = Eigen::MatrixXd::Zero(B, 1);
        for (std::size_t g = 0; g < net.generators.size(); ++g)
            inj(net.bus_index(net.generators[g].bus), 0) +=
                sol.value(plp.cat.pg(static_cast<int>(g), 0));
        for (int b = 0; b < B; ++b) inj(b, 0) -= net.demand(b, 0);
        inj /= 100.0;

        const Eigen::MatrixXd ref = solve_btheta_flows(net, inj, fp.x_pu);
        for (std::size_t l = 0; l < net.ac_lines.size(); ++l) {
            const double lp_pu = sol.value(plp.cat.f(static_cast<int>(l), 0)) / 100.0;
            worst = std::max(worst, std::abs(lp_pu - ref(static_cast<Eigen::Index>(l), 0)));
        }
    }
    report(2, "voltage-law LP flows match the angle formulation on 50 networks",
           worst <= 1e-6, "max |df| = " + fmt(worst) + " pu (tol 1e-06)");
}

// ---------------------------------------------------------------- criterion 3

void criterion_loss_fit() {
    std::mt19937 rng(303u);
    double worst = 0.0;
    int segments_checked = 0;
    while (segments_checked < 1000) {
        const double r = rnd(rng, 1e-3, 0.5);
        const double F = rnd(rng, 0.1, 5.0);
        const int m = 1 + static_cast<int>(rng() % 5);
        const LossEnvelope env = fit_segments(r, F, m);
        for (const LossSegment& s : env.segments) {
            const double a = s.lo, b = s.hi;
            const double alpha_ref = r * (a + b);
            const double beta_ref = -r * (a * a + 4.0 * a * b + b * b) / 6.0;
            const double scale = std::max(1.0, std::abs(beta_ref));
            worst = std::max(worst, std::abs(s.alpha - alpha_ref) / scale);
            worst = std::max(worst, std::abs(s.beta - beta_ref) / scale);
            ++segments_checked;
        }
    }

    const double r = 0.07, F = 2.5;
    const LossEnvelope sym = fit_segments(r, F, 1);
    worst = std::max(worst, std::abs(sym.segments[0].alpha));
    worst = std::max(worst, std::abs(sym.segments[0].beta - r * F * F / 3.0));

    report(3, "segment fits reproduce the closed-form least-squares line",
           worst <= 1e-10,
           std::to_string(segments_checked) + " segments, worst |error| = " + fmt(worst) +
               " (tol 1e-10)");
}

// ---------------------------------------------------------------- criterion 4

Network transfer_triangle(double demand_mw) {
    Network net;
    net.buses.push_back({"b1", "main", std::nullopt, ""});
    net.buses.push_back({"b2", "main", std::nullopt, ""});
    net.buses.push_back({"b3", "main", std::nullopt, "load3"});
    net.ac_lines.push_back(
        {"L12", "b1", "b2", 1.0, 100.0, 100.0, 0.0, 1.0, 1.0, false, 100.0});
    net.ac_lines.push_back(
        {"L23", "b2", "b3", 1.0, 100.0, 100.0, 0.0, 1.0, 1.0, false, 100.0});
    net.ac_lines.push_back({"L13", "b1", "b3", 1.0, 50.0, 50.0, 0.0, 1.0, 1.0, true, 100.0});
    net.generators.push_back({"g1", "b1", 0.0, 1.0, 1e4, "", false, false, "gas"});
    net.time.periods.push_back({"p1", {"t1"}, {1.0}});
    net.profiles.series["load3"] = {demand_mw};
    return net;
}

bool transfer_feasible(double demand_mw, const SsscSpec& spec, const SolverBackend& backend,
                       Solution* out = nullptr) {
    const Network net = transfer_triangle(demand_mw);
    const auto plp = build_lp(net, Scenario{}, net.time, initial_fixed_params(net), spec);
    const auto sol = solve(plp, backend);
    if (out && sol.status == SolveStatus::Optimal) *out = sol;
    return sol.status == SolveStatus::Optimal;
}

double max_deliverable_pu(const SsscSpec& spec, const SolverBackend& backend) {
    double lo = 0.0, hi = 200.0;  // MW
    for (int it = 0; it < 30; ++it) {
        const double mid = 0.5 * (lo + hi);
        (transfer_feasible(mid, spec, backend) ? lo : hi) = mid;
    }
    return lo / 100.0;
}

void criterion_transfer() {
    const auto backend = make_backend("simplex");

    const double p_plain = max_deliverable_pu(SsscSpec::off(), *backend);
    const double p_comp =
        max_deliverable_pu(SsscSpec::fixed({{"L13", 0.25}}), *backend);
    const double p_under =
        max_deliverable_pu(SsscSpec::fixed({{"L13", 0.24}}), *backend);

    // grid-search oracle: the control enters the voltage law as q~ / F with
    // F = 0.5 pu, so for a setpoint q the flows obey f13 = (2P + 2q) / 3 and
    // the deliverable injection is min((1.5 - 2q) / 2, 3 + 2q)
    auto oracle_at = [](double q) { return std::min((1.5 - 2.0 * q) / 2.0, 3.0 + 2.0 * q); };
    auto oracle_max = [&](double Q) {
        double best = 0.0;
        for (double q = -Q; q <= Q + 1e-12; q += 1e-4) best = std::max(best, oracle_at(q));
        return best;
    };
    const double g_plain = oracle_max(0.0), g_comp = oracle_max(0.25);

    // at the 1.0 pu optimum, recover the direct line's effective reactance
    // from the flows themselves: (x12 f12 + x23 f23) / f13
    Solution sol;
    if (!transfer_feasible(100.0, SsscSpec::fixed({{"L13", 0.25}}), *backend, &sol))
        throw BackendError("compensated triangle refused the 1.0 pu transfer");
    const Network net = transfer_triangle(100.0);
    const auto plp = build_lp(net, Scenario{}, net.time, initial_fixed_params(net),
                              SsscSpec::fixed({{"L13", 0.25}}));
    const Solution at_opt = solve(plp, *backend);
    const double f12 = at_opt.value(plp.cat.f(0, 0)) / 100.0;
    const double f23 = at_opt.value(plp.cat.f(1, 0)) / 100.0;
    const double f13 = at_opt.value(plp.cat.f(2, 0)) / 100.0;
    const double x_rec = (1.0 * f12 + 1.0 * f23) / f13;

    // an investment run should buy exactly the 0.25 pu that unlocks the demand
    const auto invest_plp = build_lp(net, Scenario{}, net.time, initial_fixed_params(net),
                                     SsscSpec::invest(1.0));
    const Solution invest = solve(invest_plp, *backend);
    const double q_built = invest.value(invest_plp.cat.Q_l[2]);

    const bool pass = std::abs(p_plain - 0.75) <= 1e-4 && std::abs(p_comp - 1.0) <= 1e-4 &&
                      std::abs(p_plain - g_plain) <= 1e-4 &&
                      std::abs(p_comp - g_comp) <= 1e-4 && p_under < 1.0 - 5e-3 &&
                      std::abs(x_rec - 2.0) <= 1e-4 &&
                      std::abs(q_built - 0.25) <= 1e-6 &&
                      invest.status == SolveStatus::Optimal;
    report(4, "0.5 pu bottleneck: 0.75 pu plain, 1.00 pu with 0.25 pu compensation", pass,
           "P(Q=0) = " + fmt(p_plain) + ", P(Q=0.25) = " + fmt(p_comp) + ", grid oracle " +
               fmt(g_plain) + "/" + fmt(g_comp) + ", x_eff = " + fmt(x_rec) +
               ", Q* = " + fmt(q_built) + " (tol 1e-04)");
}

// ---------------------------------------------------------------- criterion 5

void criterion_reduction() {
    std::mt19937 rng(505u);
    const auto backend = make_backend("simplex");
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Network net = random_flow_net(rng, true);
        const auto fp = initial_fixed_params(net);
        const auto plain = solve(build_lp(net, Scenario{}, net.time, fp, SsscSpec::off()),
                                 *backend);
        const auto zeroed = solve(
            build_lp(net, Scenario{}, net.time, fp, SsscSpec::capped(1.0, 0.0)), *backend);
        if (plain.status != SolveStatus::Optimal || zeroed.status != SolveStatus::Optimal)
            throw BackendError("reduction fixture did not solve");
        worst = std::max(worst, std::abs(plain.objective - zeroed.objective) /
                                    std::max(1.0, std::abs(plain.objective)));
    }
    report(5, "a zero compensation cap reproduces the plain model on 20 fixtures",
           worst <= 1e-6, "max relative objective gap = " + fmt(worst) + " (tol 1e-06)");
}

// ---------------------------------------------------------------- criterion 6

Network corridor_net(double r0, double c_line) {
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

void criterion_fixed_point() {
    const ConvergenceConfig cfg;
    std::string fail;

    // a zero budget pins every rating, so the loop settles immediately
    const Network tri = load_network(TEST_DATA_DIR "/triangle-backstop.json");
    Scenario zero;
    zero.name = "zero-budget";
    zero.budget_tw_mile = 0.0;
    const auto pinned = plan(tri, zero, tri.time, cfg, SsscSpec::off());
    if (!(pinned.converged() && pinned.state.n == 1))
        fail = "zero budget took " + std::to_string(pinned.state.n) + " iterations";
    g_audit_pool.push_back(pinned);

    // 1 MW brute force over the corridor rating, impedance kept consistent
    const Network cor = corridor_net(0.1, 350.0);
    const auto backend = make_backend(cfg.backend);
    double best_F = -1.0, best_cost = 1e300;
    for (int F = 100; F <= 300; ++F) {
        const auto fp = linearize(cor, {static_cast<double>(F)}, cfg.loss_segments);
        auto plp = build_lp(cor, Scenario{}, cor.time, fp, SsscSpec::off());
        plp.lp.set_col_bounds(plp.cat.F_l[0], F, F);
        const auto sol = solve(plp, *backend);
        if (sol.status == SolveStatus::Optimal && sol.objective < best_cost) {
            best_cost = sol.objective;
            best_F = F;
        }
    }
    const auto planned = plan(cor, Scenario{}, cor.time, cfg, SsscSpec::off());
    g_audit_pool.push_back(planned);
    const double f_gap = std::abs(planned.capacities_mw()[0] - best_F);
    if (fail.empty() && !planned.converged()) fail = "corridor plan did not converge";
    if (fail.empty() && f_gap > 1.0)
        fail = "brute force picked " + fmt(best_F) + " MW, plan " +
               fmt(planned.capacities_mw()[0]) + " MW";

    // converged plans stay put when re-linearized at their own answer
    double worst_gap_ratio = 0.0;
    {
        std::vector<double> F0;
        for (const auto& l : cor.ac_lines) F0.push_back(l.F0);
        const double threshold = cfg.eps * capacity_norm(F0, cfg.norm);
        const double gap = self_consistency_gap(cor, Scenario{}, cor.time, cfg, SsscSpec::off(),
                                                planned.capacities_mw());
        worst_gap_ratio = gap / threshold;
        if (fail.empty() && gap > threshold)
            fail = "self-consistency gap " + fmt(gap) + " exceeds " + fmt(threshold);
    }

    const bool budget_ok = ConvergenceConfig{}.max_iterations == 25 &&
                           pinned.state.n <= 25 && planned.state.n <= 25;
    if (fail.empty() && !budget_ok) fail = "default iteration budget violated";

    report(6, "capacity fixed point: immediate at zero budget, matches 1 MW brute force",
           fail.empty(),
           fail.empty() ? "|F* - grid argmin| = " + fmt(f_gap) +
                              " MW (tol 1 MW), consistency gap at " +
                              fmt(worst_gap_ratio) + " of eps"
                        : fail);
}

// ---------------------------------------------------------------- criterion 7

Network value_fixture(std::mt19937& rng) {
    const int B = 3 + static_cast<int>(rng() % 4);
    Network net;
    net.time.periods.push_back({"p1", {"t1"}, {8760.0}});
    for (int b = 0; b < B; ++b) {
        const std::string id = "b" + std::to_string(b);
        std::string ref;
        if (b > 0) {
            ref = "d" + id;
            net.profiles.series[ref] = {rnd(rng, 20.0, 60.0)};
        }
        net.buses.push_back({id, "main", std::nullopt, ref});
    }
    int edge_id = 0;
    auto add_line = [&](int u, int v) {
        const double F0 = rnd(rng, 25.0, 60.0);
        net.ac_lines.push_back({"e" + std::to_string(edge_id++), net.buses[u].id,
                                net.buses[v].id, rnd(rng, 20.0, 200.0), F0,
                                F0 * rnd(rng, 2.0, 3.0), 0.0, rnd(rng, 0.5, 2.0),
                                rnd(rng, 30.0, 120.0), true, 100.0});
    };
    for (int b = 1; b < B; ++b) add_line(static_cast<int>(rng() % b), b);
    add_line(0, B - 1);  // guarantee at least one cycle
    net.generators.push_back({"g0", "b0", 1.0, 1.0, 1e6, "", false, false, "hydro"});
    for (int b = 1; b < B; ++b)
        net.generators.push_back({"gb" + std::to_string(b), net.buses[b].id, 1.0,
                                  rnd(rng, 25.0, 60.0), 1e6, "", false, false, "diesel"});
    return net;
}

void criterion_value_monotonicity() {
    std::mt19937 rng(707u);
    const ConvergenceConfig cfg;
    std::string fail;

    for (int trial = 0; trial < 10 && fail.empty(); ++trial) {
        const Network net = value_fixture(rng);
        Scenario sc;
        sc.name = "fixture" + std::to_string(trial);
        sc.budget_tw_mile = 0.0;
        sc.sssc = SsscPolicy{true, 0.3, std::nullopt};

        // cost non-increasing in the transmission budget
        const double u_max = max_expansion_tw_mile(net);
        double prev = 1e300;
        for (const double frac : {0.0, 0.25, 0.5, 1.0}) {
            Scenario b = sc;
            b.budget_tw_mile = frac * u_max;
            const auto pr = plan(net, b, net.time, cfg, SsscSpec::off());
            if (pr.solution.objective > prev * (1.0 + 1e-6)) {
                fail = sc.name + ": cost rose with the budget at fraction " + fmt(frac);
                break;
            }
            prev = pr.solution.objective;
            g_audit_pool.push_back(pr);
        }
        if (!fail.empty()) break;

        // cost non-increasing and marginal value non-increasing in the cap
        const BcrCurve curve =
            sweep_sssc_caps(net, sc, net.time, {0.0, 0.002, 0.02, 2.0}, cfg);
        double prev_cost = 1e300;
        double prev_bcr = 1e300;
        for (const BcrPoint& p : curve.points) {
            if (p.cost > prev_cost * (1.0 + 1e-6)) {
                fail = sc.name + ": cost rose with the compensation cap";
                break;
            }
            prev_cost = p.cost;
            if (p.interval_bcr) {
                if (*p.interval_bcr > prev_bcr + 1e-6 * (1.0 + std::abs(prev_bcr))) {
                    fail = sc.name + ": interval benefit-cost ratio increased";
                    break;
                }
                prev_bcr = *p.interval_bcr;
            }
        }
        if (!fail.empty()) break;

        // allowing devices never costs more than forbidding them
        const ValueReport rep = run_pair(net, sc, net.time, cfg);
        if (!rep.no_sssc_feasible || !rep.with_sssc_feasible) {
            fail = sc.name + ": constructed fixture was infeasible";
            break;
        }
        if (rep.cost_saving < -1e-6 * rep.cost_no_sssc) {
            fail = sc.name + ": compensation made the plan more expensive";
            break;
        }
        g_audit_pool.push_back(*rep.result_no);
        g_audit_pool.push_back(*rep.result_with);
    }

    // directional claim: the value of compensation grows with demand
    std::vector<double> savings;
    if (fail.empty()) {
        const Network tri = load_network(TEST_DATA_DIR "/triangle-backstop.json");
        for (const double scale : {1.0, 4.0 / 3.0, 1.6}) {
            Scenario sc;
            sc.name = "demand" + fmt(scale);
            sc.demand_scale = scale;
            sc.sssc = SsscPolicy{true, 1.0, std::nullopt};
            const ValueReport rep = run_pair(tri, sc, tri.time, cfg);
            if (!rep.no_sssc_feasible || !rep.with_sssc_feasible) {
                fail = "demand scaling made the triangle infeasible";
                break;
            }
            savings.push_back(rep.cost_saving);
            g_audit_pool.push_back(*rep.result_with);
        }
        for (std::size_t i = 1; i < savings.size() && fail.empty(); ++i)
            if (savings[i] < savings[i - 1] - 1e-6 * (1.0 + std::abs(savings[i - 1])))
                fail = "saving fell from " + fmt(savings[i - 1]) + " to " + fmt(savings[i]) +
                       " as demand grew";
    }

    std::string detail = fail;
    if (fail.empty()) {
        detail = "10 fixtures monotone (tol 1e-06 rel); savings with demand x1/x1.33/x1.6: ";
        for (std::size_t i = 0; i < savings.size(); ++i)
            detail += (i ? ", " : "") + fmt(savings[i]);
    }
    report(7, "value monotone in budget and cap, growing with demand", fail.empty(), detail);
}

// ---------------------------------------------------------------- criterion 8

void criterion_operational_supplement() {
    const Network tri = load_network(TEST_DATA_DIR "/triangle-backstop.json");
    Scenario sc = load_scenario(TEST_DATA_DIR "/stressed.json");
    const ValueReport rep = run_pair(tri, sc, tri.time, {}, /*compute_avoided=*/true);
    const bool pass = rep.no_sssc_feasible && rep.with_sssc_feasible && rep.avoided &&
                      !rep.avoided->attainable && rep.cost_saving > 0.0;
    std::string detail;
    if (rep.avoided && !rep.avoided->attainable)
        detail = "saving " + fmt(rep.cost_saving) +
                 " $/yr yet no wires-only budget reaches the compensated cost";
    else
        detail = "expected the unattainable outcome";
    if (rep.result_no) g_audit_pool.push_back(*rep.result_no);
    if (rep.result_with) g_audit_pool.push_back(*rep.result_with);
    report(8, "wires-only expansion cannot reach the compensated cost where lines are pinned",
           pass, detail);
}

// ---------------------------------------------------------------- criterion 9

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_determinism() {
    const fs::path base = fs::temp_directory_path() / "cem-acceptance-determinism";
    fs::remove_all(base);
    const std::string net_arg = std::string("\"") + TEST_DATA_DIR "/triangle-backstop.json\"";
    const std::string sc_arg = std::string("\"") + TEST_DATA_DIR "/stressed.json\"";

    auto run = [&](const std::string& sub, const std::string& extra, const fs::path& out) {
        const std::string cmd = std::string("\"") + CEM_BINARY + "\" " + sub + " " + net_arg +
                                " " + sc_arg + " --seed 7 " + extra + " --out \"" +
                                out.string() + "\" > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };

    bool ran = true;
    ran = ran && run("plan", "", base / "plan-a");
    ran = ran && run("plan", "", base / "plan-b");
    ran = ran && run("sweep", "--caps 0,0.01,0.025,1", base / "sweep-a");
    ran = ran && run("sweep", "--caps 0,0.01,0.025,1", base / "sweep-b");

    int files = 0;
    std::string mismatch;
    if (ran) {
        for (const auto& [a, b] :
             {std::pair{base / "plan-a", base / "plan-b"},
              std::pair{base / "sweep-a", base / "sweep-b"}}) {
            for (const auto& entry : fs::directory_iterator(a)) {
                const fs::path twin = b / entry.path().filename();
                ++files;
                if (!fs::exists(twin) ||
                    read_bytes(entry.path()) != read_bytes(twin)) {
                    mismatch = entry.path().filename().string();
                    break;
                }
            }
            if (!mismatch.empty()) break;
        }
    }
    const bool pass = ran && files > 0 && mismatch.empty();
    report(9, "repeated runs emit byte-identical CSV and GeoJSON artifacts", pass,
           !ran ? "command-line runs failed"
                : (mismatch.empty() ? std::to_string(files) + " files compared byte-equal"
                                    : "differs: " + mismatch));
    fs::remove_all(base);
}

// --------------------------------------------------------------- criterion 10

void criterion_audit() {
    double worst = 0.0;
    std::string worst_row;
    int audited = 0;
    for (const PlanResult& pr : g_audit_pool) {
        const FeasibilityReport rep = check_feasibility(pr.lp, pr.solution.x, 1e-6);
        ++audited;
        if (rep.worst > worst) {
            worst = rep.worst;
            worst_row = rep.worst_row;
        }
        if (!rep.passed) break;
    }
    const bool pass = audited > 0 && worst <= 1e-6;
    report(10, "every reported optimum passes the row-by-row feasibility audit", pass,
           std::to_string(audited) + " solutions, worst violation " + fmt(worst) + " (" +
               (worst_row.empty() ? "none" : worst_row) + ", tol 1e-06)");
}

}  // namespace

int main() {
    guarded(1, "cycle count equals |E|-|V|+components on random graphs", criterion_cycles);
    guarded(2, "voltage-law LP flows match the angle formulation on 50 networks",
            criterion_btheta);
    guarded(3, "segment fits reproduce the closed-form least-squares line",
            criterion_loss_fit);
    guarded(4, "0.5 pu bottleneck: 0.75 pu plain, 1.00 pu with 0.25 pu compensation",
            criterion_transfer);
    guarded(5, "a zero compensation cap reproduces the plain model on 20 fixtures",
            criterion_reduction);
    guarded(6, "capacity fixed point: immediate at zero budget, matches 1 MW brute force",
            criterion_fixed_point);
    guarded(7, "value monotone in budget and cap, growing with demand",
            criterion_value_monotonicity);
    guarded(8, "wires-only expansion cannot reach the compensated cost where lines are pinned",
            criterion_operational_supplement);
    guarded(9, "repeated runs emit byte-identical CSV and GeoJSON artifacts",
            criterion_determinism);
    guarded(10, "every reported optimum passes the row-by-row feasibility audit",
            criterion_audit);

    std::printf("%d of 10 criteria passed\n", 10 - g_failures);
    return g_failures;
}
