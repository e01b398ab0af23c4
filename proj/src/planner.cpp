#include "cem/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

namespace cem {

namespace {

void validate_config(const ConvergenceConfig& cfg) {
    if (!(cfg.eps > 0)) throw DomainError("convergence tolerance must be positive");
    if (cfg.max_iterations < 1) throw DomainError("max_iterations must be at least 1");
    if (!(cfg.damping > 0) || cfg.damping > 1) throw DomainError("damping must lie in (0, 1]");
    if (cfg.loss_segments < 1) throw DomainError("loss segment count must be positive");
}

struct Iterate {
    std::vector<double> F_fix;
    std::vector<double> F_star;
    double objective = 0.0;
};

}  // namespace

std::pair<double, double> update_impedance(const AcLine& line, double F_new_mw) {
    if (!(F_new_mw > 0))
        throw DomainError("line " + line.id + ": capacity must be positive, got " +
                          std::to_string(F_new_mw));
    const double scale = line.F0 / F_new_mw;
    return {line.r0_pu * scale, line.x0_pu * scale};
}

FixedParams linearize(const Network& net, const std::vector<double>& F_mw, int segments) {
    if (F_mw.size() != net.ac_lines.size())
        throw ModelBuildError("capacity vector: expected " +
                              std::to_string(net.ac_lines.size()) + " entries, got " +
                              std::to_string(F_mw.size()));
    std::vector<double> r(F_mw.size()), x(F_mw.size());
    for (std::size_t l = 0; l < F_mw.size(); ++l)
        std::tie(r[l], x[l]) = update_impedance(net.ac_lines[l], F_mw[l]);
    return fixed_params(net, F_mw, r, x, segments);
}

double capacity_norm(const std::vector<double>& v, NormKind norm) {
    if (norm == NormKind::Linf) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double capacity_delta(const std::vector<double>& a, const std::vector<double>& b,
                      NormKind norm) {
    if (a.size() != b.size())
        throw ModelBuildError("capacity vectors differ in length: " + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()));
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return capacity_norm(d, norm);
}

namespace {

struct SolveOutcome {
    FixedParams fixed;
    PlanningLP lp;
    Solution solution;
    std::vector<double> F_star;
};

SolveOutcome solve_at(const Network& net, const Scenario& sc, const TimeStructure& time,
                      const ConvergenceConfig& cfg, const SsscSpec& sssc,
                      const SolverBackend& backend, const std::vector<double>& F_fix, int n) {
    SolveOutcome out;
    out.fixed = linearize(net, F_fix, cfg.loss_segments);
    out.lp = build_lp(net, sc, time, out.fixed, sssc);
    out.solution = solve(out.lp, backend);
    if (out.solution.status == SolveStatus::Infeasible)
        throw InfeasibleScenario("scenario '" + sc.name + "': model infeasible at iteration " +
                                 std::to_string(n));
    if (out.solution.status != SolveStatus::Optimal)
        throw BackendError("planning solve at iteration " + std::to_string(n) + " returned " +
                           to_string(out.solution.status));
    for (int c : out.lp.cat.F_l) out.F_star.push_back(out.solution.value(c));
    return out;
}

}  // namespace

PlanResult plan(const Network& net, const Scenario& sc, const TimeStructure& time,
                const ConvergenceConfig& cfg, const SsscSpec& sssc) {
    validate_config(cfg);
    const auto backend = make_backend(cfg.backend);

    std::vector<double> F0;
    for (const auto& l : net.ac_lines) F0.push_back(l.F0);
    const double threshold = cfg.eps * capacity_norm(F0, cfg.norm);

    PlanResult result;
    IterationState& state = result.state;
    std::vector<Iterate> history;

    std::vector<double> F_fix = F0;
    std::vector<double> F_prev = F0;
    for (int n = 1; n <= cfg.max_iterations; ++n) {
        const auto start = std::chrono::steady_clock::now();
        auto outcome = solve_at(net, sc, time, cfg, sssc, *backend, F_fix, n);
        double wall = 0.0;
        if (cfg.record_timing) {
            wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                       .count();
        }

        const double delta = capacity_delta(outcome.F_star, F_prev, cfg.norm);
        state.n = n;
        state.F_star.push_back(outcome.F_star);
        state.objective.push_back(outcome.solution.objective);
        state.norm_delta.push_back(delta);
        state.wall_seconds.push_back(wall);
        history.push_back({F_fix, outcome.F_star, outcome.solution.objective});

        if (delta <= threshold) {
            state.converged = true;
            state.F_fix = F_fix;
            result.lp = std::move(outcome.lp);
            result.solution = std::move(outcome.solution);
            result.fixed = std::move(outcome.fixed);
            return result;
        }

        F_prev = outcome.F_star;
        for (std::size_t l = 0; l < F_fix.size(); ++l)
            F_fix[l] = cfg.damping * outcome.F_star[l] + (1.0 - cfg.damping) * F_fix[l];

        if (n == cfg.max_iterations) {
            // keep the last outcome as the fallback answer
            state.F_fix = history.back().F_fix;
            result.lp = std::move(outcome.lp);
            result.solution = std::move(outcome.solution);
            result.fixed = std::move(outcome.fixed);
        }
    }

    // Not converged: prefer the lowest-objective iterate that is stable under
    // one more refit; otherwise keep the last one.
    std::vector<std::size_t> order(history.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return history[a].objective < history[b].objective;
    });
    for (std::size_t idx : order) {
        const auto& cand = history[idx];
        auto recheck = solve_at(net, sc, time, cfg, sssc, *backend, cand.F_star,
                                static_cast<int>(idx) + 1);
        if (capacity_delta(recheck.F_star, cand.F_star, cfg.norm) <= threshold) {
            auto chosen = solve_at(net, sc, time, cfg, sssc, *backend, cand.F_fix,
                                   static_cast<int>(idx) + 1);
            state.F_fix = cand.F_fix;
            result.lp = std::move(chosen.lp);
            result.solution = std::move(chosen.solution);
            result.fixed = std::move(chosen.fixed);
            break;
        }
    }
    state.converged = false;
    return result;
}

PlanResult plan(const Network& net, const Scenario& sc, const TimeStructure& time,
                const ConvergenceConfig& cfg) {
    return plan(net, sc, time, cfg, sssc_spec_from(sc.sssc));
}

double self_consistency_gap(const Network& net, const Scenario& sc, const TimeStructure& time,
                            const ConvergenceConfig& cfg, const SsscSpec& sssc,
                            const std::vector<double>& F_star_mw) {
    validate_config(cfg);
    const auto backend = make_backend(cfg.backend);
    const auto outcome = solve_at(net, sc, time, cfg, sssc, *backend, F_star_mw, 1);
    return capacity_delta(outcome.F_star, F_star_mw, cfg.norm);
}

void write_trace_csv(const IterationState& state, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open trace file for writing: " + path);
    out << "n,norm_delta,objective,wall_seconds\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < state.norm_delta.size(); ++i) {
        out << (i + 1) << ',' << state.norm_delta[i] << ',' << state.objective[i] << ','
            << state.wall_seconds[i] << '\n';
    }
    if (!out) throw IoError("failed while writing trace file: " + path);
}

}  // namespace cem
