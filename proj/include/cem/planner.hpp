#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cem/expansion.hpp"

namespace cem {

struct InfeasibleScenario : std::runtime_error {
    explicit InfeasibleScenario(const std::string& what) : std::runtime_error(what) {}
};

enum class NormKind { L2, Linf };

struct ConvergenceConfig {
    double eps = 1e-3;        // relative to the initial capacity vector norm
    int max_iterations = 25;
    NormKind norm = NormKind::L2;
    double damping = 1.0;     // next point = damping * F* + (1 - damping) * previous
    int loss_segments = kDefaultLossSegments;
    std::string backend = "simplex";
    bool record_timing = false;  // keep wall clock out of outputs unless asked
};

/// Full iterate history of one planning run.
struct IterationState {
    int n = 0;                                 // iterations performed
    std::vector<double> F_fix;                 // linearization point of the returned solve, MW
    std::vector<std::vector<double>> F_star;   // optimal AC capacities per iteration, MW
    std::vector<double> objective;             // per iteration
    std::vector<double> norm_delta;            // ||F* - previous F*|| per iteration
    std::vector<double> wall_seconds;          // per iteration; zero unless timing enabled
    bool converged = false;
};

struct PlanResult {
    PlanningLP lp;         // model of the returned solve
    Solution solution;
    FixedParams fixed;     // linearization the solution was solved against
    IterationState state;

    bool converged() const { return state.converged; }
    std::vector<double> capacities_mw() const {
        std::vector<double> F;
        for (int c : lp.cat.F_l) F.push_back(solution.value(c));
        return F;
    }
};

/// Series impedance scaled to a new rating: both components shrink inversely
/// with capacity. Returns (r_pu, x_pu).
std::pair<double, double> update_impedance(const AcLine& line, double F_new_mw);

/// Linearization point at explicit capacities: rescaled impedances plus
/// freshly fitted loss envelopes.
FixedParams linearize(const Network& net, const std::vector<double>& F_mw, int segments);

double capacity_norm(const std::vector<double>& v, NormKind norm);
double capacity_delta(const std::vector<double>& a, const std::vector<double>& b, NormKind norm);

/// Iterates build/solve with impedance and envelope refits until the optimal
/// capacity vector settles within eps * ||F0||, or max_iterations is reached.
/// On non-convergence the best self-consistent iterate (smallest objective) is
/// returned, else the last one, with state.converged = false.
PlanResult plan(const Network& net, const Scenario& scenario, const TimeStructure& time,
                const ConvergenceConfig& config, const SsscSpec& sssc);

/// Same, with the compensation policy taken from the scenario.
PlanResult plan(const Network& net, const Scenario& scenario, const TimeStructure& time,
                const ConvergenceConfig& config = {});

/// Re-linearizes at F_star, re-solves once, and returns the induced capacity
/// movement; a self-consistent plan moves less than eps * ||F0||.
double self_consistency_gap(const Network& net, const Scenario& scenario,
                            const TimeStructure& time, const ConvergenceConfig& config,
                            const SsscSpec& sssc, const std::vector<double>& F_star_mw);

void write_trace_csv(const IterationState& state, const std::string& path);

}  // namespace cem
