#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cem/planner.hpp"

namespace cem {

/// Outcome of the budget bisection: the cheapest compensation-free build that
/// matches a target cost, compared against the expansion a compensated plan
/// actually used. `attainable == false` means no budget reaches the target --
/// the compensated system is doing work that wires alone cannot replicate.
struct AvoidedTransmission {
    bool attainable = false;
    double tw_mile = 0.0;                  // budget_required - used_expansion
    double budget_required_tw_mile = 0.0;  // smallest uncompensated budget hitting the target
    double used_expansion_tw_mile = 0.0;   // build volume of the compensated plan
};

/// Side-by-side economics of one scenario planned with and without series
/// compensation. Costs are $/yr; a side that fails to solve keeps its
/// feasibility flag false and zeroed figures.
struct ValueReport {
    std::string scenario;

    bool no_sssc_feasible = false;
    bool with_sssc_feasible = false;
    bool no_sssc_converged = false;
    bool with_sssc_converged = false;

    double cost_no_sssc = 0.0;
    double cost_with_sssc = 0.0;
    double cost_saving = 0.0;       // cost_no_sssc - cost_with_sssc
    double sssc_invest_cost = 0.0;  // annualized device spend inside cost_with_sssc
    std::optional<double> benefit_cost_ratio;  // (saving + invest) / invest when invest > 0

    std::optional<AvoidedTransmission> avoided;

    // Fleet AC capacity factor: sum_l sum_t w_t |f_lt| / (8760 * sum_l F_l).
    double ac_capacity_factor_no = 0.0;
    double ac_capacity_factor_with = 0.0;
    double ac_capacity_factor_delta_pp = 0.0;  // percentage points

    double installed_q_gvar = 0.0;

    CostBreakdown costs_no{};
    CostBreakdown costs_with{};
    CostBreakdown cost_delta() const;  // with minus no, per component

    std::optional<PlanResult> result_no;
    std::optional<PlanResult> result_with;
};

struct BcrPoint {
    double cap_gvar = 0.0;
    double cost = 0.0;                // total system cost at this cap
    double cumulative_saving = 0.0;   // uncapped-baseline cost minus this cost... see BcrCurve
    double sssc_invest_cost = 0.0;
    double installed_q_gvar = 0.0;
    bool converged = false;
    // (delta saving + delta invest) / delta invest versus the previous cap;
    // empty when the increment bought no additional capacity.
    std::optional<double> interval_bcr;
};

/// Value of compensation capacity by increments: one full re-optimization per
/// cap, savings measured against the compensation-free solve of the same
/// scenario.
struct BcrCurve {
    std::string scenario;
    double cost_no_sssc = 0.0;
    std::vector<BcrPoint> points;
};

double fleet_ac_capacity_factor(const Network& net, const TimeStructure& time,
                                const PlanResult& result);
double installed_q_mvar(const Network& net, const PlanResult& result);
/// Build volume beyond the existing system, TW-mile: AC at full corridor
/// length, DC at half (twin directed links share a corridor).
double used_expansion_tw_mile(const Network& net, const PlanResult& result);
/// Budget that admits building every line to its ceiling; upper end of any
/// budget sweep.
double max_expansion_tw_mile(const Network& net);

/// Plans the scenario twice -- compensation forbidden, then per the scenario's
/// own policy -- and assembles the comparison. Infeasible sides are flagged,
/// not thrown. With compute_avoided the no-compensation cost/budget curve is
/// bisected for the expansion the compensated plan made unnecessary.
ValueReport run_pair(const Network& net, const Scenario& scenario, const TimeStructure& time,
                     const ConvergenceConfig& config = {}, bool compute_avoided = false);

/// Smallest compensation-free transmission budget whose optimal cost reaches
/// target_cost, by bisection over [0, max_expansion] to 0.1% of the range;
/// cost monotonicity in the budget is asserted along the way. The returned
/// figure nets off the expansion used by the compensated plan (re-planned here
/// unless supplied via the overload).
AvoidedTransmission avoided_transmission(const Network& net, const Scenario& scenario,
                                         const TimeStructure& time, double target_cost,
                                         const ConvergenceConfig& config = {});
AvoidedTransmission avoided_transmission(const Network& net, const Scenario& scenario,
                                         const TimeStructure& time, double target_cost,
                                         const ConvergenceConfig& config,
                                         double used_expansion);

/// One plan per cap (ascending, GVAr) with total installed compensation bounded
/// by the cap; interval benefit-cost ratios measured between consecutive caps,
/// the first against a virtual zero-cap point.
BcrCurve sweep_sssc_caps(const Network& net, const Scenario& scenario, const TimeStructure& time,
                         const std::vector<double>& caps_gvar,
                         const ConvergenceConfig& config = {});

/// Tabular and geographic artifacts under out_dir (created if missing):
/// costs.csv, lines.csv, iteration traces, bcr_curve.csv when a curve is
/// given, network.geojson drawn from map_solution (default: first report's
/// compensated side) for every entity whose bus coordinates exist.
void emit_report(const Network& net, const std::vector<ValueReport>& reports,
                 const BcrCurve* curve, const PlanResult* map_solution,
                 const std::filesystem::path& out_dir);

void write_lines_csv(const Network& net, const PlanResult& result, const std::string& label,
                     const std::filesystem::path& file);
void write_costs_csv(const CostBreakdown& costs, double objective, const std::string& label,
                     const std::filesystem::path& file);
void write_bcr_csv(const BcrCurve& curve, const std::filesystem::path& file);
void write_network_geojson(const Network& net, const PlanResult* result,
                           const std::filesystem::path& file);

/// Shortest decimal round-trip formatting; all report writers use it so that
/// identical runs emit identical bytes.
std::string format_double(double v);

}  // namespace cem
