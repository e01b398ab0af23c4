#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cem/cycles.hpp"
#include "cem/loss.hpp"
#include "cem/lp.hpp"
#include "cem/network.hpp"
#include "cem/scenario.hpp"
#include "cem/sssc.hpp"

namespace cem {

// Linearization point the LP is built around: flows are compared against a
// frozen capacity vector, series impedance is taken as given per line, and
// losses are replaced by the piecewise envelope fitted at that point.
struct FixedParams {
    std::vector<double> F_fix_mw;          // per AC line, order of net.ac_lines
    std::vector<double> r_pu;              // series resistance at the fixed point
    std::vector<double> x_pu;              // series reactance at the fixed point
    std::vector<LossEnvelope> envelopes;   // loss envelope per AC line, pu domain
};

// Build a FixedParams from explicit impedances, fitting loss envelopes over
// [-F_fix/base, F_fix/base] with `segments` pieces per line.
FixedParams fixed_params(const Network& net, const std::vector<double>& F_fix_mw,
                         const std::vector<double>& r_pu, const std::vector<double>& x_pu,
                         int segments = kDefaultLossSegments);

// Fixed point at the existing capacities with nameplate impedances.
FixedParams initial_fixed_params(const Network& net, int segments = kDefaultLossSegments);

enum class SsscMode { Off, Invest, Capped, Fixed };

struct SsscSpec {
    SsscMode mode = SsscMode::Off;
    double total_cap_mvar = 0.0;                // used by Capped
    std::map<std::string, double> fixed_q_pu;   // used by Fixed: line id -> rating
    double cost_per_mvar_yr = 0.0;              // objective coefficient, Invest/Capped

    static SsscSpec off() { return {}; }
    static SsscSpec invest(double cost_per_mvar_yr);
    static SsscSpec capped(double cost_per_mvar_yr, double total_cap_mvar);
    static SsscSpec fixed(std::map<std::string, double> q_pu_by_line);
};

// Translate a scenario's compensation policy ($/kVAr-yr, GVAr fleet cap) into
// the LP-facing spec ($/MVAr-yr, MVAr).
SsscSpec sssc_spec_from(const SsscPolicy& policy);

// Column index bookkeeping for the planning LP.  Operational variables are
// flattened as entity-major blocks: index = entity * T + t with t the global
// snapshot index.  A value of -1 marks a variable that is absent (e.g. no
// series compensation on a line).
struct VariableCatalog {
    int T = 0;

    // investment columns
    std::vector<int> P_g;       // generator nameplate, MW
    std::vector<int> F_l;       // AC line rating, MW
    std::vector<int> F_i;       // DC link rating, MW
    std::vector<int> P_char;    // storage charge rating, MW
    std::vector<int> P_dis;     // storage discharge rating, MW
    std::vector<int> E_s;       // storage energy capacity, MWh
    std::vector<int> Q_l;       // series compensation rating, pu MVAr

    // operational columns (flattened entity-major)
    std::vector<int> p_gt;       // generator dispatch, MW (<= 0 for electrolyzers)
    std::vector<int> p_char_st;  // storage charging, MW
    std::vector<int> p_dis_st;   // storage discharging, MW
    std::vector<int> e_st;       // state of charge at the END of snapshot t, MWh
    std::vector<int> e0_sk;      // state of charge entering period k (storage-major)
    std::vector<int> f_lt;       // AC flow, MW
    std::vector<int> f_it;       // DC flow, MW
    std::vector<int> l_lt;       // AC loss, MW
    std::vector<int> R_st;       // storage reserve, MW
    std::vector<int> R_lt;       // AC line reserve contribution, MW
    std::vector<int> R_it;       // DC link reserve contribution, MW
    std::vector<int> q_lt;       // normalized compensation set-point, pu

    int pg(int g, int t) const { return p_gt[g * T + t]; }
    int pch(int s, int t) const { return p_char_st[s * T + t]; }
    int pdis(int s, int t) const { return p_dis_st[s * T + t]; }
    int e(int s, int t) const { return e_st[s * T + t]; }
    int e0(int s, int k, int periods) const { return e0_sk[s * periods + k]; }
    int f(int l, int t) const { return f_lt[l * T + t]; }
    int fdc(int i, int t) const { return f_it[i * T + t]; }
    int loss(int l, int t) const { return l_lt[l * T + t]; }
    int Rs(int s, int t) const { return R_st[s * T + t]; }
    int Rl(int l, int t) const { return R_lt[l * T + t]; }
    int Rdc(int i, int t) const { return R_it[i * T + t]; }
    int q(int l, int t) const { return q_lt.empty() ? -1 : q_lt[l * T + t]; }
};

struct PlanningLP {
    LpProblem lp;
    VariableCatalog cat;
    CycleBasis cycles;
};

// Assemble the full capacity-expansion LP at a given linearization point.
// `time` must span the same number of snapshots as the network profiles.
PlanningLP build_lp(const Network& net, const Scenario& scenario, const TimeStructure& time,
                    const FixedParams& fixed, const SsscSpec& sssc);

struct CostBreakdown {
    double gen_fix = 0, gen_var = 0;
    double ac_lines = 0, dc_links = 0;
    double storage_char = 0, storage_dis = 0, storage_energy = 0;
    double sssc = 0;
    double total() const {
        return gen_fix + gen_var + ac_lines + dc_links + storage_char + storage_dis +
               storage_energy + sssc;
    }
};

struct Solution {
    SolveStatus status = SolveStatus::Numerical;
    double objective = 0.0;
    CostBreakdown costs;
    Eigen::VectorXd x;          // full primal vector, indexed via the catalog
    Eigen::VectorXd row_duals;  // sign convention of SolverBackend
    long iterations = 0;

    double value(int col) const { return col < 0 ? 0.0 : x[col]; }
};

struct FamilyViolation {
    std::string family;
    double worst = 0.0;      // relative violation, scaled by 1 + |bound|
    std::string worst_row;
};

struct FeasibilityReport {
    std::vector<FamilyViolation> families;  // sorted by family name
    double worst = 0.0;
    std::string worst_row;
    double tol = 0.0;
    bool passed = true;
};

// Independent row-by-row audit of a primal point against the LP.
FeasibilityReport check_feasibility(const PlanningLP& plp, const Eigen::VectorXd& x, double tol);

// Solve and, for optimal outcomes, audit the primal and decompose the
// objective.  Audit failure raises BackendError.
Solution solve(const PlanningLP& plp, const SolverBackend& backend);

}  // namespace cem
