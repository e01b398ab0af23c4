#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cem/errors.hpp"

namespace cem {

struct ShareConstraint {
    std::vector<std::string> tech_tags;
    bool is_min = true;      // min_share vs max_share
    double fraction = 0.0;   // of total (non-electrolyzer) generation
    bool operator==(const ShareConstraint&) const = default;
};

struct SsscPolicy {
    bool allowed = false;
    double cost_per_kvar_yr = 0.0;          // annualized $/kVAr-yr
    std::optional<double> total_cap_gvar;   // fleet-wide installed cap
    bool operator==(const SsscPolicy&) const = default;
};

struct Scenario {
    std::string name;
    double demand_scale = 1.0;                  // multiplier on demand profiles
    double electrolysis_twh = 0.0;              // annual flexible electrolysis energy
    std::optional<double> budget_tw_mile;       // transmission expansion budget; empty = unlimited
    double reserve_margin = 0.0;                // required surplus fraction
    SsscPolicy sssc;
    std::vector<ShareConstraint> share_constraints;
    double zero_carbon_min = 0.0;               // minimum zero-carbon generation share
    bool operator==(const Scenario&) const = default;
};

Scenario load_scenario(const std::string& path);
Scenario load_scenario_from_string(const std::string& text);
std::string serialize_scenario(const Scenario& s);

}  // namespace cem
