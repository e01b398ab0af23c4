#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cem/errors.hpp"

namespace cem {

struct Bus {
    std::string id;
    std::string component_label;                      // AC interconnect membership
    std::optional<std::array<double, 2>> coordinates; // lon, lat degrees
    std::string demand_profile_ref;                   // empty: no demand at this bus
    bool operator==(const Bus&) const = default;
};

struct AcLine {
    std::string id;
    std::string from_bus, to_bus;
    double length = 0.0;  // miles
    double F0 = 0.0;      // existing capacity, MW
    double F_max = 0.0;   // buildable ceiling, MW
    double r0_pu = 0.0;   // resistance at F0, pu on base_mva
    double x0_pu = 0.0;   // reactance at F0, pu on base_mva
    double cost = 0.0;    // $/MW-yr
    bool sssc_allowed = false;
    double base_mva = 100.0;
    bool operator==(const AcLine&) const = default;
};

struct DcLink {
    std::string id;
    std::string from_bus, to_bus;
    std::string reverse_partner_id;
    double F0 = 0.0;
    double F_max = 0.0;
    double efficiency = 1.0;  // delivered fraction at the receiving bus
    double length = 0.0;      // miles
    double cost = 0.0;        // $/MW-yr
    bool operator==(const DcLink&) const = default;
};

struct Generator {
    std::string id;
    std::string bus;
    double c_fix = 0.0;  // $/MW-yr
    double c_var = 0.0;  // $/MWh
    double P_max = 0.0;  // MW
    std::string availability_profile;  // empty: flat 1.0
    bool is_electrolyzer = false;      // dispatch is a load, p <= 0
    bool zero_carbon = false;
    std::string tech_tag;
    bool operator==(const Generator&) const = default;
};

struct StorageUnit {
    std::string id;
    std::string bus;
    double c_char = 0.0, c_dis = 0.0;  // $/MW-yr
    double c_sto = 0.0;                // $/MWh-yr
    double eta_char = 1.0, eta_dis = 1.0;
    double eta_idle = 1.0;  // per-hour retention
    double P0_char = 0.0, P0_dis = 0.0, E0 = 0.0;  // existing capacity floors
    bool operator==(const StorageUnit&) const = default;
};

struct Period {
    std::string id;
    std::vector<std::string> snapshots;  // ordered within the period
    std::vector<double> weights;         // hours represented by each snapshot
    bool operator==(const Period&) const = default;
};

/// Operational time axis: an ordered list of representative periods, each a
/// cyclic sequence of weighted snapshots. Globally, snapshots are indexed by
/// concatenating the periods in order.
struct TimeStructure {
    std::vector<Period> periods;

    int total_snapshots() const {
        int n = 0;
        for (const auto& p : periods) n += static_cast<int>(p.snapshots.size());
        return n;
    }
    /// Global [begin, end) snapshot range of period k.
    std::pair<int, int> period_range(int k) const {
        int begin = 0;
        for (int i = 0; i < k; ++i) begin += static_cast<int>(periods[i].snapshots.size());
        return {begin, begin + static_cast<int>(periods[k].snapshots.size())};
    }
    std::vector<double> flat_weights() const {
        std::vector<double> w;
        for (const auto& p : periods) w.insert(w.end(), p.weights.begin(), p.weights.end());
        return w;
    }
    bool operator==(const TimeStructure&) const = default;
};

struct Profiles {
    /// profile id -> one value per global snapshot (demand MW, availability fraction)
    std::map<std::string, std::vector<double>> series;
    bool operator==(const Profiles&) const = default;
};

struct Network {
    std::vector<Bus> buses;
    std::vector<AcLine> ac_lines;
    std::vector<DcLink> dc_links;
    std::vector<Generator> generators;
    std::vector<StorageUnit> storage;
    TimeStructure time;
    Profiles profiles;
    double annual_hours_tolerance = 0.01;  // relative slack on sum(w) vs 8760 h
    std::vector<std::string> warnings;     // non-fatal validation notes

    int bus_index(const std::string& id) const;
    int ac_line_index(const std::string& id) const;
    int dc_link_index(const std::string& id) const;
    const std::vector<double>& profile(const std::string& id) const;
    /// Exogenous demand at a bus, MW (0 when the bus has no profile).
    double demand(int bus, int t) const;
    /// Generator availability fraction (flat 1.0 without a profile).
    double availability(const Generator& g, int t) const;

    bool operator==(const Network&) const = default;
};

struct ComponentSummary {
    std::string label;
    int bus_count = 0;
    int ac_line_count = 0;
    int expected_cycles = 0;                 // |lines| - |buses| + 1
    std::vector<std::string> isolated_buses; // no incident AC line or DC link
};

/// Checks every structural invariant, resolves cross-references, and collects
/// non-fatal warnings onto the network. Throws ValidationError naming the
/// first violated invariant and the offending entity.
void validate_network(Network& net);

Network load_network(const std::string& path);
Network load_network_from_string(const std::string& text);
std::string serialize_network(const Network& net);
void save_network(const Network& net, const std::string& path);

/// Merges profile series from CSV columns (profile_id, period, snapshot, value).
/// Rows may arrive in any order; every (period, snapshot) of the network's time
/// axis must be covered for each profile id present.
void import_profiles_csv(Network& net, const std::string& path);

/// AC-connectivity analysis: one summary per connected component (isolated
/// buses form singleton components). Throws ValidationError on a dead node --
/// a bus with no incident branch, generator, storage, or demand.
std::vector<ComponentSummary> validate_connectivity(const Network& net);

}  // namespace cem
