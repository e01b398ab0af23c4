#include "cem/network.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cem {

using nlohmann::json;

int Network::bus_index(const std::string& id) const {
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return static_cast<int>(i);
    throw DomainError("unknown bus '" + id + "'");
}

int Network::ac_line_index(const std::string& id) const {
    for (size_t i = 0; i < ac_lines.size(); ++i)
        if (ac_lines[i].id == id) return static_cast<int>(i);
    throw DomainError("unknown AC line '" + id + "'");
}

int Network::dc_link_index(const std::string& id) const {
    for (size_t i = 0; i < dc_links.size(); ++i)
        if (dc_links[i].id == id) return static_cast<int>(i);
    throw DomainError("unknown DC link '" + id + "'");
}

const std::vector<double>& Network::profile(const std::string& id) const {
    const auto it = profiles.series.find(id);
    if (it == profiles.series.end()) throw DomainError("unknown profile '" + id + "'");
    return it->second;
}

double Network::demand(int bus, int t) const {
    const std::string& ref = buses[bus].demand_profile_ref;
    return ref.empty() ? 0.0 : profile(ref)[t];
}

double Network::availability(const Generator& g, int t) const {
    return g.availability_profile.empty() ? 1.0 : profile(g.availability_profile)[t];
}

namespace {

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
    throw ParseError(where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) parse_fail(where, std::string("missing field '") + key + "'");
    return *it;
}

std::string get_str(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_string()) parse_fail(where, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

double get_num(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_number()) parse_fail(where, std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

bool get_bool(const json& obj, const char* key, const std::string& where, bool fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_boolean()) parse_fail(where, std::string("field '") + key + "' must be a boolean");
    return it->get<bool>();
}

std::string opt_str(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? std::string() : it->get<std::string>();
}

const json& top_array(const json& doc, const char* key) {
    const auto it = doc.find(key);
    if (it == doc.end() || !it->is_array())
        parse_fail("network file", std::string("expected top-level array '") + key + "'");
    return *it;
}

Network parse_document(const json& doc) {
    Network net;
    if (!doc.is_object()) parse_fail("network file", "document must be a JSON object");

    for (const auto& j : top_array(doc, "buses")) {
        const std::string where = "bus '" + opt_str(j, "id") + "'";
        Bus b;
        b.id = get_str(j, "id", where);
        b.component_label = get_str(j, "component_label", where);
        b.demand_profile_ref = opt_str(j, "demand_profile_ref");
        if (const auto it = j.find("coordinates"); it != j.end() && !it->is_null()) {
            if (!it->is_array() || it->size() != 2)
                parse_fail(where, "coordinates must be [lon, lat]");
            b.coordinates = {{(*it)[0].get<double>(), (*it)[1].get<double>()}};
        }
        net.buses.push_back(std::move(b));
    }

    for (const auto& j : top_array(doc, "ac_lines")) {
        const std::string where = "ac_line '" + opt_str(j, "id") + "'";
        AcLine l;
        l.id = get_str(j, "id", where);
        l.from_bus = get_str(j, "from_bus", where);
        l.to_bus = get_str(j, "to_bus", where);
        l.length = get_num(j, "length", where);
        l.F0 = get_num(j, "F0", where);
        l.F_max = get_num(j, "F_max", where);
        l.r0_pu = get_num(j, "r0_pu", where);
        l.x0_pu = get_num(j, "x0_pu", where);
        l.cost = get_num(j, "cost", where);
        l.sssc_allowed = get_bool(j, "sssc_allowed", where, false);
        l.base_mva = j.contains("base_mva") ? get_num(j, "base_mva", where) : 100.0;
        net.ac_lines.push_back(std::move(l));
    }

    for (const auto& j : top_array(doc, "dc_links")) {
        const std::string where = "dc_link '" + opt_str(j, "id") + "'";
        DcLink d;
        d.id = get_str(j, "id", where);
        d.from_bus = get_str(j, "from_bus", where);
        d.to_bus = get_str(j, "to_bus", where);
        d.reverse_partner_id = get_str(j, "reverse_partner_id", where);
        d.F0 = get_num(j, "F0", where);
        d.F_max = get_num(j, "F_max", where);
        d.efficiency = get_num(j, "efficiency", where);
        d.length = get_num(j, "length", where);
        d.cost = get_num(j, "cost", where);
        net.dc_links.push_back(std::move(d));
    }

    for (const auto& j : top_array(doc, "generators")) {
        const std::string where = "generator '" + opt_str(j, "id") + "'";
        Generator g;
        g.id = get_str(j, "id", where);
        g.bus = get_str(j, "bus", where);
        g.c_fix = get_num(j, "c_fix", where);
        g.c_var = get_num(j, "c_var", where);
        g.P_max = get_num(j, "P_max", where);
        g.availability_profile = opt_str(j, "availability_profile");
        g.is_electrolyzer = get_bool(j, "is_electrolyzer", where, false);
        g.zero_carbon = get_bool(j, "zero_carbon", where, false);
        g.tech_tag = opt_str(j, "tech_tag");
        net.generators.push_back(std::move(g));
    }

    for (const auto& j : top_array(doc, "storage")) {
        const std::string where = "storage '" + opt_str(j, "id") + "'";
        StorageUnit s;
        s.id = get_str(j, "id", where);
        s.bus = get_str(j, "bus", where);
        s.c_char = get_num(j, "c_char", where);
        s.c_dis = get_num(j, "c_dis", where);
        s.c_sto = get_num(j, "c_sto", where);
        s.eta_char = get_num(j, "eta_char", where);
        s.eta_dis = get_num(j, "eta_dis", where);
        s.eta_idle = get_num(j, "eta_idle", where);
        s.P0_char = j.contains("P0_char") ? get_num(j, "P0_char", where) : 0.0;
        s.P0_dis = j.contains("P0_dis") ? get_num(j, "P0_dis", where) : 0.0;
        s.E0 = j.contains("E0") ? get_num(j, "E0", where) : 0.0;
        net.storage.push_back(std::move(s));
    }

    for (const auto& j : top_array(doc, "time")) {
        const std::string where = "period '" + opt_str(j, "id") + "'";
        Period p;
        p.id = get_str(j, "id", where);
        const json& snaps = field(j, "snapshots", where);
        const json& weights = field(j, "weights", where);
        if (!snaps.is_array() || !weights.is_array())
            parse_fail(where, "snapshots and weights must be arrays");
        for (const auto& s : snaps) p.snapshots.push_back(s.get<std::string>());
        for (const auto& w : weights) p.weights.push_back(w.get<double>());
        net.time.periods.push_back(std::move(p));
    }

    for (const auto& j : top_array(doc, "profiles")) {
        const std::string where = "profile '" + opt_str(j, "id") + "'";
        const std::string id = get_str(j, "id", where);
        const json& values = field(j, "values", where);
        if (!values.is_array()) parse_fail(where, "values must be an array");
        std::vector<double> v;
        v.reserve(values.size());
        for (const auto& x : values) v.push_back(x.get<double>());
        if (!net.profiles.series.emplace(id, std::move(v)).second)
            throw ValidationError(where + ": duplicate profile id");
    }

    if (doc.contains("annual_hours_tolerance"))
        net.annual_hours_tolerance = doc["annual_hours_tolerance"].get<double>();
    return net;
}

template <class T>
void check_unique_ids(const std::vector<T>& items, const char* kind) {
    for (size_t i = 0; i < items.size(); ++i)
        for (size_t j = i + 1; j < items.size(); ++j)
            if (items[i].id == items[j].id)
                throw ValidationError(std::string(kind) + " '" + items[i].id +
                                      "': duplicate id");
}

void require_bus(const Network& net, const std::string& bus, const std::string& where) {
    for (const auto& b : net.buses)
        if (b.id == bus) return;
    throw ValidationError(where + ": references unknown bus '" + bus + "'");
}

}  // namespace

void validate_network(Network& net) {
    check_unique_ids(net.buses, "bus");
    check_unique_ids(net.ac_lines, "ac_line");
    check_unique_ids(net.dc_links, "dc_link");
    check_unique_ids(net.generators, "generator");
    check_unique_ids(net.storage, "storage");
    check_unique_ids(net.time.periods, "period");

    const int total_snaps = net.time.total_snapshots();
    for (const auto& p : net.time.periods) {
        const std::string where = "period '" + p.id + "'";
        if (p.snapshots.empty()) throw ValidationError(where + ": no snapshots");
        if (p.snapshots.size() != p.weights.size())
            throw ValidationError(where + ": snapshots and weights differ in length");
        for (size_t i = 0; i < p.snapshots.size(); ++i)
            for (size_t j = i + 1; j < p.snapshots.size(); ++j)
                if (p.snapshots[i] == p.snapshots[j])
                    throw ValidationError(where + ": duplicate snapshot '" + p.snapshots[i] + "'");
        for (const double w : p.weights)
            if (!(w > 0.0)) throw ValidationError(where + ": weight must be positive");
    }
    if (total_snaps == 0) throw ValidationError("time: no periods defined");
    {
        double hours = 0.0;
        for (const auto& p : net.time.periods)
            for (const double w : p.weights) hours += w;
        if (std::abs(hours - 8760.0) > net.annual_hours_tolerance * 8760.0) {
            std::ostringstream os;
            os << "time: snapshot weights sum to " << hours << " h, not 8760 h";
            net.warnings.push_back(os.str());
        }
    }

    for (const auto& [id, series] : net.profiles.series) {
        if (static_cast<int>(series.size()) != total_snaps)
            throw ValidationError("profile '" + id + "': " + std::to_string(series.size()) +
                                  " values for " + std::to_string(total_snaps) + " snapshots");
        for (const double v : series)
            if (!std::isfinite(v))
                throw ValidationError("profile '" + id + "': non-finite value");
    }

    for (const auto& b : net.buses) {
        const std::string where = "bus '" + b.id + "'";
        if (b.id.empty()) throw ValidationError("bus with empty id");
        if (!b.demand_profile_ref.empty()) {
            const auto it = net.profiles.series.find(b.demand_profile_ref);
            if (it == net.profiles.series.end())
                throw ValidationError(where + ": unknown demand profile '" +
                                      b.demand_profile_ref + "'");
            for (const double v : it->second)
                if (v < 0.0)
                    throw ValidationError("profile '" + b.demand_profile_ref +
                                          "': negative demand");
        }
    }

    for (const auto& l : net.ac_lines) {
        const std::string where = "ac_line '" + l.id + "'";
        require_bus(net, l.from_bus, where);
        require_bus(net, l.to_bus, where);
        if (l.from_bus == l.to_bus) throw ValidationError(where + ": self-loop");
        const Bus& from = net.buses[net.bus_index(l.from_bus)];
        const Bus& to = net.buses[net.bus_index(l.to_bus)];
        if (from.component_label != to.component_label)
            throw ValidationError(where + ": cross-component AC line ('" +
                                  from.component_label + "' to '" + to.component_label + "')");
        if (!(l.F0 > 0.0)) throw ValidationError(where + ": F0 must be positive");
        if (l.F0 > l.F_max) throw ValidationError(where + ": F0 exceeds F_max");
        if (l.r0_pu < 0.0) throw ValidationError(where + ": negative r0_pu");
        if (!(l.x0_pu > 0.0)) throw ValidationError(where + ": x0_pu must be positive");
        if (!(l.length > 0.0)) throw ValidationError(where + ": length must be positive");
        if (!(l.base_mva > 0.0)) throw ValidationError(where + ": base_mva must be positive");
    }

    for (const auto& d : net.dc_links) {
        const std::string where = "dc_link '" + d.id + "'";
        require_bus(net, d.from_bus, where);
        require_bus(net, d.to_bus, where);
        if (d.from_bus == d.to_bus) throw ValidationError(where + ": self-loop");
        if (!(d.efficiency > 0.0) || d.efficiency > 1.0)
            throw ValidationError(where + ": efficiency out of range (0, 1]");
        if (d.F0 < 0.0) throw ValidationError(where + ": negative F0");
        if (d.F0 > d.F_max) throw ValidationError(where + ": F0 exceeds F_max");
        if (!(d.length > 0.0)) throw ValidationError(where + ": length must be positive");

        const DcLink* partner = nullptr;
        for (const auto& other : net.dc_links)
            if (other.id == d.reverse_partner_id) partner = &other;
        if (!partner)
            throw ValidationError(where + ": unknown reverse partner '" +
                                  d.reverse_partner_id + "'");
        if (partner->reverse_partner_id != d.id)
            throw ValidationError(where + ": reverse partner '" + partner->id +
                                  "' does not reference it back");
        if (partner->from_bus != d.to_bus || partner->to_bus != d.from_bus)
            throw ValidationError(where + ": reverse partner '" + partner->id +
                                  "' does not span the same corridor reversed");
        if (partner->F0 != d.F0 || partner->F_max != d.F_max || partner->length != d.length)
            throw ValidationError(where + ": reverse partner '" + partner->id +
                                  "' differs in F0/F_max/length");
    }

    for (const auto& g : net.generators) {
        const std::string where = "generator '" + g.id + "'";
        require_bus(net, g.bus, where);
        if (g.P_max < 0.0) throw ValidationError(where + ": negative P_max");
        if (!g.availability_profile.empty()) {
            const auto it = net.profiles.series.find(g.availability_profile);
            if (it == net.profiles.series.end())
                throw ValidationError(where + ": unknown availability profile '" +
                                      g.availability_profile + "'");
            for (const double v : it->second)
                if (v < 0.0 || v > 1.0)
                    throw ValidationError("profile '" + g.availability_profile +
                                          "': availability out of range [0, 1]");
        }
    }

    for (const auto& s : net.storage) {
        const std::string where = "storage '" + s.id + "'";
        require_bus(net, s.bus, where);
        for (const double eta : {s.eta_char, s.eta_dis, s.eta_idle})
            if (!(eta > 0.0) || eta > 1.0)
                throw ValidationError(where + ": efficiency out of range (0, 1]");
        if (s.c_char < 0.0 || s.c_dis < 0.0 || s.c_sto < 0.0)
            throw ValidationError(where + ": negative cost");
        if (s.P0_char < 0.0 || s.P0_dis < 0.0 || s.E0 < 0.0)
            throw ValidationError(where + ": negative existing capacity");
    }
}

Network load_network_from_string(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("network file: ") + e.what());
    }
    Network net;
    try {
        net = parse_document(doc);
    } catch (const json::exception& e) {
        throw ParseError(std::string("network file: ") + e.what());
    }
    validate_network(net);
    return net;
}

Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_network_from_string(ss.str());
}

std::string serialize_network(const Network& net) {
    json doc;
    doc["buses"] = json::array();
    for (const auto& b : net.buses) {
        json j{{"id", b.id},
               {"component_label", b.component_label},
               {"demand_profile_ref", b.demand_profile_ref}};
        if (b.coordinates) j["coordinates"] = {(*b.coordinates)[0], (*b.coordinates)[1]};
        doc["buses"].push_back(std::move(j));
    }
    doc["ac_lines"] = json::array();
    for (const auto& l : net.ac_lines)
        doc["ac_lines"].push_back({{"id", l.id},
                                   {"from_bus", l.from_bus},
                                   {"to_bus", l.to_bus},
                                   {"length", l.length},
                                   {"F0", l.F0},
                                   {"F_max", l.F_max},
                                   {"r0_pu", l.r0_pu},
                                   {"x0_pu", l.x0_pu},
                                   {"cost", l.cost},
                                   {"sssc_allowed", l.sssc_allowed},
                                   {"base_mva", l.base_mva}});
    doc["dc_links"] = json::array();
    for (const auto& d : net.dc_links)
        doc["dc_links"].push_back({{"id", d.id},
                                   {"from_bus", d.from_bus},
                                   {"to_bus", d.to_bus},
                                   {"reverse_partner_id", d.reverse_partner_id},
                                   {"F0", d.F0},
                                   {"F_max", d.F_max},
                                   {"efficiency", d.efficiency},
                                   {"length", d.length},
                                   {"cost", d.cost}});
    doc["generators"] = json::array();
    for (const auto& g : net.generators)
        doc["generators"].push_back({{"id", g.id},
                                     {"bus", g.bus},
                                     {"c_fix", g.c_fix},
                                     {"c_var", g.c_var},
                                     {"P_max", g.P_max},
                                     {"availability_profile", g.availability_profile},
                                     {"is_electrolyzer", g.is_electrolyzer},
                                     {"zero_carbon", g.zero_carbon},
                                     {"tech_tag", g.tech_tag}});
    doc["storage"] = json::array();
    for (const auto& s : net.storage)
        doc["storage"].push_back({{"id", s.id},
                                  {"bus", s.bus},
                                  {"c_char", s.c_char},
                                  {"c_dis", s.c_dis},
                                  {"c_sto", s.c_sto},
                                  {"eta_char", s.eta_char},
                                  {"eta_dis", s.eta_dis},
                                  {"eta_idle", s.eta_idle},
                                  {"P0_char", s.P0_char},
                                  {"P0_dis", s.P0_dis},
                                  {"E0", s.E0}});
    doc["time"] = json::array();
    for (const auto& p : net.time.periods)
        doc["time"].push_back(
            {{"id", p.id}, {"snapshots", p.snapshots}, {"weights", p.weights}});
    doc["profiles"] = json::array();
    for (const auto& [id, values] : net.profiles.series)
        doc["profiles"].push_back({{"id", id}, {"values", values}});
    doc["annual_hours_tolerance"] = net.annual_hours_tolerance;
    return doc.dump(2) + "\n";
}

void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << serialize_network(net);
    if (!out) throw IoError("write failed for '" + path + "'");
}

void import_profiles_csv(Network& net, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    // (period, snapshot) -> global snapshot index
    std::map<std::pair<std::string, std::string>, int> slot;
    {
        int t = 0;
        for (const auto& p : net.time.periods)
            for (const auto& s : p.snapshots) slot[{p.id, s}] = t++;
    }
    const int total = net.time.total_snapshots();

    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) {
            const auto b = cell.find_first_not_of(" \t\r");
            const auto e = cell.find_last_not_of(" \t\r");
            cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
        }
        return cells;
    };

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    const auto header = split(line);
    if (header != std::vector<std::string>{"profile_id", "period", "snapshot", "value"})
        throw ParseError(path + ": header must be profile_id,period,snapshot,value");

    std::map<std::string, std::vector<char>> covered;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split(line);
        if (cells.size() != 4)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected 4 columns");
        const auto it = slot.find({cells[1], cells[2]});
        if (it == slot.end())
            throw ParseError(path + ":" + std::to_string(line_no) + ": unknown snapshot '" +
                             cells[1] + "/" + cells[2] + "'");
        double value;
        try {
            size_t pos = 0;
            value = std::stod(cells[3], &pos);
            if (pos != cells[3].size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": bad value '" +
                             cells[3] + "'");
        }
        auto& series = net.profiles.series[cells[0]];
        if (series.empty()) series.assign(total, 0.0);
        series[it->second] = value;
        covered[cells[0]].resize(total, 0);
        covered[cells[0]][it->second] = 1;
    }
    for (const auto& [id, mask] : covered) {
        const auto miss = std::find(mask.begin(), mask.end(), 0);
        if (miss != mask.end())
            throw ValidationError("profile '" + id + "': csv leaves snapshot " +
                                  std::to_string(miss - mask.begin()) + " uncovered");
    }
    validate_network(net);
}

std::vector<ComponentSummary> validate_connectivity(const Network& net) {
    const int nb = static_cast<int>(net.buses.size());
    std::vector<int> parent(nb);
    for (int i = 0; i < nb; ++i) parent[i] = i;
    auto find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const auto& l : net.ac_lines)
        parent[find(net.bus_index(l.from_bus))] = find(net.bus_index(l.to_bus));

    std::vector<int> branch_degree(nb, 0);  // AC or DC attachments
    for (const auto& l : net.ac_lines) {
        ++branch_degree[net.bus_index(l.from_bus)];
        ++branch_degree[net.bus_index(l.to_bus)];
    }
    for (const auto& d : net.dc_links) {
        ++branch_degree[net.bus_index(d.from_bus)];
        ++branch_degree[net.bus_index(d.to_bus)];
    }
    std::vector<char> has_device(nb, 0);
    for (const auto& g : net.generators) has_device[net.bus_index(g.bus)] = 1;
    for (const auto& s : net.storage) has_device[net.bus_index(s.bus)] = 1;

    for (int b = 0; b < nb; ++b) {
        if (branch_degree[b] || has_device[b]) continue;
        bool demand = false;
        for (int t = 0; t < net.time.total_snapshots() && !demand; ++t)
            demand = net.demand(b, t) > 0.0;
        if (!demand)
            throw ValidationError("bus '" + net.buses[b].id +
                                  "': dead node (no branch, generator, storage, or demand)");
    }

    std::map<int, ComponentSummary> by_root;
    for (int b = 0; b < nb; ++b) {
        auto& c = by_root[find(b)];
        c.label = net.buses[b].component_label;
        ++c.bus_count;
        if (branch_degree[b] == 0) c.isolated_buses.push_back(net.buses[b].id);
    }
    for (const auto& l : net.ac_lines) ++by_root[find(net.bus_index(l.from_bus))].ac_line_count;

    std::vector<ComponentSummary> out;
    for (auto& [root, c] : by_root) {
        c.expected_cycles = c.ac_line_count - c.bus_count + 1;
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [](const ComponentSummary& a, const ComponentSummary& b) {
        return a.label != b.label ? a.label < b.label : a.bus_count > b.bus_count;
    });
    return out;
}

}  // namespace cem
