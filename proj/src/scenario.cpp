#include "cem/scenario.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cem {

using nlohmann::json;

namespace {

double num_field(const json& j, const std::string& key, double fallback, bool required = false) {
    if (!j.contains(key) || j.at(key).is_null()) {
        if (required) throw ParseError("scenario: missing field '" + key + "'");
        return fallback;
    }
    const auto& v = j.at(key);
    if (!v.is_number()) throw ParseError("scenario: field '" + key + "' must be a number");
    return v.get<double>();
}

}  // namespace

Scenario load_scenario_from_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("scenario: top level must be an object");

    Scenario s;
    if (!j.contains("name") || !j.at("name").is_string())
        throw ParseError("scenario: missing field 'name'");
    s.name = j.at("name").get<std::string>();
    s.demand_scale = num_field(j, "demand_scale", 1.0);
    s.electrolysis_twh = num_field(j, "electrolysis_twh", 0.0);
    if (j.contains("transmission_budget_tw_mile") && !j.at("transmission_budget_tw_mile").is_null())
        s.budget_tw_mile = num_field(j, "transmission_budget_tw_mile", 0.0, true);
    s.reserve_margin = num_field(j, "reserve_margin", 0.0);
    s.zero_carbon_min = num_field(j, "zero_carbon_min", 0.0);

    if (j.contains("sssc") && !j.at("sssc").is_null()) {
        const auto& sj = j.at("sssc");
        if (!sj.is_object()) throw ParseError("scenario: 'sssc' must be an object or null");
        s.sssc.allowed = true;
        s.sssc.cost_per_kvar_yr = num_field(sj, "cost_per_kvar_yr", 0.0, true);
        if (sj.contains("total_cap_gvar") && !sj.at("total_cap_gvar").is_null())
            s.sssc.total_cap_gvar = num_field(sj, "total_cap_gvar", 0.0, true);
    }

    if (j.contains("share_constraints")) {
        const auto& arr = j.at("share_constraints");
        if (!arr.is_array()) throw ParseError("scenario: 'share_constraints' must be an array");
        for (const auto& cj : arr) {
            ShareConstraint c;
            if (!cj.contains("tech_tags") || !cj.at("tech_tags").is_array())
                throw ParseError("scenario: share constraint missing 'tech_tags'");
            for (const auto& t : cj.at("tech_tags")) c.tech_tags.push_back(t.get<std::string>());
            const bool has_min = cj.contains("min_share") && !cj.at("min_share").is_null();
            const bool has_max = cj.contains("max_share") && !cj.at("max_share").is_null();
            if (has_min == has_max)
                throw ParseError(
                    "scenario: share constraint needs exactly one of 'min_share'/'max_share'");
            c.is_min = has_min;
            c.fraction = num_field(cj, has_min ? "min_share" : "max_share", 0.0, true);
            if (c.fraction < 0 || c.fraction > 1)
                throw ParseError("scenario: share fraction out of range [0, 1]");
            s.share_constraints.push_back(std::move(c));
        }
    }

    if (s.demand_scale < 0) throw ParseError("scenario: demand_scale must be nonnegative");
    if (s.electrolysis_twh < 0) throw ParseError("scenario: electrolysis_twh must be nonnegative");
    if (s.budget_tw_mile && *s.budget_tw_mile < 0)
        throw ParseError("scenario: transmission budget must be nonnegative");
    if (s.reserve_margin < 0) throw ParseError("scenario: reserve_margin must be nonnegative");
    if (s.zero_carbon_min < 0 || s.zero_carbon_min > 1)
        throw ParseError("scenario: zero_carbon_min out of range [0, 1]");
    if (s.sssc.allowed) {
        if (s.sssc.cost_per_kvar_yr < 0)
            throw ParseError("scenario: sssc cost must be nonnegative");
        if (s.sssc.total_cap_gvar && *s.sssc.total_cap_gvar < 0)
            throw ParseError("scenario: sssc total cap must be nonnegative");
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return load_scenario_from_string(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["demand_scale"] = s.demand_scale;
    j["electrolysis_twh"] = s.electrolysis_twh;
    if (s.budget_tw_mile)
        j["transmission_budget_tw_mile"] = *s.budget_tw_mile;
    else
        j["transmission_budget_tw_mile"] = nullptr;
    j["reserve_margin"] = s.reserve_margin;
    j["zero_carbon_min"] = s.zero_carbon_min;
    if (s.sssc.allowed) {
        json sj;
        sj["cost_per_kvar_yr"] = s.sssc.cost_per_kvar_yr;
        if (s.sssc.total_cap_gvar) sj["total_cap_gvar"] = *s.sssc.total_cap_gvar;
        j["sssc"] = sj;
    } else {
        j["sssc"] = nullptr;
    }
    j["share_constraints"] = json::array();
    for (const auto& c : s.share_constraints) {
        json cj;
        cj["tech_tags"] = c.tech_tags;
        cj[c.is_min ? "min_share" : "max_share"] = c.fraction;
        j["share_constraints"].push_back(cj);
    }
    return j.dump(2) + "\n";
}

}  // namespace cem
