#include "cem/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <utility>

#include <json.hpp>

namespace cem {

namespace {

constexpr double kHoursPerYear = 8760.0;
constexpr double kMwMilePerTwMile = 1e9;
constexpr double kMvarPerGvar = 1e3;

std::string sanitize_filename(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
        if (!ok) c = '_';
    }
    return out;
}

std::ofstream open_out(const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
    return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& file) {
    out.flush();
    if (!out.good()) throw IoError("write to '" + file.string() + "' failed");
}

const char* kCostsHeader =
    "label,objective,gen_fix,gen_var,ac_lines,dc_links,storage_char,storage_dis,storage_energy,"
    "sssc\n";

void costs_row(std::ofstream& out, const std::string& label, double objective,
               const CostBreakdown& c) {
    out << label << ',' << format_double(objective) << ',' << format_double(c.gen_fix) << ','
        << format_double(c.gen_var) << ',' << format_double(c.ac_lines) << ','
        << format_double(c.dc_links) << ',' << format_double(c.storage_char) << ','
        << format_double(c.storage_dis) << ',' << format_double(c.storage_energy) << ','
        << format_double(c.sssc) << '\n';
}

const char* kLinesHeader = "label,kind,id,length_miles,f0_mw,f_star_mw,q_mvar\n";

void lines_rows(std::ofstream& out, const Network& net, const PlanResult& result,
                const std::string& label) {
    const auto& cat = result.lp.cat;
    for (std::size_t l = 0; l < net.ac_lines.size(); ++l) {
        const AcLine& line = net.ac_lines[l];
        const double f_star = result.solution.value(cat.F_l[l]);
        const double q_mvar = line.base_mva * result.solution.value(cat.Q_l[l]);
        out << label << ",ac," << line.id << ',' << format_double(line.length) << ','
            << format_double(line.F0) << ',' << format_double(f_star) << ','
            << format_double(q_mvar) << '\n';
    }
    for (std::size_t i = 0; i < net.dc_links.size(); ++i) {
        const DcLink& link = net.dc_links[i];
        const double f_star = result.solution.value(cat.F_i[i]);
        out << label << ",dc," << link.id << ',' << format_double(link.length) << ','
            << format_double(link.F0) << ',' << format_double(f_star) << ",\n";
    }
}

double monotone_slack(double cost) { return 1e-6 * (1.0 + std::abs(cost)); }

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

CostBreakdown ValueReport::cost_delta() const {
    CostBreakdown d;
    d.gen_fix = costs_with.gen_fix - costs_no.gen_fix;
    d.gen_var = costs_with.gen_var - costs_no.gen_var;
    d.ac_lines = costs_with.ac_lines - costs_no.ac_lines;
    d.dc_links = costs_with.dc_links - costs_no.dc_links;
    d.storage_char = costs_with.storage_char - costs_no.storage_char;
    d.storage_dis = costs_with.storage_dis - costs_no.storage_dis;
    d.storage_energy = costs_with.storage_energy - costs_no.storage_energy;
    d.sssc = costs_with.sssc - costs_no.sssc;
    return d;
}

double fleet_ac_capacity_factor(const Network& net, const TimeStructure& time,
                                const PlanResult& result) {
    const auto& cat = result.lp.cat;
    const std::vector<double> w = time.flat_weights();
    double energy = 0.0, rating = 0.0;
    for (std::size_t l = 0; l < net.ac_lines.size(); ++l) {
        rating += result.solution.value(cat.F_l[l]);
        for (int t = 0; t < cat.T; ++t)
            energy += w[t] * std::abs(result.solution.value(cat.f(static_cast<int>(l), t)));
    }
    const double denom = kHoursPerYear * rating;
    return denom > 0.0 ? energy / denom : 0.0;
}

double installed_q_mvar(const Network& net, const PlanResult& result) {
    double total = 0.0;
    for (std::size_t l = 0; l < net.ac_lines.size(); ++l)
        total += net.ac_lines[l].base_mva * result.solution.value(result.lp.cat.Q_l[l]);
    return total;
}

double used_expansion_tw_mile(const Network& net, const PlanResult& result) {
    const auto& cat = result.lp.cat;
    double mw_mile = 0.0;
    for (std::size_t l = 0; l < net.ac_lines.size(); ++l) {
        const double built = result.solution.value(cat.F_l[l]) - net.ac_lines[l].F0;
        mw_mile += net.ac_lines[l].length * std::max(0.0, built);
    }
    for (std::size_t i = 0; i < net.dc_links.size(); ++i) {
        const double built = result.solution.value(cat.F_i[i]) - net.dc_links[i].F0;
        mw_mile += 0.5 * net.dc_links[i].length * std::max(0.0, built);
    }
    return mw_mile / kMwMilePerTwMile;
}

double max_expansion_tw_mile(const Network& net) {
    double mw_mile = 0.0;
    for (const AcLine& l : net.ac_lines) mw_mile += l.length * (l.F_max - l.F0);
    for (const DcLink& i : net.dc_links) mw_mile += 0.5 * i.length * (i.F_max - i.F0);
    return mw_mile / kMwMilePerTwMile;
}

ValueReport run_pair(const Network& net, const Scenario& scenario, const TimeStructure& time,
                     const ConvergenceConfig& config, bool compute_avoided) {
    ValueReport rep;
    rep.scenario = scenario.name;

    auto run_side = [&](const SsscSpec& spec, bool& feasible, bool& converged,
                        std::optional<PlanResult>& slot) {
        try {
            PlanResult pr = plan(net, scenario, time, config, spec);
            feasible = true;
            converged = pr.converged();
            slot = std::move(pr);
        } catch (const InfeasibleScenario&) {
            feasible = false;
        }
    };
    run_side(SsscSpec::off(), rep.no_sssc_feasible, rep.no_sssc_converged, rep.result_no);
    run_side(sssc_spec_from(scenario.sssc), rep.with_sssc_feasible, rep.with_sssc_converged,
             rep.result_with);

    if (rep.no_sssc_feasible) {
        rep.cost_no_sssc = rep.result_no->solution.objective;
        rep.costs_no = rep.result_no->solution.costs;
        rep.ac_capacity_factor_no = fleet_ac_capacity_factor(net, time, *rep.result_no);
    }
    if (rep.with_sssc_feasible) {
        rep.cost_with_sssc = rep.result_with->solution.objective;
        rep.costs_with = rep.result_with->solution.costs;
        rep.sssc_invest_cost = rep.costs_with.sssc;
        rep.ac_capacity_factor_with = fleet_ac_capacity_factor(net, time, *rep.result_with);
        rep.installed_q_gvar = installed_q_mvar(net, *rep.result_with) / kMvarPerGvar;
    }
    if (rep.no_sssc_feasible && rep.with_sssc_feasible) {
        rep.cost_saving = rep.cost_no_sssc - rep.cost_with_sssc;
        rep.ac_capacity_factor_delta_pp =
            100.0 * (rep.ac_capacity_factor_with - rep.ac_capacity_factor_no);
        if (rep.sssc_invest_cost > 1e-9 * std::max(1.0, std::abs(rep.cost_with_sssc)))
            rep.benefit_cost_ratio =
                (rep.cost_saving + rep.sssc_invest_cost) / rep.sssc_invest_cost;
        if (compute_avoided)
            rep.avoided = avoided_transmission(net, scenario, time, rep.cost_with_sssc, config,
                                               used_expansion_tw_mile(net, *rep.result_with));
    }
    return rep;
}

AvoidedTransmission avoided_transmission(const Network& net, const Scenario& scenario,
                                         const TimeStructure& time, double target_cost,
                                         const ConvergenceConfig& config,
                                         double used_expansion) {
    AvoidedTransmission out;
    out.used_expansion_tw_mile = used_expansion;

    Scenario probe = scenario;
    probe.sssc = SsscPolicy{};  // comparison curve is compensation-free

    const double u_max = max_expansion_tw_mile(net);
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<std::pair<double, double>> seen;  // (budget, cost)
    auto eval = [&](double budget) {
        probe.budget_tw_mile = budget;
        double cost = inf;
        try {
            cost = plan(net, probe, time, config, SsscSpec::off()).solution.objective;
        } catch (const InfeasibleScenario&) {
        }
        for (const auto& [b2, c2] : seen) {
            const bool rising = (b2 < budget && cost > c2 + monotone_slack(c2)) ||
                                (b2 > budget && c2 > cost + monotone_slack(cost));
            if (rising)
                throw BackendError("cost is not non-increasing in the transmission budget near " +
                                   format_double(budget) + " TW-mile");
        }
        seen.emplace_back(budget, cost);
        return cost;
    };

    const double slack = 1e-9 * (1.0 + std::abs(target_cost));
    const double best_cost = eval(u_max);
    if (!(best_cost <= target_cost + slack)) return out;  // unattainable
    out.attainable = true;

    const double floor_cost = u_max > 0.0 ? eval(0.0) : best_cost;
    if (floor_cost <= target_cost + slack) {
        out.budget_required_tw_mile = 0.0;
    } else {
        double lo = 0.0, hi = u_max;
        const double tol = 1e-3 * u_max;
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            if (eval(mid) <= target_cost + slack)
                hi = mid;
            else
                lo = mid;
        }
        out.budget_required_tw_mile = hi;
    }
    out.tw_mile = out.budget_required_tw_mile - out.used_expansion_tw_mile;
    return out;
}

AvoidedTransmission avoided_transmission(const Network& net, const Scenario& scenario,
                                         const TimeStructure& time, double target_cost,
                                         const ConvergenceConfig& config) {
    const PlanResult with = plan(net, scenario, time, config);
    return avoided_transmission(net, scenario, time, target_cost, config,
                                used_expansion_tw_mile(net, with));
}

BcrCurve sweep_sssc_caps(const Network& net, const Scenario& scenario, const TimeStructure& time,
                         const std::vector<double>& caps_gvar, const ConvergenceConfig& config) {
    if (caps_gvar.empty()) throw DomainError("cap sweep needs at least one cap");
    for (std::size_t i = 0; i < caps_gvar.size(); ++i) {
        if (!(caps_gvar[i] >= 0.0))
            throw DomainError("cap sweep values must be non-negative, got " +
                              format_double(caps_gvar[i]));
        if (i > 0 && caps_gvar[i] < caps_gvar[i - 1])
            throw DomainError("cap sweep values must be sorted ascending");
    }
    if (!scenario.sssc.allowed)
        throw DomainError("scenario '" + scenario.name +
                          "' forbids series compensation; a device cost is needed to sweep caps");

    const SsscSpec policy = sssc_spec_from(scenario.sssc);

    BcrCurve curve;
    curve.scenario = scenario.name;
    curve.cost_no_sssc = plan(net, scenario, time, config, SsscSpec::off()).solution.objective;

    double prev_saving = 0.0, prev_invest = 0.0;
    for (double cap : caps_gvar) {
        const SsscSpec spec = SsscSpec::capped(policy.cost_per_mvar_yr, cap * kMvarPerGvar);
        const PlanResult pr = plan(net, scenario, time, config, spec);

        BcrPoint p;
        p.cap_gvar = cap;
        p.cost = pr.solution.objective;
        p.cumulative_saving = curve.cost_no_sssc - p.cost;
        p.sssc_invest_cost = pr.solution.costs.sssc;
        p.installed_q_gvar = installed_q_mvar(net, pr) / kMvarPerGvar;
        p.converged = pr.converged();

        const double d_invest = p.sssc_invest_cost - prev_invest;
        const double d_saving = p.cumulative_saving - prev_saving;
        if (d_invest > 1e-9 * (1.0 + std::abs(p.sssc_invest_cost)))
            p.interval_bcr = (d_saving + d_invest) / d_invest;

        prev_saving = p.cumulative_saving;
        prev_invest = p.sssc_invest_cost;
        curve.points.push_back(p);
    }
    return curve;
}

void write_costs_csv(const CostBreakdown& costs, double objective, const std::string& label,
                     const std::filesystem::path& file) {
    auto out = open_out(file);
    out << kCostsHeader;
    costs_row(out, label, objective, costs);
    close_out(out, file);
}

void write_lines_csv(const Network& net, const PlanResult& result, const std::string& label,
                     const std::filesystem::path& file) {
    auto out = open_out(file);
    out << kLinesHeader;
    lines_rows(out, net, result, label);
    close_out(out, file);
}

void write_bcr_csv(const BcrCurve& curve, const std::filesystem::path& file) {
    auto out = open_out(file);
    out << "cap_gvar,cost,cumulative_saving,sssc_invest_cost,installed_q_gvar,interval_bcr,"
           "converged\n";
    for (const BcrPoint& p : curve.points) {
        out << format_double(p.cap_gvar) << ',' << format_double(p.cost) << ','
            << format_double(p.cumulative_saving) << ',' << format_double(p.sssc_invest_cost)
            << ',' << format_double(p.installed_q_gvar) << ','
            << (p.interval_bcr ? format_double(*p.interval_bcr) : std::string()) << ','
            << (p.converged ? "true" : "false") << '\n';
    }
    close_out(out, file);
}

void write_network_geojson(const Network& net, const PlanResult* result,
                           const std::filesystem::path& file) {
    using json = nlohmann::ordered_json;

    auto coords = [&](const std::string& bus_id) -> const std::optional<std::array<double, 2>>& {
        return net.buses[net.bus_index(bus_id)].coordinates;
    };

    json features = json::array();
    for (const Bus& b : net.buses) {
        if (!b.coordinates) continue;
        json f;
        f["type"] = "Feature";
        f["geometry"] = {{"type", "Point"}, {"coordinates", {(*b.coordinates)[0], (*b.coordinates)[1]}}};
        f["properties"] = {{"kind", "bus"}, {"id", b.id}};
        features.push_back(std::move(f));
    }
    for (std::size_t l = 0; l < net.ac_lines.size(); ++l) {
        const AcLine& line = net.ac_lines[l];
        const auto& a = coords(line.from_bus);
        const auto& b = coords(line.to_bus);
        if (!a || !b) continue;
        json f;
        f["type"] = "Feature";
        f["geometry"] = {{"type", "LineString"},
                         {"coordinates", {{(*a)[0], (*a)[1]}, {(*b)[0], (*b)[1]}}}};
        json props = {{"kind", "ac_line"}, {"id", line.id},      {"from", line.from_bus},
                      {"to", line.to_bus}, {"length_miles", line.length}, {"f0_mw", line.F0}};
        if (result) {
            props["f_star_mw"] = result->solution.value(result->lp.cat.F_l[l]);
            props["q_mvar"] =
                line.base_mva * result->solution.value(result->lp.cat.Q_l[l]);
        }
        f["properties"] = std::move(props);
        features.push_back(std::move(f));
    }
    for (std::size_t i = 0; i < net.dc_links.size(); ++i) {
        const DcLink& link = net.dc_links[i];
        const auto& a = coords(link.from_bus);
        const auto& b = coords(link.to_bus);
        if (!a || !b) continue;
        json f;
        f["type"] = "Feature";
        f["geometry"] = {{"type", "LineString"},
                         {"coordinates", {{(*a)[0], (*a)[1]}, {(*b)[0], (*b)[1]}}}};
        json props = {{"kind", "dc_link"},
                      {"id", link.id},
                      {"from", link.from_bus},
                      {"to", link.to_bus},
                      {"length_miles", link.length},
                      {"f0_mw", link.F0}};
        if (result) props["f_star_mw"] = result->solution.value(result->lp.cat.F_i[i]);
        f["properties"] = std::move(props);
        features.push_back(std::move(f));
    }
    if (result) {
        for (std::size_t l = 0; l < net.ac_lines.size(); ++l) {
            const AcLine& line = net.ac_lines[l];
            const double q_mvar =
                line.base_mva * result->solution.value(result->lp.cat.Q_l[l]);
            if (q_mvar <= 1e-6) continue;
            const auto& a = coords(line.from_bus);
            const auto& b = coords(line.to_bus);
            if (!a || !b) continue;
            json f;
            f["type"] = "Feature";
            f["geometry"] = {{"type", "Point"},
                             {"coordinates",
                              {0.5 * ((*a)[0] + (*b)[0]), 0.5 * ((*a)[1] + (*b)[1])}}};
            f["properties"] = {{"kind", "sssc"}, {"line", line.id}, {"q_mvar", q_mvar}};
            features.push_back(std::move(f));
        }
    }

    json doc;
    doc["type"] = "FeatureCollection";
    doc["features"] = std::move(features);

    auto out = open_out(file);
    out << doc.dump(2) << '\n';
    close_out(out, file);
}

void emit_report(const Network& net, const std::vector<ValueReport>& reports,
                 const BcrCurve* curve, const PlanResult* map_solution,
                 const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "'");

    std::vector<const ValueReport*> ordered;
    for (const ValueReport& r : reports) ordered.push_back(&r);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const ValueReport* a, const ValueReport* b) {
                         return a->scenario < b->scenario;
                     });

    {
        auto out = open_out(out_dir / "costs.csv");
        out << kCostsHeader;
        for (const ValueReport* r : ordered) {
            if (r->no_sssc_feasible)
                costs_row(out, r->scenario + "/no_sssc", r->cost_no_sssc, r->costs_no);
            if (r->with_sssc_feasible)
                costs_row(out, r->scenario + "/with_sssc", r->cost_with_sssc, r->costs_with);
            if (r->no_sssc_feasible && r->with_sssc_feasible)
                costs_row(out, r->scenario + "/delta", r->cost_with_sssc - r->cost_no_sssc,
                          r->cost_delta());
        }
        close_out(out, out_dir / "costs.csv");
    }
    {
        auto out = open_out(out_dir / "lines.csv");
        out << kLinesHeader;
        for (const ValueReport* r : ordered) {
            if (r->no_sssc_feasible)
                lines_rows(out, net, *r->result_no, r->scenario + "/no_sssc");
            if (r->with_sssc_feasible)
                lines_rows(out, net, *r->result_with, r->scenario + "/with_sssc");
        }
        close_out(out, out_dir / "lines.csv");
    }
    for (const ValueReport* r : ordered) {
        const std::string stem = sanitize_filename(r->scenario);
        if (r->no_sssc_feasible)
            write_trace_csv(r->result_no->state,
                            (out_dir / ("trace_" + stem + "_no_sssc.csv")).string());
        if (r->with_sssc_feasible)
            write_trace_csv(r->result_with->state,
                            (out_dir / ("trace_" + stem + "_with_sssc.csv")).string());
    }
    if (curve) write_bcr_csv(*curve, out_dir / "bcr_curve.csv");

    const PlanResult* geo = map_solution;
    if (!geo) {
        for (const ValueReport* r : ordered) {
            if (r->with_sssc_feasible) {
                geo = &*r->result_with;
                break;
            }
            if (!geo && r->no_sssc_feasible) geo = &*r->result_no;
        }
    }
    write_network_geojson(net, geo, out_dir / "network.geojson");
}

}  // namespace cem
