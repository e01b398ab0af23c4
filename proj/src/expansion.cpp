#include "cem/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace cem {

namespace {

constexpr double kMwhPerTwh = 1e6;
constexpr double kMwMilePerTwMile = 1e9;
constexpr double kMvarPerGvar = 1e3;
constexpr double kPerMvarFromPerKvar = 1e3;

void require_size(const std::string& what, std::size_t got, std::size_t want) {
    if (got != want)
        throw ModelBuildError(what + ": expected " + std::to_string(want) + " entries, got " +
                              std::to_string(got));
}

void validate_fixed(const Network& net, const FixedParams& fixed) {
    const std::size_t L = net.ac_lines.size();
    require_size("fixed capacities", fixed.F_fix_mw.size(), L);
    require_size("fixed resistances", fixed.r_pu.size(), L);
    require_size("fixed reactances", fixed.x_pu.size(), L);
    require_size("loss envelopes", fixed.envelopes.size(), L);
    for (std::size_t l = 0; l < L; ++l) {
        const auto& id = net.ac_lines[l].id;
        if (!(fixed.F_fix_mw[l] > 0))
            throw DomainError("line " + id + ": fixed capacity must be positive");
        if (!(fixed.x_pu[l] > 0)) throw DomainError("line " + id + ": reactance must be positive");
        if (fixed.r_pu[l] < 0) throw DomainError("line " + id + ": negative resistance");
        if (fixed.envelopes[l].segments.empty())
            throw ModelBuildError("line " + id + ": loss envelope has no segments");
    }
}

std::string snap(const std::string& id, int t) { return id + "_" + std::to_string(t); }

}  // namespace

SsscSpec SsscSpec::invest(double cost_per_mvar_yr) {
    SsscSpec s;
    s.mode = SsscMode::Invest;
    s.cost_per_mvar_yr = cost_per_mvar_yr;
    return s;
}

SsscSpec SsscSpec::capped(double cost_per_mvar_yr, double total_cap_mvar) {
    SsscSpec s;
    s.mode = SsscMode::Capped;
    s.cost_per_mvar_yr = cost_per_mvar_yr;
    s.total_cap_mvar = total_cap_mvar;
    return s;
}

SsscSpec SsscSpec::fixed(std::map<std::string, double> q_pu_by_line) {
    SsscSpec s;
    s.mode = SsscMode::Fixed;
    s.fixed_q_pu = std::move(q_pu_by_line);
    return s;
}

SsscSpec sssc_spec_from(const SsscPolicy& policy) {
    if (!policy.allowed) return SsscSpec::off();
    const double cost = policy.cost_per_kvar_yr * kPerMvarFromPerKvar;
    if (policy.total_cap_gvar)
        return SsscSpec::capped(cost, *policy.total_cap_gvar * kMvarPerGvar);
    return SsscSpec::invest(cost);
}

FixedParams fixed_params(const Network& net, const std::vector<double>& F_fix_mw,
                         const std::vector<double>& r_pu, const std::vector<double>& x_pu,
                         int segments) {
    FixedParams fp{F_fix_mw, r_pu, x_pu, {}};
    const std::size_t L = net.ac_lines.size();
    require_size("fixed capacities", F_fix_mw.size(), L);
    require_size("fixed resistances", r_pu.size(), L);
    require_size("fixed reactances", x_pu.size(), L);
    fp.envelopes.reserve(L);
    for (std::size_t l = 0; l < L; ++l) {
        const auto& line = net.ac_lines[l];
        if (!(F_fix_mw[l] > 0))
            throw DomainError("line " + line.id + ": fixed capacity must be positive");
        auto env = fit_segments(r_pu[l], F_fix_mw[l] / line.base_mva, segments);
        env.line_id = line.id;
        fp.envelopes.push_back(std::move(env));
    }
    validate_fixed(net, fp);
    return fp;
}

FixedParams initial_fixed_params(const Network& net, int segments) {
    std::vector<double> F0, r0, x0;
    for (const auto& l : net.ac_lines) {
        F0.push_back(l.F0);
        r0.push_back(l.r0_pu);
        x0.push_back(l.x0_pu);
    }
    return fixed_params(net, F0, r0, x0, segments);
}

PlanningLP build_lp(const Network& net, const Scenario& sc, const TimeStructure& time,
                    const FixedParams& fixed, const SsscSpec& sssc) {
    const int T = time.total_snapshots();
    if (T <= 0) throw ModelBuildError("time axis has no snapshots");
    if (T != net.time.total_snapshots())
        throw ModelBuildError("time axis spans " + std::to_string(T) +
                              " snapshots, network profiles carry " +
                              std::to_string(net.time.total_snapshots()));
    validate_fixed(net, fixed);

    const int B = static_cast<int>(net.buses.size());
    const int G = static_cast<int>(net.generators.size());
    const int L = static_cast<int>(net.ac_lines.size());
    const int I = static_cast<int>(net.dc_links.size());
    const int S = static_cast<int>(net.storage.size());
    const int K = static_cast<int>(time.periods.size());
    const std::vector<double> w = time.flat_weights();

    // which lines carry an active compensator in this build
    std::vector<char> comp(L, 0);
    switch (sssc.mode) {
        case SsscMode::Off:
            break;
        case SsscMode::Invest:
        case SsscMode::Capped:
            if (sssc.cost_per_mvar_yr < 0)
                throw DomainError("negative series compensation cost");
            if (sssc.mode == SsscMode::Capped && sssc.total_cap_mvar < 0)
                throw DomainError("negative series compensation cap");
            for (int l = 0; l < L; ++l) comp[l] = net.ac_lines[l].sssc_allowed ? 1 : 0;
            break;
        case SsscMode::Fixed:
            for (const auto& [id, q] : sssc.fixed_q_pu) {
                const int l = net.ac_line_index(id);
                if (!net.ac_lines[l].sssc_allowed)
                    throw ModelBuildError("line " + id + ": series compensation not allowed");
                if (q < 0) throw DomainError("line " + id + ": negative compensation rating");
                comp[l] = 1;
            }
            break;
    }

    PlanningLP out;
    LpProblem& lp = out.lp;
    VariableCatalog& cat = out.cat;
    cat.T = T;

    // --- investment columns ---
    for (const auto& g : net.generators)
        cat.P_g.push_back(lp.add_col("P_" + g.id, 0.0, g.P_max, g.c_fix));
    for (const auto& l : net.ac_lines)
        cat.F_l.push_back(lp.add_col("F_" + l.id, l.F0, l.F_max, l.cost));
    for (const auto& i : net.dc_links)
        cat.F_i.push_back(lp.add_col("Fdc_" + i.id, i.F0, i.F_max, i.cost));
    for (const auto& s : net.storage) {
        cat.P_char.push_back(lp.add_col("Pch_" + s.id, s.P0_char, kInf, s.c_char));
        cat.P_dis.push_back(lp.add_col("Pdis_" + s.id, s.P0_dis, kInf, s.c_dis));
        cat.E_s.push_back(lp.add_col("E_" + s.id, s.E0, kInf, s.c_sto));
    }
    cat.Q_l.assign(L, -1);
    if (sssc.mode == SsscMode::Invest || sssc.mode == SsscMode::Capped) {
        for (int l = 0; l < L; ++l) {
            if (!comp[l]) continue;
            const auto& line = net.ac_lines[l];
            cat.Q_l[l] = lp.add_col("Q_" + line.id, 0.0, kInf,
                                    sssc.cost_per_mvar_yr * line.base_mva);
        }
    }

    // --- operational columns ---
    for (int g = 0; g < G; ++g) {
        const auto& gen = net.generators[g];
        for (int t = 0; t < T; ++t) {
            const double lo = gen.is_electrolyzer ? -kInf : 0.0;
            const double hi = gen.is_electrolyzer ? 0.0 : kInf;
            cat.p_gt.push_back(lp.add_col("p_" + snap(gen.id, t), lo, hi, gen.c_var * w[t]));
        }
    }
    for (int s = 0; s < S; ++s) {
        const auto& su = net.storage[s];
        for (int t = 0; t < T; ++t)
            cat.p_char_st.push_back(lp.add_col("pch_" + snap(su.id, t), 0.0, kInf, 0.0));
        for (int t = 0; t < T; ++t)
            cat.p_dis_st.push_back(lp.add_col("pdis_" + snap(su.id, t), 0.0, kInf, 0.0));
        for (int t = 0; t < T; ++t)
            cat.e_st.push_back(lp.add_col("e_" + snap(su.id, t), 0.0, kInf, 0.0));
        for (int k = 0; k < K; ++k)
            cat.e0_sk.push_back(
                lp.add_col("e0_" + su.id + "_" + time.periods[k].id, 0.0, kInf, 0.0));
    }
    for (int l = 0; l < L; ++l) {
        const auto& line = net.ac_lines[l];
        for (int t = 0; t < T; ++t)
            cat.f_lt.push_back(lp.add_col("f_" + snap(line.id, t), -line.F_max, line.F_max, 0.0));
    }
    for (int i = 0; i < I; ++i) {
        const auto& link = net.dc_links[i];
        for (int t = 0; t < T; ++t)
            cat.f_it.push_back(lp.add_col("fdc_" + snap(link.id, t), 0.0, link.F_max, 0.0));
    }
    for (int l = 0; l < L; ++l)
        for (int t = 0; t < T; ++t)
            cat.l_lt.push_back(lp.add_col("loss_" + snap(net.ac_lines[l].id, t), 0.0, kInf, 0.0));
    for (int s = 0; s < S; ++s)
        for (int t = 0; t < T; ++t)
            cat.R_st.push_back(lp.add_col("Rs_" + snap(net.storage[s].id, t), -kInf, kInf, 0.0));
    for (int l = 0; l < L; ++l) {
        const auto& line = net.ac_lines[l];
        for (int t = 0; t < T; ++t)
            cat.R_lt.push_back(
                lp.add_col("Rl_" + snap(line.id, t), -line.F_max, line.F_max, 0.0));
    }
    for (int i = 0; i < I; ++i) {
        const auto& link = net.dc_links[i];
        for (int t = 0; t < T; ++t)
            cat.R_it.push_back(lp.add_col("Rdc_" + snap(link.id, t), 0.0, link.F_max, 0.0));
    }
    if (sssc.mode != SsscMode::Off) {
        cat.q_lt.assign(static_cast<std::size_t>(L) * T, -1);
        for (int l = 0; l < L; ++l) {
            if (!comp[l]) continue;
            const auto& line = net.ac_lines[l];
            double lo = -kInf, hi = kInf;
            if (sssc.mode == SsscMode::Fixed) {
                const double q = sssc.fixed_q_pu.at(line.id);
                lo = -q;
                hi = q;
            }
            for (int t = 0; t < T; ++t)
                cat.q_lt[static_cast<std::size_t>(l) * T + t] =
                    lp.add_col("qt_" + snap(line.id, t), lo, hi, 0.0);
        }
    }

    // adjacency used by balance and reserve rows
    std::vector<std::vector<int>> gens_at(B), storage_at(B);
    for (int g = 0; g < G; ++g) gens_at[net.bus_index(net.generators[g].bus)].push_back(g);
    for (int s = 0; s < S; ++s) storage_at[net.bus_index(net.storage[s].bus)].push_back(s);
    std::vector<int> ac_from(L), ac_to(L), dc_from(I), dc_to(I);
    for (int l = 0; l < L; ++l) {
        ac_from[l] = net.bus_index(net.ac_lines[l].from_bus);
        ac_to[l] = net.bus_index(net.ac_lines[l].to_bus);
    }
    for (int i = 0; i < I; ++i) {
        dc_from[i] = net.bus_index(net.dc_links[i].from_bus);
        dc_to[i] = net.bus_index(net.dc_links[i].to_bus);
    }

    // --- nodal balance: generation + net imports - half of incident losses = demand ---
    for (int b = 0; b < B; ++b) {
        for (int t = 0; t < T; ++t) {
            std::vector<std::pair<int, double>> terms;
            for (int g : gens_at[b]) terms.emplace_back(cat.pg(g, t), 1.0);
            for (int s : storage_at[b]) {
                terms.emplace_back(cat.pdis(s, t), 1.0);
                terms.emplace_back(cat.pch(s, t), -1.0);
            }
            for (int l = 0; l < L; ++l) {
                if (ac_from[l] == b) terms.emplace_back(cat.f(l, t), -1.0);
                if (ac_to[l] == b) terms.emplace_back(cat.f(l, t), 1.0);
                if (ac_from[l] == b || ac_to[l] == b)
                    terms.emplace_back(cat.loss(l, t), -0.5);
            }
            for (int i = 0; i < I; ++i) {
                if (dc_from[i] == b) terms.emplace_back(cat.fdc(i, t), -1.0);
                if (dc_to[i] == b) terms.emplace_back(cat.fdc(i, t), net.dc_links[i].efficiency);
            }
            const double d = net.demand(b, t) * sc.demand_scale;
            lp.add_row("bal_" + snap(net.buses[b].id, t), "balance", d, d, terms);
        }
    }

    // --- annual electrolysis energy ---
    bool any_electro = false;
    for (const auto& g : net.generators) any_electro |= g.is_electrolyzer;
    if (any_electro || sc.electrolysis_twh != 0.0) {
        std::vector<std::pair<int, double>> terms;
        for (int g = 0; g < G; ++g) {
            if (!net.generators[g].is_electrolyzer) continue;
            for (int t = 0; t < T; ++t) terms.emplace_back(cat.pg(g, t), -w[t]);
        }
        const double d = sc.electrolysis_twh * kMwhPerTwh;
        lp.add_row("h2", "h2", d, d, terms);
    }

    // --- transmission expansion budget, MW-mile; DC corridors counted once ---
    if (sc.budget_tw_mile) {
        std::vector<std::pair<int, double>> terms;
        double existing = 0.0;
        for (int l = 0; l < L; ++l) {
            terms.emplace_back(cat.F_l[l], net.ac_lines[l].length);
            existing += net.ac_lines[l].length * net.ac_lines[l].F0;
        }
        for (int i = 0; i < I; ++i) {
            terms.emplace_back(cat.F_i[i], 0.5 * net.dc_links[i].length);
            existing += 0.5 * net.dc_links[i].length * net.dc_links[i].F0;
        }
        lp.add_row("budget", "budget", -kInf,
                   *sc.budget_tw_mile * kMwMilePerTwMile + existing, terms);
    }

    // --- paired DC links share one rating ---
    for (int i = 0; i < I; ++i) {
        const auto& link = net.dc_links[i];
        if (link.reverse_partner_id.empty() || link.id >= link.reverse_partner_id) continue;
        const int j = net.dc_link_index(link.reverse_partner_id);
        lp.add_row("dcsym_" + link.id, "dc_sym", 0.0, 0.0,
                   {{cat.F_i[i], 1.0}, {cat.F_i[j], -1.0}});
    }

    // --- dispatch limited by built capacity ---
    for (int g = 0; g < G; ++g) {
        const auto& gen = net.generators[g];
        for (int t = 0; t < T; ++t) {
            if (gen.is_electrolyzer) {
                lp.add_row("gfloor_" + snap(gen.id, t), "dispatch", 0.0, kInf,
                           {{cat.pg(g, t), 1.0}, {cat.P_g[g], 1.0}});
            } else {
                lp.add_row("gcap_" + snap(gen.id, t), "dispatch", -kInf, 0.0,
                           {{cat.pg(g, t), 1.0}, {cat.P_g[g], -net.availability(gen, t)}});
            }
        }
    }
    for (int s = 0; s < S; ++s) {
        const auto& su = net.storage[s];
        for (int t = 0; t < T; ++t) {
            lp.add_row("chcap_" + snap(su.id, t), "dispatch", -kInf, 0.0,
                       {{cat.pch(s, t), 1.0}, {cat.P_char[s], -1.0}});
            lp.add_row("discap_" + snap(su.id, t), "dispatch", -kInf, 0.0,
                       {{cat.pdis(s, t), 1.0}, {cat.P_dis[s], -1.0}});
        }
    }
    for (int i = 0; i < I; ++i) {
        for (int t = 0; t < T; ++t)
            lp.add_row("dccap_" + snap(net.dc_links[i].id, t), "dispatch", -kInf, 0.0,
                       {{cat.fdc(i, t), 1.0}, {cat.F_i[i], -1.0}});
    }

    // --- storage: state evolution within each period, cyclic closure, energy cap ---
    for (int s = 0; s < S; ++s) {
        const auto& su = net.storage[s];
        for (int k = 0; k < K; ++k) {
            const auto [begin, end] = time.period_range(k);
            for (int t = begin; t < end; ++t) {
                const int prev = (t == begin) ? cat.e0(s, k, K) : cat.e(s, t - 1);
                lp.add_row("soc_" + snap(su.id, t), "soc", 0.0, 0.0,
                           {{cat.e(s, t), 1.0},
                            {prev, -std::pow(su.eta_idle, w[t])},
                            {cat.pch(s, t), -w[t] * su.eta_char},
                            {cat.pdis(s, t), w[t] / su.eta_dis}});
            }
            lp.add_row("cyc_" + su.id + "_" + time.periods[k].id, "cyclic", 0.0, 0.0,
                       {{cat.e0(s, k, K), 1.0}, {cat.e(s, end - 1), -1.0}});
        }
        for (int t = 0; t < T; ++t)
            lp.add_row("ecap_" + snap(su.id, t), "soc", -kInf, 0.0,
                       {{cat.e(s, t), 1.0}, {cat.E_s[s], -1.0}});
    }

    // --- losses dominated by the piecewise envelope (coefficients are pu; rows in MW) ---
    for (int l = 0; l < L; ++l) {
        const auto& line = net.ac_lines[l];
        const auto& env = fixed.envelopes[l];
        for (int t = 0; t < T; ++t) {
            for (int m = 0; m < env.segment_count(); ++m) {
                const auto& seg = env.segments[m];
                lp.add_row("loss_" + snap(line.id, t) + "_" + std::to_string(m), "loss",
                           seg.beta * line.base_mva, kInf,
                           {{cat.loss(l, t), 1.0}, {cat.f(l, t), -seg.alpha}});
            }
        }
    }

    // --- thermal limit on flow plus loss, both directions ---
    for (int l = 0; l < L; ++l) {
        const auto& line = net.ac_lines[l];
        for (int t = 0; t < T; ++t) {
            lp.add_row("thermhi_" + snap(line.id, t), "thermal", -kInf, 0.0,
                       {{cat.f(l, t), 1.0}, {cat.loss(l, t), 1.0}, {cat.F_l[l], -1.0}});
            lp.add_row("thermlo_" + snap(line.id, t), "thermal", -kInf, 0.0,
                       {{cat.f(l, t), -1.0}, {cat.loss(l, t), 1.0}, {cat.F_l[l], -1.0}});
        }
    }

    // --- voltage law around every independent cycle, compensation included ---
    out.cycles = build_cycle_basis(net);
    {
        std::vector<double> F_pu(L);
        for (int l = 0; l < L; ++l) F_pu[l] = fixed.F_fix_mw[l] / net.ac_lines[l].base_mva;
        const auto rows = sssc_kvl_terms(out.cycles, fixed.x_pu, F_pu, comp);
        for (std::size_t c = 0; c < rows.size(); ++c) {
            for (int t = 0; t < T; ++t) {
                std::vector<std::pair<int, double>> terms;
                for (const auto& kt : rows[c]) {
                    terms.emplace_back(cat.f(kt.line, t),
                                       kt.f_coeff / net.ac_lines[kt.line].base_mva);
                    if (kt.q_coeff != 0.0) {
                        const int qc = cat.q(kt.line, t);
                        if (qc >= 0) terms.emplace_back(qc, kt.q_coeff);
                    }
                }
                lp.add_row("kvl_" + std::to_string(c) + "_" + std::to_string(t), "kvl", 0.0, 0.0,
                           terms);
            }
        }
    }

    // --- compensation set-point within the invested rating ---
    if (sssc.mode == SsscMode::Invest || sssc.mode == SsscMode::Capped) {
        for (int l = 0; l < L; ++l) {
            if (!comp[l]) continue;
            const auto& line = net.ac_lines[l];
            for (int t = 0; t < T; ++t) {
                lp.add_row("qthi_" + snap(line.id, t), "sssc", -kInf, 0.0,
                           {{cat.q(l, t), 1.0}, {cat.Q_l[l], -1.0}});
                lp.add_row("qtlo_" + snap(line.id, t), "sssc", 0.0, kInf,
                           {{cat.q(l, t), 1.0}, {cat.Q_l[l], 1.0}});
            }
        }
        if (sssc.mode == SsscMode::Capped) {
            std::vector<std::pair<int, double>> terms;
            for (int l = 0; l < L; ++l)
                if (comp[l]) terms.emplace_back(cat.Q_l[l], net.ac_lines[l].base_mva);
            lp.add_row("sssc_cap", "sssc", -kInf, sssc.total_cap_mvar, terms);
        }
    }

    // --- reserve margin; electrolyzers provide none ---
    for (int b = 0; b < B; ++b) {
        for (int t = 0; t < T; ++t) {
            std::vector<std::pair<int, double>> terms;
            for (int g : gens_at[b]) {
                const auto& gen = net.generators[g];
                if (gen.is_electrolyzer) continue;
                terms.emplace_back(cat.P_g[g], net.availability(gen, t));
            }
            for (int s : storage_at[b]) terms.emplace_back(cat.Rs(s, t), 1.0);
            for (int l = 0; l < L; ++l) {
                if (ac_from[l] == b) terms.emplace_back(cat.Rl(l, t), -1.0);
                if (ac_to[l] == b) terms.emplace_back(cat.Rl(l, t), 1.0);
            }
            for (int i = 0; i < I; ++i) {
                if (dc_from[i] == b) terms.emplace_back(cat.Rdc(i, t), -1.0);
                if (dc_to[i] == b)
                    terms.emplace_back(cat.Rdc(i, t), net.dc_links[i].efficiency);
            }
            const double need = (1.0 + sc.reserve_margin) * net.demand(b, t) * sc.demand_scale;
            lp.add_row("resv_" + snap(net.buses[b].id, t), "reserve", need, kInf, terms);
        }
    }
    for (int s = 0; s < S; ++s) {
        const auto& su = net.storage[s];
        for (int t = 0; t < T; ++t) {
            lp.add_row("rsp_" + snap(su.id, t), "reserve", -kInf, 0.0,
                       {{cat.Rs(s, t), 1.0}, {cat.P_dis[s], -1.0}});
            lp.add_row("rse_" + snap(su.id, t), "reserve", -kInf, 0.0,
                       {{cat.Rs(s, t), 1.0}, {cat.e(s, t), -su.eta_dis / w[t]}});
        }
    }
    for (int l = 0; l < L; ++l) {
        const auto& line = net.ac_lines[l];
        for (int t = 0; t < T; ++t) {
            lp.add_row("rlhi_" + snap(line.id, t), "reserve", -kInf, 0.0,
                       {{cat.Rl(l, t), 1.0}, {cat.F_l[l], -1.0}});
            lp.add_row("rllo_" + snap(line.id, t), "reserve", 0.0, kInf,
                       {{cat.Rl(l, t), 1.0}, {cat.F_l[l], 1.0}});
        }
    }
    for (int i = 0; i < I; ++i) {
        for (int t = 0; t < T; ++t)
            lp.add_row("rdc_" + snap(net.dc_links[i].id, t), "reserve", -kInf, 0.0,
                       {{cat.Rdc(i, t), 1.0}, {cat.F_i[i], -1.0}});
    }

    // --- generation mix shares, as fractions of total non-electrolyzer energy ---
    auto share_row = [&](const std::string& name, const std::vector<char>& in_group,
                         bool is_min, double frac) {
        std::vector<std::pair<int, double>> terms;
        for (int g = 0; g < G; ++g) {
            if (net.generators[g].is_electrolyzer) continue;
            const double coef = (in_group[g] ? 1.0 : 0.0) - frac;
            if (coef == 0.0) continue;
            for (int t = 0; t < T; ++t) terms.emplace_back(cat.pg(g, t), coef * w[t]);
        }
        if (is_min)
            lp.add_row(name, "share", 0.0, kInf, terms);
        else
            lp.add_row(name, "share", -kInf, 0.0, terms);
    };
    for (std::size_t j = 0; j < sc.share_constraints.size(); ++j) {
        const auto& c = sc.share_constraints[j];
        std::vector<char> in_group(G, 0);
        for (int g = 0; g < G; ++g)
            in_group[g] = std::count(c.tech_tags.begin(), c.tech_tags.end(),
                                     net.generators[g].tech_tag) > 0;
        share_row("share_" + std::to_string(j), in_group, c.is_min, c.fraction);
    }
    if (sc.zero_carbon_min > 0.0) {
        std::vector<char> in_group(G, 0);
        for (int g = 0; g < G; ++g) in_group[g] = net.generators[g].zero_carbon ? 1 : 0;
        share_row("zerocarbon", in_group, true, sc.zero_carbon_min);
    }

    return out;
}

FeasibilityReport check_feasibility(const PlanningLP& plp, const Eigen::VectorXd& x, double tol) {
    const LpProblem& lp = plp.lp;
    if (x.size() != lp.num_cols())
        throw ModelBuildError("primal vector has " + std::to_string(x.size()) +
                              " entries, problem has " + std::to_string(lp.num_cols()) +
                              " columns");
    FeasibilityReport rep;
    rep.tol = tol;

    std::map<std::string, FamilyViolation> by_family;
    auto record = [&](const std::string& family, const std::string& row, double lo, double hi,
                      double value) {
        double viol = 0.0;
        if (lo > -kInf) viol = std::max(viol, (lo - value) / (1.0 + std::abs(lo)));
        if (hi < kInf) viol = std::max(viol, (value - hi) / (1.0 + std::abs(hi)));
        auto& fv = by_family[family];
        fv.family = family;
        if (viol > fv.worst) {
            fv.worst = viol;
            fv.worst_row = row;
        }
        if (viol > rep.worst) {
            rep.worst = viol;
            rep.worst_row = row;
        }
    };

    for (int j = 0; j < lp.num_cols(); ++j)
        record("bounds", lp.col_names()[j], lp.col_lower()[j], lp.col_upper()[j], x[j]);
    const Eigen::VectorXd act = lp.matrix() * x;
    for (int r = 0; r < lp.num_rows(); ++r)
        record(lp.row_families()[r], lp.row_names()[r], lp.row_lower()[r], lp.row_upper()[r],
               act[r]);

    for (auto& [name, fv] : by_family) rep.families.push_back(std::move(fv));
    rep.passed = rep.worst <= tol;
    return rep;
}

Solution solve(const PlanningLP& plp, const SolverBackend& backend) {
    const LpSolution ls = backend.solve(plp.lp);
    Solution out;
    out.status = ls.status == SolveStatus::IterationLimit ? SolveStatus::Numerical : ls.status;
    out.iterations = ls.iterations;
    if (ls.status != SolveStatus::Optimal) return out;

    out.x = ls.x;
    out.row_duals = ls.row_duals;
    out.objective = ls.objective;

    const auto rep = check_feasibility(plp, ls.x, 1e-6);
    if (!rep.passed)
        throw BackendError("backend returned an infeasible point: row " + rep.worst_row +
                           " violated by " + std::to_string(rep.worst));

    const auto& obj = plp.lp.objective();
    const auto& cat = plp.cat;
    auto bucket = [&](const std::vector<int>& cols) {
        double v = 0.0;
        for (int c : cols)
            if (c >= 0) v += obj[c] * ls.x[c];
        return v;
    };
    out.costs.gen_fix = bucket(cat.P_g);
    out.costs.gen_var = bucket(cat.p_gt);
    out.costs.ac_lines = bucket(cat.F_l);
    out.costs.dc_links = bucket(cat.F_i);
    out.costs.storage_char = bucket(cat.P_char);
    out.costs.storage_dis = bucket(cat.P_dis);
    out.costs.storage_energy = bucket(cat.E_s);
    out.costs.sssc = bucket(cat.Q_l);
    const double gap = std::abs(out.costs.total() - out.objective);
    if (gap > 1e-6 * (1.0 + std::abs(out.objective)))
        throw BackendError("objective decomposition mismatch: " + std::to_string(gap));
    return out;
}

}  // namespace cem
