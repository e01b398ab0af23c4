#include "cem/sssc.hpp"

#include "cem/lp.hpp"

namespace cem {

std::vector<std::vector<KvlTerm>> sssc_kvl_terms(const CycleBasis& basis,
                                                 const std::vector<double>& x_hat_pu,
                                                 const std::vector<double>& F_pu,
                                                 const std::vector<char>& sssc_on) {
    for (const auto& cycle : basis.cycles)
        for (const auto& [line, orientation] : cycle) {
            (void)orientation;
            if (!(x_hat_pu.at(line) > 0.0)) throw DomainError("x_hat must be positive");
            if (!(F_pu.at(line) > 0.0)) throw DomainError("line capacity must be positive");
        }

    std::vector<std::vector<KvlTerm>> rows;
    rows.reserve(basis.cycles.size());
    for (const auto& cycle : basis.cycles) {
        std::vector<KvlTerm> row;
        row.reserve(cycle.size());
        for (const auto& [line, orientation] : cycle)
            row.push_back({line, orientation * x_hat_pu[line],
                           sssc_on[line] ? -orientation / F_pu[line] : 0.0});
        rows.push_back(std::move(row));
    }
    return rows;
}

double q_tilde_bound(const SsscRating& rating) {
    if (rating.Q_pu < 0.0) throw DomainError("rating must be nonnegative");
    return rating.Q_pu;
}

SsscOperatingPoint recover_physical(double q_tilde_pu, double f_pu, double F_pu,
                                    double x_hat_pu) {
    if (!(F_pu > 0.0)) throw DomainError("line capacity must be positive");
    SsscOperatingPoint op;
    op.q_tilde_pu = q_tilde_pu;
    if (std::abs(f_pu) > 1e-9) {
        op.q_pu = q_tilde_pu * f_pu / F_pu;
        op.x_sssc_pu = op.q_pu / (f_pu * f_pu);
        op.effective_x_pu = x_hat_pu - *op.x_sssc_pu;
    } else {
        // A series device carrying no current exchanges no power; its
        // equivalent reactance has no physical meaning here.
        op.q_pu = 0.0;
        op.effective_x_pu = x_hat_pu;
    }
    return op;
}

double max_transfer_with_sssc(const Network& net, const std::string& sssc_line_id,
                              double Q_pu, const std::string& inject_bus_id,
                              const std::string& sink_bus_id) {
    const int nl = static_cast<int>(net.ac_lines.size());
    const int nb = static_cast<int>(net.buses.size());
    const int inject = net.bus_index(inject_bus_id);
    const int sink = net.bus_index(sink_bus_id);
    const int sssc_line = net.ac_line_index(sssc_line_id);
    if (Q_pu < 0.0) throw DomainError("rating must be nonnegative");

    std::vector<double> x_hat(nl), cap(nl);
    std::vector<char> sssc_on(nl, 0);
    sssc_on[sssc_line] = 1;
    for (int e = 0; e < nl; ++e) {
        x_hat[e] = net.ac_lines[e].x0_pu;
        cap[e] = net.ac_lines[e].F0 / net.ac_lines[e].base_mva;
    }

    LpProblem lp;
    const int p = lp.add_col("transfer", 0.0, kInf, -1.0);
    std::vector<int> f(nl);
    for (int e = 0; e < nl; ++e)
        f[e] = lp.add_col("f_" + net.ac_lines[e].id, -cap[e], cap[e], 0.0);
    const int q = lp.add_col("qt_" + sssc_line_id, -Q_pu, Q_pu, 0.0);

    for (int b = 0; b < nb; ++b) {
        std::vector<std::pair<int, double>> terms;
        for (int e = 0; e < nl; ++e) {
            if (net.bus_index(net.ac_lines[e].from_bus) == b) terms.emplace_back(f[e], -1.0);
            if (net.bus_index(net.ac_lines[e].to_bus) == b) terms.emplace_back(f[e], +1.0);
        }
        if (b == inject) terms.emplace_back(p, +1.0);
        if (b == sink) terms.emplace_back(p, -1.0);
        lp.add_row("balance_" + net.buses[b].id, "balance", 0.0, 0.0, terms);
    }

    const CycleBasis basis = build_cycle_basis(net);
    const auto kvl = sssc_kvl_terms(basis, x_hat, cap, sssc_on);
    for (size_t c = 0; c < kvl.size(); ++c) {
        std::vector<std::pair<int, double>> terms;
        for (const auto& term : kvl[c]) {
            terms.emplace_back(f[term.line], term.f_coeff);
            if (term.q_coeff != 0.0) terms.emplace_back(q, term.q_coeff);
        }
        lp.add_row("kvl_" + std::to_string(c), "kvl", 0.0, 0.0, terms);
    }

    const LpSolution sol = make_backend("simplex")->solve(lp);
    if (sol.status == SolveStatus::Infeasible)
        throw InfeasibleBase("transfer problem infeasible at zero injection");
    if (sol.status != SolveStatus::Optimal)
        throw BackendError("transfer solve ended " + to_string(sol.status));
    return sol.x[p];
}

}  // namespace cem
