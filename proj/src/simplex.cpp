#include "cem/simplex.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace cem {

namespace {

enum class VarState : std::uint8_t { Basic, AtLower, AtUpper, FreeZero };

// Product-form eta: B_new = B_old * E where E is the identity with column
// `pos` replaced by the FTRANed entering column.
struct Eta {
    int pos;
    double pivot;
    std::vector<std::pair<int, double>> terms;  // entries of alpha, excluding pos
};

struct Workspace {
    int m = 0;                         // rows
    int n = 0;                         // structural columns
    int total = 0;                     // n + m
    Eigen::SparseMatrix<double> cols;  // m x (n+m): scaled A then -I logicals
    Eigen::VectorXd lower, upper;      // per column
    Eigen::VectorXd cost;              // phase-2 objective per column
    Eigen::VectorXd x;                 // current value per column
    std::vector<VarState> state;
    std::vector<int> basic;            // column occupying each basis position

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    std::vector<Eta> etas;

    Eigen::VectorXd ftran(Eigen::VectorXd v) const {
        v = lu.solve(v);
        for (const auto& e : etas) {
            const double piv = v[e.pos] / e.pivot;
            v[e.pos] = piv;
            if (piv != 0.0)
                for (const auto& [i, a] : e.terms) v[i] -= a * piv;
        }
        return v;
    }

    Eigen::VectorXd btran(Eigen::VectorXd v) {
        for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
            double dot = 0.0;
            for (const auto& [i, a] : it->terms) dot += a * v[i];
            v[it->pos] = (v[it->pos] - dot) / it->pivot;
        }
        return lu.adjoint().solve(v);
    }

    bool refactor() {
        Eigen::SparseMatrix<double> b(m, m);
        std::vector<Eigen::Triplet<double>> trip;
        for (int p = 0; p < m; ++p) {
            const int j = basic[p];
            for (Eigen::SparseMatrix<double>::InnerIterator it(cols, j); it; ++it)
                trip.emplace_back(static_cast<int>(it.row()), p, it.value());
        }
        b.setFromTriplets(trip.begin(), trip.end());
        lu.compute(b);
        etas.clear();
        if (lu.info() != Eigen::Success) return false;
        // Recompute basic values from the nonbasic ones.
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
        for (int j = 0; j < total; ++j) {
            if (state[j] == VarState::Basic || x[j] == 0.0) continue;
            for (Eigen::SparseMatrix<double>::InnerIterator it(cols, j); it; ++it)
                rhs[it.row()] -= it.value() * x[j];
        }
        const Eigen::VectorXd xb = lu.solve(rhs);
        for (int p = 0; p < m; ++p) x[basic[p]] = xb[p];
        return true;
    }
};

double bound_violation(const Workspace& w, int j) {
    if (w.x[j] < w.lower[j]) return w.lower[j] - w.x[j];
    if (w.x[j] > w.upper[j]) return w.x[j] - w.upper[j];
    return 0.0;
}

// Fast path for LPs with no rows: every column sits at its cost-preferred bound.
LpSolution solve_unconstrained(const LpProblem& lp) {
    LpSolution sol;
    const int n = lp.num_cols();
    sol.x = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
        const double lo = lp.col_lower()[j], up = lp.col_upper()[j], c = lp.objective()[j];
        if (lo > up) {
            sol.status = SolveStatus::Infeasible;
            return sol;
        }
        double v;
        if (c > 0.0)
            v = lo;
        else if (c < 0.0)
            v = up;
        else
            v = std::isfinite(lo) ? lo : (std::isfinite(up) ? up : 0.0);
        if (!std::isfinite(v)) {
            sol.status = SolveStatus::Unbounded;
            return sol;
        }
        sol.x[j] = v;
    }
    sol.status = SolveStatus::Optimal;
    sol.objective = lp.objective_value(sol.x);
    sol.row_duals.resize(0);
    return sol;
}

int exponent_scale(double max_abs) {
    if (max_abs <= 0.0 || !std::isfinite(max_abs)) return 0;
    int e;
    std::frexp(max_abs, &e);
    return -e + 1;  // scale into [1/2, 1)
}

}  // namespace

LpSolution SimplexBackend::solve(const LpProblem& lp) const {
    const int m = lp.num_rows();
    const int n = lp.num_cols();
    if (m == 0) return solve_unconstrained(lp);

    Workspace w;
    w.m = m;
    w.n = n;
    w.total = n + m;

    // Equilibrate rows then columns with powers of two so unscaling is exact.
    const Eigen::SparseMatrix<double>& a = lp.matrix();
    Eigen::VectorXd row_scale = Eigen::VectorXd::Ones(m);
    Eigen::VectorXd col_scale = Eigen::VectorXd::Ones(n);
    if (opts_.scale) {
        Eigen::VectorXd row_max = Eigen::VectorXd::Zero(m);
        for (int j = 0; j < n; ++j)
            for (Eigen::SparseMatrix<double>::InnerIterator it(a, j); it; ++it)
                row_max[it.row()] = std::max(row_max[it.row()], std::abs(it.value()));
        for (int r = 0; r < m; ++r) row_scale[r] = std::ldexp(1.0, exponent_scale(row_max[r]));
        for (int j = 0; j < n; ++j) {
            double cmax = 0.0;
            for (Eigen::SparseMatrix<double>::InnerIterator it(a, j); it; ++it)
                cmax = std::max(cmax, std::abs(it.value()) * row_scale[it.row()]);
            col_scale[j] = std::ldexp(1.0, exponent_scale(cmax));
        }
    }

    // Assemble scaled columns: structural block R*A*C, then -I logicals.
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<size_t>(a.nonZeros()) + m);
        for (int j = 0; j < n; ++j)
            for (Eigen::SparseMatrix<double>::InnerIterator it(a, j); it; ++it)
                trip.emplace_back(static_cast<int>(it.row()), j,
                                  it.value() * row_scale[it.row()] * col_scale[j]);
        for (int r = 0; r < m; ++r) trip.emplace_back(r, n + r, -1.0);
        w.cols.resize(m, w.total);
        w.cols.setFromTriplets(trip.begin(), trip.end());
        w.cols.makeCompressed();
    }

    w.lower.resize(w.total);
    w.upper.resize(w.total);
    w.cost = Eigen::VectorXd::Zero(w.total);
    for (int j = 0; j < n; ++j) {
        w.lower[j] = lp.col_lower()[j] / col_scale[j];
        w.upper[j] = lp.col_upper()[j] / col_scale[j];
        w.cost[j] = lp.objective()[j] * col_scale[j];
        if (w.lower[j] > w.upper[j] + opts_.feas_tol) {
            LpSolution sol;
            sol.status = SolveStatus::Infeasible;
            return sol;
        }
    }
    for (int r = 0; r < m; ++r) {
        w.lower[n + r] = lp.row_lower()[r] * row_scale[r];
        w.upper[n + r] = lp.row_upper()[r] * row_scale[r];
        if (w.lower[n + r] > w.upper[n + r] + opts_.feas_tol) {
            LpSolution sol;
            sol.status = SolveStatus::Infeasible;
            return sol;
        }
    }

    // All-logical starting basis; structurals rest at a finite bound.
    w.x = Eigen::VectorXd::Zero(w.total);
    w.state.assign(w.total, VarState::AtLower);
    w.basic.resize(m);
    for (int j = 0; j < n; ++j) {
        if (std::isfinite(w.lower[j])) {
            w.state[j] = VarState::AtLower;
            w.x[j] = w.lower[j];
        } else if (std::isfinite(w.upper[j])) {
            w.state[j] = VarState::AtUpper;
            w.x[j] = w.upper[j];
        } else {
            w.state[j] = VarState::FreeZero;
            w.x[j] = 0.0;
        }
    }
    for (int r = 0; r < m; ++r) {
        w.basic[r] = n + r;
        w.state[n + r] = VarState::Basic;
    }
    if (!w.refactor()) {
        LpSolution sol;
        sol.status = SolveStatus::Numerical;
        return sol;
    }

    const double ftol = opts_.feas_tol;
    const double dtol = opts_.dual_tol;
    const long iter_cap =
        std::min(opts_.max_iterations, 20000L + 200L * static_cast<long>(w.total));

    LpSolution sol;
    long iter = 0;
    long degen_run = 0;
    bool bland = false;
    int phase = 1;
    int resets = 0;

    Eigen::VectorXd cb(m), y, alpha;

    while (true) {
        if (++iter > iter_cap) {
            sol.status = SolveStatus::IterationLimit;
            break;
        }
        if (static_cast<int>(w.etas.size()) >= opts_.refactor_interval) {
            if (!w.refactor()) {
                // Degenerate factorization; restart from the logical basis once.
                if (resets++ > 0) {
                    sol.status = SolveStatus::Numerical;
                    break;
                }
                for (int j = 0; j < w.total; ++j) {
                    if (w.state[j] != VarState::Basic) continue;
                    if (std::isfinite(w.lower[j])) {
                        w.state[j] = VarState::AtLower;
                        w.x[j] = w.lower[j];
                    } else if (std::isfinite(w.upper[j])) {
                        w.state[j] = VarState::AtUpper;
                        w.x[j] = w.upper[j];
                    } else {
                        w.state[j] = VarState::FreeZero;
                        w.x[j] = 0.0;
                    }
                }
                for (int r = 0; r < m; ++r) {
                    w.basic[r] = n + r;
                    w.state[n + r] = VarState::Basic;
                }
                w.refactor();
                phase = 1;
            }
        }

        // Worst basic bound violation drives the phase-1 state.
        double infeas = 0.0;
        for (int p = 0; p < m; ++p) infeas = std::max(infeas, bound_violation(w, w.basic[p]));
        if (phase == 1 && infeas <= 10.0 * ftol) {
            for (int p = 0; p < m; ++p) {
                const int j = w.basic[p];
                w.x[j] = std::min(std::max(w.x[j], w.lower[j] - ftol), w.upper[j] + ftol);
            }
            phase = 2;
        }

        for (int p = 0; p < m; ++p) {
            const int j = w.basic[p];
            if (phase == 2) {
                cb[p] = w.cost[j];
            } else {
                cb[p] = (w.x[j] < w.lower[j] - ftol) ? -1.0
                      : (w.x[j] > w.upper[j] + ftol) ? 1.0
                                                     : 0.0;
            }
        }
        y = w.btran(cb);

        // Pricing: most negative improvement, lowest index under Bland's rule.
        int enter = -1;
        int dir = 0;
        double best = dtol;
        for (int j = 0; j < w.total; ++j) {
            if (w.state[j] == VarState::Basic) continue;
            double d = (phase == 2) ? w.cost[j] : 0.0;
            for (Eigen::SparseMatrix<double>::InnerIterator it(w.cols, j); it; ++it)
                d -= it.value() * y[it.row()];
            int cand_dir = 0;
            if (w.state[j] == VarState::AtLower && d < -dtol)
                cand_dir = 1;
            else if (w.state[j] == VarState::AtUpper && d > dtol)
                cand_dir = -1;
            else if (w.state[j] == VarState::FreeZero && std::abs(d) > dtol)
                cand_dir = d < 0.0 ? 1 : -1;
            if (cand_dir == 0) continue;
            if (bland) {
                enter = j;
                dir = cand_dir;
                break;
            }
            if (std::abs(d) > best) {
                best = std::abs(d);
                enter = j;
                dir = cand_dir;
            }
        }

        if (enter < 0) {
            if (phase == 1) {
                if (infeas > 10.0 * ftol) {
                    sol.status = SolveStatus::Infeasible;
                    break;
                }
                phase = 2;
                continue;
            }
            sol.status = SolveStatus::Optimal;
            break;
        }

        alpha = w.ftran(Eigen::VectorXd(w.cols.col(enter)));

        // Ratio test. First breakpoint where a basic hits a bound (infeasible
        // basics block at the violated bound they are moving toward), or the
        // entering variable reaches its opposite bound. Ties prefer the
        // largest pivot magnitude (lowest basic index under Bland's rule).
        double t_best = kInf;
        int leave_pos = -1;
        int leave_to_upper = 0;
        double kappa_best = 0.0;

        for (int p = 0; p < m; ++p) {
            const double kappa = dir * alpha[p];
            if (std::abs(kappa) <= opts_.pivot_tol) continue;
            const int j = w.basic[p];
            const double xj = w.x[j];
            double t = kInf;
            int to_upper = 0;
            if (phase == 1 && xj < w.lower[j] - ftol) {
                if (kappa < 0.0) t = (xj - w.lower[j]) / kappa;  // rises to its lower bound
            } else if (phase == 1 && xj > w.upper[j] + ftol) {
                if (kappa > 0.0) {
                    t = (xj - w.upper[j]) / kappa;  // falls to its upper bound
                    to_upper = 1;
                }
            } else if (kappa > 0.0) {
                if (std::isfinite(w.lower[j])) t = (xj - w.lower[j]) / kappa;
            } else {
                if (std::isfinite(w.upper[j])) {
                    t = (xj - w.upper[j]) / kappa;
                    to_upper = 1;
                }
            }
            if (t == kInf) continue;
            t = std::max(t, 0.0);
            const double tie = 1e-10 * (1.0 + t_best);
            bool take;
            if (leave_pos < 0 || t < t_best - tie) {
                take = true;
            } else if (t <= t_best + tie) {
                take = bland ? w.basic[p] < w.basic[leave_pos]
                             : std::abs(kappa) > std::abs(kappa_best);
            } else {
                take = false;
            }
            if (take) {
                t_best = std::min(t, t_best);
                leave_pos = p;
                leave_to_upper = to_upper;
                kappa_best = kappa;
            }
        }

        const double span = w.upper[enter] - w.lower[enter];
        const bool flip = std::isfinite(span) && span <= t_best;
        const double limit = flip ? span : t_best;

        if (!std::isfinite(limit)) {
            sol.status = phase == 2 ? SolveStatus::Unbounded : SolveStatus::Numerical;
            break;
        }

        degen_run = limit <= 1e-12 ? degen_run + 1 : 0;
        if (degen_run > 500) bland = true;
        if (degen_run == 0 && bland) bland = false;

        if (flip) {
            // Bound flip: entering runs to its opposite bound, basis unchanged.
            for (int p = 0; p < m; ++p) w.x[w.basic[p]] -= limit * dir * alpha[p];
            w.x[enter] = dir > 0 ? w.upper[enter] : w.lower[enter];
            w.state[enter] = dir > 0 ? VarState::AtUpper : VarState::AtLower;
            continue;
        }

        const int leave = w.basic[leave_pos];
        for (int p = 0; p < m; ++p) w.x[w.basic[p]] -= limit * dir * alpha[p];
        w.x[enter] += dir * limit;
        w.x[leave] = leave_to_upper ? w.upper[leave] : w.lower[leave];
        w.state[leave] = leave_to_upper ? VarState::AtUpper : VarState::AtLower;
        w.state[enter] = VarState::Basic;
        w.basic[leave_pos] = enter;

        Eta e;
        e.pos = leave_pos;
        e.pivot = alpha[leave_pos];
        e.terms.reserve(8);
        for (int p = 0; p < m; ++p)
            if (p != leave_pos && std::abs(alpha[p]) > 1e-14) e.terms.emplace_back(p, alpha[p]);
        w.etas.push_back(std::move(e));
    }

    sol.iterations = iter;
    if (sol.status != SolveStatus::Optimal) return sol;

    // Clean recomputation of the basics, then unscale.
    w.refactor();
    sol.x = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) sol.x[j] = w.x[j] * col_scale[j];
    sol.objective = lp.objective_value(sol.x);

    for (int p = 0; p < m; ++p) cb[p] = w.cost[w.basic[p]];
    y = w.btran(cb);
    sol.row_duals.resize(m);
    // Signed so that tightening a binding row upper bound increases cost.
    for (int r = 0; r < m; ++r) sol.row_duals[r] = -y[r] * row_scale[r];
    return sol;
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::IterationLimit: return "iteration_limit";
        case SolveStatus::Numerical: return "numerical";
    }
    return "unknown";
}

}  // namespace cem
