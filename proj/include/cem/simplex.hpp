#pragma once

#include "cem/lp.hpp"

namespace cem {

/// Built-in bounded-variable revised simplex.
///
/// Two-phase primal simplex over the system  A x - s = 0  with s carrying the
/// row bounds, so the all-logical basis is always available as a starting
/// point. The basis is held as a sparse LU factorization refreshed
/// periodically, with product-form eta updates in between. Deterministic:
/// ties in pricing and ratio tests break toward the lowest index.
class SimplexBackend final : public SolverBackend {
public:
    struct Options {
        double feas_tol = 1e-9;
        double dual_tol = 1e-9;
        double pivot_tol = 1e-9;
        int refactor_interval = 100;
        long max_iterations = 200000;  // hard stop; effective cap also scales with size
        bool scale = true;
    };

    SimplexBackend() = default;
    explicit SimplexBackend(Options opts) : opts_(opts) {}

    std::string name() const override { return "simplex"; }
    LpSolution solve(const LpProblem& lp) const override;

private:
    Options opts_;
};

}  // namespace cem
