#include "cem/loss.hpp"

#include <algorithm>
#include <cmath>

namespace cem {

LossEnvelope fit_segments(double r_pu, double F_pu, int m_count,
                          const std::vector<double>* breakpoints) {
    if (r_pu < 0.0) throw DomainError("negative resistance");
    if (!(F_pu > 0.0)) throw DomainError("flow range must be positive");
    if (m_count < 1) throw DomainError("need at least one loss segment");

    std::vector<double> bp;
    if (breakpoints) {
        bp = *breakpoints;
        if (static_cast<int>(bp.size()) != m_count + 1)
            throw DomainError("breakpoint count must be segment count + 1");
        const double tol = 1e-9 * F_pu;
        if (std::abs(bp.front() + F_pu) > tol || std::abs(bp.back() - F_pu) > tol)
            throw DomainError("breakpoints must span [-F, F]");
    } else {
        bp.resize(m_count + 1);
        for (int m = 0; m <= m_count; ++m)
            bp[m] = -F_pu + 2.0 * F_pu * static_cast<double>(m) / m_count;
    }

    LossEnvelope env;
    env.F_pu = F_pu;
    env.segments.reserve(m_count);
    for (int m = 0; m < m_count; ++m) {
        const double a = bp[m], b = bp[m + 1];
        if (b < a) throw DomainError("breakpoints must be ascending");
        if (a == b)
            throw DegenerateSegment("empty loss segment at breakpoint " + std::to_string(a));
        // Least squares of r f^2 against alpha f + beta on [a, b], in closed form.
        const double alpha = r_pu * (a + b);
        const double beta = -r_pu * (a * a + 4.0 * a * b + b * b) / 6.0;
        env.segments.push_back({alpha, beta, a, b});
    }
    return env;
}

double envelope_value(const LossEnvelope& env, double f_pu) {
    if (std::abs(f_pu) > env.F_pu * (1.0 + 1e-12))
        throw OutOfRange("flow " + std::to_string(f_pu) + " outside [-F, F] with F = " +
                         std::to_string(env.F_pu));
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& s : env.segments) v = std::max(v, s.alpha * f_pu + s.beta);
    return v;
}

}  // namespace cem
