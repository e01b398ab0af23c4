#pragma once

#include <string>
#include <vector>

#include "cem/errors.hpp"

namespace cem {

struct DegenerateSegment : std::runtime_error {
    explicit DegenerateSegment(const std::string& what) : std::runtime_error(what) {}
};

struct OutOfRange : std::runtime_error {
    explicit OutOfRange(const std::string& what) : std::runtime_error(what) {}
};

struct LossSegment {
    double alpha;  // pu loss per pu flow
    double beta;   // pu
    double lo, hi; // flow interval the segment was fitted on, pu
};

/// Piecewise-linear lower approximation of quadratic ohmic losses r f^2 over
/// f in [-F, F]. Each segment is the least-squares line of r f^2 on its
/// interval; the family of lines, taken jointly as l >= alpha f + beta,
/// forms the envelope the planning LP enforces.
struct LossEnvelope {
    std::string line_id;
    std::vector<LossSegment> segments;
    double F_pu = 0.0;

    int segment_count() const { return static_cast<int>(segments.size()); }
};

inline constexpr int kDefaultLossSegments = 3;

/// Fits m_count segments over [-F, F]. Breakpoints default to equal width;
/// a custom vector must be ascending with m_count+1 entries from -F to F.
/// The per-segment (alpha, beta) minimize the integrated squared error of
/// r f^2 - (alpha f + beta) over the segment.
LossEnvelope fit_segments(double r_pu, double F_pu, int m_count,
                          const std::vector<double>* breakpoints = nullptr);

/// The lower bound the LP enforces at flow f: max over segments of alpha f + beta.
double envelope_value(const LossEnvelope& env, double f_pu);

}  // namespace cem
