#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cem/cycles.hpp"
#include "cem/network.hpp"

namespace cem {

struct InfeasibleBase : std::runtime_error {
    explicit InfeasibleBase(const std::string& what) : std::runtime_error(what) {}
};

/// Series compensator rating on one line. Q_pu is the three-phase reactive
/// capacity; the injectable series voltage scales with it at the line's
/// maximum operating current.
struct SsscRating {
    std::string line_id;
    double Q_pu = 0.0;
    double cost = 0.0;  // $/kVAr-yr, annualized

    double max_injected_voltage_pu(double F_pu) const {
        return Q_pu / (std::sqrt(3.0) * F_pu);
    }
};

struct SsscOperatingPoint {
    std::string line_id;
    int snapshot = -1;
    double q_tilde_pu = 0.0;
    double q_pu = 0.0;
    std::optional<double> x_sssc_pu;  // empty at zero flow: no current, no injection
    double effective_x_pu = 0.0;
};

/// One linearized voltage-law term: coefficient on the line's flow and on its
/// series-compensation control (zero when the line carries no compensator).
struct KvlTerm {
    int line;
    double f_coeff;  // orientation * x_hat
    double q_coeff;  // -orientation / F, or 0 without a compensator
};

/// Per-cycle rows of the compensated voltage law
///   sum_l C (x_hat f - q~ / F) = 0
/// over pu flow and control variables, against fixed x_hat and F.
std::vector<std::vector<KvlTerm>> sssc_kvl_terms(const CycleBasis& basis,
                                                 const std::vector<double>& x_hat_pu,
                                                 const std::vector<double>& F_pu,
                                                 const std::vector<char>& sssc_on);

/// Symmetric per-snapshot bound on the control variable: |q~| <= Q.
double q_tilde_bound(const SsscRating& rating);

/// Recovers physical injection and reactance from the LP control variable.
SsscOperatingPoint recover_physical(double q_tilde_pu, double f_pu, double F_pu,
                                    double x_hat_pu);

/// Maximum deliverable injection between two buses of a small lossless network
/// with a compensator of capacity Q_pu on one line: thermal caps at existing
/// capacity, compensated voltage law, |q~| <= Q. Desk-scale validation tool.
double max_transfer_with_sssc(const Network& net, const std::string& sssc_line_id,
                              double Q_pu, const std::string& inject_bus_id,
                              const std::string& sink_bus_id);

}  // namespace cem
