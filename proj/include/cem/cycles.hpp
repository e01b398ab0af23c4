#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "cem/network.hpp"

namespace cem {

struct CycleEdge {
    int line;         // index into network.ac_lines
    int orientation;  // +1 along from->to, -1 against
};

struct CycleBasis {
    std::vector<std::vector<CycleEdge>> cycles;
    std::vector<std::string> component_of_cycle;
};

/// Fundamental cycles of each AC component from a breadth-first spanning tree
/// rooted at the component's lexicographically smallest bus id. Each non-tree
/// line closes exactly one cycle, oriented so the non-tree line carries +1;
/// cycles are ordered by non-tree line id. Tree networks yield an empty basis.
CycleBasis build_cycle_basis(const Network& net);

/// Reference DC power flow: per AC component, fixes the angle of the
/// lexicographically smallest bus to zero and solves the susceptance system
/// for bus angles, returning per-line flows (theta_from - theta_to) / x.
///
/// injections_pu: buses x snapshots, must sum to zero within each component.
/// x_pu: one reactance per AC line, > 0.
/// Throws SingularSystem when a component's net injection is nonzero, and
/// DomainError on a non-positive reactance.
Eigen::MatrixXd solve_btheta_flows(const Network& net, const Eigen::MatrixXd& injections_pu,
                                   const std::vector<double>& x_pu);

}  // namespace cem
