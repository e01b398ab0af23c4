#include "cem/cycles.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <deque>
#include <map>

namespace cem {

namespace {

struct Forest {
    std::vector<int> parent;       // parent bus, -1 at roots
    std::vector<int> parent_line;  // line index to the parent, -1 at roots
    std::vector<int> depth;
    std::vector<int> component;    // component index per bus
    std::vector<int> root_of;      // root bus per component index
    std::vector<char> in_tree;     // per line
};

// BFS spanning forest; each component is rooted at its lexicographically
// smallest bus id so the construction is independent of bus ordering.
Forest grow_forest(const Network& net) {
    const int nb = static_cast<int>(net.buses.size());
    const int nl = static_cast<int>(net.ac_lines.size());

    std::vector<std::vector<std::pair<int, int>>> adj(nb);  // (neighbor, line)
    for (int e = 0; e < nl; ++e) {
        const int u = net.bus_index(net.ac_lines[e].from_bus);
        const int v = net.bus_index(net.ac_lines[e].to_bus);
        adj[u].emplace_back(v, e);
        adj[v].emplace_back(u, e);
    }

    std::vector<int> order(nb);
    for (int i = 0; i < nb; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return net.buses[a].id < net.buses[b].id; });

    Forest f;
    f.parent.assign(nb, -1);
    f.parent_line.assign(nb, -1);
    f.depth.assign(nb, 0);
    f.component.assign(nb, -1);
    f.in_tree.assign(nl, 0);

    for (const int root : order) {
        if (f.component[root] >= 0) continue;
        const int comp = static_cast<int>(f.root_of.size());
        f.root_of.push_back(root);
        f.component[root] = comp;
        std::deque<int> queue{root};
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            for (const auto& [v, e] : adj[u]) {
                if (f.component[v] >= 0) continue;
                f.component[v] = comp;
                f.parent[v] = u;
                f.parent_line[v] = e;
                f.depth[v] = f.depth[u] + 1;
                f.in_tree[e] = 1;
                queue.push_back(v);
            }
        }
    }
    return f;
}

}  // namespace

CycleBasis build_cycle_basis(const Network& net) {
    const Forest f = grow_forest(net);
    const int nl = static_cast<int>(net.ac_lines.size());

    std::vector<int> nontree;
    for (int e = 0; e < nl; ++e)
        if (!f.in_tree[e]) nontree.push_back(e);
    std::sort(nontree.begin(), nontree.end(),
              [&](int a, int b) { return net.ac_lines[a].id < net.ac_lines[b].id; });

    // Orientation of tree line e when walked from bus u to its parent.
    auto step_orientation = [&](int e, int u) {
        return net.bus_index(net.ac_lines[e].from_bus) == u ? +1 : -1;
    };

    CycleBasis basis;
    for (const int e : nontree) {
        const int u = net.bus_index(net.ac_lines[e].from_bus);
        const int v = net.bus_index(net.ac_lines[e].to_bus);

        // Closed walk u --e--> v --tree--> u: climb both endpoints to their
        // lowest common ancestor.
        std::vector<CycleEdge> down;  // lca -> u, collected in reverse
        std::vector<CycleEdge> cycle{{e, +1}};
        int a = v, b = u;
        while (f.depth[a] > f.depth[b]) {
            cycle.push_back({f.parent_line[a], step_orientation(f.parent_line[a], a)});
            a = f.parent[a];
        }
        while (f.depth[b] > f.depth[a]) {
            down.push_back({f.parent_line[b], -step_orientation(f.parent_line[b], b)});
            b = f.parent[b];
        }
        while (a != b) {
            cycle.push_back({f.parent_line[a], step_orientation(f.parent_line[a], a)});
            down.push_back({f.parent_line[b], -step_orientation(f.parent_line[b], b)});
            a = f.parent[a];
            b = f.parent[b];
        }
        cycle.insert(cycle.end(), down.rbegin(), down.rend());
        basis.cycles.push_back(std::move(cycle));
        basis.component_of_cycle.push_back(net.buses[u].component_label);
    }
    return basis;
}

Eigen::MatrixXd solve_btheta_flows(const Network& net, const Eigen::MatrixXd& injections_pu,
                                   const std::vector<double>& x_pu) {
    const int nb = static_cast<int>(net.buses.size());
    const int nl = static_cast<int>(net.ac_lines.size());
    const int nt = static_cast<int>(injections_pu.cols());
    if (injections_pu.rows() != nb)
        throw DomainError("injection matrix must have one row per bus");
    if (static_cast<int>(x_pu.size()) != nl)
        throw DomainError("need one reactance per AC line");
    for (const double x : x_pu)
        if (!(x > 0.0)) throw DomainError("reactance must be positive");

    const Forest f = grow_forest(net);
    const int nc = static_cast<int>(f.root_of.size());

    // Local bus numbering per component; the root is eliminated (theta = 0).
    std::vector<int> local(nb, -1);
    std::vector<int> size(nc, 0);
    for (int b = 0; b < nb; ++b)
        if (b != f.root_of[f.component[b]]) local[b] = size[f.component[b]]++;

    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(nb, nt);
    for (int c = 0; c < nc; ++c) {
        Eigen::VectorXd net_injection = Eigen::VectorXd::Zero(nt);
        for (int b = 0; b < nb; ++b)
            if (f.component[b] == c) net_injection += injections_pu.row(b).transpose();
        const double scale = 1.0 + injections_pu.cwiseAbs().maxCoeff();
        if (net_injection.cwiseAbs().maxCoeff() > 1e-8 * scale)
            throw SingularSystem("component of bus '" + net.buses[f.root_of[c]].id +
                                 "' has nonzero net injection");
        if (size[c] == 0) continue;

        std::vector<Eigen::Triplet<double>> trip;
        for (int e = 0; e < nl; ++e) {
            const int u = net.bus_index(net.ac_lines[e].from_bus);
            if (f.component[u] != c) continue;
            const int v = net.bus_index(net.ac_lines[e].to_bus);
            const double w = 1.0 / x_pu[e];
            if (local[u] >= 0) trip.emplace_back(local[u], local[u], w);
            if (local[v] >= 0) trip.emplace_back(local[v], local[v], w);
            if (local[u] >= 0 && local[v] >= 0) {
                trip.emplace_back(local[u], local[v], -w);
                trip.emplace_back(local[v], local[u], -w);
            }
        }
        Eigen::SparseMatrix<double> lap(size[c], size[c]);
        lap.setFromTriplets(trip.begin(), trip.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(lap);
        if (chol.info() != Eigen::Success)
            throw SingularSystem("susceptance system of component of bus '" +
                                 net.buses[f.root_of[c]].id + "' is singular");

        Eigen::MatrixXd rhs(size[c], nt);
        for (int b = 0; b < nb; ++b)
            if (f.component[b] == c && local[b] >= 0) rhs.row(local[b]) = injections_pu.row(b);
        const Eigen::MatrixXd sol = chol.solve(rhs);
        for (int b = 0; b < nb; ++b)
            if (f.component[b] == c && local[b] >= 0) theta.row(b) = sol.row(local[b]);
    }

    Eigen::MatrixXd flows(nl, nt);
    for (int e = 0; e < nl; ++e) {
        const int u = net.bus_index(net.ac_lines[e].from_bus);
        const int v = net.bus_index(net.ac_lines[e].to_bus);
        flows.row(e) = (theta.row(u) - theta.row(v)) / x_pu[e];
    }
    return flows;
}

}  // namespace cem
