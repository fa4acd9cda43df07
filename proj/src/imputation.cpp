#include "simt/imputation.hpp"
#include "simt/random.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace simt {
namespace {

void check_propagation_inputs(const NormalizedAdjacency& adjacency, const Matrix& features,
                              const std::vector<std::uint8_t>& selected) {
    if (adjacency.mode != AdjacencyMode::propagation)
        throw std::invalid_argument("feature imputation needs the propagation normalization");
    const NodeId n = adjacency.node_count();
    if (features.rows() != n || static_cast<NodeId>(selected.size()) != n)
        throw std::invalid_argument("imputation inputs disagree on the node count");
    if (std::find(selected.begin(), selected.end(), std::uint8_t{1}) == selected.end())
        throw std::invalid_argument("imputation needs at least one selected node");
}

} // namespace

ImputedFeatures feature_propagation(const NormalizedAdjacency& adjacency, const Matrix& features,
                                    const std::vector<std::uint8_t>& selected, double tol,
                                    int max_iter) {
    check_propagation_inputs(adjacency, features, selected);
    const NodeId n = adjacency.node_count();

    ImputedFeatures out;
    out.selected = selected;
    out.features = Matrix::Zero(n, features.cols());
    for (NodeId v = 0; v < n; ++v)
        if (selected[v]) out.features.row(v) = features.row(v);

    Matrix next;
    for (int iter = 0; iter < max_iter; ++iter) {
        next = adjacency.matrix * out.features;
        for (NodeId v = 0; v < n; ++v)
            if (selected[v]) next.row(v) = features.row(v);
        out.final_residual = (next - out.features).cwiseAbs().maxCoeff();
        if (out.final_residual > 0.0) {
            out.features.swap(next);
            ++out.iterations_used;
        }
        if (out.final_residual < tol) {
            out.converged = true;
            return out;
        }
    }
    return out;
}

ClosedFormImputation closed_form_imputation(const NormalizedAdjacency& adjacency,
                                            const Matrix& features,
                                            const std::vector<std::uint8_t>& selected) {
    check_propagation_inputs(adjacency, features, selected);
    const NodeId n = adjacency.node_count();

    ClosedFormImputation out;
    out.unreachable.assign(static_cast<std::size_t>(n), 0);
    out.features = Matrix::Zero(n, features.cols());
    for (NodeId v = 0; v < n; ++v)
        if (selected[v]) out.features.row(v) = features.row(v);

    // BFS from all selected nodes; unreachable unselected nodes would make
    // (I - A_uu) singular, so they are excluded and pinned to zero.
    std::vector<std::uint8_t> reachable(static_cast<std::size_t>(n), 0);
    std::deque<NodeId> frontier;
    for (NodeId v = 0; v < n; ++v)
        if (selected[v]) {
            reachable[v] = 1;
            frontier.push_back(v);
        }
    while (!frontier.empty()) {
        const NodeId v = frontier.front();
        frontier.pop_front();
        for (Eigen::SparseMatrix<double>::InnerIterator it(adjacency.matrix, v); it; ++it) {
            const NodeId u = static_cast<NodeId>(it.row());
            if (!reachable[u]) {
                reachable[u] = 1;
                frontier.push_back(u);
            }
        }
    }

    std::vector<NodeId> solve_nodes;
    for (NodeId v = 0; v < n; ++v) {
        if (selected[v]) continue;
        if (reachable[v]) {
            solve_nodes.push_back(v);
        } else {
            out.unreachable[v] = 1;
            out.any_unreachable = true;
        }
    }
    if (solve_nodes.empty()) return out;

    std::vector<Eigen::Index> position(static_cast<std::size_t>(n), -1);
    for (std::size_t i = 0; i < solve_nodes.size(); ++i)
        position[solve_nodes[i]] = static_cast<Eigen::Index>(i);

    const Eigen::Index u_count = static_cast<Eigen::Index>(solve_nodes.size());
    Matrix system = Matrix::Identity(u_count, u_count);
    Matrix rhs = Matrix::Zero(u_count, features.cols());
    for (Eigen::Index i = 0; i < u_count; ++i) {
        const NodeId v = solve_nodes[static_cast<std::size_t>(i)];
        for (Eigen::SparseMatrix<double>::InnerIterator it(adjacency.matrix, v); it; ++it) {
            const NodeId u = static_cast<NodeId>(it.row());
            if (selected[u]) {
                rhs.row(i) += it.value() * features.row(u);
            } else if (position[u] >= 0) {
                system(i, position[u]) -= it.value();
            }
        }
    }

    const Matrix solution = system.partialPivLu().solve(rhs);
    for (Eigen::Index i = 0; i < u_count; ++i)
        out.features.row(solve_nodes[static_cast<std::size_t>(i)]) = solution.row(i);
    return out;
}

VisibleGraph AugmentedGraph::combined() const {
    std::vector<Edge> edges = base.edges;
    edges.insert(edges.end(), added_edges.begin(), added_edges.end());
    return VisibleGraph::from_edges(base.node_count, std::move(edges));
}

AugmentedGraph edge_augmentation(const VisibleGraph& known, const OwnershipMap& ownership,
                                 const AuctionOutcome& outcome, std::uint64_t seed) {
    const NodeId n = known.node_count;
    if (static_cast<NodeId>(ownership.owner_of.size()) != n ||
        static_cast<NodeId>(outcome.allocation.size()) != n)
        throw std::invalid_argument("augmentation inputs disagree on the node count");

    AugmentedGraph out;
    out.base = known;
    out.density_used =
        n > 1 ? 2.0 * static_cast<double>(known.edge_count()) / (static_cast<double>(n) * (n - 1))
              : 0.0;
    if (out.density_used <= 0.0) return out;

    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& nodes : ownership.nodes_by_owner()) {
        std::vector<NodeId> unselected;
        for (NodeId v : nodes)
            if (!outcome.allocation[v]) unselected.push_back(v);
        if (unselected.size() < 2) continue;
        for (std::size_t i = 0; i < unselected.size(); ++i) {
            for (std::size_t j = i + 1; j < unselected.size(); ++j) {
                if (out.density_used >= 1.0 || unit(rng) < out.density_used) {
                    const NodeId a = std::min(unselected[i], unselected[j]);
                    const NodeId b = std::max(unselected[i], unselected[j]);
                    if (!known.has_edge(a, b)) out.added_edges.emplace_back(a, b);
                }
            }
        }
    }
    std::sort(out.added_edges.begin(), out.added_edges.end());
    return out;
}

} // namespace simt
