#include "simt/importance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace simt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double closed_form(std::int64_t dt, std::int64_t gt, std::int64_t dv, std::int64_t nvt,
                   std::int64_t edges) {
    if (dv == 0) return 0.0;
    if (dt == dv) return -kInf; // v carries its cluster's entire degree
    const double two_e = 2.0 * static_cast<double>(edges);
    const double denom = static_cast<double>(dt - gt) * std::log2(static_cast<double>(dt) / two_e);
    if (denom == 0.0) return 0.0; // uninformative cluster: whole cluster ties
    const double numer =
        static_cast<double>(dt - gt) * std::log2(static_cast<double>(dt) / static_cast<double>(dt - dv)) +
        2.0 * static_cast<double>(nvt) * std::log2(static_cast<double>(dt - dv) / two_e);
    return numer / denom;
}

std::int64_t neighbors_in_own_cluster(const VisibleGraph& graph, const Partition& partition,
                                      NodeId v) {
    const ClusterId c = partition.cluster_of[v];
    std::int64_t count = 0;
    for (NodeId u : graph.neighbors[v])
        if (partition.cluster_of[u] == c) ++count;
    return count;
}

} // namespace

double marginal_entropy(const VisibleGraph& graph, const Partition& partition, NodeId v) {
    if (partition.total_edges <= 0)
        throw std::invalid_argument("marginal entropy undefined on an edgeless graph");
    const ClusterId c = partition.cluster_of[v];
    return closed_form(partition.degree_sum[c], partition.boundary_edges[c], graph.degree(v),
                       neighbors_in_own_cluster(graph, partition, v), partition.total_edges);
}

Vector marginal_entropy_all(const VisibleGraph& graph, const Partition& partition) {
    if (partition.total_edges <= 0)
        throw std::invalid_argument("marginal entropy undefined on an edgeless graph");
    const NodeId n = graph.node_count;
    std::vector<std::int64_t> inside(static_cast<std::size_t>(n), 0);
    for (const auto& [u, v] : graph.edges) {
        if (partition.cluster_of[u] == partition.cluster_of[v]) {
            ++inside[u];
            ++inside[v];
        }
    }
    Vector out(n);
    for (NodeId v = 0; v < n; ++v) {
        const ClusterId c = partition.cluster_of[v];
        out[v] = closed_form(partition.degree_sum[c], partition.boundary_edges[c],
                             graph.degree(v), inside[v], partition.total_edges);
    }
    return out;
}

double marginal_entropy_oracle(const VisibleGraph& graph, const Partition& partition, NodeId v) {
    Partition moved = partition;
    const ClusterId fresh = moved.cluster_count;
    moved.cluster_count += 1;
    moved.cluster_of[v] = fresh;
    moved.recount(graph);
    // Difference of the unnegated cluster-term sums; the fresh singleton
    // contributes nothing because all of its edges are boundary edges.
    return structural_entropy(moved) - structural_entropy(partition);
}

Vector pagerank(const VisibleGraph& graph, double gamma, double tol, int max_iter) {
    if (graph.node_count < 1) throw std::invalid_argument("pagerank needs at least one node");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("damping must be in (0, 1)");
    const NodeId n = graph.node_count;
    Vector rank = Vector::Constant(n, 1.0 / n);
    Vector next(n);
    const double teleport = (1.0 - gamma) / n;
    double residual = kInf;
    for (int iter = 0; iter < max_iter; ++iter) {
        for (NodeId v = 0; v < n; ++v) {
            double acc = 0.0;
            for (NodeId u : graph.neighbors[v]) acc += rank[u] / graph.degree(u);
            next[v] = teleport + gamma * acc;
        }
        residual = (next - rank).lpNorm<1>();
        rank.swap(next);
        if (residual < tol) return rank;
    }
    std::ostringstream msg;
    msg << "pagerank did not converge in " << max_iter << " iterations (residual " << residual
        << ")";
    throw std::runtime_error(msg.str());
}

Vector degree_centrality(const VisibleGraph& graph) {
    Vector out(graph.node_count);
    for (NodeId v = 0; v < graph.node_count; ++v) out[v] = static_cast<double>(graph.degree(v));
    return out;
}

double blend_alpha(double budget, std::int64_t tradable_nodes, double mean_valuation,
                   ClusterId clusters) {
    if (tradable_nodes < 1) throw std::invalid_argument("need at least one tradable node");
    if (!(mean_valuation > 0.0)) throw std::invalid_argument("mean valuation must be positive");
    if (clusters < 1) throw std::invalid_argument("need at least one cluster");
    if (budget < 0.0) throw std::invalid_argument("budget must be non-negative");
    const double base = 1.0 + budget / (static_cast<double>(tradable_nodes) * mean_valuation);
    return 0.5 * std::pow(base, -static_cast<double>(clusters));
}

namespace {

// (score of the node at 0-based position p in a cluster of size s) = (s - p) / s
void rank_scores(const std::vector<std::vector<NodeId>>& clusters, const Vector& key,
                 bool ascending, Vector& out) {
    std::vector<NodeId> order;
    for (const auto& members : clusters) {
        order = members;
        std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
            const double ka = key[a];
            const double kb = key[b];
            if (ka != kb) return ascending ? ka < kb : ka > kb;
            return a < b;
        });
        const double size = static_cast<double>(order.size());
        for (std::size_t p = 0; p < order.size(); ++p)
            out[order[p]] = (size - static_cast<double>(p)) / size;
    }
}

} // namespace

ImportanceScores blend_rank_scores(const Partition& partition, Vector epsilon, Vector centrality,
                                   double alpha) {
    const NodeId n = static_cast<NodeId>(partition.cluster_of.size());
    ImportanceScores s;
    s.alpha = alpha;
    s.epsilon = std::move(epsilon);
    s.centrality = std::move(centrality);

    std::vector<std::vector<NodeId>> clusters(static_cast<std::size_t>(partition.cluster_count));
    for (NodeId v = 0; v < n; ++v) clusters[partition.cluster_of[v]].push_back(v);

    s.info_score = Vector::Zero(n);
    s.rep_score = Vector::Zero(n);
    rank_scores(clusters, s.epsilon, /*ascending=*/true, s.info_score);
    rank_scores(clusters, s.centrality, /*ascending=*/false, s.rep_score);
    s.phi = (1.0 - alpha) * s.rep_score + alpha * s.info_score;
    return s;
}

ImportanceScores importance_scores_with_alpha(const VisibleGraph& graph,
                                              const Partition& partition, double alpha,
                                              CentralityKind centrality, double gamma) {
    return blend_rank_scores(partition, marginal_entropy_all(graph, partition),
                             centrality == CentralityKind::pagerank ? pagerank(graph, gamma)
                                                                    : degree_centrality(graph),
                             alpha);
}

ImportanceScores importance_scores(const VisibleGraph& graph, const Partition& partition,
                                   double budget, double mean_valuation,
                                   CentralityKind centrality, double gamma,
                                   std::int64_t alpha_node_count) {
    const std::int64_t n = alpha_node_count > 0 ? alpha_node_count : graph.node_count;
    const double alpha = blend_alpha(budget, n, mean_valuation, partition.cluster_count);
    return importance_scores_with_alpha(graph, partition, alpha, centrality, gamma);
}

void write_scores(const ImportanceScores& scores, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(17);
    for (Eigen::Index v = 0; v < scores.phi.size(); ++v)
        out << v << '\t' << scores.epsilon[v] << '\t' << scores.centrality[v] << '\t'
            << scores.phi[v] << '\n';
}

} // namespace simt
