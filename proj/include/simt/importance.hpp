#pragma once

#include "simt/clustering.hpp"
#include "simt/graph.hpp"

#include <string>

namespace simt {

/// Closed-form normalized marginal structural entropy of node v:
///
///   ((d_t - g_t) log2(d_t / (d_t - d_v)) + 2 n_vt log2((d_t - d_v) / 2|E|))
///   -----------------------------------------------------------------------
///                     (d_t - g_t) log2(d_t / 2|E|)
///
/// with n_vt = v's neighbor count inside its own cluster. Lower values mean
/// more informative nodes. Degenerate cases:
///   - isolated v                      -> 0
///   - d_t == d_v (v carries the whole cluster degree) -> -infinity, ranked
///     most informative
///   - zero denominator (d_t == g_t or d_t == 2|E|)    -> 0 for every node
///     of the cluster; ordering falls back to node id
double marginal_entropy(const VisibleGraph& graph, const Partition& partition, NodeId v);

/// All nodes at once (single pass over the edge set).
Vector marginal_entropy_all(const VisibleGraph& graph, const Partition& partition);

/// Reference value computed from scratch: rebuilds the partition with v
/// moved to a fresh singleton cluster and returns the difference of the two
/// unnegated cluster-term sums (equivalently, entropy(P') - entropy(P)).
/// Satisfies, wherever the closed form is well defined,
///   marginal_entropy(v) * (d_t - g_t) * log2(d_t / 2|E|) == 2|E| * oracle(v).
double marginal_entropy_oracle(const VisibleGraph& graph, const Partition& partition, NodeId v);

/// Power iteration for rho_v = gamma * sum_{u in N_v} rho_u / d_u + (1-gamma)/n.
/// Degree-zero nodes keep only the teleport term. Throws std::runtime_error
/// (carrying the last residual) if the L1 change never drops below tol.
Vector pagerank(const VisibleGraph& graph, double gamma = 0.85, double tol = 1e-10,
                int max_iter = 1000);

Vector degree_centrality(const VisibleGraph& graph);

/// Budget/complexity blend weight: 0.5 * (1 + budget / (nodes * mean_valuation))^-clusters.
double blend_alpha(double budget, std::int64_t tradable_nodes, double mean_valuation,
                   ClusterId clusters);

enum class CentralityKind { pagerank, degree };

struct ImportanceScores {
    Vector epsilon;    // marginal entropies (may contain -inf sentinels)
    Vector centrality; // pagerank or degree
    Vector info_score; // per-cluster rank score from epsilon, in (0, 1]
    Vector rep_score;  // per-cluster rank score from centrality, in (0, 1]
    double alpha = 0.5;
    Vector phi;        // (1 - alpha) * rep + alpha * info
};

/// Rank-based per-cluster scores: within each cluster nodes are ordered by
/// epsilon ascending / centrality descending (ties by node id) and the score
/// of the node at 0-based position p in a cluster of size s is (s - p) / s,
/// so the best node gets 1.0 and every score is positive.
ImportanceScores blend_rank_scores(const Partition& partition, Vector epsilon,
                                   Vector centrality, double alpha);

ImportanceScores importance_scores_with_alpha(const VisibleGraph& graph,
                                              const Partition& partition, double alpha,
                                              CentralityKind centrality = CentralityKind::pagerank,
                                              double gamma = 0.85);

/// Same, with alpha derived from the budget. `alpha_node_count` is the node
/// count entering the blend (tradable nodes in the marketplace pipeline);
/// 0 means the whole graph.
ImportanceScores importance_scores(const VisibleGraph& graph, const Partition& partition,
                                   double budget, double mean_valuation = 1.0,
                                   CentralityKind centrality = CentralityKind::pagerank,
                                   double gamma = 0.85, std::int64_t alpha_node_count = 0);

/// Debug dump: node_id, epsilon, centrality, phi per line.
void write_scores(const ImportanceScores& scores, const std::string& path);

} // namespace simt
