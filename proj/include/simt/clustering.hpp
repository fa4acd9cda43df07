#pragma once

#include "simt/graph.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace simt {

using ClusterId = std::int32_t;

/// Disjoint clusters over the node set with cached per-cluster degree sums
/// and boundary edge counts; the caches are what structural entropy reads.
struct Partition {
    std::vector<ClusterId> cluster_of;
    ClusterId cluster_count = 0;
    std::vector<std::int64_t> degree_sum;     // sum of node degrees per cluster
    std::vector<std::int64_t> boundary_edges; // edges leaving each cluster
    std::int64_t total_edges = 0;

    /// Builds the caches from an assignment. Throws if the assignment does
    /// not cover every node with a cluster id in [0, cluster_count).
    static Partition from_assignment(const VisibleGraph& graph,
                                     std::vector<ClusterId> assignment,
                                     ClusterId cluster_count);

    static Partition single_cluster(const VisibleGraph& graph);

    /// Recomputes the caches from scratch (used to cross-check incremental
    /// updates).
    void recount(const VisibleGraph& graph);

    std::vector<std::int64_t> cluster_sizes() const;
};

/// Partition quality in bits: -sum_t ((d_t - g_t) / 2|E|) * log2(d_t / 2|E|).
/// Clusters with zero degree sum contribute nothing. Throws when the graph
/// has no edges.
double structural_entropy(const Partition& partition);
double structural_entropy(const VisibleGraph& graph, const Partition& partition);

/// Local-move maximization of structural entropy: seeded balanced start,
/// then single-node moves to neighboring clusters while they strictly
/// improve the objective. Clusters emptied by a move are re-seeded with the
/// highest-degree node of the largest cluster. The result is never worse
/// than the starting assignment.
Partition greedy_entropy_clustering(const VisibleGraph& graph, ClusterId target_clusters,
                                    std::uint64_t seed, int max_sweeps = 50);

/// Runs `restarts` independent greedy passes and keeps the best partition;
/// ties resolve to the earliest restart so the output is deterministic.
Partition best_entropy_clustering(const VisibleGraph& graph, ClusterId target_clusters,
                                  std::uint64_t seed, int restarts, int max_sweeps = 50);

void write_partition(const Partition& partition, const std::string& path);
Partition read_partition(const std::string& path, const VisibleGraph& graph);

} // namespace simt
