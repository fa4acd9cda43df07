#include "simt/clustering.hpp"
#include "simt/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace simt {
namespace {

// One cluster's contribution, with the x*log(x) continuous extension at
// d_t = 0.
double cluster_term(std::int64_t d, std::int64_t g, double two_e) {
    if (d <= 0) return 0.0;
    return -(static_cast<double>(d - g) / two_e) * std::log2(static_cast<double>(d) / two_e);
}

} // namespace

Partition Partition::from_assignment(const VisibleGraph& graph, std::vector<ClusterId> assignment,
                                     ClusterId cluster_count) {
    if (static_cast<NodeId>(assignment.size()) != graph.node_count)
        throw std::invalid_argument("assignment does not cover the node set");
    for (ClusterId c : assignment)
        if (c < 0 || c >= cluster_count) throw std::invalid_argument("cluster id out of range");
    Partition p;
    p.cluster_of = std::move(assignment);
    p.cluster_count = cluster_count;
    p.recount(graph);
    return p;
}

Partition Partition::single_cluster(const VisibleGraph& graph) {
    return from_assignment(graph, std::vector<ClusterId>(graph.node_count, 0), 1);
}

void Partition::recount(const VisibleGraph& graph) {
    degree_sum.assign(static_cast<std::size_t>(cluster_count), 0);
    boundary_edges.assign(static_cast<std::size_t>(cluster_count), 0);
    total_edges = static_cast<std::int64_t>(graph.edge_count());
    for (NodeId v = 0; v < graph.node_count; ++v)
        degree_sum[cluster_of[v]] += graph.degree(v);
    for (const auto& [u, v] : graph.edges) {
        if (cluster_of[u] != cluster_of[v]) {
            ++boundary_edges[cluster_of[u]];
            ++boundary_edges[cluster_of[v]];
        }
    }
}

std::vector<std::int64_t> Partition::cluster_sizes() const {
    std::vector<std::int64_t> sizes(static_cast<std::size_t>(cluster_count), 0);
    for (ClusterId c : cluster_of) ++sizes[c];
    return sizes;
}

double structural_entropy(const Partition& partition) {
    if (partition.total_edges <= 0)
        throw std::invalid_argument("structural entropy undefined on an edgeless graph");
    const double two_e = 2.0 * static_cast<double>(partition.total_edges);
    double h = 0.0;
    for (ClusterId t = 0; t < partition.cluster_count; ++t)
        h += cluster_term(partition.degree_sum[t], partition.boundary_edges[t], two_e);
    return h;
}

double structural_entropy(const VisibleGraph& graph, const Partition& partition) {
    (void)graph;
    return structural_entropy(partition);
}

namespace {

// Incremental local-move state. Moving v from cluster a to b only changes
// the (d, g) entries of a and b:
//   g_a' = g_a - d_v + 2 k_a,   g_b' = g_b + d_v - 2 k_b
// where k_x counts v's neighbors inside cluster x.
class MoveEngine {
public:
    MoveEngine(const VisibleGraph& graph, Partition& part)
        : graph_(graph), part_(part), two_e_(2.0 * static_cast<double>(part.total_edges)),
          neighbor_count_(static_cast<std::size_t>(part.cluster_count), 0) {}

    double entropy() const { return structural_entropy(part_); }

    // Collects v's neighbor clusters and per-cluster neighbor counts.
    const std::vector<ClusterId>& scan_neighbors(NodeId v) {
        for (ClusterId c : touched_) neighbor_count_[c] = 0;
        touched_.clear();
        for (NodeId u : graph_.neighbors[v]) {
            const ClusterId c = part_.cluster_of[u];
            if (neighbor_count_[c] == 0) touched_.push_back(c);
            ++neighbor_count_[c];
        }
        return touched_;
    }

    double move_gain(NodeId v, ClusterId to) const {
        const ClusterId from = part_.cluster_of[v];
        const std::int64_t dv = graph_.degree(v);
        const std::int64_t ka = neighbor_count_[from];
        const std::int64_t kb = neighbor_count_[to];
        const double before = cluster_term(part_.degree_sum[from], part_.boundary_edges[from], two_e_) +
                              cluster_term(part_.degree_sum[to], part_.boundary_edges[to], two_e_);
        const double after =
            cluster_term(part_.degree_sum[from] - dv, part_.boundary_edges[from] - dv + 2 * ka, two_e_) +
            cluster_term(part_.degree_sum[to] + dv, part_.boundary_edges[to] + dv - 2 * kb, two_e_);
        return after - before;
    }

    // Applies the move; neighbor counts for v must be current.
    void apply(NodeId v, ClusterId to) {
        const ClusterId from = part_.cluster_of[v];
        const std::int64_t dv = graph_.degree(v);
        part_.degree_sum[from] -= dv;
        part_.boundary_edges[from] += -dv + 2 * neighbor_count_[from];
        part_.degree_sum[to] += dv;
        part_.boundary_edges[to] += dv - 2 * neighbor_count_[to];
        part_.cluster_of[v] = to;
        --size_[from];
        ++size_[to];
    }

    void init_sizes() {
        size_.assign(static_cast<std::size_t>(part_.cluster_count), 0);
        for (ClusterId c : part_.cluster_of) ++size_[c];
    }

    std::int64_t size_of(ClusterId c) const { return size_[c]; }

    // Refills an emptied cluster with the highest-degree node of the largest
    // cluster (smallest ids win ties).
    void reseed(ClusterId empty) {
        ClusterId largest = 0;
        for (ClusterId c = 0; c < part_.cluster_count; ++c)
            if (size_[c] > size_[largest]) largest = c;
        if (size_[largest] <= 1) return; // nothing safe to take
        NodeId pick = -1;
        for (NodeId v = 0; v < graph_.node_count; ++v) {
            if (part_.cluster_of[v] != largest) continue;
            if (pick < 0 || graph_.degree(v) > graph_.degree(pick)) pick = v;
        }
        scan_neighbors(pick);
        apply(pick, empty);
    }

private:
    const VisibleGraph& graph_;
    Partition& part_;
    double two_e_;
    std::vector<std::int64_t> neighbor_count_;
    std::vector<ClusterId> touched_;
    std::vector<std::int64_t> size_;
};

constexpr double kGainEpsilon = 1e-12;

} // namespace

Partition greedy_entropy_clustering(const VisibleGraph& graph, ClusterId target_clusters,
                                    std::uint64_t seed, int max_sweeps) {
    if (target_clusters < 1) throw std::invalid_argument("need at least one cluster");
    if (target_clusters > graph.node_count)
        throw std::invalid_argument("more clusters than nodes");
    if (graph.edge_count() == 0)
        throw std::invalid_argument("structural entropy undefined on an edgeless graph");

    // Balanced random start.
    std::vector<NodeId> order(static_cast<std::size_t>(graph.node_count));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<ClusterId> assignment(order.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        assignment[order[i]] = static_cast<ClusterId>(i % static_cast<std::size_t>(target_clusters));

    Partition part = Partition::from_assignment(graph, std::move(assignment), target_clusters);
    MoveEngine engine(graph, part);
    engine.init_sizes();

    std::vector<ClusterId> best_assignment = part.cluster_of;
    double best_entropy = engine.entropy();

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool improved = false;
        for (NodeId v = 0; v < graph.node_count; ++v) {
            const ClusterId from = part.cluster_of[v];
            const auto& candidates = engine.scan_neighbors(v);
            ClusterId best_to = from;
            double best_gain = kGainEpsilon;
            for (ClusterId to : candidates) {
                if (to == from) continue;
                const double gain = engine.move_gain(v, to);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_to = to;
                }
            }
            if (best_to != from) {
                engine.apply(v, best_to);
                improved = true;
                if (engine.size_of(from) == 0) engine.reseed(from);
            }
        }
        const double h = engine.entropy();
        if (h > best_entropy) {
            best_entropy = h;
            best_assignment = part.cluster_of;
        }
        if (!improved) break;
    }

    return Partition::from_assignment(graph, std::move(best_assignment), target_clusters);
}

Partition best_entropy_clustering(const VisibleGraph& graph, ClusterId target_clusters,
                                  std::uint64_t seed, int restarts, int max_sweeps) {
    if (restarts < 1) throw std::invalid_argument("need at least one restart");
    Partition best;
    double best_entropy = -1.0;
    for (int r = 0; r < restarts; ++r) {
        Partition candidate =
            greedy_entropy_clustering(graph, target_clusters, mix_seed(seed, static_cast<std::uint64_t>(r)),
                                      max_sweeps);
        const double h = structural_entropy(candidate);
        if (h > best_entropy) {
            best_entropy = h;
            best = std::move(candidate);
        }
    }
    return best;
}

void write_partition(const Partition& partition, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (NodeId v = 0; v < static_cast<NodeId>(partition.cluster_of.size()); ++v)
        out << v << '\t' << partition.cluster_of[v] << '\n';
}

Partition read_partition(const std::string& path, const VisibleGraph& graph) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<ClusterId> assignment(static_cast<std::size_t>(graph.node_count), -1);
    ClusterId max_cluster = -1;
    NodeId v;
    ClusterId c;
    while (in >> v >> c) {
        if (v < 0 || v >= graph.node_count) throw std::runtime_error(path + ": node id out of range");
        assignment[v] = c;
        max_cluster = std::max(max_cluster, c);
    }
    for (ClusterId a : assignment)
        if (a < 0) throw std::runtime_error(path + ": partition does not cover every node");
    return Partition::from_assignment(graph, std::move(assignment), max_cluster + 1);
}

} // namespace simt
