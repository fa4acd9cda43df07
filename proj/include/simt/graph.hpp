#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace simt {

using NodeId = std::int32_t;
using OwnerId = std::int32_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Edge = std::pair<NodeId, NodeId>; // stored with first < second

inline constexpr OwnerId kNoOwner = -1;

/// Undirected simple graph: node count plus a sorted, duplicate-free edge
/// list and an adjacency index built at construction.
struct VisibleGraph {
    NodeId node_count = 0;
    std::vector<Edge> edges;
    std::vector<std::vector<NodeId>> neighbors;

    /// Normalizes (orients u < v, sorts, drops duplicates) and validates the
    /// edge list. Throws std::invalid_argument on self-loops or ids outside
    /// [0, n).
    static VisibleGraph from_edges(NodeId n, std::vector<Edge> raw_edges);

    std::size_t edge_count() const { return edges.size(); }
    NodeId degree(NodeId v) const { return static_cast<NodeId>(neighbors[v].size()); }
    bool has_edge(NodeId u, NodeId v) const;
};

/// Full ground-truth graph: structure, per-node features and class labels.
struct AttributedGraph {
    VisibleGraph structure;
    Matrix features;          // node_count x feature_dim
    std::vector<int> labels;  // values in [0, class_count)
    int class_count = 0;

    NodeId node_count() const { return structure.node_count; }
    int feature_dim() const { return static_cast<int>(features.cols()); }
    void validate() const; // throws on any broken invariant
};

/// Assignment of nodes to data owners. Nodes with owner kNoOwner are
/// non-tradable: they stay in the graph as imputation/inference targets but
/// are never auctioned.
struct OwnershipMap {
    std::vector<OwnerId> owner_of;
    OwnerId owner_count = 0;

    bool tradable(NodeId v) const { return owner_of[v] >= 0; }
    std::size_t tradable_count() const;
    std::vector<std::vector<NodeId>> nodes_by_owner() const;
};

enum class AdjacencyMode {
    propagation,      // D^{-1/2} A D^{-1/2}, no self-loops
    gcn_renormalized, // D~^{-1/2} (A + I) D~^{-1/2}
};

struct NormalizedAdjacency {
    AdjacencyMode mode = AdjacencyMode::propagation;
    Eigen::SparseMatrix<double> matrix; // n x n, symmetric

    NodeId node_count() const { return static_cast<NodeId>(matrix.rows()); }
};

struct LoadStats {
    std::size_t duplicate_edges = 0; // dropped with a diagnostic, not an error
};

/// Reads the three-file dataset format (see README): edge list, CSV feature
/// rows, one label per line. Directed inputs are folded to undirected pairs;
/// exact duplicates are dropped and counted in stats.
AttributedGraph load_graph(const std::string& edge_path,
                           const std::string& feature_path,
                           const std::string& label_path,
                           LoadStats* stats = nullptr);

/// Bare structure from an edge file alone; node count is max id + 1.
VisibleGraph load_edge_list(const std::string& edge_path, LoadStats* stats = nullptr);

/// Planted-partition benchmark: `classes` blocks of `nodes_per_class` nodes,
/// intra-block edge probability p_in, inter-block p_out. Features are the
/// class mean (separated by `signal`) plus unit Gaussian noise.
AttributedGraph generate_sbm(int classes, int nodes_per_class, double p_in,
                             double p_out, int feature_dim, double signal,
                             std::uint64_t seed);

/// Seeded shuffle assignment: each of `owner_count` owners receives exactly
/// `subgraph_size` nodes; leftovers are marked non-tradable.
OwnershipMap random_ownership(const AttributedGraph& graph, OwnerId owner_count,
                              NodeId subgraph_size, std::uint64_t seed);

/// Same, restricted to an eligible node subset (e.g. everything but a test
/// split). Ineligible and leftover nodes are non-tradable.
OwnershipMap random_ownership_among(NodeId node_count,
                                    const std::vector<NodeId>& eligible,
                                    OwnerId owner_count, NodeId subgraph_size,
                                    std::uint64_t seed);

/// The broker-visible structure before any purchase: every edge except those
/// internal to a single owner's subgraph. Edges touching non-tradable nodes
/// are public.
VisibleGraph known_graph(const AttributedGraph& graph, const OwnershipMap& ownership);

/// Adds the private intra-owner edges whose endpoint was purchased (a sold
/// node's connection data comes with it).
VisibleGraph reveal_selected(const VisibleGraph& known, const AttributedGraph& graph,
                             const OwnershipMap& ownership,
                             const std::vector<std::uint8_t>& selected);

struct ClassEdgeStats {
    double intra_fraction = 0.0;
    double inter_fraction = 0.0;
    bool has_edges = false;
};

/// Per class: fractions of intra-/inter-class edges among edges incident to
/// that class. Fractions sum to 1 whenever the class has incident edges.
std::vector<ClassEdgeStats> class_edge_proportions(const AttributedGraph& graph);

NormalizedAdjacency normalized_adjacency(const VisibleGraph& graph, AdjacencyMode mode);

} // namespace simt
