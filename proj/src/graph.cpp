#include "simt/graph.hpp"
#include "simt/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace simt {
namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

std::vector<std::vector<NodeId>> build_neighbors(NodeId n, const std::vector<Edge>& edges) {
    std::vector<std::vector<NodeId>> nbr(static_cast<std::size_t>(n));
    for (const auto& [u, v] : edges) {
        nbr[u].push_back(v);
        nbr[v].push_back(u);
    }
    for (auto& list : nbr) std::sort(list.begin(), list.end());
    return nbr;
}

} // namespace

VisibleGraph VisibleGraph::from_edges(NodeId n, std::vector<Edge> raw_edges) {
    if (n < 0) fail("node count must be non-negative");
    for (auto& [u, v] : raw_edges) {
        if (u < 0 || v < 0 || u >= n || v >= n)
            fail("edge endpoint " + std::to_string(u) + "-" + std::to_string(v) +
                 " outside [0, " + std::to_string(n) + ")");
        if (u == v) fail("self-loop at node " + std::to_string(u));
        if (u > v) std::swap(u, v);
    }
    std::sort(raw_edges.begin(), raw_edges.end());
    raw_edges.erase(std::unique(raw_edges.begin(), raw_edges.end()), raw_edges.end());

    VisibleGraph g;
    g.node_count = n;
    g.edges = std::move(raw_edges);
    g.neighbors = build_neighbors(n, g.edges);
    return g;
}

bool VisibleGraph::has_edge(NodeId u, NodeId v) const {
    if (u > v) std::swap(u, v);
    return std::binary_search(edges.begin(), edges.end(), Edge{u, v});
}

void AttributedGraph::validate() const {
    const NodeId n = structure.node_count;
    if (features.rows() != n) fail("feature row count does not match node count");
    if (static_cast<NodeId>(labels.size()) != n) fail("label count does not match node count");
    for (NodeId v = 0; v < n; ++v) {
        if (labels[v] < 0 || labels[v] >= class_count)
            fail("label " + std::to_string(labels[v]) + " of node " + std::to_string(v) +
                 " outside [0, " + std::to_string(class_count) + ")");
    }
}

std::size_t OwnershipMap::tradable_count() const {
    std::size_t c = 0;
    for (OwnerId o : owner_of)
        if (o >= 0) ++c;
    return c;
}

std::vector<std::vector<NodeId>> OwnershipMap::nodes_by_owner() const {
    std::vector<std::vector<NodeId>> out(static_cast<std::size_t>(owner_count));
    for (NodeId v = 0; v < static_cast<NodeId>(owner_of.size()); ++v)
        if (owner_of[v] >= 0) out[owner_of[v]].push_back(v);
    return out;
}

// ---------------------------------------------------------------------------
// Ingestion

namespace {

struct Tokenizer {
    std::ifstream in;
    std::string path;
    std::size_t line_no = 0;

    explicit Tokenizer(const std::string& p) : in(p), path(p) {
        if (!in) fail("cannot open " + p);
    }

    bool next_line(std::string& line) {
        while (std::getline(in, line)) {
            ++line_no;
            // strip trailing CR from dos files
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::size_t first = line.find_first_not_of(" \t");
            if (first == std::string::npos) continue;
            if (line[first] == '#') continue;
            return true;
        }
        return false;
    }

    [[noreturn]] void error(const std::string& msg) const {
        fail(path + ":" + std::to_string(line_no) + ": " + msg);
    }
};

long parse_long(const char* s, char** end) { return std::strtol(s, end, 10); }

} // namespace

AttributedGraph load_graph(const std::string& edge_path, const std::string& feature_path,
                           const std::string& label_path, LoadStats* stats) {
    // Features first: they fix the node count.
    Matrix features;
    {
        Tokenizer tok(feature_path);
        std::vector<std::vector<double>> rows;
        std::string line;
        while (tok.next_line(line)) {
            std::vector<double> row;
            const char* p = line.c_str();
            while (*p) {
                char* end = nullptr;
                double x = std::strtod(p, &end);
                if (end == p) tok.error("expected a number, got '" + std::string(p) + "'");
                row.push_back(x);
                p = end;
                while (*p == ' ' || *p == '\t') ++p;
                if (*p == ',') ++p;
            }
            if (row.empty()) tok.error("empty feature row");
            if (!rows.empty() && row.size() != rows.front().size())
                tok.error("feature dimension changed mid-file");
            rows.push_back(std::move(row));
        }
        if (rows.empty()) fail(feature_path + ": no feature rows");
        features.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(rows.front().size()));
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < rows[i].size(); ++j)
                features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    const NodeId n = static_cast<NodeId>(features.rows());

    std::vector<int> labels;
    {
        Tokenizer tok(label_path);
        std::string line;
        while (tok.next_line(line)) {
            char* end = nullptr;
            long value = parse_long(line.c_str(), &end);
            if (end == line.c_str()) tok.error("expected an integer label");
            if (value < 0) tok.error("negative label " + std::to_string(value));
            labels.push_back(static_cast<int>(value));
        }
        if (static_cast<NodeId>(labels.size()) != n)
            fail(label_path + ": " + std::to_string(labels.size()) + " labels for " +
                 std::to_string(n) + " nodes");
    }

    std::vector<Edge> edges;
    std::size_t duplicates = 0;
    {
        Tokenizer tok(edge_path);
        std::string line;
        while (tok.next_line(line)) {
            char* end = nullptr;
            const char* p = line.c_str();
            long u = parse_long(p, &end);
            if (end == p) tok.error("expected a node id");
            p = end;
            long v = parse_long(p, &end);
            if (end == p) tok.error("expected a second node id");
            if (u == v) tok.error("self-loop " + std::to_string(u));
            if (u < 0 || v < 0 || u >= n || v >= n)
                tok.error("edge " + std::to_string(u) + "-" + std::to_string(v) +
                          " references a node outside [0, " + std::to_string(n) + ")");
            NodeId a = static_cast<NodeId>(std::min(u, v));
            NodeId b = static_cast<NodeId>(std::max(u, v));
            edges.emplace_back(a, b);
        }
    }
    std::sort(edges.begin(), edges.end());
    auto last = std::unique(edges.begin(), edges.end());
    duplicates = static_cast<std::size_t>(edges.end() - last);
    edges.erase(last, edges.end());
    if (stats) stats->duplicate_edges = duplicates;

    AttributedGraph g;
    g.structure = VisibleGraph::from_edges(n, std::move(edges));
    g.features = std::move(features);
    g.labels = std::move(labels);
    g.class_count = g.labels.empty() ? 0 : *std::max_element(g.labels.begin(), g.labels.end()) + 1;
    g.validate();
    return g;
}

VisibleGraph load_edge_list(const std::string& edge_path, LoadStats* stats) {
    std::vector<Edge> edges;
    NodeId max_id = -1;
    Tokenizer tok(edge_path);
    std::string line;
    while (tok.next_line(line)) {
        char* end = nullptr;
        const char* p = line.c_str();
        long u = parse_long(p, &end);
        if (end == p) tok.error("expected a node id");
        p = end;
        long v = parse_long(p, &end);
        if (end == p) tok.error("expected a second node id");
        if (u == v) tok.error("self-loop " + std::to_string(u));
        if (u < 0 || v < 0) tok.error("negative node id");
        max_id = std::max(max_id, static_cast<NodeId>(std::max(u, v)));
        edges.emplace_back(static_cast<NodeId>(std::min(u, v)), static_cast<NodeId>(std::max(u, v)));
    }
    std::sort(edges.begin(), edges.end());
    auto last = std::unique(edges.begin(), edges.end());
    if (stats) stats->duplicate_edges = static_cast<std::size_t>(edges.end() - last);
    edges.erase(last, edges.end());
    return VisibleGraph::from_edges(max_id + 1, std::move(edges));
}

AttributedGraph generate_sbm(int classes, int nodes_per_class, double p_in, double p_out,
                             int feature_dim, double signal, std::uint64_t seed) {
    if (classes < 1 || nodes_per_class < 1) fail("SBM needs at least one node per class");
    if (!(p_out >= 0.0 && p_out <= p_in && p_in <= 1.0))
        fail("SBM requires 0 <= p_out <= p_in <= 1");
    if (feature_dim < 1) fail("feature_dim must be positive");
    if (signal < 0.0) fail("signal must be non-negative");

    const NodeId n = static_cast<NodeId>(classes) * nodes_per_class;
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (NodeId v = 0; v < n; ++v) labels[v] = static_cast<int>(v / nodes_per_class);

    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
            const double p = labels[u] == labels[v] ? p_in : p_out;
            if (p >= 1.0 || (p > 0.0 && unit(rng) < p)) edges.emplace_back(u, v);
        }
    }

    // Class means: axis-aligned when the feature space is wide enough,
    // otherwise random unit directions, both scaled by `signal`.
    Matrix means = Matrix::Zero(classes, feature_dim);
    if (feature_dim >= classes) {
        for (int c = 0; c < classes; ++c) means(c, c) = signal;
    } else {
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int c = 0; c < classes; ++c) {
            for (int j = 0; j < feature_dim; ++j) means(c, j) = gauss(rng);
            double norm = means.row(c).norm();
            if (norm > 0) means.row(c) *= signal / norm;
        }
    }

    Matrix features(n, feature_dim);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (NodeId v = 0; v < n; ++v)
        for (int j = 0; j < feature_dim; ++j)
            features(v, j) = means(labels[v], j) + noise(rng);

    AttributedGraph g;
    g.structure = VisibleGraph::from_edges(n, std::move(edges));
    g.features = std::move(features);
    g.labels = std::move(labels);
    g.class_count = classes;
    g.validate();
    return g;
}

OwnershipMap random_ownership_among(NodeId node_count, const std::vector<NodeId>& eligible,
                                    OwnerId owner_count, NodeId subgraph_size,
                                    std::uint64_t seed) {
    if (owner_count < 1 || subgraph_size < 1) fail("owner count and subgraph size must be positive");
    const std::size_t needed =
        static_cast<std::size_t>(owner_count) * static_cast<std::size_t>(subgraph_size);
    if (needed > eligible.size())
        fail("cannot assign " + std::to_string(owner_count) + " owners of size " +
             std::to_string(subgraph_size) + " among " + std::to_string(eligible.size()) +
             " eligible nodes");

    std::vector<NodeId> pool = eligible;
    Rng rng(seed);
    std::shuffle(pool.begin(), pool.end(), rng);

    OwnershipMap map;
    map.owner_of.assign(static_cast<std::size_t>(node_count), kNoOwner);
    map.owner_count = owner_count;
    for (std::size_t i = 0; i < needed; ++i)
        map.owner_of[pool[i]] = static_cast<OwnerId>(i / static_cast<std::size_t>(subgraph_size));
    return map;
}

OwnershipMap random_ownership(const AttributedGraph& graph, OwnerId owner_count,
                              NodeId subgraph_size, std::uint64_t seed) {
    std::vector<NodeId> all(static_cast<std::size_t>(graph.node_count()));
    std::iota(all.begin(), all.end(), 0);
    return random_ownership_among(graph.node_count(), all, owner_count, subgraph_size, seed);
}

VisibleGraph known_graph(const AttributedGraph& graph, const OwnershipMap& ownership) {
    std::vector<Edge> visible;
    for (const auto& [u, v] : graph.structure.edges) {
        const OwnerId ou = ownership.owner_of[u];
        const OwnerId ov = ownership.owner_of[v];
        const bool hidden = ou >= 0 && ou == ov;
        if (!hidden) visible.emplace_back(u, v);
    }
    return VisibleGraph::from_edges(graph.node_count(), std::move(visible));
}

VisibleGraph reveal_selected(const VisibleGraph& known, const AttributedGraph& graph,
                             const OwnershipMap& ownership,
                             const std::vector<std::uint8_t>& selected) {
    std::vector<Edge> edges = known.edges;
    for (const auto& [u, v] : graph.structure.edges) {
        const OwnerId ou = ownership.owner_of[u];
        const OwnerId ov = ownership.owner_of[v];
        const bool hidden = ou >= 0 && ou == ov;
        if (hidden && (selected[u] || selected[v])) edges.emplace_back(u, v);
    }
    return VisibleGraph::from_edges(graph.node_count(), std::move(edges));
}

std::vector<ClassEdgeStats> class_edge_proportions(const AttributedGraph& graph) {
    std::vector<std::int64_t> intra(static_cast<std::size_t>(graph.class_count), 0);
    std::vector<std::int64_t> inter(static_cast<std::size_t>(graph.class_count), 0);
    for (const auto& [u, v] : graph.structure.edges) {
        const int cu = graph.labels[u];
        const int cv = graph.labels[v];
        if (cu == cv) {
            ++intra[cu];
        } else {
            ++inter[cu];
            ++inter[cv];
        }
    }
    std::vector<ClassEdgeStats> out(static_cast<std::size_t>(graph.class_count));
    for (int c = 0; c < graph.class_count; ++c) {
        const double total = static_cast<double>(intra[c] + inter[c]);
        if (total > 0) {
            out[c].intra_fraction = static_cast<double>(intra[c]) / total;
            out[c].inter_fraction = static_cast<double>(inter[c]) / total;
            out[c].has_edges = true;
        }
    }
    return out;
}

NormalizedAdjacency normalized_adjacency(const VisibleGraph& graph, AdjacencyMode mode) {
    const NodeId n = graph.node_count;
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(graph.edges.size() * 2 +
                     (mode == AdjacencyMode::gcn_renormalized ? static_cast<std::size_t>(n) : 0));

    if (mode == AdjacencyMode::propagation) {
        for (const auto& [u, v] : graph.edges) {
            const double w =
                1.0 / std::sqrt(static_cast<double>(graph.degree(u)) * graph.degree(v));
            triplets.emplace_back(u, v, w);
            triplets.emplace_back(v, u, w);
        }
    } else {
        for (NodeId v = 0; v < n; ++v) {
            const double dv = graph.degree(v) + 1.0;
            triplets.emplace_back(v, v, 1.0 / dv);
        }
        for (const auto& [u, v] : graph.edges) {
            const double w = 1.0 / std::sqrt((graph.degree(u) + 1.0) * (graph.degree(v) + 1.0));
            triplets.emplace_back(u, v, w);
            triplets.emplace_back(v, u, w);
        }
    }

    NormalizedAdjacency adj;
    adj.mode = mode;
    adj.matrix.resize(n, n);
    adj.matrix.setFromTriplets(triplets.begin(), triplets.end());
    adj.matrix.makeCompressed();
    return adj;
}

} // namespace simt
