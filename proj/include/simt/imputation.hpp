#pragma once

#include "simt/auction.hpp"
#include "simt/graph.hpp"

#include <cstdint>
#include <vector>

namespace simt {

struct ImputedFeatures {
    Matrix features; // n x m; purchased rows are bit-identical to the input
    std::vector<std::uint8_t> selected;
    int iterations_used = 0;
    double final_residual = 0.0;
    bool converged = false;
};

/// Iterative harmonic extension of the purchased features: repeatedly
/// multiply by the propagation-normalized adjacency and clamp the purchased
/// rows back, until the max-norm change drops below tol. Rows of unselected
/// nodes start at zero. Hitting max_iter is reported via the converged flag,
/// not an error.
ImputedFeatures feature_propagation(const NormalizedAdjacency& adjacency, const Matrix& features,
                                    const std::vector<std::uint8_t>& selected, double tol = 1e-6,
                                    int max_iter = 200);

struct ClosedFormImputation {
    Matrix features;
    std::vector<std::uint8_t> unreachable; // unselected nodes with no path to any selected node
    bool any_unreachable = false;
};

/// Exact fixed point of the propagation above, by direct linear solve:
/// X_u = (I - A_uu)^{-1} A_us X_s on the unselected block. Unselected nodes
/// unreachable from every selected node make the block singular; their rows
/// are pinned to zero and flagged instead.
ClosedFormImputation closed_form_imputation(const NormalizedAdjacency& adjacency,
                                            const Matrix& features,
                                            const std::vector<std::uint8_t>& selected);

struct AugmentedGraph {
    VisibleGraph base;
    std::vector<Edge> added_edges;
    double density_used = 0.0;

    VisibleGraph combined() const;
};

/// Erdos-Renyi repair of the structure lost to unpurchased nodes: every pair
/// of same-owner unselected nodes receives an edge with probability equal to
/// the base graph's edge density. Selected nodes and cross-owner pairs are
/// never touched.
AugmentedGraph edge_augmentation(const VisibleGraph& known, const OwnershipMap& ownership,
                                 const AuctionOutcome& outcome, std::uint64_t seed);

} // namespace simt
