#pragma once

#include "simt/clustering.hpp"
#include "simt/graph.hpp"
#include "simt/importance.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace simt {

/// Per-node reported valuations. When owner_uniform is set, all nodes of one
/// owner share a single value.
struct Valuations {
    Vector theta;
    double theta_upper = 2.0;
    bool owner_uniform = false;
};

/// Per-class mean in U[0.8, 1.2], per-node draw from N(mean, sigma^2)
/// resampled into [0, 2], then every owner's nodes are set to the mean of
/// her draws. Non-tradable nodes keep their raw draw.
Valuations generate_valuations(const OwnershipMap& ownership, const std::vector<int>& labels,
                               double sigma, std::uint64_t seed);

struct ClusterAudit {
    enum class Rule {
        skipped,           // empty cluster or zero budget share
        runner_up,         // threshold from the first losing position
        proportional_only, // every node selected; no second min-arm exists
    };

    ClusterId cluster = 0;
    double cluster_budget = 0.0;
    std::vector<NodeId> order; // tradable members, best ratio first
    std::int32_t selected = 0; // length of the winning prefix
    Rule rule = Rule::skipped;
    NodeId threshold_node = -1;
    OwnerId threshold_owner = -1;
};

struct AuctionOutcome {
    std::vector<std::uint8_t> allocation;
    Vector payment;
    std::vector<ClusterAudit> audits;

    double total_payment() const;
    std::size_t selected_count() const;
};

/// One budget-feasible reverse auction per cluster, each with budget/T:
/// tradable members are sorted by score/valuation (descending; zero
/// valuations first, ties by node id), the longest affordable prefix wins,
/// and each winner is paid
///   min(cluster_budget * phi_v / prefix_score_sum, (theta_w / phi_w) * phi_v)
/// with w the node at the first losing position. When every member wins, no
/// losing position exists and the proportional arm stands alone. Unspent
/// budget is not redistributed across clusters.
AuctionOutcome run_auction(const Vector& phi, const Valuations& valuations,
                           const Partition& partition, const OwnershipMap& ownership,
                           double budget, double theta_upper);

inline AuctionOutcome run_auction(const ImportanceScores& scores, const Valuations& valuations,
                                  const Partition& partition, const OwnershipMap& ownership,
                                  double budget, double theta_upper) {
    return run_auction(scores.phi, valuations, partition, ownership, budget, theta_upper);
}

/// sum over the owner's nodes of (payment - true valuation) * allocation.
double owner_utility(const AuctionOutcome& outcome, const Valuations& true_valuations,
                     const OwnershipMap& ownership, OwnerId owner);

struct DeviationGrid {
    std::vector<double> multipliers;
    std::vector<double> offsets; // applied as +off and -off

    static DeviationGrid standard();
};

struct AuctionInstance {
    Vector phi;
    Partition partition;
    OwnershipMap ownership;
    double budget = 0.0;
    double theta_upper = 2.0;
};

struct PropertyReport {
    bool budget_feasible = true;
    bool individually_rational = true;
    bool incentive_compatible = true;
    int bf_violations = 0;
    int ir_violations = 0;
    int ic_violations = 0;
    double worst_ic_gain = 0.0; // largest utility gain any deviation achieved
    std::string counterexample; // first failure, human readable

    bool ok() const { return budget_feasible && individually_rational && incentive_compatible; }
};

/// Executable check of the mechanism guarantees on one instance. BF and IR
/// are checked on the truthful run; IC replays the auction for every sampled
/// owner under every deviated report (multiplied and offset, clamped to
/// [0, theta_upper]) and compares utilities computed at the true valuations.
/// Gains above `tolerance` count as violations.
///
/// Note: owner-level truthfulness only holds when owners hold single nodes.
/// An owner with several nodes can profit by inflating her shared report so
/// that one node drops out of the winning prefix, which shrinks the prefix
/// score sum and raises the proportional payment of her remaining nodes.
/// The per-node guarantee below is what holds unconditionally.
PropertyReport verify_mechanism(const AuctionInstance& instance, const Valuations& true_valuations,
                                const DeviationGrid& grid, int trials, std::uint64_t seed,
                                double tolerance = 1e-9);

/// Largest gain in a single node's own utility (payment - true value, if
/// selected) achievable by deviating only that node's report. Zero for a
/// truthful mechanism in the per-node sense, for any ownership structure.
double max_node_deviation_gain(const AuctionInstance& instance,
                               const Valuations& true_valuations, const DeviationGrid& grid);

/// One line per node: id, owner, cluster, phi, theta, allocation, payment.
void write_outcome(const AuctionOutcome& outcome, const Vector& phi, const Valuations& valuations,
                   const Partition& partition, const OwnershipMap& ownership,
                   const std::string& path);

} // namespace simt
