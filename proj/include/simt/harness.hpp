#pragma once

#include "simt/auction.hpp"
#include "simt/clustering.hpp"
#include "simt/gcn.hpp"
#include "simt/graph.hpp"
#include "simt/importance.hpp"
#include "simt/imputation.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace simt {

enum class Mechanism {
    simt,        // clustered ranked scores, propagation, augmentation
    greedy,      // valuations only, no imputation
    greedy_p,    // valuations only, with imputation
    random_sel,  // uniform-random affordable selection (sanity floor)
    no_cluster,  // ablation: single cluster
    no_rep,      // ablation: informativeness only (alpha = 1)
    no_info,     // ablation: representativeness only (alpha = 0)
    no_edge_aug, // ablation: no edge augmentation
};

const char* mechanism_name(Mechanism m);
Mechanism mechanism_from_name(const std::string& name);

struct ExperimentConfig {
    // dataset: either generated or loaded from files
    bool use_sbm = true;
    std::string edge_file, feature_file, label_file;
    int sbm_classes = 5;
    int sbm_nodes_per_class = 200;
    double sbm_p_in = 0.05;
    double sbm_p_out = 0.002;
    int sbm_feature_dim = 16;
    double sbm_signal = 1.0;

    // marketplace
    OwnerId owner_count = 10;
    NodeId subgraph_size = 80;
    std::vector<double> budgets = {50, 100, 150, 200, 250, 300};
    double sigma = 0.1;
    double theta_upper = 2.0;
    double mean_valuation = 1.0;
    std::vector<Mechanism> mechanisms = {Mechanism::simt, Mechanism::greedy,
                                         Mechanism::greedy_p};

    // scoring
    CentralityKind centrality = CentralityKind::pagerank;
    double gamma = 0.85;
    double pagerank_tol = 1e-10;
    int pagerank_max_iter = 1000;
    ClusterId clusters = 0; // 0: use the dataset class count
    int restarts = 8;
    int max_sweeps = 40;

    // protocol
    double test_fraction = 0.15;
    double train_fraction = 0.8; // of the selected nodes; the rest validates
    int outer_runs = 10;
    int split_runs = 10;

    // imputation + training
    double propagation_tol = 1e-6;
    int propagation_max_iter = 200;
    TrainConfig train;

    std::uint64_t seed = 1;
    int threads = 0; // 0: hardware concurrency

    void validate() const;
};

/// Flat key-value config file; '#' comments; unknown keys rejected.
ExperimentConfig load_config(const std::string& path);
void apply_preset(ExperimentConfig& config, const std::string& preset); // desk | paper

struct ResultCell {
    Mechanism mechanism = Mechanism::simt;
    double budget = 0.0;
    int runs = 0;
    int zero_selection_runs = 0;
    double macro_mean = 0, macro_std = 0;
    double micro_mean = 0, micro_std = 0;
    double accuracy_mean = 0, accuracy_std = 0;
    double bought_mean = 0;
    double payment_mean = 0;
    double contribution_per_node = 0; // mean accuracy (percent) / mean bought
};

struct ResultsTable {
    std::vector<ResultCell> cells;
    const ResultCell* find(Mechanism m, double budget) const;
};

/// Full pipeline, deterministic per config: per outer seed sample the test
/// split, assign owners, generate valuations, cluster the known graph, then
/// per budget and mechanism run the procurement, reveal, impute, augment,
/// and per split seed train and evaluate on the untouched test set.
ResultsTable run_experiment(const ExperimentConfig& config);

/// results.tsv (one record per mechanism x budget x metric) plus an aligned
/// human-readable table.txt under out_dir.
void emit_report(const ResultsTable& table, const std::string& out_dir);
ResultsTable parse_results(const std::string& path);
std::string render_table(const ResultsTable& table);

/// Valuation-only selection: uniform scores in a single cluster.
AuctionOutcome mechanism_greedy(const Valuations& valuations, const OwnershipMap& ownership,
                                const VisibleGraph& known, double budget, double theta_upper);

/// Seeded uniform-random affordable selection, paying the reported value.
AuctionOutcome mechanism_random(const Valuations& valuations, const OwnershipMap& ownership,
                                double budget, std::uint64_t seed);

struct SuiteResult {
    int instances = 0;
    int bf_violations = 0;
    int ir_violations = 0;
    int ic_violations = 0;             // owner-level grid on per-node-valuation instances
    int node_deviation_violations = 0; // single-node deviations, any ownership
    double worst_ic_gain = 0.0;
    double worst_demand_reduction_gain = 0.0; // known multi-node-owner limitation, reported only
    std::string first_counterexample;

    bool ok() const {
        return bf_violations == 0 && ir_violations == 0 && ic_violations == 0 &&
               node_deviation_violations == 0;
    }
};

/// Randomized mechanism check: instances with n <= 30 nodes, T <= 3
/// clusters, scores in (0,1], per-node valuations in (0,2], budgets in
/// [0,10]. Every instance is verified for budget feasibility, individual
/// rationality, and the owner-level deviation grid. Each instance is also
/// regrouped into multi-node owners with a shared valuation and re-verified
/// for BF, IR and per-node deviations; the owner-level demand-reduction gain
/// such grouped owners can extract is recorded but is not a failure.
SuiteResult mechanism_property_suite(int instances, std::uint64_t seed,
                                     const DeviationGrid& grid = DeviationGrid::standard());

} // namespace simt
