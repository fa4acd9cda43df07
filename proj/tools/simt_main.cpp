#include "simt/harness.hpp"
#include "simt/random.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

namespace {

int cmd_run(const std::string& config_path, const std::string& preset, std::uint64_t seed,
            bool seed_given, const std::string& out_dir) {
    simt::ExperimentConfig config = simt::load_config(config_path);
    simt::apply_preset(config, preset);
    if (seed_given) config.seed = seed;
    const simt::ResultsTable table = simt::run_experiment(config);
    simt::emit_report(table, out_dir);
    std::cout << simt::render_table(table);
    std::cout << "report written to " << out_dir << "/results.tsv\n";
    return 0;
}

int cmd_verify(int instances, std::uint64_t seed) {
    const simt::SuiteResult result = simt::mechanism_property_suite(instances, seed);
    std::cout << "instances:                 " << result.instances << '\n'
              << "BF violations:             " << result.bf_violations << '\n'
              << "IR violations:             " << result.ir_violations << '\n'
              << "IC violations:             " << result.ic_violations << '\n'
              << "node-deviation violations: " << result.node_deviation_violations << '\n'
              << "worst IC gain:             " << result.worst_ic_gain << '\n'
              << "multi-node owner demand-reduction gain (known limitation): "
              << result.worst_demand_reduction_gain << '\n';
    if (!result.ok()) {
        std::cout << "counterexample: " << result.first_counterexample << '\n';
        return 2;
    }
    std::cout << "mechanism properties hold\n";
    return 0;
}

int cmd_cluster(const std::string& edge_path, simt::ClusterId clusters, int restarts, int sweeps,
                std::uint64_t seed, const std::string& out_path) {
    const simt::VisibleGraph graph = simt::load_edge_list(edge_path);
    const simt::Partition partition =
        simt::best_entropy_clustering(graph, clusters, seed, restarts, sweeps);
    std::cout << "nodes " << graph.node_count << ", edges " << graph.edge_count()
              << ", clusters " << clusters << ", entropy "
              << simt::structural_entropy(partition) << " bits\n";
    if (!out_path.empty()) {
        simt::write_partition(partition, out_path);
        std::cout << "partition written to " << out_path << '\n';
    }
    return 0;
}

int cmd_score(const std::string& edge_path, simt::ClusterId clusters, double budget,
              const std::string& centrality, double gamma, int restarts, int sweeps,
              std::uint64_t seed, const std::string& out_path) {
    const simt::VisibleGraph graph = simt::load_edge_list(edge_path);
    const simt::Partition partition =
        simt::best_entropy_clustering(graph, clusters, seed, restarts, sweeps);
    const simt::CentralityKind kind = centrality == "degree" ? simt::CentralityKind::degree
                                                             : simt::CentralityKind::pagerank;
    const simt::ImportanceScores scores =
        simt::importance_scores(graph, partition, budget, 1.0, kind, gamma);
    std::cout << "alpha " << scores.alpha << ", entropy " << simt::structural_entropy(partition)
              << " bits\n";
    if (!out_path.empty()) {
        simt::write_scores(scores, out_path);
        std::cout << "scores written to " << out_path << '\n';
    }
    return 0;
}

int cmd_report(const std::string& results_path) {
    const simt::ResultsTable table = simt::parse_results(results_path);
    std::cout << simt::render_table(table);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"structural-importance model trading simulator"};
    app.require_subcommand(1);

    std::string config_path, preset, out_dir = "results";
    std::uint64_t seed = 1;
    auto* run = app.add_subcommand("run", "run a configured experiment");
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--preset", preset, "desk (3x3 runs) or paper (10x10 runs)");
    auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
    run->add_option("--out", out_dir, "output directory");

    int instances = 10000;
    std::uint64_t verify_seed = 7;
    auto* verify = app.add_subcommand("verify", "run the mechanism property suite");
    verify->add_option("--instances", instances, "number of random instances");
    verify->add_option("--seed", verify_seed, "suite seed");

    std::string edge_path, out_path;
    simt::ClusterId clusters = 2;
    int restarts = 8, sweeps = 40;
    std::uint64_t tool_seed = 1;
    auto* cluster = app.add_subcommand("cluster", "cluster an edge list by structural entropy");
    cluster->add_option("--edges", edge_path, "edge list file")->required();
    cluster->add_option("--clusters", clusters, "cluster count");
    cluster->add_option("--restarts", restarts, "greedy restarts");
    cluster->add_option("--sweeps", sweeps, "max sweeps per restart");
    cluster->add_option("--seed", tool_seed, "clustering seed");
    cluster->add_option("--out", out_path, "partition output file");

    std::string score_edges, score_out, centrality = "pagerank";
    simt::ClusterId score_clusters = 2;
    double budget = 100.0, gamma = 0.85;
    int score_restarts = 8, score_sweeps = 40;
    std::uint64_t score_seed = 1;
    auto* score = app.add_subcommand("score", "compute structural importance scores");
    score->add_option("--edges", score_edges, "edge list file")->required();
    score->add_option("--clusters", score_clusters, "cluster count");
    score->add_option("--budget", budget, "budget entering the blend weight");
    score->add_option("--centrality", centrality, "pagerank or degree");
    score->add_option("--gamma", gamma, "pagerank damping");
    score->add_option("--restarts", score_restarts, "greedy restarts");
    score->add_option("--sweeps", score_sweeps, "max sweeps per restart");
    score->add_option("--seed", score_seed, "clustering seed");
    score->add_option("--out", score_out, "score dump file");

    std::string results_path;
    auto* report = app.add_subcommand("report", "re-render a results file");
    report->add_option("--results", results_path, "results.tsv produced by run")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(config_path, preset, seed, seed_opt->count() > 0, out_dir);
        if (verify->parsed()) return cmd_verify(instances, verify_seed);
        if (cluster->parsed())
            return cmd_cluster(edge_path, clusters, restarts, sweeps, tool_seed, out_path);
        if (score->parsed())
            return cmd_score(score_edges, score_clusters, budget, centrality, gamma,
                             score_restarts, score_sweeps, score_seed, score_out);
        if (report->parsed()) return cmd_report(results_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
