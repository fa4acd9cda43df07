#include "simt/harness.hpp"
#include "simt/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace simt {
namespace {

// seed-stream tags
enum : std::uint64_t {
    kTagData = 0x01,
    kTagOuter = 0x02,
    kTagTest = 0x03,
    kTagOwners = 0x04,
    kTagValuations = 0x05,
    kTagClustering = 0x06,
    kTagAugment = 0x07,
    kTagSplit = 0x08,
    kTagInit = 0x09,
    kTagRandomSel = 0x0a,
};

struct MechanismTraits {
    bool ranked_scores = true;   // false: uniform scores (valuation-only selection)
    bool single_cluster = false; // overrides the configured cluster count with 1
    double alpha_override = -1;  // negative: blend from the budget
    bool propagate = true;
    bool augment = true;
    bool random_selection = false;
};

MechanismTraits traits_for(Mechanism m) {
    switch (m) {
        case Mechanism::simt: return {};
        case Mechanism::greedy: return {false, true, -1, false, true, false};
        case Mechanism::greedy_p: return {false, true, -1, true, true, false};
        case Mechanism::random_sel: return {false, true, -1, true, true, true};
        case Mechanism::no_cluster: return {true, true, -1, true, true, false};
        case Mechanism::no_rep: return {true, false, 1.0, true, true, false};
        case Mechanism::no_info: return {true, false, 0.0, true, true, false};
        case Mechanism::no_edge_aug: return {true, false, -1, true, false, false};
    }
    throw std::logic_error("unknown mechanism");
}

} // namespace

const char* mechanism_name(Mechanism m) {
    switch (m) {
        case Mechanism::simt: return "simt";
        case Mechanism::greedy: return "greedy";
        case Mechanism::greedy_p: return "greedy_p";
        case Mechanism::random_sel: return "random";
        case Mechanism::no_cluster: return "no_cluster";
        case Mechanism::no_rep: return "no_rep";
        case Mechanism::no_info: return "no_info";
        case Mechanism::no_edge_aug: return "no_edge_aug";
    }
    throw std::logic_error("unknown mechanism");
}

Mechanism mechanism_from_name(const std::string& name) {
    for (Mechanism m : {Mechanism::simt, Mechanism::greedy, Mechanism::greedy_p,
                        Mechanism::random_sel, Mechanism::no_cluster, Mechanism::no_rep,
                        Mechanism::no_info, Mechanism::no_edge_aug})
        if (name == mechanism_name(m)) return m;
    throw std::invalid_argument("unknown mechanism '" + name + "'");
}

void ExperimentConfig::validate() const {
    if (budgets.empty()) throw std::invalid_argument("at least one budget required");
    for (double b : budgets)
        if (b <= 0) throw std::invalid_argument("budgets must be positive");
    if (outer_runs < 1 || split_runs < 1) throw std::invalid_argument("run counts must be >= 1");
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("test_fraction must be in [0, 1)");
    if (!(train_fraction > 0.0 && train_fraction <= 1.0))
        throw std::invalid_argument("train_fraction must be in (0, 1]");
    if (mechanisms.empty()) throw std::invalid_argument("at least one mechanism required");
    if (!use_sbm && (edge_file.empty() || feature_file.empty() || label_file.empty()))
        throw std::invalid_argument("file dataset needs edge_file, feature_file and label_file");
}

// ---------------------------------------------------------------------------
// Config file

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        const auto b = item.find_last_not_of(" \t");
        parts.push_back(item.substr(a, b - a + 1));
    }
    return parts;
}

} // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    ExperimentConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected key = value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(" \t");
            return s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "dataset") {
                if (value == "sbm") cfg.use_sbm = true;
                else if (value == "files") cfg.use_sbm = false;
                else throw std::runtime_error("dataset must be sbm or files");
            } else if (key == "edge_file") cfg.edge_file = value;
            else if (key == "feature_file") cfg.feature_file = value;
            else if (key == "label_file") cfg.label_file = value;
            else if (key == "sbm_classes") cfg.sbm_classes = std::stoi(value);
            else if (key == "sbm_nodes_per_class") cfg.sbm_nodes_per_class = std::stoi(value);
            else if (key == "sbm_p_in") cfg.sbm_p_in = std::stod(value);
            else if (key == "sbm_p_out") cfg.sbm_p_out = std::stod(value);
            else if (key == "sbm_feature_dim") cfg.sbm_feature_dim = std::stoi(value);
            else if (key == "sbm_signal") cfg.sbm_signal = std::stod(value);
            else if (key == "owner_count") cfg.owner_count = std::stoi(value);
            else if (key == "subgraph_size") cfg.subgraph_size = std::stoi(value);
            else if (key == "budgets") {
                cfg.budgets.clear();
                for (const auto& item : split_list(value)) cfg.budgets.push_back(std::stod(item));
            } else if (key == "sigma") cfg.sigma = std::stod(value);
            else if (key == "mechanisms") {
                cfg.mechanisms.clear();
                for (const auto& item : split_list(value))
                    cfg.mechanisms.push_back(mechanism_from_name(item));
            } else if (key == "centrality") {
                if (value == "pagerank") cfg.centrality = CentralityKind::pagerank;
                else if (value == "degree") cfg.centrality = CentralityKind::degree;
                else throw std::runtime_error("centrality must be pagerank or degree");
            } else if (key == "gamma") cfg.gamma = std::stod(value);
            else if (key == "pagerank_tol") cfg.pagerank_tol = std::stod(value);
            else if (key == "pagerank_max_iter") cfg.pagerank_max_iter = std::stoi(value);
            else if (key == "clusters") cfg.clusters = std::stoi(value);
            else if (key == "restarts") cfg.restarts = std::stoi(value);
            else if (key == "max_sweeps") cfg.max_sweeps = std::stoi(value);
            else if (key == "test_fraction") cfg.test_fraction = std::stod(value);
            else if (key == "train_fraction") cfg.train_fraction = std::stod(value);
            else if (key == "outer_runs") cfg.outer_runs = std::stoi(value);
            else if (key == "split_runs") cfg.split_runs = std::stoi(value);
            else if (key == "propagation_tol") cfg.propagation_tol = std::stod(value);
            else if (key == "propagation_max_iter") cfg.propagation_max_iter = std::stoi(value);
            else if (key == "epochs") cfg.train.epochs = std::stoi(value);
            else if (key == "learning_rate") cfg.train.learning_rate = std::stod(value);
            else if (key == "weight_decay") cfg.train.weight_decay = std::stod(value);
            else if (key == "lambda") cfg.train.contrastive_weight = std::stod(value);
            else if (key == "tau") cfg.train.temperature = std::stod(value);
            else if (key == "hidden_size") cfg.train.hidden_size = std::stoi(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "threads") cfg.threads = std::stoi(value);
            else throw std::runtime_error("unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad value '" +
                                     value + "' for " + key);
        }
    }
    cfg.validate();
    return cfg;
}

void apply_preset(ExperimentConfig& config, const std::string& preset) {
    if (preset == "desk") {
        config.outer_runs = 3;
        config.split_runs = 3;
    } else if (preset == "paper") {
        config.outer_runs = 10;
        config.split_runs = 10;
    } else if (!preset.empty()) {
        throw std::invalid_argument("unknown preset '" + preset + "'");
    }
}

// ---------------------------------------------------------------------------
// Baseline selections

AuctionOutcome mechanism_greedy(const Valuations& valuations, const OwnershipMap& ownership,
                                const VisibleGraph& known, double budget, double theta_upper) {
    const Partition single = Partition::single_cluster(known);
    const Vector uniform = Vector::Ones(known.node_count);
    return run_auction(uniform, valuations, single, ownership, budget, theta_upper);
}

AuctionOutcome mechanism_random(const Valuations& valuations, const OwnershipMap& ownership,
                                double budget, std::uint64_t seed) {
    const NodeId n = static_cast<NodeId>(ownership.owner_of.size());
    AuctionOutcome outcome;
    outcome.allocation.assign(static_cast<std::size_t>(n), 0);
    outcome.payment = Vector::Zero(n);

    std::vector<NodeId> pool;
    for (NodeId v = 0; v < n; ++v)
        if (ownership.tradable(v)) pool.push_back(v);
    Rng rng(seed);
    std::shuffle(pool.begin(), pool.end(), rng);

    double remaining = budget;
    for (NodeId v : pool) {
        const double price = valuations.theta[v];
        if (price <= remaining && price > 0.0) {
            outcome.allocation[v] = 1;
            outcome.payment[v] = price;
            remaining -= price;
        }
    }
    return outcome;
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

struct RunRecord {
    Metrics metrics;
    double bought = 0;
    double paid = 0;
    bool zero_selection = false;
};

struct OuterContext {
    std::vector<std::uint8_t> test_mask;
    std::vector<Eigen::Index> test_nodes;
    OwnershipMap ownership;
    Valuations valuations;
    VisibleGraph known;
    Partition multi;  // configured cluster count
    Partition single; // one cluster
    std::int64_t tradable = 0;
};

Metrics majority_class_metrics(const std::vector<int>& labels,
                               const std::vector<std::uint8_t>& mask, int class_count) {
    // Nothing was purchased, so no label information exists; predict class 0.
    std::int64_t total = 0, zeros = 0;
    for (std::size_t v = 0; v < mask.size(); ++v) {
        if (!mask[v]) continue;
        ++total;
        if (labels[v] == 0) ++zeros;
    }
    Metrics m;
    if (total == 0) return m;
    m.accuracy = static_cast<double>(zeros) / static_cast<double>(total);
    m.micro_f1 = m.accuracy;
    const double f1_zero =
        zeros > 0 ? 2.0 * static_cast<double>(zeros) / static_cast<double>(total + zeros) : 0.0;
    m.macro_f1 = class_count > 0 ? f1_zero / class_count : 0.0;
    return m;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    const int workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

double sample_std(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

} // namespace

ResultsTable run_experiment(const ExperimentConfig& config) {
    config.validate();

    AttributedGraph graph =
        config.use_sbm
            ? generate_sbm(config.sbm_classes, config.sbm_nodes_per_class, config.sbm_p_in,
                           config.sbm_p_out, config.sbm_feature_dim, config.sbm_signal,
                           mix_seed(config.seed, kTagData))
            : load_graph(config.edge_file, config.feature_file, config.label_file);
    const NodeId n = graph.node_count();
    const ClusterId cluster_count =
        config.clusters > 0 ? config.clusters : static_cast<ClusterId>(graph.class_count);

    // (mechanism, budget) -> per-run records, ordered by (outer, split)
    std::map<std::pair<Mechanism, double>, std::vector<RunRecord>> records;
    for (Mechanism m : config.mechanisms)
        for (double b : config.budgets)
            records[{m, b}].resize(static_cast<std::size_t>(config.outer_runs) * config.split_runs);

    for (int outer = 0; outer < config.outer_runs; ++outer) {
        const std::uint64_t outer_seed =
            mix_seed(config.seed, kTagOuter, static_cast<std::uint64_t>(outer));

        OuterContext ctx;
        // test split, untouched by trading
        {
            std::vector<NodeId> order(static_cast<std::size_t>(n));
            std::iota(order.begin(), order.end(), 0);
            Rng rng(mix_seed(outer_seed, kTagTest));
            std::shuffle(order.begin(), order.end(), rng);
            const auto test_count =
                static_cast<std::size_t>(std::floor(config.test_fraction * n));
            ctx.test_mask.assign(static_cast<std::size_t>(n), 0);
            for (std::size_t i = 0; i < test_count; ++i) ctx.test_mask[order[i]] = 1;
            for (NodeId v = 0; v < n; ++v)
                if (ctx.test_mask[v]) ctx.test_nodes.push_back(v);
        }
        std::vector<NodeId> eligible;
        for (NodeId v = 0; v < n; ++v)
            if (!ctx.test_mask[v]) eligible.push_back(v);

        ctx.ownership = random_ownership_among(n, eligible, config.owner_count,
                                               config.subgraph_size,
                                               mix_seed(outer_seed, kTagOwners));
        ctx.tradable = static_cast<std::int64_t>(ctx.ownership.tradable_count());
        ctx.valuations = generate_valuations(ctx.ownership, graph.labels, config.sigma,
                                             mix_seed(outer_seed, kTagValuations));
        ctx.known = known_graph(graph, ctx.ownership);
        ctx.single = Partition::single_cluster(ctx.known);
        ctx.multi = best_entropy_clustering(ctx.known, cluster_count,
                                            mix_seed(outer_seed, kTagClustering),
                                            config.restarts, config.max_sweeps);

        for (double budget : config.budgets) {
            for (Mechanism mech : config.mechanisms) {
                const MechanismTraits traits = traits_for(mech);
                const Partition& partition = traits.single_cluster ? ctx.single : ctx.multi;

                AuctionOutcome outcome;
                if (traits.random_selection) {
                    outcome = mechanism_random(ctx.valuations, ctx.ownership, budget,
                                               mix_seed(outer_seed, kTagRandomSel));
                } else if (!traits.ranked_scores) {
                    outcome = mechanism_greedy(ctx.valuations, ctx.ownership, ctx.known, budget,
                                               config.theta_upper);
                } else {
                    const double alpha =
                        traits.alpha_override >= 0.0
                            ? traits.alpha_override
                            : blend_alpha(budget, ctx.tradable, config.mean_valuation,
                                          partition.cluster_count);
                    const ImportanceScores scores = importance_scores_with_alpha(
                        ctx.known, partition, alpha, config.centrality, config.gamma);
                    outcome = run_auction(scores.phi, ctx.valuations, partition, ctx.ownership,
                                          budget, config.theta_upper);
                }

                for (NodeId v : ctx.test_nodes)
                    if (outcome.allocation[v])
                        throw std::logic_error("test node allocated by the mechanism");
                if (outcome.total_payment() > budget * (1.0 + 1e-12))
                    throw std::logic_error("mechanism exceeded the budget");

                auto& slot = records[{mech, budget}];
                const std::size_t base =
                    static_cast<std::size_t>(outer) * config.split_runs;

                std::vector<NodeId> selected_nodes;
                for (NodeId v = 0; v < n; ++v)
                    if (outcome.allocation[v]) selected_nodes.push_back(v);

                if (selected_nodes.empty()) {
                    RunRecord rec;
                    rec.zero_selection = true;
                    rec.metrics =
                        majority_class_metrics(graph.labels, ctx.test_mask, graph.class_count);
                    for (int split = 0; split < config.split_runs; ++split)
                        slot[base + split] = rec;
                    continue;
                }

                const VisibleGraph revealed =
                    reveal_selected(ctx.known, graph, ctx.ownership, outcome.allocation);

                Matrix imputed;
                if (traits.propagate) {
                    const NormalizedAdjacency prop =
                        normalized_adjacency(revealed, AdjacencyMode::propagation);
                    imputed = feature_propagation(prop, graph.features, outcome.allocation,
                                                  config.propagation_tol,
                                                  config.propagation_max_iter)
                                  .features;
                } else {
                    imputed = Matrix::Zero(n, graph.features.cols());
                    for (NodeId v : selected_nodes) imputed.row(v) = graph.features.row(v);
                }

                AugmentedGraph augmented;
                if (traits.augment) {
                    augmented = edge_augmentation(revealed, ctx.ownership, outcome,
                                                  mix_seed(outer_seed, kTagAugment));
                } else {
                    augmented.base = revealed;
                }
                const NormalizedAdjacency adj_orig =
                    normalized_adjacency(revealed, AdjacencyMode::gcn_renormalized);
                const NormalizedAdjacency adj_aug =
                    augmented.added_edges.empty()
                        ? adj_orig
                        : normalized_adjacency(augmented.combined(),
                                               AdjacencyMode::gcn_renormalized);

                const double paid = outcome.total_payment();
                const double bought = static_cast<double>(selected_nodes.size());

                parallel_for(
                    static_cast<std::size_t>(config.split_runs), config.threads,
                    [&](std::size_t split) {
                        std::vector<NodeId> order = selected_nodes;
                        Rng rng(mix_seed(outer_seed, kTagSplit, split));
                        std::shuffle(order.begin(), order.end(), rng);
                        const auto train_count = std::max<std::size_t>(
                            1, static_cast<std::size_t>(
                                   std::floor(config.train_fraction * order.size())));
                        std::vector<std::uint8_t> train_mask(static_cast<std::size_t>(n), 0);
                        std::vector<std::uint8_t> val_mask(static_cast<std::size_t>(n), 0);
                        for (std::size_t i = 0; i < order.size(); ++i)
                            (i < train_count ? train_mask : val_mask)[order[i]] = 1;

                        TrainConfig tc = config.train;
                        tc.seed = mix_seed(outer_seed, kTagInit, split);
                        const TrainResult trained = train_gcn(tc, adj_orig, adj_aug, imputed,
                                                              graph.labels, train_mask, val_mask);

                        // The consumer deploys on the graph they actually
                        // hold; the augmented edges exist only at training.
                        RunRecord rec;
                        rec.metrics = evaluate(trained.model, adj_orig, imputed, graph.labels,
                                               ctx.test_mask);
                        rec.bought = bought;
                        rec.paid = paid;
                        slot[base + split] = rec;
                    });
            }
        }
    }

    ResultsTable table;
    for (Mechanism m : config.mechanisms) {
        for (double b : config.budgets) {
            const auto& runs = records[{m, b}];
            std::vector<double> macro, micro, acc, bought, paid;
            ResultCell cell;
            cell.mechanism = m;
            cell.budget = b;
            cell.runs = static_cast<int>(runs.size());
            for (const RunRecord& r : runs) {
                macro.push_back(r.metrics.macro_f1);
                micro.push_back(r.metrics.micro_f1);
                acc.push_back(r.metrics.accuracy);
                bought.push_back(r.bought);
                paid.push_back(r.paid);
                if (r.zero_selection) ++cell.zero_selection_runs;
            }
            cell.macro_mean = mean_of(macro);
            cell.macro_std = sample_std(macro, cell.macro_mean);
            cell.micro_mean = mean_of(micro);
            cell.micro_std = sample_std(micro, cell.micro_mean);
            cell.accuracy_mean = mean_of(acc);
            cell.accuracy_std = sample_std(acc, cell.accuracy_mean);
            cell.bought_mean = mean_of(bought);
            cell.payment_mean = mean_of(paid);
            cell.contribution_per_node =
                cell.bought_mean > 0 ? 100.0 * cell.accuracy_mean / cell.bought_mean : 0.0;
            table.cells.push_back(cell);
        }
    }
    return table;
}

const ResultCell* ResultsTable::find(Mechanism m, double budget) const {
    for (const auto& cell : cells)
        if (cell.mechanism == m && cell.budget == budget) return &cell;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Reporting

void emit_report(const ResultsTable& table, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::string results_path = out_dir + "/results.tsv";
    std::ofstream out(results_path);
    if (!out) throw std::runtime_error("cannot write " + results_path);
    out.precision(17);
    out << "# mechanism\tbudget\tmetric\tmean\tstd\tn\n";
    for (const auto& c : table.cells) {
        auto line = [&](const char* metric, double mean, double std_dev) {
            out << mechanism_name(c.mechanism) << '\t' << c.budget << '\t' << metric << '\t'
                << mean << '\t' << std_dev << '\t' << c.runs << '\n';
        };
        line("macro_f1", c.macro_mean, c.macro_std);
        line("micro_f1", c.micro_mean, c.micro_std);
        line("accuracy", c.accuracy_mean, c.accuracy_std);
        line("bought_nodes", c.bought_mean, 0.0);
        line("total_payment", c.payment_mean, 0.0);
        line("contribution_per_node", c.contribution_per_node, 0.0);
        line("zero_selection_runs", static_cast<double>(c.zero_selection_runs), 0.0);
    }
    out.close();

    std::ofstream table_out(out_dir + "/table.txt");
    if (!table_out) throw std::runtime_error("cannot write " + out_dir + "/table.txt");
    table_out << render_table(table);
}

ResultsTable parse_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::map<std::pair<std::string, double>, ResultCell> cells;
    std::vector<std::pair<std::string, double>> order;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string mech, metric;
        double budget, mean, std_dev;
        int n;
        if (!(row >> mech >> budget >> metric >> mean >> std_dev >> n))
            throw std::runtime_error(path + ": malformed record '" + line + "'");
        const auto key = std::make_pair(mech, budget);
        if (!cells.count(key)) {
            ResultCell cell;
            cell.mechanism = mechanism_from_name(mech);
            cell.budget = budget;
            cells[key] = cell;
            order.push_back(key);
        }
        ResultCell& cell = cells[key];
        cell.runs = n;
        if (metric == "macro_f1") { cell.macro_mean = mean; cell.macro_std = std_dev; }
        else if (metric == "micro_f1") { cell.micro_mean = mean; cell.micro_std = std_dev; }
        else if (metric == "accuracy") { cell.accuracy_mean = mean; cell.accuracy_std = std_dev; }
        else if (metric == "bought_nodes") cell.bought_mean = mean;
        else if (metric == "total_payment") cell.payment_mean = mean;
        else if (metric == "contribution_per_node") cell.contribution_per_node = mean;
        else if (metric == "zero_selection_runs") cell.zero_selection_runs = static_cast<int>(mean);
        else throw std::runtime_error(path + ": unknown metric '" + metric + "'");
    }
    ResultsTable table;
    for (const auto& key : order) table.cells.push_back(cells[key]);
    return table;
}

std::string render_table(const ResultsTable& table) {
    std::vector<double> budgets;
    std::vector<Mechanism> mechanisms;
    for (const auto& c : table.cells) {
        if (std::find(budgets.begin(), budgets.end(), c.budget) == budgets.end())
            budgets.push_back(c.budget);
        if (std::find(mechanisms.begin(), mechanisms.end(), c.mechanism) == mechanisms.end())
            mechanisms.push_back(c.mechanism);
    }
    std::sort(budgets.begin(), budgets.end());

    std::ostringstream out;
    out << std::left << std::setw(13) << "mechanism";
    for (double b : budgets) {
        std::ostringstream hdr;
        hdr << "budget " << b;
        out << std::setw(26) << hdr.str();
    }
    out << std::setw(10) << "avg acc" << "contrib/node\n";
    out << std::left << std::setw(13) << "";
    for (std::size_t i = 0; i < budgets.size(); ++i)
        out << std::setw(26) << "MacroF1        MicroF1";
    out << '\n';

    for (Mechanism m : mechanisms) {
        out << std::left << std::setw(13) << mechanism_name(m);
        double acc_sum = 0.0, bought_sum = 0.0;
        int cells_seen = 0;
        for (double b : budgets) {
            const ResultCell* c = table.find(m, b);
            if (!c) {
                out << std::setw(26) << "-";
                continue;
            }
            std::ostringstream cellout;
            cellout << std::fixed << std::setprecision(1) << 100.0 * c->macro_mean << "±"
                    << 100.0 * c->macro_std << "  " << 100.0 * c->micro_mean << "±"
                    << 100.0 * c->micro_std;
            out << std::setw(26) << cellout.str();
            acc_sum += c->accuracy_mean;
            bought_sum += c->bought_mean;
            ++cells_seen;
        }
        const double avg_acc = cells_seen > 0 ? acc_sum / cells_seen : 0.0;
        const double avg_bought = cells_seen > 0 ? bought_sum / cells_seen : 0.0;
        std::ostringstream accout;
        accout << std::fixed << std::setprecision(1) << 100.0 * avg_acc;
        out << std::setw(10) << accout.str();
        out << std::fixed << std::setprecision(2)
            << (avg_bought > 0 ? 100.0 * avg_acc / avg_bought : 0.0) << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Mechanism property suite

SuiteResult mechanism_property_suite(int instances, std::uint64_t seed,
                                     const DeviationGrid& grid) {
    SuiteResult result;
    result.instances = instances;
    Rng rng(seed);
    std::uniform_int_distribution<int> node_dist(1, 30);
    std::uniform_int_distribution<int> cluster_dist(1, 3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int i = 0; i < instances; ++i) {
        const NodeId n = node_dist(rng);
        const ClusterId t = std::min<ClusterId>(cluster_dist(rng), n);
        AuctionInstance inst;
        inst.phi.resize(n);
        Valuations truth;
        truth.theta.resize(n);
        truth.theta_upper = 2.0;
        inst.theta_upper = 2.0;
        inst.budget = 10.0 * unit(rng);

        std::vector<ClusterId> assignment(static_cast<std::size_t>(n));
        for (NodeId v = 0; v < n; ++v) {
            inst.phi[v] = std::max(unit(rng), 1e-9); // (0, 1]
            truth.theta[v] = std::max(2.0 * unit(rng), 1e-9); // (0, 2]
            assignment[v] = static_cast<ClusterId>(v % t);
        }
        std::shuffle(assignment.begin(), assignment.end(), rng);
        inst.partition =
            Partition::from_assignment(VisibleGraph::from_edges(n, {}), assignment, t);

        // per-node valuations: every node is its own owner
        inst.ownership.owner_of.resize(static_cast<std::size_t>(n));
        inst.ownership.owner_count = n;
        for (NodeId v = 0; v < n; ++v) inst.ownership.owner_of[v] = v;

        const PropertyReport report =
            verify_mechanism(inst, truth, grid, /*trials=*/0, mix_seed(seed, i));
        result.bf_violations += report.bf_violations;
        result.ir_violations += report.ir_violations;
        result.ic_violations += report.ic_violations;
        result.worst_ic_gain = std::max(result.worst_ic_gain, report.worst_ic_gain);
        if (!report.ok() && result.first_counterexample.empty()) {
            std::ostringstream msg;
            msg << "instance " << i << ": " << report.counterexample;
            result.first_counterexample = msg.str();
        }

        // grouped variant: multi-node owners sharing one valuation
        if (n >= 2) {
            AuctionInstance grouped = inst;
            Valuations shared_truth = truth;
            shared_truth.owner_uniform = true;
            std::uniform_int_distribution<int> size_dist(1, 3);
            OwnerId owner = 0;
            NodeId v = 0;
            while (v < n) {
                const NodeId take = std::min<NodeId>(size_dist(rng), n - v);
                const double shared = std::max(2.0 * unit(rng), 1e-9);
                for (NodeId j = 0; j < take; ++j, ++v) {
                    grouped.ownership.owner_of[v] = owner;
                    shared_truth.theta[v] = shared;
                }
                ++owner;
            }
            grouped.ownership.owner_count = owner;

            const PropertyReport grouped_report = verify_mechanism(
                grouped, shared_truth, grid, /*trials=*/0, mix_seed(seed, i, 1));
            result.bf_violations += grouped_report.bf_violations;
            result.ir_violations += grouped_report.ir_violations;
            result.worst_demand_reduction_gain =
                std::max(result.worst_demand_reduction_gain, grouped_report.worst_ic_gain);
            if ((grouped_report.bf_violations || grouped_report.ir_violations) &&
                result.first_counterexample.empty())
                result.first_counterexample = "grouped instance " + std::to_string(i) + ": " +
                                              grouped_report.counterexample;

            const double node_gain = max_node_deviation_gain(grouped, shared_truth, grid);
            if (node_gain > 1e-9) {
                ++result.node_deviation_violations;
                if (result.first_counterexample.empty())
                    result.first_counterexample = "grouped instance " + std::to_string(i) +
                                                  ": node-level deviation gains " +
                                                  std::to_string(node_gain);
            }
        }
    }
    return result;
}

} // namespace simt
