#include "simt/auction.hpp"
#include "simt/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace simt {

Valuations generate_valuations(const OwnershipMap& ownership, const std::vector<int>& labels,
                               double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
    const std::size_t n = ownership.owner_of.size();
    if (labels.size() != n) throw std::invalid_argument("label count does not match ownership");

    const int class_count =
        labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;

    Rng rng(seed);
    std::uniform_real_distribution<double> mean_dist(0.8, 1.2);
    std::vector<double> class_mean(static_cast<std::size_t>(class_count));
    for (double& m : class_mean) m = mean_dist(rng);

    Valuations vals;
    vals.theta.resize(static_cast<Eigen::Index>(n));
    vals.theta_upper = 2.0;
    vals.owner_uniform = true;

    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t v = 0; v < n; ++v) {
        const double mu = class_mean[labels[v]];
        double draw = mu;
        if (sigma > 0.0) {
            // resample until the draw lands in the admissible range
            do {
                draw = mu + sigma * noise(rng);
            } while (draw < 0.0 || draw > vals.theta_upper);
        }
        vals.theta[static_cast<Eigen::Index>(v)] = draw;
    }

    for (const auto& nodes : ownership.nodes_by_owner()) {
        if (nodes.empty()) continue;
        double sum = 0.0;
        for (NodeId v : nodes) sum += vals.theta[v];
        const double mean = sum / static_cast<double>(nodes.size());
        for (NodeId v : nodes) vals.theta[v] = mean;
    }
    return vals;
}

double AuctionOutcome::total_payment() const { return payment.sum(); }

std::size_t AuctionOutcome::selected_count() const {
    std::size_t c = 0;
    for (std::uint8_t a : allocation) c += a;
    return c;
}

AuctionOutcome run_auction(const Vector& phi, const Valuations& valuations,
                           const Partition& partition, const OwnershipMap& ownership,
                           double budget, double theta_upper) {
    const NodeId n = static_cast<NodeId>(ownership.owner_of.size());
    if (phi.size() != n || valuations.theta.size() != n ||
        static_cast<NodeId>(partition.cluster_of.size()) != n)
        throw std::invalid_argument("auction inputs disagree on the node count");
    if (budget < 0.0) throw std::invalid_argument("budget must be non-negative");

    AuctionOutcome outcome;
    outcome.allocation.assign(static_cast<std::size_t>(n), 0);
    outcome.payment = Vector::Zero(n);

    std::vector<std::vector<NodeId>> members(static_cast<std::size_t>(partition.cluster_count));
    for (NodeId v = 0; v < n; ++v)
        if (ownership.tradable(v)) members[partition.cluster_of[v]].push_back(v);

    const double cluster_budget = budget / static_cast<double>(partition.cluster_count);

    for (ClusterId t = 0; t < partition.cluster_count; ++t) {
        ClusterAudit audit;
        audit.cluster = t;
        audit.cluster_budget = cluster_budget;

        auto& order = members[t];
        if (order.empty() || cluster_budget <= 0.0) {
            outcome.audits.push_back(std::move(audit));
            continue;
        }
        for (NodeId v : order) {
            if (!(phi[v] > 0.0)) throw std::invalid_argument("scores must be positive");
            if (valuations.theta[v] < 0.0 || valuations.theta[v] > theta_upper)
                throw std::invalid_argument("reported valuation outside [0, theta_upper]");
        }

        // Descending score/valuation == ascending valuation/score; the latter
        // is always finite, so sorting on it keeps the ordering strict-weak.
        std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
            const double ra = valuations.theta[a] / phi[a];
            const double rb = valuations.theta[b] / phi[b];
            if (ra != rb) return ra < rb;
            return a < b;
        });
        audit.order = order;

        // Longest prefix whose last member is still affordable:
        // theta_k * prefix_sum_k <= cluster_budget * phi_k.
        const std::size_t m = order.size();
        std::size_t k = 0;
        double prefix = 0.0;
        double selected_sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const NodeId v = order[i];
            prefix += phi[v];
            if (valuations.theta[v] * prefix <= cluster_budget * phi[v]) {
                k = i + 1;
                selected_sum = prefix;
            }
        }
        audit.selected = static_cast<std::int32_t>(k);

        if (k == 0) {
            outcome.audits.push_back(std::move(audit));
            continue;
        }

        // Threshold ratio for the second min-arm: the first losing position.
        // Paying above this ratio would reward an entrant beyond its
        // critical report, so no owner-skipping variant is admissible here.
        double threshold_ratio = 0.0;
        if (k == m) {
            audit.rule = ClusterAudit::Rule::proportional_only;
        } else {
            const NodeId w = order[k];
            audit.rule = ClusterAudit::Rule::runner_up;
            audit.threshold_node = w;
            audit.threshold_owner = ownership.owner_of[w];
            threshold_ratio = valuations.theta[w] / phi[w];
        }

        for (std::size_t i = 0; i < k; ++i) {
            const NodeId v = order[i];
            const double proportional = cluster_budget * phi[v] / selected_sum;
            double pay = proportional;
            if (audit.rule != ClusterAudit::Rule::proportional_only)
                pay = std::min(proportional, threshold_ratio * phi[v]);
            outcome.allocation[v] = 1;
            outcome.payment[v] = pay;
        }
        outcome.audits.push_back(std::move(audit));
    }

    return outcome;
}

double owner_utility(const AuctionOutcome& outcome, const Valuations& true_valuations,
                     const OwnershipMap& ownership, OwnerId owner) {
    double u = 0.0;
    for (NodeId v = 0; v < static_cast<NodeId>(ownership.owner_of.size()); ++v)
        if (ownership.owner_of[v] == owner && outcome.allocation[v])
            u += outcome.payment[v] - true_valuations.theta[v];
    return u;
}

DeviationGrid DeviationGrid::standard() {
    return DeviationGrid{{0.1, 0.25, 0.5, 0.9, 0.99, 1.01, 1.1, 2.0, 4.0, 10.0},
                         {0.01, 0.1, 0.5}};
}

namespace {

double clamp_report(double value, double upper) {
    return std::min(std::max(value, 0.0), upper);
}

} // namespace

PropertyReport verify_mechanism(const AuctionInstance& instance, const Valuations& true_valuations,
                                const DeviationGrid& grid, int trials, std::uint64_t seed,
                                double tolerance) {
    PropertyReport report;
    const AuctionOutcome truthful = run_auction(instance.phi, true_valuations, instance.partition,
                                                instance.ownership, instance.budget,
                                                instance.theta_upper);

    const double paid = truthful.total_payment();
    if (paid > instance.budget * (1.0 + 1e-12)) {
        report.budget_feasible = false;
        ++report.bf_violations;
        std::ostringstream msg;
        msg << "BF: paid " << paid << " of budget " << instance.budget;
        report.counterexample = msg.str();
    }

    for (NodeId v = 0; v < static_cast<NodeId>(truthful.allocation.size()); ++v) {
        if (truthful.allocation[v] && truthful.payment[v] < true_valuations.theta[v] - 1e-12) {
            report.individually_rational = false;
            ++report.ir_violations;
            if (report.counterexample.empty()) {
                std::ostringstream msg;
                msg << "IR: node " << v << " paid " << truthful.payment[v] << " below valuation "
                    << true_valuations.theta[v];
                report.counterexample = msg.str();
            }
        }
    }

    // Owner-level deviations: one owner rescales or shifts the single value
    // she reports for all her nodes.
    std::vector<OwnerId> owners(static_cast<std::size_t>(instance.ownership.owner_count));
    std::iota(owners.begin(), owners.end(), 0);
    if (trials > 0 && trials < instance.ownership.owner_count) {
        Rng rng(seed);
        std::shuffle(owners.begin(), owners.end(), rng);
        owners.resize(static_cast<std::size_t>(trials));
    }

    std::vector<double> deltas;
    for (double m : grid.multipliers) deltas.push_back(m);
    Valuations deviated = true_valuations;

    const auto owner_nodes = instance.ownership.nodes_by_owner();
    for (OwnerId owner : owners) {
        const auto& nodes = owner_nodes[owner];
        if (nodes.empty()) continue;
        const double u_truth = owner_utility(truthful, true_valuations, instance.ownership, owner);

        auto try_report = [&](double reported) {
            for (NodeId v : nodes) deviated.theta[v] = reported;
            const AuctionOutcome run =
                run_auction(instance.phi, deviated, instance.partition, instance.ownership,
                            instance.budget, instance.theta_upper);
            double u_dev = 0.0;
            for (NodeId v : nodes)
                if (run.allocation[v]) u_dev += run.payment[v] - true_valuations.theta[v];
            const double gain = u_dev - u_truth;
            report.worst_ic_gain = std::max(report.worst_ic_gain, gain);
            if (gain > tolerance) {
                report.incentive_compatible = false;
                ++report.ic_violations;
                if (report.counterexample.empty()) {
                    std::ostringstream msg;
                    msg << "IC: owner " << owner << " reporting " << reported << " gains "
                        << gain;
                    report.counterexample = msg.str();
                }
            }
            for (NodeId v : nodes) deviated.theta[v] = true_valuations.theta[v];
        };

        const double truth_value = true_valuations.theta[nodes.front()];
        for (double m : grid.multipliers)
            try_report(clamp_report(m * truth_value, instance.theta_upper));
        for (double off : grid.offsets) {
            try_report(clamp_report(truth_value + off, instance.theta_upper));
            try_report(clamp_report(truth_value - off, instance.theta_upper));
        }
    }

    return report;
}

double max_node_deviation_gain(const AuctionInstance& instance,
                               const Valuations& true_valuations, const DeviationGrid& grid) {
    const AuctionOutcome truthful = run_auction(instance.phi, true_valuations, instance.partition,
                                                instance.ownership, instance.budget,
                                                instance.theta_upper);
    Valuations deviated = true_valuations;
    double worst = 0.0;
    const NodeId n = static_cast<NodeId>(true_valuations.theta.size());
    for (NodeId v = 0; v < n; ++v) {
        if (!instance.ownership.tradable(v)) continue;
        const double truth_value = true_valuations.theta[v];
        const double u_truth =
            truthful.allocation[v] ? truthful.payment[v] - truth_value : 0.0;
        auto try_report = [&](double reported) {
            deviated.theta[v] = reported;
            const AuctionOutcome run =
                run_auction(instance.phi, deviated, instance.partition, instance.ownership,
                            instance.budget, instance.theta_upper);
            const double u_dev = run.allocation[v] ? run.payment[v] - truth_value : 0.0;
            worst = std::max(worst, u_dev - u_truth);
            deviated.theta[v] = truth_value;
        };
        for (double m : grid.multipliers)
            try_report(clamp_report(m * truth_value, instance.theta_upper));
        for (double off : grid.offsets) {
            try_report(clamp_report(truth_value + off, instance.theta_upper));
            try_report(clamp_report(truth_value - off, instance.theta_upper));
        }
    }
    return worst;
}

void write_outcome(const AuctionOutcome& outcome, const Vector& phi, const Valuations& valuations,
                   const Partition& partition, const OwnershipMap& ownership,
                   const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(17);
    out << "# node\towner\tcluster\tphi\ttheta\tselected\tpayment\n";
    for (NodeId v = 0; v < static_cast<NodeId>(outcome.allocation.size()); ++v) {
        out << v << '\t' << ownership.owner_of[v] << '\t' << partition.cluster_of[v] << '\t'
            << phi[v] << '\t' << valuations.theta[v] << '\t' << int(outcome.allocation[v]) << '\t'
            << outcome.payment[v] << '\n';
    }
}

} // namespace simt
