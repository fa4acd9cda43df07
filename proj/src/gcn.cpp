#include "simt/gcn.hpp"
#include "simt/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace simt {
namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// Row-wise softmax with max subtraction; returns probabilities.
Matrix row_softmax(const Matrix& scores) {
    Matrix p = scores;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        p.row(i).array() -= p.row(i).maxCoeff();
        p.row(i) = p.row(i).array().exp();
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

std::vector<Eigen::Index> mask_indices(const std::vector<std::uint8_t>& mask) {
    std::vector<Eigen::Index> idx;
    for (std::size_t v = 0; v < mask.size(); ++v)
        if (mask[v]) idx.push_back(static_cast<Eigen::Index>(v));
    return idx;
}

} // namespace

GcnForward gcn_forward(const GcnModel& model, const NormalizedAdjacency& adjacency,
                       const Matrix& features) {
    require(features.rows() == adjacency.matrix.rows(), "feature rows must match the adjacency");
    require(features.cols() == model.w1.rows(), "W1 must match the feature dimension");
    require(model.w1.cols() == model.w2.rows(), "W1 and W2 disagree on the hidden size");
    GcnForward out;
    out.hidden = ((adjacency.matrix * features) * model.w1).cwiseMax(0.0);
    out.logits = (adjacency.matrix * out.hidden) * model.w2;
    return out;
}

double cross_entropy(const Matrix& logits, const std::vector<int>& labels,
                     const std::vector<std::uint8_t>& mask) {
    require(static_cast<std::size_t>(logits.rows()) == labels.size(),
            "labels must cover every row");
    require(labels.size() == mask.size(), "mask must cover every row");
    const auto idx = mask_indices(mask);
    require(!idx.empty(), "cross entropy over an empty mask");
    double loss = 0.0;
    for (Eigen::Index v : idx) {
        const double mx = logits.row(v).maxCoeff();
        const double lse = std::log((logits.row(v).array() - mx).exp().sum()) + mx;
        loss += lse - logits(v, labels[static_cast<std::size_t>(v)]);
    }
    return loss / static_cast<double>(idx.size());
}

double contrastive_loss(const Matrix& h, const Matrix& h_prime, double tau) {
    require(tau > 0.0, "temperature must be positive");
    require(h.rows() == h_prime.rows() && h.cols() == h_prime.cols(),
            "embedding shapes must match");
    const Eigen::Index n = h.rows();
    const Matrix scores = (h * h_prime.transpose()) / tau;
    double loss = 0.0;
    for (Eigen::Index v = 0; v < n; ++v) {
        const double mx = scores.row(v).maxCoeff();
        const double lse = std::log((scores.row(v).array() - mx).exp().sum()) + mx;
        loss += lse - scores(v, v);
    }
    return loss / static_cast<double>(n);
}

GcnGradients gcn_loss_and_gradients(const GcnModel& model, const TrainConfig& config,
                                    const NormalizedAdjacency& original,
                                    const NormalizedAdjacency& augmented,
                                    const Matrix& features, const std::vector<int>& labels,
                                    const std::vector<std::uint8_t>& train_mask) {
    const Eigen::Index n = features.rows();
    const auto train_idx = mask_indices(train_mask);
    require(!train_idx.empty(), "training mask is empty");

    const Matrix m_aug = augmented.matrix * features;
    const Matrix z_aug = m_aug * model.w1;
    const Matrix h_aug = z_aug.cwiseMax(0.0);
    const Matrix n_aug = augmented.matrix * h_aug;
    const Matrix logits = n_aug * model.w2;

    GcnGradients out;
    out.loss.classification = cross_entropy(logits, labels, train_mask);

    // d loss / d logits: (softmax - onehot) / |mask| on masked rows.
    Matrix d_logits = Matrix::Zero(n, logits.cols());
    const double inv_mask = 1.0 / static_cast<double>(train_idx.size());
    for (Eigen::Index v : train_idx) {
        Eigen::RowVectorXd p = logits.row(v);
        p.array() -= p.maxCoeff();
        p = p.array().exp();
        p /= p.sum();
        p(labels[static_cast<std::size_t>(v)]) -= 1.0;
        d_logits.row(v) = p * inv_mask;
    }

    out.w2 = n_aug.transpose() * d_logits + 2.0 * config.weight_decay * model.w2;
    Matrix d_h_aug = (augmented.matrix * d_logits) * model.w2.transpose();

    Matrix d_h_orig;
    Matrix z_orig, h_orig;
    if (config.contrastive_weight != 0.0) {
        z_orig = (original.matrix * features) * model.w1;
        h_orig = z_orig.cwiseMax(0.0);
        const Matrix scores = (h_orig * h_aug.transpose()) / config.temperature;
        Matrix p = row_softmax(scores);
        double ctr = 0.0;
        for (Eigen::Index v = 0; v < n; ++v) ctr -= std::log(std::max(p(v, v), 1e-300));
        out.loss.contrastive = ctr / static_cast<double>(n);
        p.diagonal().array() -= 1.0;
        const double scale = config.contrastive_weight / (config.temperature * n);
        d_h_orig = scale * (p * h_aug);
        d_h_aug += scale * (p.transpose() * h_orig);
    }

    Matrix d_z_aug = (z_aug.array() > 0.0).cast<double>() * d_h_aug.array();
    out.w1 = m_aug.transpose() * d_z_aug + 2.0 * config.weight_decay * model.w1;
    if (config.contrastive_weight != 0.0) {
        Matrix d_z_orig = (z_orig.array() > 0.0).cast<double>() * d_h_orig.array();
        out.w1 += (original.matrix * features).transpose() * d_z_orig;
    }

    out.loss.penalty =
        config.weight_decay * (model.w1.squaredNorm() + model.w2.squaredNorm());
    out.loss.total = out.loss.classification +
                     config.contrastive_weight * out.loss.contrastive + out.loss.penalty;
    return out;
}

namespace {

double masked_accuracy(const Matrix& logits, const std::vector<int>& labels,
                       const std::vector<Eigen::Index>& idx) {
    if (idx.empty()) return 0.0;
    std::size_t hits = 0;
    for (Eigen::Index v : idx) {
        Eigen::Index pred;
        logits.row(v).maxCoeff(&pred);
        if (static_cast<int>(pred) == labels[static_cast<std::size_t>(v)]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(idx.size());
}

} // namespace

GcnModel glorot_init(int feature_dim, int hidden, int classes, std::uint64_t seed) {
    Rng rng(seed);
    auto fill = [&rng](Matrix& w, int fan_in, int fan_out) {
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
    };
    GcnModel model;
    model.w1.resize(feature_dim, hidden);
    model.w2.resize(hidden, classes);
    fill(model.w1, feature_dim, hidden);
    fill(model.w2, hidden, classes);
    return model;
}

TrainResult train_gcn(const TrainConfig& config, const NormalizedAdjacency& original,
                      const NormalizedAdjacency& augmented, const Matrix& features,
                      const std::vector<int>& labels, const std::vector<std::uint8_t>& train_mask,
                      const std::vector<std::uint8_t>& val_mask) {
    require(config.epochs >= 1, "need at least one epoch");
    require(config.learning_rate >= 0.0, "learning rate must be non-negative");
    const int classes =
        labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;

    TrainResult result;
    result.model = glorot_init(static_cast<int>(features.cols()), config.hidden_size, classes,
                               config.seed);
    GcnModel best = result.model;
    const auto val_idx = mask_indices(val_mask);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        GcnGradients grads = gcn_loss_and_gradients(result.model, config, original, augmented,
                                                    features, labels, train_mask);
        if (!std::isfinite(grads.loss.total)) {
            std::ostringstream msg;
            msg << "non-finite loss at epoch " << epoch << " (class "
                << grads.loss.classification << ", contrastive " << grads.loss.contrastive
                << ", penalty " << grads.loss.penalty << ")";
            throw std::runtime_error(msg.str());
        }
        result.model.w1 -= config.learning_rate * grads.w1;
        result.model.w2 -= config.learning_rate * grads.w2;

        EpochStats stats;
        stats.loss = grads.loss;
        if (!val_idx.empty()) {
            // validate on the view the model is deployed on
            const GcnForward fwd = gcn_forward(result.model, original, features);
            stats.val_accuracy = masked_accuracy(fwd.logits, labels, val_idx);
            if (stats.val_accuracy > result.best_val_accuracy || result.best_epoch < 0) {
                result.best_val_accuracy = stats.val_accuracy;
                result.best_epoch = epoch;
                best = result.model;
            }
        } else {
            result.best_epoch = epoch; // no validation: keep the final weights
            best = result.model;
        }
        result.history.push_back(stats);
    }

    result.model = std::move(best);
    return result;
}

Metrics evaluate(const GcnModel& model, const NormalizedAdjacency& adjacency,
                 const Matrix& features, const std::vector<int>& labels,
                 const std::vector<std::uint8_t>& mask) {
    const auto idx = mask_indices(mask);
    require(!idx.empty(), "evaluation mask is empty");
    const GcnForward fwd = gcn_forward(model, adjacency, features);
    const int classes = static_cast<int>(model.w2.cols());

    std::vector<std::int64_t> tp(classes, 0), fp(classes, 0), fn(classes, 0);
    std::size_t hits = 0;
    for (Eigen::Index v : idx) {
        Eigen::Index pred;
        fwd.logits.row(v).maxCoeff(&pred);
        const int truth = labels[static_cast<std::size_t>(v)];
        if (static_cast<int>(pred) == truth) {
            ++hits;
            ++tp[truth];
        } else {
            ++fp[pred];
            ++fn[truth];
        }
    }

    Metrics m;
    m.accuracy = static_cast<double>(hits) / static_cast<double>(idx.size());
    m.micro_f1 = m.accuracy;
    double macro = 0.0;
    for (int c = 0; c < classes; ++c) {
        const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
        macro += denom > 0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
    }
    m.macro_f1 = classes > 0 ? macro / classes : 0.0;
    return m;
}

void save_model(const GcnModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(17);
    out << "gcn-checkpoint v1\n";
    out << model.w1.rows() << ' ' << model.w1.cols() << ' ' << model.w2.cols() << '\n';
    for (Eigen::Index i = 0; i < model.w1.rows(); ++i)
        for (Eigen::Index j = 0; j < model.w1.cols(); ++j)
            out << model.w1(i, j) << (j + 1 == model.w1.cols() ? '\n' : ' ');
    for (Eigen::Index i = 0; i < model.w2.rows(); ++i)
        for (Eigen::Index j = 0; j < model.w2.cols(); ++j)
            out << model.w2(i, j) << (j + 1 == model.w2.cols() ? '\n' : ' ');
}

GcnModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string tag, version;
    in >> tag >> version;
    if (tag != "gcn-checkpoint" || version != "v1")
        throw std::runtime_error(path + ": unknown checkpoint format");
    Eigen::Index feature_dim, hidden, classes;
    in >> feature_dim >> hidden >> classes;
    GcnModel model;
    model.w1.resize(feature_dim, hidden);
    model.w2.resize(hidden, classes);
    for (Eigen::Index i = 0; i < feature_dim; ++i)
        for (Eigen::Index j = 0; j < hidden; ++j) in >> model.w1(i, j);
    for (Eigen::Index i = 0; i < hidden; ++i)
        for (Eigen::Index j = 0; j < classes; ++j) in >> model.w2(i, j);
    if (!in) throw std::runtime_error(path + ": truncated checkpoint");
    return model;
}

} // namespace simt
