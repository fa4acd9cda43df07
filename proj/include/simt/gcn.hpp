#pragma once

#include "simt/graph.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace simt {

/// Two-layer graph convolutional classifier.
struct GcnModel {
    Matrix w1; // feature_dim x hidden
    Matrix w2; // hidden x classes
};

struct TrainConfig {
    int epochs = 200;
    double learning_rate = 0.01;
    double weight_decay = 5e-4;
    double contrastive_weight = 1.0; // lambda
    double temperature = 0.5;        // tau
    int hidden_size = 32;
    std::uint64_t seed = 0;
};

struct Metrics {
    double macro_f1 = 0.0;
    double micro_f1 = 0.0; // equals accuracy for single-label prediction
    double accuracy = 0.0;
};

struct GcnForward {
    Matrix hidden; // relu(A X W1)
    Matrix logits; // A hidden W2
};

GcnForward gcn_forward(const GcnModel& model, const NormalizedAdjacency& adjacency,
                       const Matrix& features);

/// Mean over the masked nodes of -log softmax(logits)[label], natural log,
/// computed with max subtraction. Throws on an empty mask.
double cross_entropy(const Matrix& logits, const std::vector<int>& labels,
                     const std::vector<std::uint8_t>& mask);

/// InfoNCE across the two views: mean over v of
///   -log( exp(h_v . h'_v / tau) / sum_u exp(h_v . h'_u / tau) ).
double contrastive_loss(const Matrix& h, const Matrix& h_prime, double tau);

struct LossParts {
    double total = 0.0;
    double classification = 0.0;
    double contrastive = 0.0;
    double penalty = 0.0;
};

struct GcnGradients {
    Matrix w1;
    Matrix w2;
    LossParts loss;
};

/// Loss and analytic gradients of
///   cross_entropy(augmented view) + lambda * contrastive(orig vs augmented)
///   + weight_decay * (|W1|^2 + |W2|^2).
GcnGradients gcn_loss_and_gradients(const GcnModel& model, const TrainConfig& config,
                                    const NormalizedAdjacency& original,
                                    const NormalizedAdjacency& augmented,
                                    const Matrix& features, const std::vector<int>& labels,
                                    const std::vector<std::uint8_t>& train_mask);

struct EpochStats {
    LossParts loss;
    double val_accuracy = 0.0;
};

struct TrainResult {
    GcnModel model; // snapshot with the best validation accuracy
    std::vector<EpochStats> history;
    int best_epoch = -1;
    double best_val_accuracy = 0.0;
};

/// Full-batch gradient descent with Glorot-uniform init from config.seed.
/// Training happens on the augmented view; the original view only feeds the
/// contrastive term. Aborts on a non-finite loss.
TrainResult train_gcn(const TrainConfig& config, const NormalizedAdjacency& original,
                      const NormalizedAdjacency& augmented, const Matrix& features,
                      const std::vector<int>& labels, const std::vector<std::uint8_t>& train_mask,
                      const std::vector<std::uint8_t>& val_mask);

Metrics evaluate(const GcnModel& model, const NormalizedAdjacency& adjacency,
                 const Matrix& features, const std::vector<int>& labels,
                 const std::vector<std::uint8_t>& mask);

GcnModel glorot_init(int feature_dim, int hidden, int classes, std::uint64_t seed);

/// Text checkpoint with a version-tagged shape header.
void save_model(const GcnModel& model, const std::string& path);
GcnModel load_model(const std::string& path);

} // namespace simt
