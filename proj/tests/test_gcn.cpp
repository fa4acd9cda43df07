#include "simt/gcn.hpp"
#include "simt/graph.hpp"
#include "simt/random.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace simt;

namespace {

VisibleGraph random_graph(NodeId n, double p, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (unit(rng) < p) edges.emplace_back(u, v);
    return VisibleGraph::from_edges(n, std::move(edges));
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gauss(rng);
    return m;
}

// Naive loop-based forward pass, deliberately sharing nothing with the
// library implementation.
Matrix naive_forward_logits(const GcnModel& model, const Matrix& dense_adj, const Matrix& x) {
    const auto n = x.rows();
    const auto m = x.cols();
    const auto h = model.w1.cols();
    const auto c = model.w2.cols();
    Matrix ax = Matrix::Zero(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < n; ++k)
            for (Eigen::Index j = 0; j < m; ++j) ax(i, j) += dense_adj(i, k) * x(k, j);
    Matrix hidden = Matrix::Zero(n, h);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < m; ++k)
            for (Eigen::Index j = 0; j < h; ++j) hidden(i, j) += ax(i, k) * model.w1(k, j);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < h; ++j) hidden(i, j) = std::max(hidden(i, j), 0.0);
    Matrix ah = Matrix::Zero(n, h);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < n; ++k)
            for (Eigen::Index j = 0; j < h; ++j) ah(i, j) += dense_adj(i, k) * hidden(k, j);
    Matrix logits = Matrix::Zero(n, c);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < h; ++k)
            for (Eigen::Index j = 0; j < c; ++j) logits(i, j) += ah(i, k) * model.w2(k, j);
    return logits;
}

struct SmallInstance {
    NormalizedAdjacency original;
    NormalizedAdjacency augmented;
    Matrix features;
    std::vector<int> labels;
    std::vector<std::uint8_t> train_mask;
};

SmallInstance small_instance(std::uint64_t seed, NodeId n = 10, int m = 5, int classes = 3) {
    SmallInstance inst;
    inst.original = normalized_adjacency(random_graph(n, 0.3, seed), AdjacencyMode::gcn_renormalized);
    inst.augmented =
        normalized_adjacency(random_graph(n, 0.35, seed + 1), AdjacencyMode::gcn_renormalized);
    inst.features = random_matrix(n, m, seed + 2);
    Rng rng(seed + 3);
    inst.labels.resize(n);
    inst.train_mask.assign(n, 0);
    for (NodeId v = 0; v < n; ++v) {
        inst.labels[v] = static_cast<int>(rng() % classes);
        inst.train_mask[v] = rng() % 2 == 0;
    }
    inst.train_mask[0] = 1;
    return inst;
}

} // namespace

TEST_CASE("zero weights give zero logits and uniform cross entropy") {
    const VisibleGraph g = random_graph(6, 0.4, 1);
    const NormalizedAdjacency adj = normalized_adjacency(g, AdjacencyMode::gcn_renormalized);
    GcnModel model;
    model.w1 = Matrix::Zero(3, 4);
    model.w2 = Matrix::Zero(4, 5);
    const Matrix x = random_matrix(6, 3, 2);
    const GcnForward fwd = gcn_forward(model, adj, x);
    CHECK(fwd.logits.cwiseAbs().maxCoeff() == 0.0);
    const std::vector<int> labels(6, 2);
    CHECK(cross_entropy(fwd.logits, labels, std::vector<std::uint8_t>(6, 1)) ==
          doctest::Approx(std::log(5.0)));
}

TEST_CASE("without edges the gcn adjacency is the identity") {
    const VisibleGraph empty = VisibleGraph::from_edges(4, {});
    const NormalizedAdjacency adj = normalized_adjacency(empty, AdjacencyMode::gcn_renormalized);
    GcnModel model;
    model.w1 = Matrix::Identity(3, 3);
    model.w2 = Matrix::Identity(3, 2);
    const Matrix x = random_matrix(4, 3, 9).cwiseAbs();
    const GcnForward fwd = gcn_forward(model, adj, x);
    CHECK(fwd.hidden.isApprox(x)); // relu(I x I) on non-negative input
}

TEST_CASE("forward pass matches an independent dense reimplementation") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const VisibleGraph g = random_graph(12, 0.3, 100 + seed);
        const NormalizedAdjacency adj = normalized_adjacency(g, AdjacencyMode::gcn_renormalized);
        GcnModel model;
        model.w1 = random_matrix(6, 8, 200 + seed);
        model.w2 = random_matrix(8, 4, 300 + seed);
        const Matrix x = random_matrix(12, 6, 400 + seed);
        const GcnForward fwd = gcn_forward(model, adj, x);
        const Matrix expected = naive_forward_logits(model, Matrix(adj.matrix), x);
        CHECK((fwd.logits - expected).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("cross entropy worked values") {
    Matrix logits(3, 2);
    logits << 1, 0, 0, 1, 2, 0;
    const std::vector<int> labels = {0, 1, 0};
    const std::vector<std::uint8_t> mask = {1, 1, 1};
    const double expected =
        (std::log(1 + std::exp(-1.0)) * 2 + std::log(1 + std::exp(-2.0))) / 3.0;
    CHECK(cross_entropy(logits, labels, mask) == doctest::Approx(expected).epsilon(1e-12));

    // one-hot-correct huge logits drive the loss to zero
    Matrix confident = Matrix::Zero(2, 3);
    confident(0, 1) = 1e4;
    confident(1, 0) = 1e4;
    CHECK(cross_entropy(confident, {1, 0}, {1, 1}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::isfinite(cross_entropy(confident, {2, 1}, {1, 1})));

    CHECK_THROWS_AS(cross_entropy(logits, labels, {0, 0, 0}), std::invalid_argument);
}

TEST_CASE("contrastive loss limits") {
    Matrix h = Matrix::Ones(5, 3);
    CHECK(contrastive_loss(h, h, 0.5) == doctest::Approx(std::log(5.0)));

    Matrix ortho = 100.0 * Matrix::Identity(4, 4);
    CHECK(contrastive_loss(ortho, ortho, 0.05) == doctest::Approx(0.0).epsilon(1e-6));

    CHECK_THROWS_AS(contrastive_loss(h, h, 0.0), std::invalid_argument);
    CHECK(std::isfinite(contrastive_loss(1e4 * Matrix::Random(6, 3), 1e4 * Matrix::Random(6, 3), 0.5)));
}

TEST_CASE("scaling both views equals rescaling the temperature") {
    const Matrix h = random_matrix(5, 4, 41);
    const Matrix hp = random_matrix(5, 4, 42);
    const double c = 1.7;
    CHECK(contrastive_loss(c * h, c * hp, 0.5) ==
          doctest::Approx(contrastive_loss(h, hp, 0.5 / (c * c))).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central differences") {
    const double step = 1e-5;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SmallInstance inst = small_instance(1000 + 13 * seed);
        TrainConfig cfg;
        cfg.weight_decay = 5e-4;
        cfg.contrastive_weight = seed % 2 == 0 ? 1.0 : 0.0; // both regimes
        cfg.temperature = 0.5;
        GcnModel model = glorot_init(5, 4, 3, 2000 + seed);

        const GcnGradients analytic = gcn_loss_and_gradients(
            model, cfg, inst.original, inst.augmented, inst.features, inst.labels,
            inst.train_mask);

        auto loss_at = [&](const GcnModel& m) {
            return gcn_loss_and_gradients(m, cfg, inst.original, inst.augmented, inst.features,
                                          inst.labels, inst.train_mask)
                .loss.total;
        };
        auto check_matrix = [&](Matrix GcnModel::*w, const Matrix& grad) {
            GcnModel probe = model;
            for (Eigen::Index i = 0; i < (model.*w).rows(); ++i) {
                for (Eigen::Index j = 0; j < (model.*w).cols(); ++j) {
                    (probe.*w)(i, j) = (model.*w)(i, j) + step;
                    const double up = loss_at(probe);
                    (probe.*w)(i, j) = (model.*w)(i, j) - step;
                    const double down = loss_at(probe);
                    (probe.*w)(i, j) = (model.*w)(i, j);
                    const double fd = (up - down) / (2 * step);
                    const double rel =
                        std::abs(fd - grad(i, j)) / (std::abs(fd) + std::abs(grad(i, j)) + 1e-4);
                    CHECK(rel <= 1e-4);
                }
            }
        };
        check_matrix(&GcnModel::w1, analytic.w1);
        check_matrix(&GcnModel::w2, analytic.w2);
    }
}

TEST_CASE("zero learning rate freezes the weights") {
    SmallInstance inst = small_instance(5);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.learning_rate = 0.0;
    cfg.seed = 3;
    cfg.hidden_size = 4;
    const GcnModel init = glorot_init(5, 4, 3, 3);
    const TrainResult result = train_gcn(cfg, inst.original, inst.augmented, inst.features,
                                         inst.labels, inst.train_mask,
                                         std::vector<std::uint8_t>(10, 0));
    CHECK(result.model.w1 == init.w1);
    CHECK(result.model.w2 == init.w2);
    for (const auto& e : result.history)
        CHECK(e.loss.total == doctest::Approx(result.history.front().loss.total));
}

TEST_CASE("with no contrastive term the original view is irrelevant") {
    SmallInstance inst = small_instance(8);
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.contrastive_weight = 0.0;
    cfg.seed = 4;
    cfg.hidden_size = 4;
    const NormalizedAdjacency other =
        normalized_adjacency(random_graph(10, 0.5, 999), AdjacencyMode::gcn_renormalized);
    const TrainResult a = train_gcn(cfg, inst.original, inst.augmented, inst.features,
                                    inst.labels, inst.train_mask, {});
    const TrainResult b = train_gcn(cfg, other, inst.augmented, inst.features, inst.labels,
                                    inst.train_mask, {});
    CHECK(a.model.w1 == b.model.w1);
    CHECK(a.model.w2 == b.model.w2);
}

TEST_CASE("training separates an easy two-class instance") {
    const AttributedGraph g = generate_sbm(2, 20, 0.4, 0.02, 8, 4.0, 77);
    const NormalizedAdjacency adj =
        normalized_adjacency(g.structure, AdjacencyMode::gcn_renormalized);

    // independent separability check: nearest class mean on aggregated
    // features classifies almost everything correctly
    const Matrix aggregated = adj.matrix * g.features;
    Matrix centroid = Matrix::Zero(2, 8);
    Eigen::Vector2d counts = Eigen::Vector2d::Zero();
    for (NodeId v = 0; v < 40; ++v) {
        centroid.row(g.labels[v]) += aggregated.row(v);
        counts[g.labels[v]] += 1;
    }
    centroid.row(0) /= counts[0];
    centroid.row(1) /= counts[1];
    int oracle_hits = 0;
    for (NodeId v = 0; v < 40; ++v) {
        const double d0 = (aggregated.row(v) - centroid.row(0)).norm();
        const double d1 = (aggregated.row(v) - centroid.row(1)).norm();
        if ((d0 < d1 ? 0 : 1) == g.labels[v]) ++oracle_hits;
    }
    REQUIRE(oracle_hits >= 38);

    TrainConfig cfg;
    cfg.contrastive_weight = 0.0;
    cfg.seed = 11;
    const std::vector<std::uint8_t> all(40, 1);
    const TrainResult result =
        train_gcn(cfg, adj, adj, g.features, g.labels, all, std::vector<std::uint8_t>(40, 0));
    const Metrics m = evaluate(result.model, adj, g.features, g.labels, all);
    CHECK(m.accuracy >= 0.95);
}

TEST_CASE("permuting node ids permutes the logits") {
    const VisibleGraph g = random_graph(9, 0.3, 55);
    const Matrix x = random_matrix(9, 4, 56);
    GcnModel model;
    model.w1 = random_matrix(4, 5, 57);
    model.w2 = random_matrix(5, 3, 58);
    const GcnForward base = gcn_forward(model, normalized_adjacency(g, AdjacencyMode::gcn_renormalized), x);

    std::vector<NodeId> perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(59);
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<Edge> mapped;
    for (const auto& [u, v] : g.edges) mapped.emplace_back(perm[u], perm[v]);
    const VisibleGraph pg = VisibleGraph::from_edges(9, std::move(mapped));
    Matrix px(9, 4);
    for (NodeId v = 0; v < 9; ++v) px.row(perm[v]) = x.row(v);
    const GcnForward moved =
        gcn_forward(model, normalized_adjacency(pg, AdjacencyMode::gcn_renormalized), px);

    for (NodeId v = 0; v < 9; ++v)
        CHECK((moved.logits.row(perm[v]) - base.logits.row(v)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("metrics on degenerate predictions") {
    GcnModel model;
    model.w1 = Matrix::Zero(2, 3);
    model.w2 = Matrix::Zero(3, 2);
    // zero logits predict class 0 everywhere (argmax tie -> lowest id)
    const VisibleGraph g = VisibleGraph::from_edges(4, {{0, 1}, {2, 3}});
    const NormalizedAdjacency adj = normalized_adjacency(g, AdjacencyMode::gcn_renormalized);
    const Matrix x = Matrix::Ones(4, 2);
    const std::vector<int> labels = {0, 0, 1, 1};
    const Metrics m = evaluate(model, adj, x, labels, {1, 1, 1, 1});
    CHECK(m.accuracy == doctest::Approx(0.5));
    CHECK(m.micro_f1 == doctest::Approx(0.5));
    CHECK(m.macro_f1 == doctest::Approx(1.0 / 3.0)); // per-class F1: (2/3, 0)
}

TEST_CASE("micro f1 equals accuracy on random predictions") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SmallInstance inst = small_instance(3000 + seed);
        GcnModel model = glorot_init(5, 4, 3, seed);
        const Metrics m = evaluate(model, inst.augmented, inst.features, inst.labels,
                                   std::vector<std::uint8_t>(10, 1));
        CHECK(m.micro_f1 == m.accuracy);
        if (m.accuracy == 1.0) CHECK(m.macro_f1 == doctest::Approx(1.0));
    }
}

TEST_CASE("checkpoints round-trip") {
    const GcnModel model = glorot_init(6, 4, 3, 99);
    const auto path = std::filesystem::temp_directory_path() / "simt_gcn_test.ckpt";
    save_model(model, path.string());
    const GcnModel back = load_model(path.string());
    CHECK((back.w1 - model.w1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.w2 - model.w2).cwiseAbs().maxCoeff() == 0.0);
    std::filesystem::remove(path);
}

TEST_CASE("training aborts on a non-finite loss") {
    SmallInstance inst = small_instance(6);
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.learning_rate = 1e12; // guaranteed blow-up
    cfg.seed = 1;
    cfg.hidden_size = 4;
    CHECK_THROWS_AS(train_gcn(cfg, inst.original, inst.augmented, inst.features, inst.labels,
                              inst.train_mask, {}),
                    std::runtime_error);
}
