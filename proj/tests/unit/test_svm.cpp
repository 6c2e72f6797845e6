#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dual_oracle.hpp"
#include "qksvm/error.hpp"
#include "qksvm/kernel.hpp"
#include "qksvm/svm.hpp"

using namespace qksvm;

namespace {

Eigen::MatrixXd linear_gram(const Eigen::MatrixXd& X) { return X * X.transpose(); }

Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& X, double gamma) {
    Eigen::MatrixXd K(X.rows(), X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.rows(); ++j) K(i, j) = std::exp(-gamma * (X.row(i) - X.row(j)).squaredNorm());
    return K;
}

void expect_feasible(const SvmModel& m, double C) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.alphas.size(); ++i) {
        EXPECT_GE(m.alphas[i], 0.0);
        EXPECT_LE(m.alphas[i], C + 1e-9);
        s += m.alphas[i] * m.labels[i];
    }
    EXPECT_LE(std::abs(s), 1e-8);
    std::vector<std::size_t> sv;
    for (std::size_t i = 0; i < m.alphas.size(); ++i)
        if (m.alphas[i] > 1e-8) sv.push_back(i);
    EXPECT_EQ(m.support_indices, sv);
}

std::vector<int> random_labels(std::mt19937_64& rng, int N) {
    std::vector<int> y(static_cast<std::size_t>(N));
    for (auto& v : y) v = rng() % 2 ? 1 : -1;
    y[0] = 1;
    y[1] = -1;
    return y;
}

Eigen::MatrixXd random_rows(std::mt19937_64& rng, int N, int d) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd X(N, d);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < d; ++j) X(i, j) = g(rng);
    return X;
}

}  // namespace

TEST(TrainDual, OneDimensionalPair) {
    Eigen::MatrixXd X(2, 1);
    X << -1, 1;
    const std::vector<int> y{-1, 1};
    TrainConfig cfg;
    cfg.C = 10;
    const auto m = train_dual(linear_gram(X), y, cfg);
    EXPECT_NEAR(m.alphas[0], 0.5, 1e-9);
    EXPECT_NEAR(m.alphas[1], 0.5, 1e-9);
    EXPECT_NEAR(m.bias, 0.0, 1e-9);
    EXPECT_TRUE(m.converged);
    expect_feasible(m, cfg.C);

    // Queries against x = {-1, +1}: k(q, x_i) = q * x_i.
    const std::vector<double> row{-0.3, 0.3};
    EXPECT_NEAR(decision_value(m, row), 0.3, 1e-9);
    Eigen::MatrixXd Kq(2, 2);
    Kq << 2, -2, -2, 2;
    EXPECT_EQ(predict(m, Kq), (std::vector<int>{-1, 1}));
    EXPECT_TRUE(predict(m, Eigen::MatrixXd(0, 2)).empty());
    const std::vector<double> wrong{1.0};
    EXPECT_THROW(decision_value(m, wrong), ShapeError);
    EXPECT_THROW(predict(m, Eigen::MatrixXd(1, 3)), ShapeError);
}

TEST(TrainDual, ConflictingDuplicateHitsBound) {
    Eigen::MatrixXd X(2, 1);
    X << 0.5, 0.5;
    const std::vector<int> y{1, -1};
    TrainConfig cfg;
    cfg.C = 0.1;
    const auto m = train_dual(linear_gram(X), y, cfg);
    EXPECT_NEAR(m.alphas[0], 0.1, 1e-12);
    EXPECT_NEAR(m.alphas[1], 0.1, 1e-12);
    const auto brute = oracle::brute_force_dual(linear_gram(X), y, cfg.C, 0.01 * cfg.C);
    EXPECT_NEAR(dual_objective(m.alphas, y, linear_gram(X)), brute.objective, 1e-12);
}

TEST(TrainDual, MatchesBruteForce) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 24; ++trial) {
        const int N = 2 + trial % 4;  // up to 5 here; the acceptance run covers 6
        const double C = trial % 3 == 0 ? 0.5 : trial % 3 == 1 ? 2.0 : 10.0;
        const auto X = random_rows(rng, N, 2);
        const auto y = random_labels(rng, N);
        const Eigen::MatrixXd K = trial % 2 ? rbf_gram(X, 0.7) : linear_gram(X);
        TrainConfig cfg;
        cfg.C = C;
        cfg.tol = 1e-6;
        const auto m = train_dual(K, y, cfg);
        expect_feasible(m, C);
        const auto brute = oracle::brute_force_dual(K, y, C, 0.01 * C);
        const double got = dual_objective(m.alphas, y, K);
        EXPECT_NEAR(got, brute.objective, 0.01 * C * N) << "trial " << trial;
        EXPECT_GE(got, brute.objective - 1e-6) << "trial " << trial;
    }
}

TEST(TrainDual, KktAtUnboundedSupportVectors) {
    std::mt19937_64 rng(5);
    const auto X = random_rows(rng, 30, 2);
    std::vector<int> y(30);
    for (int i = 0; i < 30; ++i) y[static_cast<std::size_t>(i)] = X(i, 0) + 0.3 * X(i, 1) > 0 ? 1 : -1;
    TrainConfig cfg;
    cfg.C = 5.0;
    const auto K = rbf_gram(X, 0.5);
    const auto m = train_dual(K, y, cfg);
    expect_feasible(m, cfg.C);
    for (std::size_t i = 0; i < 30; ++i) {
        if (m.alphas[i] <= 1e-8 || m.alphas[i] >= cfg.C - 1e-8) continue;
        std::vector<double> row(30);
        for (int j = 0; j < 30; ++j) row[static_cast<std::size_t>(j)] = K(static_cast<Eigen::Index>(i), j);
        EXPECT_NEAR(decision_value(m, row), y[i], cfg.tol);
    }
}

TEST(TrainDual, SeparableLargeCRecoversLabels) {
    std::mt19937_64 rng(8);
    auto X = random_rows(rng, 40, 2);
    std::vector<int> y(40);
    for (int i = 0; i < 40; ++i) {
        y[static_cast<std::size_t>(i)] = i % 2 ? 1 : -1;
        X(i, 0) += 3.0 * y[static_cast<std::size_t>(i)];
    }
    TrainConfig cfg;
    cfg.C = 1e4;
    const auto K = linear_gram(X);
    const auto m = train_dual(K, y, cfg);
    EXPECT_EQ(predict(m, K), y);
    for (double s : slacks(m, K)) EXPECT_LE(s, 1e-3);
}

TEST(TrainDual, PrecomputedEqualsCallable) {
    std::mt19937_64 rng(19);
    const auto X = random_rows(rng, 25, 3);
    const auto y = random_labels(rng, 25);
    TrainConfig cfg;
    cfg.C = 2.0;
    const auto a = train_dual(linear_gram(X), y, cfg);
    const auto b = train_dual(
        25, [&](std::size_t i, std::size_t j) { return X.row(static_cast<Eigen::Index>(i)).dot(X.row(static_cast<Eigen::Index>(j))); },
        y, cfg);
    ASSERT_EQ(a.alphas.size(), b.alphas.size());
    for (std::size_t i = 0; i < a.alphas.size(); ++i) EXPECT_NEAR(a.alphas[i], b.alphas[i], 1e-8);
    EXPECT_NEAR(a.bias, b.bias, 1e-8);
}

TEST(TrainDual, ObjectiveNonDecreasing) {
    std::mt19937_64 rng(23);
    const auto X = random_rows(rng, 40, 2);
    const auto y = random_labels(rng, 40);
    TrainConfig cfg;
    cfg.C = 3.0;
    cfg.record_objective = true;
    const auto m = train_dual(rbf_gram(X, 1.0), y, cfg);
    ASSERT_GE(m.objective_trace.size(), 2u);
    for (std::size_t i = 1; i < m.objective_trace.size(); ++i)
        EXPECT_GE(m.objective_trace[i], m.objective_trace[i - 1] - 1e-12);
}

TEST(TrainDual, IndefiniteShotKernel) {
    std::mt19937_64 rng(29);
    const auto X = random_rows(rng, 20, 2);
    const auto y = random_labels(rng, 20);
    Eigen::MatrixXd K = rbf_gram(X, 0.8);
    std::normal_distribution<double> noise(0.0, 0.005);
    for (int i = 0; i < 20; ++i)
        for (int j = i + 1; j < 20; ++j) {
            K(i, j) = std::clamp(K(i, j) + noise(rng), 0.0, 1.0);
            K(j, i) = K(i, j);
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
    ASSERT_GE(es.eigenvalues().minCoeff(), -0.02);
    ASSERT_LT(es.eigenvalues().minCoeff(), 0.0);
    TrainConfig cfg;
    cfg.C = 10.0;
    const auto m = train_dual(K, y, cfg);
    expect_feasible(m, cfg.C);
    EXPECT_GT(m.iterations, 0);
}

TEST(TrainDual, AllZeroAlphaModel) {
    SvmModel m;
    m.alphas = {0.0, 0.0};
    m.labels = {1, -1};
    m.bias = -0.25;
    const std::vector<double> row{0.3, 0.9};
    EXPECT_DOUBLE_EQ(decision_value(m, row), -0.25);
    m.bias = 0.0;
    EXPECT_EQ(predict(m, Eigen::MatrixXd::Zero(1, 2)), std::vector<int>{1});
}

TEST(TrainDual, Rejections) {
    const std::vector<int> y{1, 1};
    EXPECT_THROW(train_dual(Eigen::Matrix2d::Identity(), y, {}), ValidationError);
    const std::vector<int> y2{1, -1};
    Eigen::Matrix2d asym;
    asym << 1, 0.5, 0.4, 1;
    EXPECT_THROW(train_dual(asym, y2, {}), ValidationError);
    EXPECT_THROW(train_dual(Eigen::Matrix3d::Identity(), y2, {}), ShapeError);
    TrainConfig bad;
    bad.C = 0.0;
    EXPECT_THROW(train_dual(Eigen::Matrix2d::Identity(), y2, bad), ArgumentError);
}

TEST(TrainDual, DeterministicPerSeed) {
    std::mt19937_64 rng(41);
    const auto X = random_rows(rng, 30, 2);
    const auto y = random_labels(rng, 30);
    TrainConfig cfg;
    cfg.seed = 5;
    const auto a = train_dual(rbf_gram(X, 2.0), y, cfg);
    const auto b = train_dual(rbf_gram(X, 2.0), y, cfg);
    EXPECT_EQ(a.alphas, b.alphas);
    EXPECT_EQ(a.bias, b.bias);
}

TEST(ModelJson, RoundTrip) {
    Eigen::MatrixXd X(4, 1);
    X << -2, -1, 1, 2;
    const std::vector<int> y{-1, -1, 1, 1};
    auto m = train_dual(linear_gram(X), y, {});
    m.kernel.kind = "quantum";
    m.kernel.architecture = "WS";
    m.kernel.n_qubits = 2;
    m.kernel.params = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    m.kernel.params_hash = hash_params(m.kernel.params);
    m.kernel.w = std::numbers::pi;
    m.kernel.estimator = "exact_inversion";
    const auto back = model_from_json(model_to_json(m));
    EXPECT_EQ(back.alphas, m.alphas);
    EXPECT_EQ(back.bias, m.bias);
    EXPECT_EQ(back.support_indices, m.support_indices);
    EXPECT_EQ(back.labels, m.labels);
    EXPECT_EQ(back.kernel, m.kernel);
    auto tampered = model_to_json(m);
    tampered.replace(tampered.find(m.kernel.params_hash), 16, "0000000000000000");
    EXPECT_THROW(model_from_json(tampered), FormatError);
    EXPECT_EQ(hash_params(m.kernel.params).size(), 16u);
}
