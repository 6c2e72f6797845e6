#include <random>

#include <gtest/gtest.h>

#include "qksvm/error.hpp"
#include "qksvm/pca.hpp"

using namespace qksvm;

namespace {

Eigen::MatrixXd correlated(std::mt19937_64& rng, int N, int d) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd Z(N, d), A(d, d);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < d; ++j) Z(i, j) = g(rng);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) A(i, j) = g(rng) / (1 + i);
    return Z * A;
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& Y) {
    const Eigen::MatrixXd C = Y.rowwise() - Y.colwise().mean();
    return C.transpose() * C / static_cast<double>(Y.rows() - 1);
}

}  // namespace

TEST(Pca, CollinearData) {
    Eigen::MatrixXd X(20, 3);
    for (int i = 0; i < 20; ++i) X.row(i) << i, 2.0 * i + 1, -0.5 * i;
    const auto m = pca_fit(X, 1);
    EXPECT_NEAR(m.explained_variance_ratio(0), 1.0, 1e-10);
}

TEST(Pca, OrthonormalOrderedDecorrelated) {
    std::mt19937_64 rng(3);
    const auto X = correlated(rng, 60, 24);
    const auto m = pca_fit(X, 5);
    EXPECT_LT((m.components * m.components.transpose() - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-8);
    for (int i = 1; i < 5; ++i) EXPECT_GE(m.explained_variance_ratio(i - 1), m.explained_variance_ratio(i));
    EXPECT_LE(m.explained_variance_ratio.sum(), 1.0 + 1e-10);
    const auto C = covariance(pca_project(m, X));
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            if (i != j) EXPECT_NEAR(C(i, j), 0.0, 1e-8);
    // Cumulative ratio grows with k and the leading components agree.
    const auto m3 = pca_fit(X, 3);
    EXPECT_LE(m3.explained_variance_ratio.sum(), m.explained_variance_ratio.sum() + 1e-12);
    EXPECT_NEAR(m3.explained_variance_ratio(0), m.explained_variance_ratio(0), 1e-12);
}

TEST(Pca, FullBasisRoundTrip) {
    std::mt19937_64 rng(5);
    const auto X = correlated(rng, 40, 24);
    const auto m = pca_fit(X, 24);
    EXPECT_LT((pca_inverse_project(m, pca_project(m, X)) - X).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((pca_inverse_transform(m, pca_transform(m, X)) - X).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Pca, ScaledTrainingRange) {
    std::mt19937_64 rng(7);
    const auto X = correlated(rng, 30, 6);
    const auto m = pca_fit(X, 2);
    const auto Z = pca_transform(m, X);
    for (int c = 0; c < 2; ++c) {
        EXPECT_NEAR(Z.col(c).minCoeff(), 0.0, 1e-12);
        EXPECT_NEAR(Z.col(c).maxCoeff(), 1.0, 1e-12);
    }
}

TEST(Pca, SignConvention) {
    std::mt19937_64 rng(9);
    const auto X = correlated(rng, 30, 4);
    const auto m = pca_fit(X, 3);
    for (int r = 0; r < 3; ++r) {
        Eigen::Index at;
        m.components.row(r).cwiseAbs().maxCoeff(&at);
        EXPECT_GT(m.components(r, at), 0.0);
    }
}

TEST(Pca, JsonRoundTrip) {
    std::mt19937_64 rng(11);
    const auto X = correlated(rng, 25, 24);
    const auto m = pca_fit(X, 2);
    const auto back = pca_from_json(pca_to_json(m));
    EXPECT_EQ(back.mean, m.mean);
    EXPECT_EQ(back.components, m.components);
    EXPECT_EQ(back.explained_variance_ratio, m.explained_variance_ratio);
    EXPECT_EQ(pca_transform(back, X), pca_transform(m, X));
}

TEST(Pca, Rejections) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(5, 24);
    EXPECT_THROW(pca_fit(X, 5), ValidationError);
    EXPECT_THROW(pca_fit(X, 0), ValidationError);
    EXPECT_THROW(pca_fit(Eigen::MatrixXd::Random(40, 24), 25), ValidationError);
    const auto m = pca_fit(X, 2);
    EXPECT_THROW(pca_transform(m, Eigen::MatrixXd::Zero(2, 3)), ShapeError);
}
