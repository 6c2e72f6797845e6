#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "dense_oracle.hpp"
#include "qksvm/error.hpp"
#include "qksvm/kernel.hpp"

using namespace qksvm;

namespace {

Embedding make_embedding(const char* arch, int n, std::mt19937_64& rng) {
    const auto spec = parse_architecture(arch, n);
    std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
    std::vector<double> p(spec.param_count());
    for (auto& v : p) v = u(rng);
    return {spec, p, {}};
}

std::vector<double> random_x(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = u(rng);
    return x;
}

Eigen::MatrixXd uniform_data(std::mt19937_64& rng, int rows, int cols) {
    Eigen::MatrixXd X(rows, cols);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = u(rng);
    return X;
}

const Embedding kS1{parse_architecture("S", 1), {}, {}};

}  // namespace

TEST(Inversion, Examples) {
    EXPECT_NEAR(fidelity_inversion(std::vector<double>{0.5}, std::vector<double>{0.0}, kS1), 0.5, 1e-12);
    EXPECT_NEAR(fidelity_inversion(std::vector<double>{1.0}, std::vector<double>{0.0}, kS1), 0.0, 1e-12);
    std::mt19937_64 rng(1);
    const auto emb = make_embedding("ES", 3, rng);
    const auto x = random_x(rng, 3);
    EXPECT_NEAR(fidelity_inversion(x, x, emb), 1.0, 1e-12);
    EXPECT_THROW(fidelity_inversion(x, std::vector<double>{0.1}, emb), ShapeError);
}

TEST(Inversion, CircuitIsLiteralAdjoint) {
    std::mt19937_64 rng(2);
    const auto emb = make_embedding("WS", 2, rng);
    const auto a = random_x(rng, 2), b = random_x(rng, 2);
    const auto c = inversion_circuit(a, b, emb);
    const auto ua = emb.circuit(a), ub = emb.circuit(b);
    ASSERT_EQ(c.gates.size(), ua.gates.size() + ub.gates.size());
    const oracle::CMat u = oracle::dense_circuit(ub).adjoint() * oracle::dense_circuit(ua);
    EXPECT_NEAR(fidelity_inversion(a, b, emb), std::norm(u(0, 0)), 1e-12);
}

TEST(HadamardTest, Examples) {
    std::mt19937_64 rng(3);
    const auto emb = make_embedding("WS", 2, rng);
    const auto x = random_x(rng, 2);
    const auto same = hadamard_test(x, x, emb);
    EXPECT_NEAR(same.p0_real, 1.0, 1e-12);
    EXPECT_NEAR(same.fidelity, 1.0, 1e-12);

    // S map, n=1: x=0 and x=1 give |+> and |->, which are orthogonal.
    const auto orth = hadamard_test(std::vector<double>{1.0}, std::vector<double>{0.0}, kS1);
    EXPECT_NEAR(orth.p0_real, 0.5, 1e-12);
    EXPECT_NEAR(orth.fidelity, 0.0, 1e-12);
}

TEST(HadamardTest, AnalyticMatchesCircuitMarginal) {
    // The analytic ancilla read-out must agree with measuring the full circuit.
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const auto emb = make_embedding(trial % 2 ? "ES" : "WS", 2, rng);
        const auto a = random_x(rng, 2), b = random_x(rng, 2);
        const auto r = hadamard_test(a, b, emb);
        for (bool imag : {false, true}) {
            const auto c = hadamard_test_circuit(a, b, emb, imag);
            const auto s = apply_circuit(zero_state(c.n_qubits), c);
            const double p0 = 1.0 - s.probability_one(0);
            EXPECT_NEAR(p0, imag ? r.p0_imag : r.p0_real, 1e-12);
        }
        const Complex ov = inner_product(emb.state(b), emb.state(a));
        EXPECT_NEAR(r.p0_real, (1 + ov.real()) / 2, 1e-12);
        EXPECT_NEAR(r.p0_imag, (1 + ov.imag()) / 2, 1e-12);
    }
}

TEST(HadamardTest, Capacity) {
    const Embedding big{parse_architecture("S", 13), {}, {}};
    const std::vector<double> x(13, 0.0);
    EXPECT_THROW(fidelity_hadamard_test(x, x, big), CapacityError);
}

TEST(SwapTest, Examples) {
    std::mt19937_64 rng(5);
    const auto emb = make_embedding("WS", 2, rng);
    const auto x = random_x(rng, 2);
    EXPECT_NEAR(swap_test(x, x, emb).p_even, 1.0, 1e-12);
    EXPECT_EQ(swap_test_circuit(x, x, emb).n_qubits, 6);
    const Embedding nine{parse_architecture("S", 9), {}, {}};
    const std::vector<double> z(9, 0.0);
    EXPECT_THROW(fidelity_swap_test(z, z, nine), CapacityError);
}

TEST(Estimators, AgreeExactly) {
    std::mt19937_64 rng(6);
    const char* archs[] = {"S", "WS", "ES", "SW", "WSWS", "ESES"};
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 3);
        const char* a = archs[rng() % 6];
        if (n == 1 && a[0] == 'E') a = "WS";
        const auto emb = make_embedding(a, n, rng);
        const auto xi = random_x(rng, n), xj = random_x(rng, n);
        const double inv = fidelity_inversion(xi, xj, emb);
        EXPECT_NEAR(inv, fidelity_hadamard_test(xi, xj, emb), 1e-10);
        EXPECT_NEAR(inv, fidelity_swap_test(xi, xj, emb), 1e-10);
    }
}

TEST(Estimators, ShotModesAreSeededAndBounded) {
    std::mt19937_64 rng(7);
    const auto emb = make_embedding("WS", 2, rng);
    const auto a = random_x(rng, 2), b = random_x(rng, 2);
    const double exact = fidelity_inversion(a, b, emb);
    for (auto kind : {EstimatorKind::ShotsInversion, EstimatorKind::HadamardTest, EstimatorKind::SwapTest}) {
        EstimatorConfig cfg{kind, 20000, 42, 1.0};
        const KernelSpec spec{cfg, emb};
        const double v1 = kernel_entry(a, b, spec), v2 = kernel_entry(a, b, spec);
        EXPECT_EQ(v1, v2);
        EXPECT_GE(v1, 0.0);
        EXPECT_LE(v1, 1.0);
        EXPECT_NEAR(v1, exact, 0.05) << estimator_name(kind);
    }
    EXPECT_THROW((EstimatorConfig{EstimatorKind::ShotsInversion, 0, 0, 1.0}.validate()), ArgumentError);
}

TEST(ClassicalKernels, Examples) {
    const std::vector<double> a{0.0, 0.0}, b{1.0, 0.0};
    EXPECT_DOUBLE_EQ(rbf_kernel(a, a, 3.0), 1.0);
    EXPECT_NEAR(rbf_kernel(a, b, 1.0), std::exp(-1.0), 1e-15);
    EXPECT_DOUBLE_EQ(linear_kernel(std::vector<double>{1, 2}, std::vector<double>{3, 4}), 11.0);
    EXPECT_THROW(rbf_kernel(a, std::vector<double>{1.0}, 1.0), ShapeError);
    EXPECT_THROW(KernelSpec::rbf(0.0), ArgumentError);
}

TEST(KernelMatrix, SingleRowAndMetadata) {
    Eigen::MatrixXd X(1, 2);
    X << 0.3, 0.7;
    const auto k = build_kernel_matrix(X, KernelSpec::quantum({parse_architecture("S", 2), {}, {}}));
    ASSERT_EQ(k.size(), 1);
    EXPECT_EQ(k.values(0, 0), 1.0);
    EXPECT_EQ(k.estimator, EstimatorKind::ExactInversion);
    EXPECT_FALSE(k.shots.has_value());
}

TEST(KernelMatrix, SClosedForm) {
    std::mt19937_64 rng(8);
    for (int n = 1; n <= 4; ++n) {
        const auto X = uniform_data(rng, 8, n);
        const auto k = build_kernel_matrix(X, KernelSpec::quantum({parse_architecture("S", n), {}, {}}));
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            for (Eigen::Index j = 0; j < X.rows(); ++j) {
                std::vector<double> a, b;
                for (int c = 0; c < n; ++c) {
                    a.push_back(X(i, c));
                    b.push_back(X(j, c));
                }
                EXPECT_NEAR(k.values(i, j), oracle::s_map_kernel(a, b), 1e-10);
            }
    }
}

TEST(KernelMatrix, CachedStatesMatchLiteralCircuit) {
    std::mt19937_64 rng(9);
    const auto emb = make_embedding("ES", 3, rng);
    const auto X = uniform_data(rng, 7, 3);
    const auto k = build_kernel_matrix(X, KernelSpec::quantum(emb), 2);
    for (Eigen::Index i = 0; i < 7; ++i)
        for (Eigen::Index j = 0; j < 7; ++j) {
            std::vector<double> a(3), b(3);
            for (int c = 0; c < 3; ++c) a[c] = X(i, c), b[c] = X(j, c);
            const double want = i == j ? 1.0 : fidelity_inversion(a, b, emb);
            EXPECT_NEAR(k.values(i, j), want, 1e-12);
        }
}

TEST(KernelMatrix, InvariantsPsdSymmetricBounded) {
    std::mt19937_64 rng(10);
    for (const char* a : {"S", "WS", "ES", "WSWS"}) {
        const auto emb = make_embedding(a, 3, rng);
        const auto X = uniform_data(rng, 40, 3);
        const auto k = build_kernel_matrix(X, KernelSpec::quantum(emb));
        EXPECT_LT((k.values - k.values.transpose()).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_GE(k.values.minCoeff(), 0.0);
        EXPECT_LE(k.values.maxCoeff(), 1.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k.values);
        EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8);
    }
}

TEST(KernelMatrix, DuplicateRowSingular) {
    std::mt19937_64 rng(11);
    auto X = uniform_data(rng, 5, 2);
    X.row(4) = X.row(1);
    const auto k = build_kernel_matrix(X, KernelSpec::quantum(make_embedding("WS", 2, rng)));
    EXPECT_NEAR((k.values.row(4) - k.values.row(1)).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k.values);
    EXPECT_NEAR(eig.eigenvalues().minCoeff(), 0.0, 1e-10);
}

TEST(KernelMatrix, PermutationEquivariance) {
    std::mt19937_64 rng(12);
    const auto emb = make_embedding("ES", 2, rng);
    const auto X = uniform_data(rng, 6, 2);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
    perm.indices() << 3, 0, 5, 1, 4, 2;
    const auto k = build_kernel_matrix(X, KernelSpec::quantum(emb)).values;
    const auto kp = build_kernel_matrix(perm * X, KernelSpec::quantum(emb)).values;
    EXPECT_LT((kp - perm * k * perm.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(KernelMatrix, ShotMatrixIndependentOfJobs) {
    std::mt19937_64 rng(13);
    const auto emb = make_embedding("WS", 2, rng);
    const auto X = uniform_data(rng, 6, 2);
    const auto spec = KernelSpec::quantum(emb, {EstimatorKind::ShotsInversion, 500, 77, 1.0});
    const auto k1 = build_kernel_matrix(X, spec, 1);
    const auto k3 = build_kernel_matrix(X, spec, 3);
    EXPECT_EQ(k1, k3);
    EXPECT_EQ(k1.values, k1.values.transpose());
    EXPECT_EQ(k1.estimator, EstimatorKind::ShotsInversion);
    EXPECT_EQ(k1.shots, 500u);
    EXPECT_EQ(k1.seed, 77u);
}

TEST(CrossKernel, MatchesEntries) {
    std::mt19937_64 rng(14);
    const auto emb = make_embedding("WS", 2, rng);
    const auto A = uniform_data(rng, 3, 2), B = uniform_data(rng, 4, 2);
    const auto k = build_cross_kernel(A, B, KernelSpec::quantum(emb));
    ASSERT_EQ(k.rows(), 3);
    ASSERT_EQ(k.cols(), 4);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j) {
            const std::vector<double> a{A(i, 0), A(i, 1)}, b{B(j, 0), B(j, 1)};
            EXPECT_NEAR(k(i, j), fidelity_inversion(a, b, emb), 1e-12);
        }
    const auto r = build_cross_kernel(A, B, KernelSpec::rbf(2.0));
    EXPECT_NEAR(r(1, 2), rbf_kernel(std::vector<double>{A(1, 0), A(1, 1)}, std::vector<double>{B(2, 0), B(2, 1)}, 2.0),
                1e-15);
}

TEST(Qkm, RoundTripBitExact) {
    KernelMatrix k;
    k.values = Eigen::MatrixXd(2, 2);
    k.values << 1.0, 0.1 + 0.2, 0.1 + 0.2, std::nextafter(1.0, 0.0);
    k.estimator = EstimatorKind::HadamardTest;
    k.shots = 1000;
    k.seed = 5;
    const auto bytes = encode_qkm(k);
    EXPECT_EQ(bytes.size(), 4u + 4 + 1 + 8 + 8 + 32);
    EXPECT_EQ(bytes.substr(0, 4), "QKM1");
    const auto back = decode_qkm(bytes);
    EXPECT_EQ(back, k);
    EXPECT_EQ(encode_qkm(back), bytes);

    KernelMatrix exact;
    exact.values = Eigen::MatrixXd::Identity(3, 3);
    const auto e = decode_qkm(encode_qkm(exact));
    EXPECT_FALSE(e.shots.has_value());
    EXPECT_FALSE(e.seed.has_value());

    EXPECT_THROW(decode_qkm("QKM2"), FormatError);
    EXPECT_THROW(decode_qkm(bytes.substr(0, bytes.size() - 1)), FormatError);
}
