#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "dense_oracle.hpp"
#include "qksvm/error.hpp"
#include "qksvm/feature_map.hpp"
#include "qksvm/kernel.hpp"

using namespace qksvm;

namespace {

std::vector<double> random_params(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
    std::vector<double> p(n);
    for (auto& v : p) v = u(rng);
    return p;
}

std::vector<double> random_x(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = u(rng);
    return x;
}

}  // namespace

TEST(ParseArchitecture, ParamCounts) {
    const auto ws = parse_architecture("WS", 4);
    ASSERT_EQ(ws.tokens.size(), 2u);
    EXPECT_EQ(ws.tokens[0], Layer::W);
    EXPECT_EQ(ws.tokens[1], Layer::S);
    EXPECT_EQ(ws.param_count(), 12u);
    EXPECT_EQ(parse_architecture("WSWS", 4).param_count(), 24u);
    EXPECT_EQ(parse_architecture("S", 3).param_count(), 0u);
    EXPECT_EQ(parse_architecture(" ES \n", 2).param_count(), 6u);
}

TEST(ParseArchitecture, Errors) {
    EXPECT_THROW(parse_architecture("XZ", 4), ParseError);
    EXPECT_THROW(parse_architecture("", 4), ParseError);
    EXPECT_THROW(parse_architecture("   ", 4), ParseError);
    EXPECT_THROW(parse_architecture("WW", 4), ValidationError);
    EXPECT_THROW(parse_architecture("ES", 1), ValidationError);
    EXPECT_THROW(parse_architecture("S", 27), CapacityError);
}

TEST(SLayer, Construction) {
    const std::vector<double> x{0.5};
    const auto gates = build_s_layer(x, 1, {});
    ASSERT_EQ(gates.size(), 2u);
    EXPECT_EQ(gates[0], Gate::h(0));
    EXPECT_EQ(gates[1], Gate::rz(0, std::numbers::pi / 2));
    EXPECT_EQ(build_s_layer(std::vector<double>(5, 0.0), 5, {}).size(), 10u);
    EXPECT_THROW(build_s_layer(std::vector<double>(2, 0.0), 3, {}), ShapeError);
}

TEST(SLayer, ZeroVectorIsUniformSuperposition) {
    const Embedding emb{parse_architecture("S", 3), {}, {}};
    const auto s = emb.state(std::vector<double>(3, 0.0));
    EXPECT_NEAR(prob_all_zero(s), 1.0 / 8.0, 1e-12);
}

TEST(SLayer, OutOfRangeWarns) {
    static int warnings = 0;
    auto prev = set_warning_handler([](const std::string&) { ++warnings; });
    const std::vector<double> x{1.5};
    EXPECT_NO_THROW(build_s_layer(x, 1, {}));
    set_warning_handler(prev);
    EXPECT_LE(warnings, 1);
}

TEST(WLayer, Construction) {
    const auto gates = build_w_layer(std::vector<double>(12, 0.1), 4);
    EXPECT_EQ(gates.size(), 4u);
    for (const auto& g : gates) EXPECT_EQ(g.kind, GateKind::ROT);
    EXPECT_THROW(build_w_layer(std::vector<double>(11, 0.0), 4), ShapeError);

    // Zero parameters act as the identity up to global phase.
    std::mt19937_64 rng(1);
    const auto s = oracle::random_state(rng, 2);
    auto t = s;
    for (const auto& g : build_w_layer(std::vector<double>(6, 0.0), 2)) t.apply(g);
    EXPECT_NEAR(fidelity(s, t), 1.0, 1e-12);

    // (0, pi, 0) flips |0> to |1>.
    const std::vector<double> flip{0.0, std::numbers::pi, 0.0};
    auto one = zero_state(1);
    for (const auto& g : build_w_layer(flip, 1)) one.apply(g);
    EXPECT_NEAR(one.probability_one(0), 1.0, 1e-12);
}

TEST(ELayer, Construction) {
    const auto gates = build_e_layer(std::vector<double>(6, 0.0), 2);
    ASSERT_EQ(gates.size(), 4u);
    EXPECT_EQ(gates[2], Gate::cnot(0, 1));
    EXPECT_EQ(gates[3], Gate::cnot(1, 0));
    for (int n = 2; n <= 6; ++n) EXPECT_EQ(build_e_layer(std::vector<double>(3 * n, 0.0), n).size(), 2u * n);
    EXPECT_THROW(build_e_layer(std::vector<double>(3, 0.0), 1), ValidationError);
    auto s = zero_state(2);
    for (const auto& g : gates) s.apply(g);
    EXPECT_NEAR(prob_all_zero(s), 1.0, 1e-12);
}

TEST(CompileEmbedding, OrderAndSlicing) {
    const auto arch = parse_architecture("WS", 1);
    const std::vector<double> x{0.25};
    const auto c = compile_embedding(arch, x, std::vector<double>{0.0, 0.0, 0.0});
    ASSERT_EQ(c.gates.size(), 3u);
    EXPECT_EQ(c.gates[0], Gate::rot(0, 0.0, 0.0, 0.0));
    EXPECT_EQ(c.gates[1], Gate::h(0));
    EXPECT_EQ(c.gates[2], Gate::rz(0, std::numbers::pi / 4));

    const auto wsws = parse_architecture("WSES", 2);
    std::vector<double> p(12);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = 0.01 * static_cast<double>(i + 1);
    const auto c2 = compile_embedding(wsws, std::vector<double>{0.1, 0.2}, p);
    // W (2 ROT) | S (4) | E (2 ROT + 2 CNOT) | S (4)
    ASSERT_EQ(c2.gates.size(), 2u + 4u + 4u + 4u);
    EXPECT_EQ(c2.gates[1], Gate::rot(1, 0.04, 0.05, 0.06));
    EXPECT_EQ(c2.gates[6], Gate::rot(0, 0.07, 0.08, 0.09));
    EXPECT_EQ(c2.gates[7], Gate::rot(1, 0.10, 0.11, 0.12));

    EXPECT_THROW(compile_embedding(wsws, std::vector<double>{0.1, 0.2}, std::vector<double>(11, 0.0)), ShapeError);
    EXPECT_THROW(compile_embedding(wsws, std::vector<double>{0.1}, p), ShapeError);
    EXPECT_EQ(compile_embedding(wsws, std::vector<double>{0.1, 0.2}, p),
              compile_embedding(wsws, std::vector<double>{0.1, 0.2}, p));
}

TEST(CompileEmbedding, ZeroWMatchesS) {
    std::mt19937_64 rng(4);
    Eigen::MatrixXd X(6, 3);
    for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = std::uniform_real_distribution<double>(0, 1)(rng);
    const auto ks = build_kernel_matrix(X, KernelSpec::quantum({parse_architecture("S", 3), {}, {}}));
    const auto kws =
        build_kernel_matrix(X, KernelSpec::quantum({parse_architecture("WS", 3), std::vector<double>(9, 0.0), {}}));
    EXPECT_LT((ks.values - kws.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CompileEmbedding, SeparableArchitecturesFactorize) {
    std::mt19937_64 rng(12);
    for (const char* text : {"S", "WS", "SW", "WSWS"}) {
        for (int trial = 0; trial < 5; ++trial) {
            const int n = 2 + static_cast<int>(rng() % 3);
            const auto arch = parse_architecture(text, n);
            const auto params = random_params(rng, arch.param_count());
            const auto a = random_x(rng, n), b = random_x(rng, n);
            const Embedding emb{arch, params, {}};
            const double full = fidelity(emb.state(a), emb.state(b));
            double product = 1.0;
            const auto single = parse_architecture(text, 1);
            for (int q = 0; q < n; ++q) {
                std::vector<double> pq;
                for (std::size_t l = 0; l < arch.param_count() / (3 * n); ++l)
                    for (int k = 0; k < 3; ++k) pq.push_back(params[l * 3 * n + 3 * q + k]);
                const Embedding e1{single, pq, {}};
                product *= fidelity(e1.state(std::vector<double>{a[q]}), e1.state(std::vector<double>{b[q]}));
            }
            EXPECT_NEAR(full, product, 1e-10) << text;
        }
    }
}

TEST(AmplitudeEmbed, Examples) {
    const auto s = amplitude_embed(std::vector<double>{3.0, 4.0});
    EXPECT_NEAR(s[0].real(), 0.6, 1e-12);
    EXPECT_NEAR(s[1].real(), 0.8, 1e-12);
    const auto padded = amplitude_embed(std::vector<double>{1.0, 1.0, 1.0});
    EXPECT_EQ(padded.dimension(), 4u);
    EXPECT_NEAR(std::abs(padded[3]), 0.0, 0.0);
    EXPECT_THROW(amplitude_embed(std::vector<double>{0.0, 0.0}), NormalizationError);
}

TEST(BasisEmbed, Examples) {
    const auto s = basis_embed(std::vector<int>{1, 0});
    EXPECT_NEAR(std::abs(s[2]), 1.0, 1e-15);
    EXPECT_THROW(basis_embed(std::vector<int>{2}), ArgumentError);
}

TEST(ParameterJson, RoundTrip) {
    const auto arch = parse_architecture("WS", 2);
    const std::vector<double> p{0.1, 0.2, 0.3, 1e-17, 6.283185307179586, 2.0 / 3.0};
    const auto back = params_from_json(params_to_json(arch, p));
    EXPECT_EQ(back.arch, arch);
    EXPECT_EQ(back.params, p);
    EXPECT_THROW(params_from_json(R"({"architecture":"WS","n_qubits":2,"params":[1,2]})"), ShapeError);
    EXPECT_THROW(params_from_json("not json"), FormatError);
}
