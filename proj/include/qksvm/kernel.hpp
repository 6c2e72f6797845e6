#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "qksvm/feature_map.hpp"

namespace qksvm {

enum class EstimatorKind : std::uint8_t {
    ExactInversion = 0,
    ShotsInversion = 1,
    HadamardTest = 2,
    SwapTest = 3,
    Rbf = 4,
    Linear = 5,
};

std::string_view estimator_name(EstimatorKind kind);
EstimatorKind parse_estimator(std::string_view name);
bool is_fidelity_kernel(EstimatorKind kind);

// shots == 0 means exact evaluation for the circuit estimators; the inversion
// estimator reports itself as ShotsInversion whenever shots > 0.
struct EstimatorConfig {
    EstimatorKind kind = EstimatorKind::ExactInversion;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    double gamma = 1.0;

    EstimatorKind effective_kind() const;
    void validate() const;
};

// What a kernel entry is computed from: the estimator and, for the quantum
// estimators, the bound feature map.
struct KernelSpec {
    EstimatorConfig estimator;
    std::optional<Embedding> embedding;

    static KernelSpec quantum(Embedding embedding, EstimatorConfig estimator = {});
    static KernelSpec rbf(double gamma);
    static KernelSpec linear();

    // Feature count expected by the kernel, or nullopt for classical kernels.
    std::optional<int> feature_count() const;
};

struct KernelMatrix {
    Eigen::MatrixXd values;
    EstimatorKind estimator = EstimatorKind::ExactInversion;
    std::optional<std::uint64_t> shots;
    std::optional<std::uint64_t> seed;

    Eigen::Index size() const { return values.rows(); }
    bool operator==(const KernelMatrix& other) const;
};

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);
double linear_kernel(std::span<const double> a, std::span<const double> b);

// Inversion test: U^dagger(x_j) U(x_i) on n qubits, read P(|0^n>).
Circuit inversion_circuit(std::span<const double> xi, std::span<const double> xj, const Embedding& emb);
double fidelity_inversion(std::span<const double> xi, std::span<const double> xj, const Embedding& emb,
                          const EstimatorConfig& cfg = {});

// Hadamard test on 2n+1 qubits: ancilla 0, register A (1..n), register B
// (n+1..2n). U(x_j) is prepared on B under ancilla |0>, U(x_i) on A under
// ancilla |1>, then a |0>-controlled register swap brings both branches onto
// A, so p(0) = (1 + Re<U(x_j)|U(x_i)>) / 2. The imaginary pass inserts S^dagger
// on the ancilla before the closing Hadamard.
Circuit hadamard_test_circuit(std::span<const double> xi, std::span<const double> xj, const Embedding& emb,
                              bool imaginary_pass);

struct HadamardTestResult {
    double p0_real = 0.0;
    double p0_imag = 0.0;
    double fidelity = 0.0;
};

HadamardTestResult hadamard_test(std::span<const double> xi, std::span<const double> xj, const Embedding& emb,
                                 const EstimatorConfig& cfg = {});
double fidelity_hadamard_test(std::span<const double> xi, std::span<const double> xj, const Embedding& emb,
                              const EstimatorConfig& cfg = {});

// Bitwise swap test on 3n qubits: registers A (0..n-1), B (n..2n-1) and one
// ancilla per qubit pair (2n..3n-1). The parity of the ancilla record has
// expectation |<a|b>|^2, so fidelity = 2 P(even) - 1.
Circuit swap_test_circuit(std::span<const double> xi, std::span<const double> xj, const Embedding& emb);

struct SwapTestResult {
    double p_even = 0.0;
    double fidelity = 0.0;
};

SwapTestResult swap_test(std::span<const double> xi, std::span<const double> xj, const Embedding& emb,
                         const EstimatorConfig& cfg = {});
double fidelity_swap_test(std::span<const double> xi, std::span<const double> xj, const Embedding& emb,
                          const EstimatorConfig& cfg = {});

// Single entry through whichever estimator `spec` names.
double kernel_entry(std::span<const double> a, std::span<const double> b, const KernelSpec& spec);

// Gram matrix over the rows of X. Each unordered pair is estimated once and
// mirrored; fidelity diagonals are set to 1 without simulation. Shot-based
// pairs draw from a stream seeded by (seed, i, j), so results do not depend on
// `jobs`.
KernelMatrix build_kernel_matrix(const Eigen::MatrixXd& X, const KernelSpec& spec, int jobs = 1);

// M x N block K(a_i, b_j) for prediction.
Eigen::MatrixXd build_cross_kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const KernelSpec& spec,
                                   int jobs = 1);

// Binary container: "QKM1", n (u32), estimator tag (u8), shots (u64, 0 when
// exact), seed (u64, all ones when absent), n*n row-major f64, little-endian.
std::string encode_qkm(const KernelMatrix& k);
KernelMatrix decode_qkm(std::string_view bytes);
void write_qkm(const std::string& path, const KernelMatrix& k);
KernelMatrix read_qkm(const std::string& path);
void write_kernel_csv(const std::string& path, const KernelMatrix& k);

}  // namespace qksvm
