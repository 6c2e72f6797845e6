#include "qksvm/kernel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "binary_io.hpp"
#include "qksvm/error.hpp"
#include "qksvm/parallel.hpp"
#include "qksvm/random.hpp"

namespace qksvm {

namespace {

constexpr std::uint64_t kNoSeed = ~std::uint64_t{0};
constexpr std::uint64_t kCrossStream = 0x43524F5353ULL;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Re-targets a circuit built on n qubits onto qubits [offset, offset + n) of a
// wider register.
Circuit place(const Circuit& c, int total_qubits, int offset) {
    Circuit out{total_qubits, {}};
    out.gates.reserve(c.gates.size());
    for (Gate g : c.gates) {
        for (int& t : g.targets) t += offset;
        for (int& q : g.controls) q += offset;
        out.gates.push_back(std::move(g));
    }
    return out;
}

void append_controlled(Circuit& into, const Circuit& body, int control) {
    for (const auto& g : body.gates) into.gates.push_back(controlled(g, control));
}

void check_pair(std::span<const double> xi, std::span<const double> xj, const Embedding& emb) {
    const auto n = static_cast<std::size_t>(emb.n_qubits());
    if (xi.size() != n || xj.size() != n) {
        std::ostringstream msg;
        msg << "kernel inputs of length " << xi.size() << " and " << xj.size() << " for a " << n << "-qubit embedding";
        throw ShapeError(msg.str());
    }
}

void check_budget(int needed, const char* what) {
    if (needed > kMaxQubits) {
        std::ostringstream msg;
        msg << what << " needs " << needed << " qubits, above the " << kMaxQubits << "-qubit bound";
        throw CapacityError(msg.str());
    }
}

double ancilla_zero_fraction(const std::vector<std::uint64_t>& hist, std::size_t ancilla_bit, std::uint64_t shots) {
    std::uint64_t zeros = 0;
    for (std::size_t i = 0; i < hist.size(); ++i)
        if ((i & ancilla_bit) == 0) zeros += hist[i];
    return static_cast<double>(zeros) / static_cast<double>(shots);
}

const Embedding& require_embedding(const KernelSpec& spec) {
    if (!spec.embedding) throw ArgumentError("quantum estimator requires a bound embedding");
    return *spec.embedding;
}

std::vector<std::vector<double>> rows_of(const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        auto& row = rows[static_cast<std::size_t>(r)];
        row.resize(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    }
    return rows;
}

std::vector<Statevector> embed_rows(const std::vector<std::vector<double>>& rows, const Embedding& emb, int jobs) {
    std::vector<std::optional<Statevector>> tmp(rows.size());
    parallel_for(rows.size(), jobs, [&](std::size_t i) { tmp[i] = emb.state(rows[i]); });
    std::vector<Statevector> out;
    out.reserve(rows.size());
    for (auto& s : tmp) out.push_back(std::move(*s));
    return out;
}

}  // namespace

std::string_view estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::ExactInversion: return "exact_inversion";
        case EstimatorKind::ShotsInversion: return "shots_inversion";
        case EstimatorKind::HadamardTest: return "hadamard_test";
        case EstimatorKind::SwapTest: return "swap_test";
        case EstimatorKind::Rbf: return "rbf";
        case EstimatorKind::Linear: return "linear";
    }
    return "?";
}

EstimatorKind parse_estimator(std::string_view name) {
    for (auto k : {EstimatorKind::ExactInversion, EstimatorKind::ShotsInversion, EstimatorKind::HadamardTest,
                   EstimatorKind::SwapTest, EstimatorKind::Rbf, EstimatorKind::Linear})
        if (estimator_name(k) == name) return k;
    throw ParseError("unknown estimator \"" + std::string(name) + "\"");
}

bool is_fidelity_kernel(EstimatorKind kind) { return kind != EstimatorKind::Rbf && kind != EstimatorKind::Linear; }

EstimatorKind EstimatorConfig::effective_kind() const {
    if (kind == EstimatorKind::ExactInversion && shots > 0) return EstimatorKind::ShotsInversion;
    return kind;
}

void EstimatorConfig::validate() const {
    if (kind == EstimatorKind::ShotsInversion && shots == 0)
        throw ArgumentError("shots_inversion needs shots >= 1");
    if (kind == EstimatorKind::Rbf && !(gamma > 0.0 && std::isfinite(gamma)))
        throw ArgumentError("RBF gamma must be positive and finite");
}

KernelSpec KernelSpec::quantum(Embedding embedding, EstimatorConfig estimator) {
    if (!is_fidelity_kernel(estimator.kind)) throw ArgumentError("quantum kernel needs a circuit estimator");
    return KernelSpec{estimator, std::move(embedding)};
}

KernelSpec KernelSpec::rbf(double gamma) {
    EstimatorConfig cfg;
    cfg.kind = EstimatorKind::Rbf;
    cfg.gamma = gamma;
    cfg.validate();
    return KernelSpec{cfg, std::nullopt};
}

KernelSpec KernelSpec::linear() {
    EstimatorConfig cfg;
    cfg.kind = EstimatorKind::Linear;
    return KernelSpec{cfg, std::nullopt};
}

std::optional<int> KernelSpec::feature_count() const {
    if (embedding) return embedding->n_qubits();
    return std::nullopt;
}

bool KernelMatrix::operator==(const KernelMatrix& other) const {
    return estimator == other.estimator && shots == other.shots && seed == other.seed &&
           values.rows() == other.values.rows() && values.cols() == other.values.cols() && values == other.values;
}

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
    if (a.size() != b.size()) throw ShapeError("RBF kernel of vectors with different lengths");
    if (!(gamma > 0.0)) throw ArgumentError("RBF gamma must be positive");
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

double linear_kernel(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("linear kernel of vectors with different lengths");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Circuit inversion_circuit(std::span<const double> xi, std::span<const double> xj, const Embedding& emb) {
    check_pair(xi, xj, emb);
    Circuit c = emb.circuit(xi);
    c.append(adjoint(emb.circuit(xj)));
    return c;
}

double fidelity_inversion(std::span<const double> xi, std::span<const double> xj, const Embedding& emb,
                          const EstimatorConfig& cfg) {
    cfg.validate();
    const auto state = apply_circuit(Statevector(emb.n_qubits()), inversion_circuit(xi, xj, emb));
    if (cfg.shots == 0) return clamp01(prob_all_zero(state));
    const auto hist = sample_histogram(state, cfg.shots, cfg.seed);
    return static_cast<double>(hist[0]) / static_cast<double>(cfg.shots);
}

Circuit hadamard_test_circuit(std::span<const double> xi, std::span<const double> xj, const Embedding& emb,
                              bool imaginary_pass) {
    check_pair(xi, xj, emb);
    const int n = emb.n_qubits();
    const int total = 2 * n + 1;
    check_budget(total, "Hadamard test");
    const int ancilla = 0;
    Circuit c{total, {}};
    c.append(Gate::h(ancilla));
    c.append(Gate::x(ancilla));
    append_controlled(c, place(emb.circuit(xj), total, n + 1), ancilla);
    c.append(Gate::x(ancilla));
    append_controlled(c, place(emb.circuit(xi), total, 1), ancilla);
    c.append(Gate::x(ancilla));
    for (int k = 0; k < n; ++k) c.append(Gate::cswap(ancilla, 1 + k, n + 1 + k));
    c.append(Gate::x(ancilla));
    if (imaginary_pass) c.append(Gate::sdg(ancilla));
    c.append(Gate::h(ancilla));
    return c;
}

HadamardTestResult hadamard_test(std::span<const double> xi, std::span<const double> xj, const Embedding& emb,
                                 const EstimatorConfig& cfg) {
    cfg.validate();
    HadamardTestResult r;
    if (cfg.shots == 0) {
        // Run everything up to the closing ancilla rotation and read the
        // ancilla coherence: sum_k conj(a_{0k}) a_{1k} = <U(x_j)|U(x_i)> / 2.
        Circuit prep = hadamard_test_circuit(xi, xj, emb, false);
        prep.gates.pop_back();
        const auto state = apply_circuit(Statevector(prep.n_qubits), prep);
        const auto amps = state.amplitudes();
        const std::size_t half = amps.size() / 2;
        Complex coherence{0.0, 0.0};
        for (std::size_t k = 0; k < half; ++k) coherence += std::conj(amps[k]) * amps[half + k];
        const Complex overlap = 2.0 * coherence;
        r.p0_real = (1.0 + overlap.real()) / 2.0;
        r.p0_imag = (1.0 + overlap.imag()) / 2.0;
        r.fidelity = clamp01(std::norm(overlap));
        return r;
    }
    const int total = 2 * emb.n_qubits() + 1;
    const std::size_t ancilla_bit = std::size_t{1} << (total - 1);
    const auto real_state = apply_circuit(Statevector(total), hadamard_test_circuit(xi, xj, emb, false));
    const auto imag_state = apply_circuit(Statevector(total), hadamard_test_circuit(xi, xj, emb, true));
    r.p0_real = ancilla_zero_fraction(sample_histogram(real_state, cfg.shots, derive_seed(cfg.seed, 1)), ancilla_bit,
                                      cfg.shots);
    r.p0_imag = ancilla_zero_fraction(sample_histogram(imag_state, cfg.shots, derive_seed(cfg.seed, 2)), ancilla_bit,
                                      cfg.shots);
    const double re = 2.0 * r.p0_real - 1.0, im = 2.0 * r.p0_imag - 1.0;
    r.fidelity = clamp01(re * re + im * im);
    return r;
}

double fidelity_hadamard_test(std::span<const double> xi, std::span<const double> xj, const Embedding& emb,
                              const EstimatorConfig& cfg) {
    return hadamard_test(xi, xj, emb, cfg).fidelity;
}

Circuit swap_test_circuit(std::span<const double> xi, std::span<const double> xj, const Embedding& emb) {
    check_pair(xi, xj, emb);
    const int n = emb.n_qubits();
    const int total = 3 * n;
    check_budget(total, "swap test");
    Circuit c = place(emb.circuit(xi), total, 0);
    c.append(place(emb.circuit(xj), total, n));
    for (int k = 0; k < n; ++k) {
        const int anc = 2 * n + k;
        c.append(Gate::h(anc));
        c.append(Gate::cswap(anc, k, n + k));
        c.append(Gate::h(anc));
    }
    return c;
}

SwapTestResult swap_test(std::span<const double> xi, std::span<const double> xj, const Embedding& emb,
                         const EstimatorConfig& cfg) {
    cfg.validate();
    const auto circuit = swap_test_circuit(xi, xj, emb);
    const auto state = apply_circuit(Statevector(circuit.n_qubits), circuit);
    const int n = emb.n_qubits();
    // Ancillas are the n least-significant bits of the index.
    const std::size_t ancilla_mask = (std::size_t{1} << n) - 1;
    SwapTestResult r;
    if (cfg.shots == 0) {
        const auto amps = state.amplitudes();
        for (std::size_t i = 0; i < amps.size(); ++i)
            if (std::popcount(i & ancilla_mask) % 2 == 0) r.p_even += std::norm(amps[i]);
    } else {
        const auto hist = sample_histogram(state, cfg.shots, cfg.seed);
        std::uint64_t even = 0;
        for (std::size_t i = 0; i < hist.size(); ++i)
            if (std::popcount(i & ancilla_mask) % 2 == 0) even += hist[i];
        r.p_even = static_cast<double>(even) / static_cast<double>(cfg.shots);
    }
    r.fidelity = clamp01(2.0 * r.p_even - 1.0);
    return r;
}

double fidelity_swap_test(std::span<const double> xi, std::span<const double> xj, const Embedding& emb,
                          const EstimatorConfig& cfg) {
    return swap_test(xi, xj, emb, cfg).fidelity;
}

double kernel_entry(std::span<const double> a, std::span<const double> b, const KernelSpec& spec) {
    const auto& cfg = spec.estimator;
    switch (cfg.effective_kind()) {
        case EstimatorKind::Rbf: return rbf_kernel(a, b, cfg.gamma);
        case EstimatorKind::Linear: return linear_kernel(a, b);
        case EstimatorKind::ExactInversion:
        case EstimatorKind::ShotsInversion: return fidelity_inversion(a, b, require_embedding(spec), cfg);
        case EstimatorKind::HadamardTest: return fidelity_hadamard_test(a, b, require_embedding(spec), cfg);
        case EstimatorKind::SwapTest: return fidelity_swap_test(a, b, require_embedding(spec), cfg);
    }
    throw ArgumentError("unknown estimator");
}

KernelMatrix build_kernel_matrix(const Eigen::MatrixXd& X, const KernelSpec& spec, int jobs) {
    const auto& cfg = spec.estimator;
    cfg.validate();
    const Eigen::Index n = X.rows();
    if (n < 1) throw ShapeError("kernel matrix needs at least one row");
    const EstimatorKind kind = cfg.effective_kind();
    const bool fidelity_kind = is_fidelity_kernel(kind);
    if (fidelity_kind) {
        const auto& emb = require_embedding(spec);
        if (X.cols() != emb.n_qubits()) {
            std::ostringstream msg;
            msg << "data has " << X.cols() << " features, embedding uses " << emb.n_qubits() << " qubits";
            throw ShapeError(msg.str());
        }
    }

    KernelMatrix out;
    out.estimator = kind;
    if (cfg.shots > 0 && fidelity_kind) out.shots = cfg.shots;
    if (cfg.shots > 0 && fidelity_kind) out.seed = cfg.seed;
    out.values = Eigen::MatrixXd::Zero(n, n);
    const auto rows = rows_of(X);

    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    pairs.reserve(static_cast<std::size_t>(n * (n + 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = fidelity_kind ? i + 1 : i; j < n; ++j) pairs.emplace_back(i, j);
    if (fidelity_kind)
        for (Eigen::Index i = 0; i < n; ++i) out.values(i, i) = 1.0;

    if (kind == EstimatorKind::ExactInversion) {
        // Exact inversion reduces to |<phi(x_j)|phi(x_i)>|^2, so each datum is
        // simulated once instead of once per pair.
        const auto states = embed_rows(rows, *spec.embedding, jobs);
        parallel_for(pairs.size(), jobs, [&](std::size_t p) {
            const auto [i, j] = pairs[p];
            const double v = clamp01(fidelity(states[static_cast<std::size_t>(j)], states[static_cast<std::size_t>(i)]));
            out.values(i, j) = v;
            out.values(j, i) = v;
        });
        return out;
    }

    parallel_for(pairs.size(), jobs, [&](std::size_t p) {
        const auto [i, j] = pairs[p];
        KernelSpec local = spec;
        if (cfg.shots > 0)
            local.estimator.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
        const double v = kernel_entry(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)], local);
        out.values(i, j) = v;
        out.values(j, i) = v;
    });
    return out;
}

Eigen::MatrixXd build_cross_kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const KernelSpec& spec,
                                   int jobs) {
    const auto& cfg = spec.estimator;
    cfg.validate();
    if (A.rows() > 0 && B.rows() > 0 && A.cols() != B.cols())
        throw ShapeError("cross kernel of data with different feature counts");
    Eigen::MatrixXd out(A.rows(), B.rows());
    if (A.rows() == 0 || B.rows() == 0) return out;
    const auto kind = cfg.effective_kind();
    const auto a_rows = rows_of(A);
    const auto b_rows = rows_of(B);
    const auto m = static_cast<std::size_t>(A.rows());
    const auto n = static_cast<std::size_t>(B.rows());

    if (kind == EstimatorKind::ExactInversion) {
        const auto& emb = require_embedding(spec);
        if (A.cols() != emb.n_qubits()) throw ShapeError("data width does not match the embedding");
        const auto sa = embed_rows(a_rows, emb, jobs);
        const auto sb = embed_rows(b_rows, emb, jobs);
        parallel_for(m, jobs, [&](std::size_t i) {
            for (std::size_t j = 0; j < n; ++j)
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = clamp01(fidelity(sb[j], sa[i]));
        });
        return out;
    }
    if (kind == EstimatorKind::Rbf || kind == EstimatorKind::Linear) {
        parallel_for(m, jobs, [&](std::size_t i) {
            for (std::size_t j = 0; j < n; ++j)
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel_entry(a_rows[i], b_rows[j], spec);
        });
        return out;
    }
    parallel_for(m * n, jobs, [&](std::size_t p) {
        const std::size_t i = p / n, j = p % n;
        KernelSpec local = spec;
        if (cfg.shots > 0) local.estimator.seed = derive_seed(cfg.seed ^ kCrossStream, i, j);
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel_entry(a_rows[i], b_rows[j], local);
    });
    return out;
}

std::string encode_qkm(const KernelMatrix& k) {
    if (k.values.rows() != k.values.cols()) throw ShapeError("kernel matrix must be square");
    const auto n = static_cast<std::uint32_t>(k.values.rows());
    std::string out = "QKM1";
    out.reserve(4 + 4 + 1 + 16 + std::size_t{n} * n * 8);
    detail::put_le<std::uint32_t>(out, n);
    detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(k.estimator));
    detail::put_le<std::uint64_t>(out, k.shots.value_or(0));
    detail::put_le<std::uint64_t>(out, k.seed.value_or(kNoSeed));
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j) detail::put_f64(out, k.values(i, j));
    return out;
}

KernelMatrix decode_qkm(std::string_view bytes) {
    detail::ByteReader in(bytes, "QKM1");
    if (in.remaining() < 4 || in.take(4) != "QKM1") throw FormatError("not a QKM1 kernel file (bad magic)");
    const auto n = in.get_le<std::uint32_t>();
    const auto tag = in.get_le<std::uint8_t>();
    if (tag > static_cast<std::uint8_t>(EstimatorKind::Linear)) throw FormatError("QKM1: unknown estimator tag");
    KernelMatrix k;
    k.estimator = static_cast<EstimatorKind>(tag);
    const auto shots = in.get_le<std::uint64_t>();
    const auto seed = in.get_le<std::uint64_t>();
    if (shots != 0) k.shots = shots;
    if (seed != kNoSeed) k.seed = seed;
    if (in.remaining() != std::size_t{n} * n * 8) throw FormatError("QKM1: payload size does not match n");
    k.values.resize(n, n);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j) k.values(i, j) = in.get_f64();
    return k;
}

void write_qkm(const std::string& path, const KernelMatrix& k) { detail::write_file_bytes(path, encode_qkm(k)); }

KernelMatrix read_qkm(const std::string& path) { return decode_qkm(detail::read_file_bytes(path)); }

void write_kernel_csv(const std::string& path, const KernelMatrix& k) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < k.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < k.values.cols(); ++j) {
            if (j) out << ',';
            out << k.values(i, j);
        }
        out << '\n';
    }
}

}  // namespace qksvm
