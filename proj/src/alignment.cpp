#include "qksvm/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

#include "qksvm/error.hpp"
#include "qksvm/parallel.hpp"
#include "qksvm/random.hpp"

namespace qksvm {

namespace {

constexpr double kShift = std::numbers::pi / 2;

std::vector<double> row(const Eigen::MatrixXd& X, Eigen::Index i) {
    std::vector<double> r(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index c = 0; c < X.cols(); ++c) r[static_cast<std::size_t>(c)] = X(i, c);
    return r;
}

std::vector<Statevector> embed_all(const Embedding& emb, const Eigen::MatrixXd& X) {
    std::vector<Statevector> out;
    out.reserve(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) out.push_back(emb.state(row(X, i)));
    return out;
}

Eigen::MatrixXd gram(const std::vector<Statevector>& states) {
    const auto n = static_cast<Eigen::Index>(states.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = std::clamp(fidelity(states[static_cast<std::size_t>(j)], states[static_cast<std::size_t>(i)]), 0.0, 1.0);
            K(i, j) = v;
            K(j, i) = v;
        }
    return K;
}

void check_inputs(const Embedding& emb, const Eigen::MatrixXd& X, std::span<const int> labels) {
    validate_labels(labels);
    if (X.rows() != static_cast<Eigen::Index>(labels.size())) throw ShapeError("data rows and labels differ in length");
    if (X.cols() != emb.n_qubits()) throw ShapeError("data width does not match the embedding");
}

double alignment_value(const Eigen::MatrixXd& K, const Eigen::VectorXd& y) {
    const double a = y.dot(K * y);
    const double b = K.squaredNorm();
    const double d = y.squaredNorm();
    if (b == 0.0) throw DegenerateError("alignment of an all-zero kernel matrix");
    return a / (d * std::sqrt(b));
}

Eigen::VectorXd label_vector(std::span<const int> labels) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i)) = labels[i];
    return y;
}

double exact_alignment(const Embedding& emb, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    return alignment_value(gram(embed_all(emb, X)), y);
}

}  // namespace

void validate_labels(std::span<const int> labels) {
    for (int v : labels)
        if (v != 1 && v != -1) throw ValidationError("labels must be +1 or -1, got " + std::to_string(v));
}

Eigen::MatrixXd ideal_kernel(std::span<const int> labels) {
    validate_labels(labels);
    const auto y = label_vector(labels);
    return y * y.transpose();
}

double alignment(const Eigen::MatrixXd& K, std::span<const int> labels) {
    validate_labels(labels);
    if (K.rows() != K.cols() || K.rows() != static_cast<Eigen::Index>(labels.size()))
        throw ShapeError("kernel matrix and labels disagree in size");
    if (labels.empty()) throw ShapeError("alignment of an empty kernel matrix");
    return alignment_value(K, label_vector(labels));
}

AlignmentGradient kta_gradient(const Embedding& embedding, const Eigen::MatrixXd& X, std::span<const int> labels,
                               const EstimatorConfig& estimator, int jobs) {
    if (estimator.shots > 0) throw UnsupportedError("alignment gradients need the exact estimator");
    if (!is_fidelity_kernel(estimator.kind)) throw ArgumentError("alignment gradients are defined for fidelity kernels");
    check_inputs(embedding, X, labels);
    const auto y = label_vector(labels);
    const auto states = embed_all(embedding, X);
    const Eigen::MatrixXd K = gram(states);

    AlignmentGradient out;
    const double A = y.dot(K * y);
    const double B = K.squaredNorm();
    const double D = y.squaredNorm();
    if (B == 0.0) throw DegenerateError("alignment of an all-zero kernel matrix");
    out.value = A / (D * std::sqrt(B));

    const std::size_t P = embedding.params.size();
    out.gradient.assign(P, 0.0);
    const Eigen::Index N = X.rows();
    parallel_for(P, jobs, [&](std::size_t l) {
        Embedding plus = embedding, minus = embedding;
        plus.params[l] += kShift;
        minus.params[l] -= kShift;
        const auto sp = embed_all(plus, X);
        const auto sm = embed_all(minus, X);
        // S(i, j) = d/dtheta |<psi_j | psi_i(theta)>|^2 with psi_j held fixed.
        Eigen::MatrixXd S(N, N);
        for (Eigen::Index i = 0; i < N; ++i)
            for (Eigen::Index j = 0; j < N; ++j) {
                const auto& fixed = states[static_cast<std::size_t>(j)];
                S(i, j) = 0.5 * (fidelity(fixed, sp[static_cast<std::size_t>(i)]) -
                                 fidelity(fixed, sm[static_cast<std::size_t>(i)]));
            }
        Eigen::MatrixXd dK = S + S.transpose();
        dK.diagonal().setZero();
        const double dA = y.dot(dK * y);
        const double dB = 2.0 * K.cwiseProduct(dK).sum();
        out.gradient[l] = dA / (D * std::sqrt(B)) - A * dB / (2.0 * D * B * std::sqrt(B));
    });
    return out;
}

std::vector<double> kta_gradient_fd(const Embedding& embedding, const Eigen::MatrixXd& X,
                                    std::span<const int> labels, double h) {
    check_inputs(embedding, X, labels);
    const auto y = label_vector(labels);
    std::vector<double> g(embedding.params.size());
    for (std::size_t l = 0; l < g.size(); ++l) {
        Embedding plus = embedding, minus = embedding;
        plus.params[l] += h;
        minus.params[l] -= h;
        g[l] = (exact_alignment(plus, X, y) - exact_alignment(minus, X, y)) / (2 * h);
    }
    return g;
}

void AdamConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ArgumentError("learning_rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw ArgumentError("Adam betas must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw ArgumentError("Adam epsilon must be positive");
    if (max_iters < 0) throw ArgumentError("max_iters must be non-negative");
    if (patience < 1) throw ArgumentError("patience must be >= 1");
}

ParamVector initial_params(const ArchitectureSpec& arch, std::uint64_t seed) {
    Rng rng(seed);
    ParamVector p(arch.param_count());
    for (auto& v : p) v = rng.uniform(0.0, 2 * std::numbers::pi);
    return p;
}

KtaResult optimize_kta(const ArchitectureSpec& arch, const Eigen::MatrixXd& X, std::span<const int> labels,
                       const AdamConfig& adam, const ScalingConfig& scaling, const EstimatorConfig& estimator,
                       int jobs, const ParamVector* init) {
    adam.validate();
    validate_labels(labels);
    if (labels.size() < 2) throw ValidationError("alignment training needs at least two points");
    const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
    const bool has_neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
    if (!has_pos || !has_neg) throw ValidationError("alignment training needs both classes");

    Embedding emb{arch, init ? *init : initial_params(arch, adam.seed), scaling};
    if (emb.params.size() != arch.param_count()) throw ShapeError("initial parameters do not match the architecture");

    KtaResult result;
    if (arch.param_count() == 0) {
        check_inputs(emb, X, labels);
        result.best_alignment = exact_alignment(emb, X, label_vector(labels));
        result.initial_alignment = result.best_alignment;
        result.trajectory.push_back({0, result.best_alignment, 0.0});
        return result;
    }

    const std::size_t P = emb.params.size();
    std::vector<double> m(P, 0.0), v(P, 0.0);
    double b1t = 1.0, b2t = 1.0;
    int stall = 0;
    for (int it = 0;; ++it) {
        const auto g = kta_gradient(emb, X, labels, estimator, jobs);
        double gnorm = 0.0;
        for (double d : g.gradient) gnorm = std::max(gnorm, std::abs(d));
        result.trajectory.push_back({it, g.value, gnorm});
        if (it == 0) {
            result.initial_alignment = g.value;
            result.best_alignment = g.value;
            result.params = emb.params;
        } else {
            if (g.value > result.best_alignment + adam.min_improvement)
                stall = 0;
            else
                ++stall;
            if (g.value > result.best_alignment) {
                result.best_alignment = g.value;
                result.params = emb.params;
            }
        }
        if (it >= adam.max_iters || stall >= adam.patience) break;

        b1t *= adam.beta1;
        b2t *= adam.beta2;
        for (std::size_t l = 0; l < P; ++l) {
            const double d = g.gradient[l];
            m[l] = adam.beta1 * m[l] + (1 - adam.beta1) * d;
            v[l] = adam.beta2 * v[l] + (1 - adam.beta2) * d * d;
            const double mh = m[l] / (1 - b1t);
            const double vh = v[l] / (1 - b2t);
            emb.params[l] += adam.learning_rate * mh / (std::sqrt(vh) + adam.epsilon);
        }
    }
    return result;
}

void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryPoint>& trajectory) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    out << "iteration,alignment,grad_norm\n" << std::setprecision(17);
    for (const auto& p : trajectory) out << p.iteration << ',' << p.alignment << ',' << p.grad_norm << '\n';
}

}  // namespace qksvm
