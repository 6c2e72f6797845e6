#include "qksvm/svm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "qksvm/error.hpp"
#include "qksvm/random.hpp"

namespace qksvm {

namespace {

constexpr double kTau = 1e-12;

// Row access into the kernel. Rows are materialized on first use so the
// callable overload evaluates each entry at most once.
class RowCache {
  public:
    RowCache(std::size_t n, KernelFunction k) : n_(n), k_(std::move(k)), rows_(n) {}

    const std::vector<double>& row(std::size_t i) {
        auto& r = rows_[i];
        if (r.empty()) {
            r.resize(n_);
            for (std::size_t j = 0; j < n_; ++j) r[j] = k_(i, j);
        }
        return r;
    }

    double diag(std::size_t i) { return row(i)[i]; }

  private:
    std::size_t n_;
    KernelFunction k_;
    std::vector<std::vector<double>> rows_;
};

void check_labels(std::span<const int> labels) {
    bool pos = false, neg = false;
    for (int y : labels) {
        if (y == 1)
            pos = true;
        else if (y == -1)
            neg = true;
        else
            throw ValidationError("SVM labels must be +1 or -1");
    }
    if (!pos || !neg) throw ValidationError("SVM training needs both classes");
}

class Smo {
  public:
    Smo(std::size_t n, RowCache& cache, std::span<const int> y, const TrainConfig& cfg)
        : n_(n), cache_(cache), y_(y), cfg_(cfg), alpha_(n, 0.0), grad_(n, -1.0), rng_(cfg.seed) {}

    SvmModel run() {
        SvmModel model;
        const long cap = static_cast<long>(cfg_.max_passes) * static_cast<long>(std::max<std::size_t>(n_, 1));
        double objective = 0.0;
        if (cfg_.record_objective) model.objective_trace.push_back(objective);
        long it = 0;
        for (; it < cap; ++it) {
            const auto sel = select_pair();
            if (!sel) {
                model.converged = true;
                break;
            }
            auto [i, j] = *sel;
            if (!update(i, j) && !fallback_sweep(i)) break;
            if (cfg_.record_objective) model.objective_trace.push_back(current_objective());
        }
        model.iterations = static_cast<int>(it);
        model.alphas = alpha_;
        model.C = cfg_.C;
        model.labels.assign(y_.begin(), y_.end());
        model.bias = bias();
        for (std::size_t i = 0; i < n_; ++i)
            if (alpha_[i] > cfg_.alpha_tol) model.support_indices.push_back(i);
        return model;
    }

  private:
    bool in_up(std::size_t t) const { return (y_[t] == 1 && alpha_[t] < cfg_.C) || (y_[t] == -1 && alpha_[t] > 0.0); }
    bool in_low(std::size_t t) const { return (y_[t] == -1 && alpha_[t] < cfg_.C) || (y_[t] == 1 && alpha_[t] > 0.0); }
    double score(std::size_t t) const { return -y_[t] * grad_[t]; }

    // Maximal-violating i, then j by the second-order gain estimate.
    std::optional<std::pair<std::size_t, std::size_t>> select_pair() {
        double m = -std::numeric_limits<double>::infinity();
        double M = std::numeric_limits<double>::infinity();
        std::size_t i = n_;
        for (std::size_t t = 0; t < n_; ++t) {
            if (in_up(t) && score(t) > m) {
                m = score(t);
                i = t;
            }
            if (in_low(t)) M = std::min(M, score(t));
        }
        if (i == n_ || m - M < cfg_.tol) return std::nullopt;
        const auto& ki = cache_.row(i);
        std::size_t j = n_;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n_; ++t) {
            if (!in_low(t)) continue;
            const double b = m - score(t);
            if (b <= 0.0) continue;
            double a = ki[i] + cache_.diag(t) - 2.0 * ki[t];
            if (a <= 0.0) a = kTau;
            const double gain = -(b * b) / a;
            if (gain < best) {
                best = gain;
                j = t;
            }
        }
        if (j == n_) return std::nullopt;
        return std::pair{i, j};
    }

    // Analytic two-variable step with clipping; returns false when nothing moved.
    bool update(std::size_t i, std::size_t j) {
        if (i == j) return false;
        const auto& ki = cache_.row(i);
        const auto& kj = cache_.row(j);
        const double C = cfg_.C;
        const double old_i = alpha_[i], old_j = alpha_[j];
        double ai = old_i, aj = old_j;
        const double qij = y_[i] * y_[j] * ki[j];
        if (y_[i] != y_[j]) {
            double quad = ki[i] + kj[j] + 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad_[i] - grad_[j]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0.0) {
                if (aj < 0.0) {
                    aj = 0.0;
                    ai = diff;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = -diff;
            }
            if (diff > 0.0) {
                if (ai > C) {
                    ai = C;
                    aj = C - diff;
                }
            } else if (aj > C) {
                aj = C;
                ai = C + diff;
            }
        } else {
            double quad = ki[i] + kj[j] - 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad_[i] - grad_[j]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > C) {
                if (ai > C) {
                    ai = C;
                    aj = sum - C;
                }
                if (aj > C) {
                    aj = C;
                    ai = sum - C;
                }
            } else {
                if (aj < 0.0) {
                    aj = 0.0;
                    ai = sum;
                }
                if (ai < 0.0) {
                    ai = 0.0;
                    aj = sum;
                }
            }
        }
        ai = std::clamp(ai, 0.0, C);
        aj = std::clamp(aj, 0.0, C);
        const double di = ai - old_i, dj = aj - old_j;
        if (di == 0.0 && dj == 0.0) return false;
        alpha_[i] = ai;
        alpha_[j] = aj;
        for (std::size_t t = 0; t < n_; ++t)
            grad_[t] += y_[t] * (y_[i] * ki[t] * di + y_[j] * kj[t] * dj);
        return true;
    }

    // The selected pair made no progress (rounding or a flat direction); try
    // the remaining violating partners of i in a seeded random order.
    bool fallback_sweep(std::size_t i) {
        std::vector<std::size_t> order(n_);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng_.shuffle(std::span<std::size_t>(order));
        for (std::size_t t : order) {
            if (t == i) continue;
            const bool violating = (in_up(i) && in_low(t) && score(i) > score(t)) ||
                                   (in_low(i) && in_up(t) && score(t) > score(i));
            if (!violating) continue;
            if (in_up(i) && in_low(t) ? update(i, t) : update(t, i)) return true;
        }
        return false;
    }

    double current_objective() const {
        // f = sum(alpha) - 0.5 alpha^T Q alpha and G = Q alpha - 1, so
        // f = -0.5 * sum alpha_i (G_i - 1).
        double f = 0.0;
        for (std::size_t t = 0; t < n_; ++t) f += alpha_[t] * (grad_[t] - 1.0);
        return -0.5 * f;
    }

    double bias() const {
        double sum = 0.0;
        int free = 0;
        double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n_; ++t) {
            const double s = score(t);
            if (alpha_[t] > cfg_.alpha_tol && alpha_[t] < cfg_.C - cfg_.alpha_tol) {
                sum += s;
                ++free;
            }
            if (in_up(t)) lb = std::max(lb, s);
            if (in_low(t)) ub = std::min(ub, s);
        }
        if (free > 0) return sum / free;
        if (std::isfinite(lb) && std::isfinite(ub)) return 0.5 * (lb + ub);
        if (std::isfinite(lb)) return lb;
        if (std::isfinite(ub)) return ub;
        return 0.0;
    }

    std::size_t n_;
    RowCache& cache_;
    std::span<const int> y_;
    TrainConfig cfg_;
    std::vector<double> alpha_;
    std::vector<double> grad_;
    Rng rng_;
};

}  // namespace

void TrainConfig::validate() const {
    if (!(C > 0.0) || !std::isfinite(C)) throw ArgumentError("C must be positive and finite");
    if (!(tol > 0.0)) throw ArgumentError("tol must be positive");
    if (!(alpha_tol > 0.0)) throw ArgumentError("alpha_tol must be positive");
    if (max_passes < 1) throw ArgumentError("max_passes must be >= 1");
}

std::string hash_params(std::span<const double> params) {
    std::string bytes;
    bytes.reserve(params.size() * 8);
    for (double p : params) {
        const auto u = std::bit_cast<std::uint64_t>(p);
        for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<char>((u >> (8 * b)) & 0xFF));
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << fnv1a64(bytes);
    return out.str();
}

SvmModel train_dual(std::size_t n, const KernelFunction& kernel, std::span<const int> labels,
                    const TrainConfig& cfg) {
    cfg.validate();
    if (labels.size() != n) throw ShapeError("labels and kernel disagree in size");
    check_labels(labels);
    RowCache cache(n, kernel);
    return Smo(n, cache, labels, cfg).run();
}

SvmModel train_dual(const Eigen::MatrixXd& K, std::span<const int> labels, const TrainConfig& cfg) {
    if (K.rows() != K.cols()) throw ShapeError("kernel matrix must be square");
    if (K.rows() != static_cast<Eigen::Index>(labels.size())) throw ShapeError("labels and kernel disagree in size");
    if (!K.allFinite()) throw ValidationError("kernel matrix has non-finite entries");
    if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-6) throw ValidationError("kernel matrix is not symmetric");
    auto model = train_dual(
        static_cast<std::size_t>(K.rows()),
        [&K](std::size_t i, std::size_t j) { return K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); },
        labels, cfg);
    return model;
}

double dual_objective(std::span<const double> alphas, std::span<const int> labels, const Eigen::MatrixXd& K) {
    const auto n = alphas.size();
    if (labels.size() != n || K.rows() != static_cast<Eigen::Index>(n) || K.cols() != K.rows())
        throw ShapeError("dual objective inputs disagree in size");
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        lin += alphas[i];
        for (std::size_t j = 0; j < n; ++j)
            quad += alphas[i] * alphas[j] * labels[i] * labels[j] *
                    K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    return lin - 0.5 * quad;
}

double decision_value(const SvmModel& model, std::span<const double> k_row) {
    if (k_row.size() != model.n_train()) {
        std::ostringstream msg;
        msg << "kernel row has " << k_row.size() << " entries, model has " << model.n_train() << " training points";
        throw ShapeError(msg.str());
    }
    double f = model.bias;
    for (std::size_t i : model.support_indices) f += model.labels[i] * model.alphas[i] * k_row[i];
    return f;
}

Eigen::VectorXd decision_values(const SvmModel& model, const Eigen::MatrixXd& k_test) {
    if (k_test.rows() > 0 && k_test.cols() != static_cast<Eigen::Index>(model.n_train()))
        throw ShapeError("test kernel block width does not match the training set");
    Eigen::VectorXd f(k_test.rows());
    for (Eigen::Index r = 0; r < k_test.rows(); ++r) {
        double v = model.bias;
        for (std::size_t i : model.support_indices)
            v += model.labels[i] * model.alphas[i] * k_test(r, static_cast<Eigen::Index>(i));
        f(r) = v;
    }
    return f;
}

std::vector<int> predict(const SvmModel& model, const Eigen::MatrixXd& k_test) {
    const auto f = decision_values(model, k_test);
    std::vector<int> out(static_cast<std::size_t>(f.size()));
    for (Eigen::Index r = 0; r < f.size(); ++r) out[static_cast<std::size_t>(r)] = f(r) >= 0.0 ? 1 : -1;
    return out;
}

std::vector<double> slacks(const SvmModel& model, const Eigen::MatrixXd& k_train) {
    const auto f = decision_values(model, k_train);
    if (f.size() != static_cast<Eigen::Index>(model.n_train())) throw ShapeError("training kernel has the wrong size");
    std::vector<double> xi(model.n_train());
    for (std::size_t i = 0; i < xi.size(); ++i)
        xi[i] = std::max(0.0, 1.0 - model.labels[i] * f(static_cast<Eigen::Index>(i)));
    return xi;
}

std::string model_to_json(const SvmModel& model) {
    nlohmann::json k;
    k["kind"] = model.kernel.kind;
    if (!model.kernel.architecture.empty()) {
        k["architecture"] = model.kernel.architecture;
        k["n_qubits"] = model.kernel.n_qubits;
        k["params"] = model.kernel.params;
        k["params_hash"] = model.kernel.params_hash;
        k["w"] = model.kernel.w;
        k["estimator"] = model.kernel.estimator;
    }
    if (model.kernel.kind == "rbf") k["gamma"] = model.kernel.gamma;
    nlohmann::json j;
    j["alphas"] = model.alphas;
    j["bias"] = model.bias;
    j["support_indices"] = model.support_indices;
    j["labels"] = model.labels;
    j["C"] = model.C;
    j["iterations"] = model.iterations;
    j["converged"] = model.converged;
    j["kernel"] = k;
    return j.dump(2);
}

SvmModel model_from_json(std::string_view text) {
    SvmModel m;
    try {
        const auto j = nlohmann::json::parse(text);
        m.alphas = j.at("alphas").get<std::vector<double>>();
        m.bias = j.at("bias").get<double>();
        m.support_indices = j.at("support_indices").get<std::vector<std::size_t>>();
        m.labels = j.at("labels").get<std::vector<int>>();
        m.C = j.at("C").get<double>();
        m.iterations = j.value("iterations", 0);
        m.converged = j.value("converged", false);
        const auto& k = j.at("kernel");
        m.kernel.kind = k.at("kind").get<std::string>();
        m.kernel.architecture = k.value("architecture", std::string{});
        m.kernel.n_qubits = k.value("n_qubits", 0);
        m.kernel.params = k.value("params", std::vector<double>{});
        m.kernel.params_hash = k.value("params_hash", std::string{});
        m.kernel.w = k.value("w", 0.0);
        m.kernel.gamma = k.value("gamma", 0.0);
        m.kernel.estimator = k.value("estimator", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed model file: ") + e.what());
    }
    if (m.labels.size() != m.alphas.size()) throw FormatError("model file: labels and alphas differ in length");
    for (auto i : m.support_indices)
        if (i >= m.alphas.size()) throw FormatError("model file: support index out of range");
    if (!m.kernel.params.empty() && hash_params(m.kernel.params) != m.kernel.params_hash)
        throw FormatError("model file: parameter hash mismatch");
    return m;
}

void write_model(const std::string& path, const SvmModel& model) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    out << model_to_json(model) << '\n';
}

SvmModel read_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

}  // namespace qksvm
