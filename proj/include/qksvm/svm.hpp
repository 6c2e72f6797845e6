#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qksvm/feature_map.hpp"

namespace qksvm {

struct TrainConfig {
    double C = 1.0;
    double tol = 1e-3;        // stop once the maximal KKT violation drops below this
    double alpha_tol = 1e-8;  // support-vector threshold
    int max_passes = 200;     // iteration cap = max_passes * N
    std::uint64_t seed = 0;   // fallback working-pair sweep order
    bool record_objective = false;

    void validate() const;
};

// How the training kernel was produced; stored with the model.
struct KernelDescriptor {
    std::string kind = "precomputed";  // precomputed | linear | rbf | quantum
    std::string architecture;
    int n_qubits = 0;
    ParamVector params;
    std::string params_hash;
    double w = 0.0;
    double gamma = 0.0;
    std::string estimator;

    bool operator==(const KernelDescriptor&) const = default;
};

// 16 hex digits of FNV-1a over the exact bit patterns of the parameters.
std::string hash_params(std::span<const double> params);

struct SvmModel {
    std::vector<double> alphas;
    double bias = 0.0;
    std::vector<std::size_t> support_indices;
    std::vector<int> labels;
    double C = 1.0;
    KernelDescriptor kernel;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;  // filled when record_objective is set

    std::size_t n_train() const { return alphas.size(); }
};

// Kernel value between training points i and j.
using KernelFunction = std::function<double(std::size_t, std::size_t)>;

// SMO on the soft-margin dual. Accepts slightly indefinite matrices.
SvmModel train_dual(const Eigen::MatrixXd& K, std::span<const int> labels, const TrainConfig& cfg);
SvmModel train_dual(std::size_t n, const KernelFunction& kernel, std::span<const int> labels,
                    const TrainConfig& cfg);

// sum(alpha) - 0.5 alpha^T Q alpha with Q_ij = y_i y_j K_ij.
double dual_objective(std::span<const double> alphas, std::span<const int> labels, const Eigen::MatrixXd& K);

double decision_value(const SvmModel& model, std::span<const double> k_row);
// One decision value per row of the M x N block.
Eigen::VectorXd decision_values(const SvmModel& model, const Eigen::MatrixXd& k_test);
// sign(f), with sign(0) = +1.
std::vector<int> predict(const SvmModel& model, const Eigen::MatrixXd& k_test);

// max(0, 1 - y_i f(x_i)) over the training set.
std::vector<double> slacks(const SvmModel& model, const Eigen::MatrixXd& k_train);

std::string model_to_json(const SvmModel& model);
SvmModel model_from_json(std::string_view text);
void write_model(const std::string& path, const SvmModel& model);
SvmModel read_model(const std::string& path);

}  // namespace qksvm
