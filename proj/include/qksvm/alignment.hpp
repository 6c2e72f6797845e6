#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qksvm/feature_map.hpp"
#include "qksvm/kernel.hpp"

namespace qksvm {

// K_ij = y_i y_j. Labels must be exactly +1 or -1.
Eigen::MatrixXd ideal_kernel(std::span<const int> labels);

void validate_labels(std::span<const int> labels);

// <K, yy^T>_F / sqrt(<K, K>_F <yy^T, yy^T>_F). DegenerateError for an all-zero K.
double alignment(const Eigen::MatrixXd& K, std::span<const int> labels);

// Gradient of the alignment of the exact fidelity kernel with respect to the
// embedding parameters. Every parameter is a rotation angle, so each kernel
// entry's derivative is taken by the two-term shift rule (+-pi/2) on both
// occurrences of the parameter (in U(x_i) and in U(x_j)).
struct AlignmentGradient {
    double value = 0.0;
    std::vector<double> gradient;
};

AlignmentGradient kta_gradient(const Embedding& embedding, const Eigen::MatrixXd& X, std::span<const int> labels,
                               const EstimatorConfig& estimator = {}, int jobs = 1);

// Same quantity by central differences; used to cross-check the shift rule.
std::vector<double> kta_gradient_fd(const Embedding& embedding, const Eigen::MatrixXd& X,
                                    std::span<const int> labels, double h = 1e-5);

struct AdamConfig {
    double learning_rate = 0.1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int max_iters = 200;
    std::uint64_t seed = 0;
    // Stop after this many consecutive iterations improving the best value by
    // less than min_improvement.
    int patience = 20;
    double min_improvement = 1e-6;

    void validate() const;
};

struct TrajectoryPoint {
    int iteration = 0;
    double alignment = 0.0;
    double grad_norm = 0.0;  // infinity norm
};

struct KtaResult {
    ParamVector params;           // best parameters seen
    double best_alignment = 0.0;  // alignment at `params`
    double initial_alignment = 0.0;
    std::vector<TrajectoryPoint> trajectory;
};

// Uniform on [0, 2*pi) from the seed.
ParamVector initial_params(const ArchitectureSpec& arch, std::uint64_t seed);

// Adam ascent on the alignment. Starts from `init` when given, otherwise from
// initial_params(arch, adam.seed).
KtaResult optimize_kta(const ArchitectureSpec& arch, const Eigen::MatrixXd& X, std::span<const int> labels,
                       const AdamConfig& adam = {}, const ScalingConfig& scaling = {},
                       const EstimatorConfig& estimator = {}, int jobs = 1,
                       const ParamVector* init = nullptr);

// iteration,alignment,grad_norm
void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryPoint>& trajectory);

}  // namespace qksvm
