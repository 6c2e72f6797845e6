#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qksvm/kernel.hpp"
#include "qksvm/svm.hpp"

namespace qksvm {

// 0.01, 3.01, ..., 147.01 (50 points).
std::vector<double> default_c_grid();
// 0.01, 0.21, ..., 9.81 (50 points).
std::vector<double> default_gamma_grid();

struct GridSearchResult {
    double C = 0.0;
    std::optional<double> gamma;
    double accuracy = 0.0;  // validation accuracy of the chosen cell
    std::size_t cells = 0;
};

// Kernel to use for a given gamma (nullopt when the grid has no gamma axis).
using KernelFactory = std::function<KernelSpec(std::optional<double> gamma)>;

// Trains one model per (C, gamma) cell on the training rows and keeps the best
// validation accuracy; ties go to the smaller C, then the smaller gamma.
// An empty gamma grid means the kernel has no gamma.
GridSearchResult grid_search(const Eigen::MatrixXd& X_train, std::span<const int> y_train,
                             const Eigen::MatrixXd& X_val, std::span<const int> y_val, const KernelFactory& kernel,
                             std::span<const double> c_grid, std::span<const double> gamma_grid,
                             const TrainConfig& base = {}, int jobs = 1);

// Same search over precomputed blocks for a single kernel.
GridSearchResult grid_search_precomputed(const Eigen::MatrixXd& K_train, std::span<const int> y_train,
                                         const Eigen::MatrixXd& K_val, std::span<const int> y_val,
                                         std::span<const double> c_grid, const TrainConfig& base = {},
                                         int jobs = 1);

}  // namespace qksvm
