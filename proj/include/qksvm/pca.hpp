#pragma once

#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace qksvm {

// Top-k principal axes of the sample covariance plus a per-component min-max
// scaler fitted on the training projections.
struct PcaModel {
    Eigen::VectorXd mean;                // d
    Eigen::MatrixXd components;          // k x d, orthonormal rows
    Eigen::VectorXd explained_variance;  // k
    Eigen::VectorXd explained_variance_ratio;
    Eigen::VectorXd scale_min;  // k
    Eigen::VectorXd scale_max;  // k

    int k() const { return static_cast<int>(components.rows()); }
    int dim() const { return static_cast<int>(components.cols()); }
};

// ValidationError unless 1 <= k < N and k <= d.
PcaModel pca_fit(const Eigen::MatrixXd& X, int k);

// Centered projection onto the components (N x k).
Eigen::MatrixXd pca_project(const PcaModel& model, const Eigen::MatrixXd& X);
// Projection followed by the stored min-max scaling, so training data lands
// in [0, 1]. Constant components map to 0.
Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& X);
// Inverse of pca_project.
Eigen::MatrixXd pca_inverse_project(const PcaModel& model, const Eigen::MatrixXd& Z);
// Inverse of pca_transform.
Eigen::MatrixXd pca_inverse_transform(const PcaModel& model, const Eigen::MatrixXd& Z);

std::string pca_to_json(const PcaModel& model);
PcaModel pca_from_json(std::string_view text);

}  // namespace qksvm
