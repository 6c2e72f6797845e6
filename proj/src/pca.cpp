#include "qksvm/pca.hpp"

#include <sstream>
#include <vector>

#include "json.hpp"
#include "qksvm/error.hpp"

namespace qksvm {

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_std(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

PcaModel pca_fit(const Eigen::MatrixXd& X, int k) {
    const Eigen::Index n = X.rows(), d = X.cols();
    if (k < 1 || k >= n || k > d) {
        std::ostringstream msg;
        msg << "PCA with k=" << k << " needs 1 <= k < N (" << n << ") and k <= d (" << d << ")";
        throw ValidationError(msg.str());
    }
    if (!X.allFinite()) throw ValidationError("PCA input has non-finite values");
    PcaModel m;
    m.mean = X.colwise().mean().transpose();
    const Eigen::MatrixXd centered = X.rowwise() - m.mean.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw DegenerateError("covariance eigendecomposition failed");
    // Eigen returns ascending eigenvalues; take the last k in reverse.
    const Eigen::VectorXd values = eig.eigenvalues().cwiseMax(0.0);
    const double total = values.sum();
    m.components.resize(k, d);
    m.explained_variance.resize(k);
    m.explained_variance_ratio.resize(k);
    for (int c = 0; c < k; ++c) {
        const Eigen::Index src = d - 1 - c;
        Eigen::VectorXd axis = eig.eigenvectors().col(src);
        Eigen::Index arg;
        axis.cwiseAbs().maxCoeff(&arg);
        if (axis(arg) < 0) axis = -axis;
        m.components.row(c) = axis.transpose();
        m.explained_variance(c) = values(src);
        m.explained_variance_ratio(c) = total > 0.0 ? values(src) / total : 0.0;
    }
    const Eigen::MatrixXd z = pca_project(m, X);
    m.scale_min = z.colwise().minCoeff().transpose();
    m.scale_max = z.colwise().maxCoeff().transpose();
    return m;
}

Eigen::MatrixXd pca_project(const PcaModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() != model.dim()) throw ShapeError("PCA input width does not match the model");
    return (X.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd z = pca_project(model, X);
    for (int c = 0; c < model.k(); ++c) {
        const double range = model.scale_max(c) - model.scale_min(c);
        if (range > 0.0)
            z.col(c) = (z.col(c).array() - model.scale_min(c)) / range;
        else
            z.col(c).setZero();
    }
    return z;
}

Eigen::MatrixXd pca_inverse_project(const PcaModel& model, const Eigen::MatrixXd& Z) {
    if (Z.cols() != model.k()) throw ShapeError("PCA scores width does not match the model");
    return (Z * model.components).rowwise() + model.mean.transpose();
}

Eigen::MatrixXd pca_inverse_transform(const PcaModel& model, const Eigen::MatrixXd& Z) {
    if (Z.cols() != model.k()) throw ShapeError("PCA scores width does not match the model");
    Eigen::MatrixXd raw = Z;
    for (int c = 0; c < model.k(); ++c) {
        const double range = model.scale_max(c) - model.scale_min(c);
        raw.col(c) = raw.col(c).array() * range + model.scale_min(c);
    }
    return pca_inverse_project(model, raw);
}

std::string pca_to_json(const PcaModel& model) {
    nlohmann::json j;
    j["mean"] = to_std(model.mean);
    std::vector<std::vector<double>> comps;
    for (int c = 0; c < model.k(); ++c) comps.push_back(to_std(model.components.row(c).transpose()));
    j["components"] = comps;
    j["explained_variance"] = to_std(model.explained_variance);
    j["explained_variance_ratio"] = to_std(model.explained_variance_ratio);
    j["scale_min"] = to_std(model.scale_min);
    j["scale_max"] = to_std(model.scale_max);
    return j.dump(2);
}

PcaModel pca_from_json(std::string_view text) {
    PcaModel m;
    try {
        const auto j = nlohmann::json::parse(text);
        m.mean = from_std(j.at("mean").get<std::vector<double>>());
        const auto comps = j.at("components").get<std::vector<std::vector<double>>>();
        m.components.resize(static_cast<Eigen::Index>(comps.size()), m.mean.size());
        for (std::size_t c = 0; c < comps.size(); ++c) {
            if (comps[c].size() != static_cast<std::size_t>(m.mean.size())) throw FormatError("PCA component width mismatch");
            m.components.row(static_cast<Eigen::Index>(c)) = from_std(comps[c]).transpose();
        }
        m.explained_variance = from_std(j.at("explained_variance").get<std::vector<double>>());
        m.explained_variance_ratio = from_std(j.at("explained_variance_ratio").get<std::vector<double>>());
        m.scale_min = from_std(j.at("scale_min").get<std::vector<double>>());
        m.scale_max = from_std(j.at("scale_max").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed PCA model: ") + e.what());
    }
    const auto k = m.components.rows();
    if (m.scale_min.size() != k || m.scale_max.size() != k || m.explained_variance_ratio.size() != k)
        throw FormatError("PCA model vectors disagree in length");
    return m;
}

}  // namespace qksvm
