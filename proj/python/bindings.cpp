#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <numbers>
#include <sstream>

#include "qksvm/alignment.hpp"
#include "qksvm/error.hpp"
#include "qksvm/grid_search.hpp"
#include "qksvm/kernel.hpp"
#include "qksvm/pca.hpp"
#include "qksvm/pipeline.hpp"
#include "qksvm/raster.hpp"
#include "qksvm/superpixel.hpp"
#include "qksvm/svm.hpp"
#include "qksvm/synth.hpp"

namespace py = pybind11;
using namespace qksvm;

namespace {

Embedding make_embedding(const std::string& arch, int n_qubits, std::optional<ParamVector> params, double w) {
    Embedding emb{parse_architecture(arch, n_qubits), {}, ScalingConfig{w}};
    emb.params = params ? *params : ParamVector(emb.arch.param_count(), 0.0);
    if (emb.params.size() != emb.arch.param_count())
        throw ShapeError("expected " + std::to_string(emb.arch.param_count()) + " parameters, got " +
                         std::to_string(emb.params.size()));
    return emb;
}

KernelSpec make_spec(const std::string& kind, const std::optional<std::string>& arch, std::optional<ParamVector> params,
                     std::uint64_t shots, std::uint64_t seed, double gamma, double w, int n_features) {
    EstimatorConfig est;
    est.kind = parse_estimator(kind);
    est.shots = shots;
    est.seed = seed;
    est.gamma = gamma;
    if (est.kind == EstimatorKind::Rbf) return KernelSpec::rbf(gamma);
    if (est.kind == EstimatorKind::Linear) return KernelSpec::linear();
    if (!arch) throw ArgumentError("quantum estimators need an architecture");
    return KernelSpec::quantum(make_embedding(*arch, n_features, std::move(params), w), est);
}

py::array_t<double> plane(const std::vector<float>& v, std::uint32_t w, std::uint32_t h) {
    py::array_t<double> out({static_cast<py::ssize_t>(h), static_cast<py::ssize_t>(w)});
    auto r = out.mutable_unchecked<2>();
    for (std::uint32_t y = 0; y < h; ++y)
        for (std::uint32_t x = 0; x < w; ++x) r(y, x) = v[std::size_t{y} * w + x];
    return out;
}

}  // namespace

PYBIND11_MODULE(_qksvm, m) {
    m.doc() = "Quantum-kernel SVM toolkit";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<CapacityError>(m, "CapacityError", base);
    py::register_exception<IndexError>(m, "IndexError", base);
    py::register_exception<ShapeError>(m, "ShapeError", base);
    py::register_exception<ArgumentError>(m, "ArgumentError", base);
    py::register_exception<ParseError>(m, "ParseError", base);
    py::register_exception<ValidationError>(m, "ValidationError", base);
    py::register_exception<NormalizationError>(m, "NormalizationError", base);
    py::register_exception<DegenerateError>(m, "DegenerateError", base);
    py::register_exception<UnsupportedError>(m, "UnsupportedError", base);
    py::register_exception<SamplingError>(m, "SamplingError", base);
    py::register_exception<FormatError>(m, "FormatError", base);

    m.def("param_count", [](const std::string& arch, int n) { return parse_architecture(arch, n).param_count(); },
          py::arg("arch"), py::arg("n_qubits"));

    m.def(
        "initial_params",
        [](const std::string& arch, int n, std::uint64_t seed) { return initial_params(parse_architecture(arch, n), seed); },
        py::arg("arch"), py::arg("n_qubits"), py::arg("seed"));

    m.def(
        "embed",
        [](const std::string& arch, const std::vector<double>& x, std::optional<ParamVector> params, double w) {
            const auto s = make_embedding(arch, static_cast<int>(x.size()), std::move(params), w).state(x);
            const auto a = s.amplitudes();
            return py::array_t<std::complex<double>>(static_cast<py::ssize_t>(a.size()), a.data());
        },
        py::arg("arch"), py::arg("x"), py::arg("params") = py::none(), py::arg("w") = std::numbers::pi,
        "Statevector U(x)|0...0> of the feature map.");

    m.def(
        "kernel_matrix",
        [](const Eigen::MatrixXd& X, const std::string& kind, std::optional<std::string> arch,
           std::optional<ParamVector> params, std::uint64_t shots, std::uint64_t seed, double gamma, double w, int jobs) {
            const auto spec = make_spec(kind, arch, std::move(params), shots, seed, gamma, w, static_cast<int>(X.cols()));
            return build_kernel_matrix(X, spec, jobs).values;
        },
        py::arg("X"), py::arg("kind") = "exact_inversion", py::arg("arch") = py::none(), py::arg("params") = py::none(),
        py::arg("shots") = 0, py::arg("seed") = 0, py::arg("gamma") = 1.0, py::arg("w") = std::numbers::pi,
        py::arg("jobs") = 1);

    m.def(
        "cross_kernel",
        [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const std::string& kind, std::optional<std::string> arch,
           std::optional<ParamVector> params, std::uint64_t shots, std::uint64_t seed, double gamma, double w, int jobs) {
            const auto spec = make_spec(kind, arch, std::move(params), shots, seed, gamma, w, static_cast<int>(A.cols()));
            return build_cross_kernel(A, B, spec, jobs);
        },
        py::arg("A"), py::arg("B"), py::arg("kind") = "exact_inversion", py::arg("arch") = py::none(),
        py::arg("params") = py::none(), py::arg("shots") = 0, py::arg("seed") = 0, py::arg("gamma") = 1.0,
        py::arg("w") = std::numbers::pi, py::arg("jobs") = 1);

    m.def("ideal_kernel", [](const std::vector<int>& y) { return ideal_kernel(y); }, py::arg("y"));
    m.def("alignment", [](const Eigen::MatrixXd& K, const std::vector<int>& y) { return alignment(K, y); },
          py::arg("K"), py::arg("y"));

    m.def(
        "kta_gradient",
        [](const Eigen::MatrixXd& X, const std::vector<int>& y, const std::string& arch, const ParamVector& params,
           double w) {
            const auto g = kta_gradient(make_embedding(arch, static_cast<int>(X.cols()), params, w), X, y);
            return py::make_tuple(g.value, g.gradient);
        },
        py::arg("X"), py::arg("y"), py::arg("arch"), py::arg("params"), py::arg("w") = std::numbers::pi,
        "(alignment, gradient) of the exact fidelity kernel.");

    m.def(
        "optimize_kta",
        [](const Eigen::MatrixXd& X, const std::vector<int>& y, const std::string& arch, double learning_rate,
           int max_iters, int patience, std::uint64_t seed, std::optional<ParamVector> init, double w, int jobs) {
            AdamConfig adam;
            adam.learning_rate = learning_rate;
            adam.max_iters = max_iters;
            adam.patience = patience;
            adam.seed = seed;
            const auto spec = parse_architecture(arch, static_cast<int>(X.cols()));
            const auto r = optimize_kta(spec, X, y, adam, ScalingConfig{w}, {}, jobs, init ? &*init : nullptr);
            py::list traj;
            for (const auto& p : r.trajectory) traj.append(py::make_tuple(p.iteration, p.alignment, p.grad_norm));
            py::dict out;
            out["params"] = r.params;
            out["initial_alignment"] = r.initial_alignment;
            out["best_alignment"] = r.best_alignment;
            out["trajectory"] = traj;
            return out;
        },
        py::arg("X"), py::arg("y"), py::arg("arch"), py::arg("learning_rate") = 0.1, py::arg("max_iters") = 200,
        py::arg("patience") = 20, py::arg("seed") = 0, py::arg("init") = py::none(), py::arg("w") = std::numbers::pi,
        py::arg("jobs") = 1);

    py::class_<SvmModel>(m, "SvmModel")
        .def_readonly("alphas", &SvmModel::alphas)
        .def_readonly("bias", &SvmModel::bias)
        .def_readonly("support_indices", &SvmModel::support_indices)
        .def_readonly("labels", &SvmModel::labels)
        .def_readonly("C", &SvmModel::C)
        .def_readonly("iterations", &SvmModel::iterations)
        .def_readonly("converged", &SvmModel::converged)
        .def("decision_values", [](const SvmModel& s, const Eigen::MatrixXd& K) { return decision_values(s, K); },
             py::arg("K_test"))
        .def("predict", [](const SvmModel& s, const Eigen::MatrixXd& K) { return predict(s, K); }, py::arg("K_test"))
        .def("to_json", [](const SvmModel& s) { return model_to_json(s); })
        .def_static("from_json", [](const std::string& t) { return model_from_json(t); });

    m.def(
        "train_svm",
        [](const Eigen::MatrixXd& K, const std::vector<int>& y, double C, double tol) {
            TrainConfig cfg;
            cfg.C = C;
            cfg.tol = tol;
            return train_dual(K, y, cfg);
        },
        py::arg("K"), py::arg("y"), py::arg("C") = 1.0, py::arg("tol") = 1e-3,
        "SMO on a precomputed training kernel.");

    m.def("dual_objective",
          [](const std::vector<double>& a, const std::vector<int>& y, const Eigen::MatrixXd& K) {
              return dual_objective(a, y, K);
          },
          py::arg("alphas"), py::arg("y"), py::arg("K"));

    m.def("default_c_grid", &default_c_grid);
    m.def("default_gamma_grid", &default_gamma_grid);
    m.def(
        "grid_search_precomputed",
        [](const Eigen::MatrixXd& K_train, const std::vector<int>& y_train, const Eigen::MatrixXd& K_val,
           const std::vector<int>& y_val, std::optional<std::vector<double>> c_grid) {
            const auto grid = c_grid ? *c_grid : default_c_grid();
            const auto r = grid_search_precomputed(K_train, y_train, K_val, y_val, grid);
            return py::make_tuple(r.C, r.accuracy);
        },
        py::arg("K_train"), py::arg("y_train"), py::arg("K_val"), py::arg("y_val"), py::arg("c_grid") = py::none(),
        "(best C, validation accuracy).");

    py::class_<RasterPatch>(m, "RasterPatch")
        .def_readonly("width", &RasterPatch::width)
        .def_readonly("height", &RasterPatch::height)
        .def_property_readonly("bands",
                               [](const RasterPatch& p) {
                                   py::list out;
                                   for (const auto& b : p.bands) out.append(plane(b, p.width, p.height));
                                   return out;
                               })
        .def_property_readonly("ground_truth",
                               [](const RasterPatch& p) {
                                   py::array_t<std::uint8_t> out(
                                       {static_cast<py::ssize_t>(p.height), static_cast<py::ssize_t>(p.width)});
                                   std::copy(p.ground_truth.begin(), p.ground_truth.end(), out.mutable_data());
                                   return out;
                               })
        .def("__eq__", [](const RasterPatch& a, const RasterPatch& b) { return a == b; })
        .def("to_bytes", [](const RasterPatch& p) { return py::bytes(encode_qpr(p)); })
        .def_static("from_bytes", [](const py::bytes& b) { return decode_qpr(std::string(b)); });

    m.def(
        "generate_scene",
        [](std::uint32_t width, std::uint32_t height, double cloud_fraction, std::uint64_t seed) {
            SceneSpec s;
            s.width = width;
            s.height = height;
            s.cloud_fraction = cloud_fraction;
            s.seed = seed;
            return generate_scene(s);
        },
        py::arg("width") = 384, py::arg("height") = 384, py::arg("cloud_fraction") = 0.5, py::arg("seed") = 0);
    m.def("read_qpr", &read_qpr, py::arg("path"));
    m.def("write_qpr", &write_qpr, py::arg("path"), py::arg("patch"));

    m.def(
        "reduce_patch",
        [](const RasterPatch& patch, int n_segments) {
            SlicConfig cfg;
            cfg.n_segments = n_segments;
            const auto rows = reduce_patch(patch, cfg);
            Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), kFeatureCount);
            std::vector<int> y;
            std::vector<std::size_t> counts;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                for (int c = 0; c < kFeatureCount; ++c)
                    X(static_cast<Eigen::Index>(i), c) = rows[i].features[static_cast<std::size_t>(c)];
                y.push_back(rows[i].label);
                counts.push_back(rows[i].pixel_count);
            }
            return py::make_tuple(X, y, counts);
        },
        py::arg("patch"), py::arg("n_segments") = 200, "(features, labels, pixel_counts) per superpixel.");
    m.def("feature_columns", &superpixel_csv_columns);

    m.def(
        "pca_fit_transform",
        [](const Eigen::MatrixXd& X, int k) {
            const auto model = pca_fit(X, k);
            return pca_transform(model, X);
        },
        py::arg("X"), py::arg("k"), "Projection onto k components, min-max scaled to [0, 1].");

    m.def(
        "run_pipeline",
        [](const std::string& config_path, int jobs) {
            const auto cfg = read_run_config(config_path);
            std::ostringstream log;
            const auto r = run_pipeline(cfg, jobs, log);
            py::dict out;
            out["run_dir"] = r.run_dir.string();
            out["cells"] = r.cells;
            out["cached"] = r.cached;
            out["completed"] = r.completed;
            out["failed"] = r.failed;
            out["log"] = log.str();
            return out;
        },
        py::arg("config_path"), py::arg("jobs") = 1);
}
