#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qksvm/alignment.hpp"
#include "qksvm/kernel.hpp"
#include "qksvm/metrics.hpp"
#include "qksvm/pca.hpp"
#include "qksvm/raster.hpp"
#include "qksvm/slic.hpp"
#include "qksvm/superpixel.hpp"
#include "qksvm/svm.hpp"

namespace qksvm {

enum class ModelKind { Linear, Rbf, Quantum };

// "Lin2", "RBF2", "S2", "WS2", "ES3", "WSWS2": kernel family or architecture,
// then the number of PCA components (which is also the qubit count).
struct ModelSpec {
    std::string name;
    ModelKind kind = ModelKind::Quantum;
    std::string architecture;  // quantum models only
    int components = 2;

    bool has_variational_layers() const;
};

ModelSpec parse_model_spec(std::string_view name);

struct ExperimentPlan {
    std::vector<int> sizes{10, 20, 40, 80, 160, 320, 640, 1280};
    int repeats = 20;
    std::vector<ModelSpec> models;
    std::uint64_t base_seed = 0;
    std::vector<double> c_grid;      // empty: default_c_grid()
    std::vector<double> gamma_grid;  // empty: default_gamma_grid()
    int validation_min = 300;
    AdamConfig adam;  // seed is replaced per cell
    ScalingConfig scaling;
    EstimatorConfig estimator;  // kind and shots for the quantum kernels
    double svm_tol = 1e-3;
    // Per-model parameters used instead of per-sample alignment training.
    std::map<std::string, ParamVector> fixed_params;

    void validate() const;
};

// A held-out scene reduced to superpixels, kept with the pixel map so that
// predictions can be scored per pixel.
struct TestScene {
    std::string name;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    Eigen::MatrixXd features;              // superpixels x 24
    std::vector<int> pixel_truth;          // +1 cloud, -1 clear
    std::vector<int> pixel_superpixel;     // row of `features`, -1 for margin pixels
};

TestScene prepare_test_scene(const RasterPatch& patch, std::string name, const SlicConfig& slic = {});

// Per-pixel confusion counts of a trained model on one scene. Superpixels are
// projected with `pca` (clipped to the training range) and scored against the
// projected training rows `train_projected`; margin pixels take the
// prediction of the all-zero feature vector.
ConfusionCounts evaluate_scene(const SvmModel& model, const KernelSpec& kernel, const PcaModel& pca,
                               const Eigen::MatrixXd& train_projected, const TestScene& scene, int jobs = 1);

// Kernel described by a stored model. Shot-based estimators take their shot
// count and seed from `estimator`.
KernelSpec kernel_from_descriptor(const KernelDescriptor& d, const EstimatorConfig& estimator = {});

struct CellKey {
    int N = 0;
    int repeat = 0;
    std::size_t model = 0;  // index into plan.models
};

std::uint64_t cell_seed(std::uint64_t base, int N, int repeat);

// One evaluation of one trained model on one test scene.
struct ResultRow {
    std::string model;
    int N = 0;
    int repeat = 0;
    std::string scene;
    std::uint64_t seed = 0;
    double C = 0.0;
    std::optional<double> gamma;
    std::optional<double> alignment_initial;
    std::optional<double> alignment_final;
    double validation_accuracy = 0.0;
    std::size_t n_support = 0;
    ConfusionCounts counts;
    Metrics metrics;
};

// Everything a cell produced besides its rows; used for run artifacts.
struct CellArtifacts {
    std::vector<ResultRow> rows;
    ParamVector params;          // tuned parameters (quantum models with layers)
    std::vector<TrajectoryPoint> trajectory;
    KernelMatrix train_kernel;
    std::string model_json;
    std::string pca_json;
};

// Sample, PCA, optional KTA, grid search, final training and evaluation on
// every scene. Deterministic in (plan.base_seed, N, repeat).
CellArtifacts run_cell(const ExperimentPlan& plan, const CellKey& key, std::span<const Superpixel> pool,
                       std::span<const TestScene> scenes, int jobs = 1);

// Same cell from an explicit cell seed, as recorded in a result row.
CellArtifacts run_cell(const ExperimentPlan& plan, const CellKey& key, std::uint64_t seed,
                       std::span<const Superpixel> pool, std::span<const TestScene> scenes, int jobs = 1);

// Cells in (N, repeat, model) order.
std::vector<CellKey> plan_cells(const ExperimentPlan& plan);

// Runs every cell over a worker pool; rows come back ordered by
// (N, repeat, model, scene).
std::vector<ResultRow> run_experiment(const ExperimentPlan& plan, std::span<const Superpixel> pool,
                                      std::span<const TestScene> scenes, int jobs = 1);

std::string result_csv_header();
std::string result_csv_line(const ResultRow& row);
// Inverse of result_csv_line; FormatError on malformed lines.
ResultRow parse_result_csv_line(std::string_view line);
void write_results_csv(const std::string& path, std::span<const ResultRow> rows);

struct Summary {
    std::optional<double> mean;
    std::optional<double> std;  // sample std, needs two values
    std::size_t count = 0;
};

Summary summarize(std::span<const double> values);

// Per (model, N): scene-averaged metric per repeat, then mean and std across repeats.
struct Aggregate {
    std::string model;
    int N = 0;
    int repeats = 0;
    Summary accuracy, jaccard, precision, recall, specificity;
};

std::vector<Aggregate> aggregate(std::span<const ResultRow> rows);
std::string aggregates_to_json(std::span<const Aggregate> aggs);
// model,N,mean_accuracy,std_accuracy
std::string plot_data_csv(std::span<const Aggregate> aggs);

}  // namespace qksvm
