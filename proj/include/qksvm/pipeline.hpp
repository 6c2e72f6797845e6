#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qksvm/experiment.hpp"
#include "qksvm/synth.hpp"

namespace qksvm {

inline constexpr int kRunConfigSchema = 1;

// Scenes generated on the fly instead of read from disk.
struct SyntheticSource {
    int train = 8;
    int test = 4;
    std::uint32_t width = 384;
    std::uint32_t height = 384;
    double cloud_fraction = 0.5;
    std::uint64_t seed = 0;
};

struct RunConfig {
    int schema_version = kRunConfigSchema;
    // Either explicit scene files (or directories of *.qpr) or a synthetic source.
    std::vector<std::string> train_scenes;
    std::vector<std::string> test_scenes;
    std::optional<SyntheticSource> synthetic;
    std::string output_dir = "runs";

    std::vector<std::string> models{"Lin2", "RBF2", "S2", "WS2"};
    std::vector<int> sizes{10, 20, 40, 80, 160, 320, 640, 1280};
    int repeats = 20;
    std::uint64_t seed = 0;
    std::vector<double> c_grid;
    std::vector<double> gamma_grid;
    int validation_min = 300;
    double svm_tol = 1e-3;
    SlicConfig slic;
    AdamConfig adam;
    std::string estimator = "exact_inversion";
    std::uint64_t shots = 0;
    std::string kta_scope = "per_sample";  // per_sample | global

    // Throws ArgumentError, ParseError or ValidationError.
    void validate() const;
    ExperimentPlan plan() const;
};

// Unknown keys and wrong types are rejected with ArgumentError. Relative
// paths are resolved against `base_dir`.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir);
RunConfig read_run_config(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& cfg);

// 16 hex digits naming the run directory; output_dir does not take part.
std::string run_config_hash(const RunConfig& cfg);
std::filesystem::path run_directory(const RunConfig& cfg);

// Expands directories into their sorted *.qpr files.
std::vector<std::filesystem::path> expand_scene_paths(const std::vector<std::string>& entries);

// Training pool and prepared test scenes described by a config.
struct SceneSet {
    std::vector<Superpixel> pool;
    std::vector<TestScene> test;
};
SceneSet load_scene_set(const RunConfig& cfg, int jobs, std::ostream& log);

std::string cell_name(const CellKey& key, const ExperimentPlan& plan);

struct PipelineReport {
    std::filesystem::path run_dir;
    std::size_t cells = 0;
    std::size_t cached = 0;
    std::size_t completed = 0;
    std::size_t failed = 0;
};

// Runs every cell not already completed in the run directory and writes
// results.csv, aggregates.json, plot_data.csv and manifest.json.
PipelineReport run_pipeline(const RunConfig& cfg, int jobs, std::ostream& log);

}  // namespace qksvm
