#include "qksvm/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qksvm/error.hpp"
#include "qksvm/parallel.hpp"
#include "qksvm/pca.hpp"
#include "qksvm/random.hpp"
#include "qksvm/sampling.hpp"

namespace qksvm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ArgumentError(where + " must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ArgumentError("unknown key \"" + k + "\" in " + where);
}

template <class T>
void take(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ArgumentError(std::string("config key \"") + key + "\" has the wrong type");
    }
}

std::string resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return (path.is_absolute() ? path : base / path).lexically_normal().string();
}

void write_text(const fs::path& path, const std::string& text) {
    // Write then rename so a crash never leaves a half-written file behind.
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw FormatError("cannot open " + tmp.string() + " for writing");
        out << text;
        if (!out) throw FormatError("failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string hex16(std::uint64_t v) {
    std::ostringstream o;
    o << std::hex << std::setw(16) << std::setfill('0') << v;
    return o.str();
}

json config_json(const RunConfig& c, bool with_output) {
    json j;
    j["schema_version"] = c.schema_version;
    if (!c.train_scenes.empty() || !c.synthetic) j["train_scenes"] = c.train_scenes;
    if (!c.test_scenes.empty() || !c.synthetic) j["test_scenes"] = c.test_scenes;
    if (c.synthetic) {
        const auto& s = *c.synthetic;
        j["synthetic"] = {{"train", s.train},   {"test", s.test},
                          {"width", s.width},   {"height", s.height},
                          {"cloud_fraction", s.cloud_fraction}, {"seed", s.seed}};
    }
    if (with_output) j["output_dir"] = c.output_dir;
    j["models"] = c.models;
    j["sizes"] = c.sizes;
    j["repeats"] = c.repeats;
    j["seed"] = c.seed;
    j["c_grid"] = c.c_grid;
    j["gamma_grid"] = c.gamma_grid;
    j["validation_min"] = c.validation_min;
    j["svm_tol"] = c.svm_tol;
    j["slic"] = {{"n_segments", c.slic.n_segments},
                 {"sigma", c.slic.sigma},
                 {"compactness", c.slic.compactness},
                 {"iterations", c.slic.iterations}};
    j["adam"] = {{"learning_rate", c.adam.learning_rate}, {"beta1", c.adam.beta1},
                 {"beta2", c.adam.beta2},                 {"epsilon", c.adam.epsilon},
                 {"max_iters", c.adam.max_iters},         {"patience", c.adam.patience},
                 {"min_improvement", c.adam.min_improvement}};
    j["estimator"] = {{"kind", c.estimator}, {"shots", c.shots}};
    j["kta_scope"] = c.kta_scope;
    return j;
}

}  // namespace

SceneSet load_scene_set(const RunConfig& cfg, int jobs, std::ostream& log) {
    std::vector<std::function<RasterPatch()>> train, test;
    std::vector<std::string> test_names;
    if (cfg.synthetic) {
        const auto s = *cfg.synthetic;
        auto gen = [s](std::uint64_t a, int i) {
            return [s, a, i] {
                SceneSpec spec;
                spec.width = s.width;
                spec.height = s.height;
                spec.cloud_fraction = s.cloud_fraction;
                spec.seed = derive_seed(s.seed, a, static_cast<std::uint64_t>(i));
                return generate_scene(spec);
            };
        };
        for (int i = 0; i < s.train; ++i) train.push_back(gen(0, i));
        for (int i = 0; i < s.test; ++i) {
            test.push_back(gen(1, i));
            test_names.push_back("synthetic_test_" + std::to_string(i));
        }
    }
    for (const auto& p : expand_scene_paths(cfg.train_scenes)) train.push_back([p] { return read_qpr(p.string()); });
    for (const auto& p : expand_scene_paths(cfg.test_scenes)) {
        test.push_back([p] { return read_qpr(p.string()); });
        test_names.push_back(p.stem().string());
    }
    if (train.empty()) throw ValidationError("no training scenes");
    if (test.empty()) throw ValidationError("no test scenes");

    std::vector<std::vector<Superpixel>> reduced(train.size());
    parallel_for(train.size(), jobs, [&](std::size_t i) { reduced[i] = reduce_patch(train[i](), cfg.slic); });
    SceneSet out;
    for (auto& r : reduced) out.pool.insert(out.pool.end(), r.begin(), r.end());
    out.test.resize(test.size());
    parallel_for(test.size(), jobs,
                 [&](std::size_t i) { out.test[i] = prepare_test_scene(test[i](), test_names[i], cfg.slic); });
    log << "training pool: " << out.pool.size() << " superpixels from " << train.size() << " scenes; "
        << out.test.size() << " test scenes\n";
    return out;
}

namespace {

fs::path cell_dir(const fs::path& run, const std::string& name) { return run / "cells" / name; }

std::vector<ResultRow> read_cell_rows(const fs::path& dir) {
    std::istringstream in(read_text(dir / "rows.csv"));
    std::string line;
    std::getline(in, line);
    if (line != result_csv_header()) throw FormatError("unexpected header in " + (dir / "rows.csv").string());
    std::vector<ResultRow> rows;
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(parse_result_csv_line(line));
    return rows;
}

void write_cell(const fs::path& dir, const CellArtifacts& a, const ExperimentPlan& plan, const CellKey& key) {
    fs::create_directories(dir);
    const auto& m = plan.models[key.model];
    write_qkm((dir / "kernel.qkm").string(), a.train_kernel);
    write_text(dir / "model.json", a.model_json);
    write_text(dir / "pca.json", a.pca_json);
    if (!a.params.empty())
        write_text(dir / "params.json", params_to_json(parse_architecture(m.architecture, m.components), a.params));
    if (!a.trajectory.empty()) write_trajectory_csv((dir / "trajectory.csv").string(), a.trajectory);
    // rows.csv goes last: its presence marks the cell complete.
    std::string rows = result_csv_header() + "\n";
    for (const auto& r : a.rows) rows += result_csv_line(r) + "\n";
    write_text(dir / "rows.csv", rows);
}

// One tuning run per variational model on a sample of the largest size.
std::map<std::string, ParamVector> global_params(const RunConfig& cfg, const ExperimentPlan& plan,
                                                 std::span<const Superpixel> pool, const fs::path& run, int jobs) {
    std::map<std::string, ParamVector> out;
    const int N = plan.sizes.back();
    const std::uint64_t seed = derive_seed(cfg.seed, fnv1a64("global-kta"));
    for (const auto& m : plan.models) {
        if (!m.has_variational_layers()) continue;
        const auto sample = balanced_sample(pool, N, seed);
        const auto pca = pca_fit(sample.X, m.components);
        const auto arch = parse_architecture(m.architecture, m.components);
        AdamConfig adam = plan.adam;
        adam.seed = derive_seed(seed, 3);
        const auto r = optimize_kta(arch, pca_transform(pca, sample.X), sample.y, adam, plan.scaling, {}, jobs);
        write_text(run / ("global_params_" + m.name + ".json"), params_to_json(arch, r.params));
        out[m.name] = r.params;
    }
    return out;
}

}  // namespace

void RunConfig::validate() const {
    if (schema_version != kRunConfigSchema)
        throw ArgumentError("unsupported schema_version " + std::to_string(schema_version));
    if (kta_scope != "per_sample" && kta_scope != "global")
        throw ArgumentError("kta_scope must be \"per_sample\" or \"global\"");
    if (synthetic) {
        if (synthetic->train < 1 || synthetic->test < 1) throw ValidationError("synthetic source needs train and test scenes");
        if (!(synthetic->cloud_fraction >= 0.0 && synthetic->cloud_fraction <= 1.0))
            throw ValidationError("synthetic cloud_fraction must lie in [0, 1]");
        if (synthetic->width == 0 || synthetic->height == 0) throw ValidationError("synthetic scene size must be positive");
    } else if (train_scenes.empty() || test_scenes.empty()) {
        throw ArgumentError("config needs train_scenes and test_scenes, or a synthetic block");
    }
    slic.validate();
    plan().validate();
}

ExperimentPlan RunConfig::plan() const {
    ExperimentPlan p;
    p.sizes = sizes;
    p.repeats = repeats;
    for (const auto& m : models) p.models.push_back(parse_model_spec(m));
    p.base_seed = seed;
    p.c_grid = c_grid;
    p.gamma_grid = gamma_grid;
    p.validation_min = validation_min;
    p.adam = adam;
    p.svm_tol = svm_tol;
    p.estimator.kind = parse_estimator(estimator);
    p.estimator.shots = shots;
    return p;
}

RunConfig parse_run_config(std::string_view text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ArgumentError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j,
               {"schema_version", "train_scenes", "test_scenes", "synthetic", "output_dir", "models", "sizes", "repeats",
                "seed", "c_grid", "gamma_grid", "validation_min", "svm_tol", "slic", "adam", "estimator", "kta_scope"},
               "config");
    RunConfig c;
    if (!j.contains("schema_version")) throw ArgumentError("config is missing schema_version");
    take(j, "schema_version", c.schema_version);
    take(j, "train_scenes", c.train_scenes);
    take(j, "test_scenes", c.test_scenes);
    take(j, "output_dir", c.output_dir);
    take(j, "models", c.models);
    take(j, "sizes", c.sizes);
    take(j, "repeats", c.repeats);
    take(j, "seed", c.seed);
    take(j, "c_grid", c.c_grid);
    take(j, "gamma_grid", c.gamma_grid);
    take(j, "validation_min", c.validation_min);
    take(j, "svm_tol", c.svm_tol);
    take(j, "kta_scope", c.kta_scope);
    if (j.contains("synthetic")) {
        const auto& s = j["synthetic"];
        check_keys(s, {"train", "test", "width", "height", "cloud_fraction", "seed"}, "synthetic");
        SyntheticSource src;
        take(s, "train", src.train);
        take(s, "test", src.test);
        take(s, "width", src.width);
        take(s, "height", src.height);
        take(s, "cloud_fraction", src.cloud_fraction);
        take(s, "seed", src.seed);
        c.synthetic = src;
    }
    if (j.contains("slic")) {
        const auto& s = j["slic"];
        check_keys(s, {"n_segments", "sigma", "compactness", "iterations"}, "slic");
        take(s, "n_segments", c.slic.n_segments);
        take(s, "sigma", c.slic.sigma);
        take(s, "compactness", c.slic.compactness);
        take(s, "iterations", c.slic.iterations);
    }
    if (j.contains("adam")) {
        const auto& a = j["adam"];
        check_keys(a, {"learning_rate", "beta1", "beta2", "epsilon", "max_iters", "patience", "min_improvement"}, "adam");
        take(a, "learning_rate", c.adam.learning_rate);
        take(a, "beta1", c.adam.beta1);
        take(a, "beta2", c.adam.beta2);
        take(a, "epsilon", c.adam.epsilon);
        take(a, "max_iters", c.adam.max_iters);
        take(a, "patience", c.adam.patience);
        take(a, "min_improvement", c.adam.min_improvement);
    }
    if (j.contains("estimator")) {
        const auto& e = j["estimator"];
        check_keys(e, {"kind", "shots"}, "estimator");
        take(e, "kind", c.estimator);
        take(e, "shots", c.shots);
    }
    for (auto& p : c.train_scenes) p = resolve(base_dir, p);
    for (auto& p : c.test_scenes) p = resolve(base_dir, p);
    c.output_dir = resolve(base_dir, c.output_dir);
    return c;
}

RunConfig read_run_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot read config " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return parse_run_config(s.str(), fs::absolute(path).parent_path());
}

std::string run_config_to_json(const RunConfig& cfg) { return config_json(cfg, true).dump(2) + "\n"; }

std::string run_config_hash(const RunConfig& cfg) { return hex16(fnv1a64(config_json(cfg, false).dump())); }

fs::path run_directory(const RunConfig& cfg) { return fs::path(cfg.output_dir) / ("run-" + run_config_hash(cfg)); }

std::vector<fs::path> expand_scene_paths(const std::vector<std::string>& entries) {
    std::vector<fs::path> out;
    for (const auto& e : entries) {
        const fs::path p(e);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& f : fs::directory_iterator(p))
                if (f.is_regular_file() && f.path().extension() == ".qpr") found.push_back(f.path());
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else {
            out.push_back(p);
        }
    }
    return out;
}

std::string cell_name(const CellKey& key, const ExperimentPlan& plan) {
    return "N" + std::to_string(key.N) + "_r" + std::to_string(key.repeat) + "_" + plan.models[key.model].name;
}

PipelineReport run_pipeline(const RunConfig& cfg, int jobs, std::ostream& log) {
    cfg.validate();
    if (jobs <= 0) jobs = default_jobs();
    ExperimentPlan plan = cfg.plan();
    PipelineReport rep;
    rep.run_dir = run_directory(cfg);
    fs::create_directories(rep.run_dir / "cells");
    write_text(rep.run_dir / "config.json", run_config_to_json(cfg));

    const auto cells = plan_cells(plan);
    rep.cells = cells.size();
    std::vector<std::optional<std::vector<ResultRow>>> rows(cells.size());
    std::vector<std::string> errors(cells.size());
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto dir = cell_dir(rep.run_dir, cell_name(cells[i], plan));
        if (fs::exists(dir / "rows.csv")) {
            rows[i] = read_cell_rows(dir);
            ++rep.cached;
        } else {
            pending.push_back(i);
        }
    }

    auto write_manifest = [&](bool finished) {
        json m;
        m["config_hash"] = run_config_hash(cfg);
        m["finished"] = finished;
        json list = json::array();
        for (std::size_t i = 0; i < cells.size(); ++i) {
            json c{{"name", cell_name(cells[i], plan)},
                   {"N", cells[i].N},
                   {"repeat", cells[i].repeat},
                   {"model", plan.models[cells[i].model].name},
                   {"seed", cell_seed(plan.base_seed, cells[i].N, cells[i].repeat)},
                   {"status", rows[i] ? "complete" : errors[i].empty() ? "incomplete" : "failed"}};
            if (!errors[i].empty()) c["error"] = errors[i];
            list.push_back(c);
        }
        m["cells"] = list;
        write_text(rep.run_dir / "manifest.json", m.dump(2) + "\n");
    };
    write_manifest(false);

    if (pending.empty()) {
        log << "all cells cached\n";
    } else {
        const SceneSet scenes = load_scene_set(cfg, jobs, log);
        if (cfg.kta_scope == "global") plan.fixed_params = global_params(cfg, plan, scenes.pool, rep.run_dir, jobs);
        const int inner = std::max(1, jobs / static_cast<int>(pending.size()));
        std::mutex mu;
        parallel_for(pending.size(), jobs, [&](std::size_t k) {
            const std::size_t i = pending[k];
            const auto name = cell_name(cells[i], plan);
            try {
                const auto a = run_cell(plan, cells[i], scenes.pool, scenes.test, inner);
                write_cell(cell_dir(rep.run_dir, name), a, plan, cells[i]);
                double acc = 0.0;
                for (const auto& r : a.rows) acc += r.metrics.accuracy;
                std::lock_guard lock(mu);
                rows[i] = a.rows;
                ++rep.completed;
                log << "cell " << name << " done, mean accuracy " << format_double(acc / a.rows.size()) << "\n";
            } catch (const std::exception& e) {
                std::lock_guard lock(mu);
                errors[i] = e.what();
                ++rep.failed;
                log << "cell " << name << " failed: " << e.what() << "\n";
            }
        });
    }

    std::vector<ResultRow> all;
    for (const auto& r : rows)
        if (r) all.insert(all.end(), r->begin(), r->end());
    write_results_csv((rep.run_dir / "results.csv").string(), all);
    const auto aggs = aggregate(all);
    write_text(rep.run_dir / "aggregates.json", aggregates_to_json(aggs) + "\n");
    write_text(rep.run_dir / "plot_data.csv", plot_data_csv(aggs));
    write_manifest(rep.failed == 0);
    return rep;
}

}  // namespace qksvm
