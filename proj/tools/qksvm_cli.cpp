// qksvm command-line tool.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qksvm/alignment.hpp"
#include "qksvm/error.hpp"
#include "qksvm/experiment.hpp"
#include "qksvm/parallel.hpp"
#include "qksvm/pca.hpp"
#include "qksvm/pipeline.hpp"
#include "qksvm/random.hpp"
#include "qksvm/sampling.hpp"
#include "qksvm/superpixel.hpp"
#include "qksvm/svm.hpp"
#include "qksvm/synth.hpp"

namespace fs = std::filesystem;
using namespace qksvm;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ArgumentError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
        dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
        dynamic_cast<const ShapeError*>(&e))
        return kUsage;
    return kRuntime;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    out << text;
}

struct Common {
    std::uint64_t seed = 0;
    int jobs = 0;

    int workers() const { return jobs > 0 ? jobs : default_jobs(); }
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "Random seed");
    cmd->add_option("--jobs", c.jobs, "Worker threads (default: QKSVM_JOBS or all cores)")->check(CLI::NonNegativeNumber);
}

void add_slic(CLI::App* cmd, SlicConfig& s) {
    cmd->add_option("--segments", s.n_segments, "SLIC segment count")->capture_default_str();
    cmd->add_option("--sigma", s.sigma, "SLIC Gaussian pre-smoothing")->capture_default_str();
    cmd->add_option("--compactness", s.compactness, "SLIC compactness")->capture_default_str();
    cmd->add_option("--slic-iterations", s.iterations, "SLIC k-means passes")->capture_default_str();
}

Dataset load_dataset(const std::string& path) {
    const auto rows = read_superpixel_csv(path);
    if (rows.empty()) throw ValidationError(path + " has no rows");
    return to_dataset(rows);
}

// Superpixel rows for a sample; the margin row gets pixel_count 0.
std::vector<Superpixel> dataset_rows(const Dataset& d, std::span<const Superpixel> pool) {
    std::vector<Superpixel> out;
    for (std::size_t i = 0; i < d.size(); ++i) {
        Superpixel s;
        for (int c = 0; c < kFeatureCount; ++c) s.features[static_cast<std::size_t>(c)] = d.X(static_cast<Eigen::Index>(i), c);
        s.label = d.y[i];
        if (d.source[i] >= 0) {
            const auto& src = pool[static_cast<std::size_t>(d.source[i])];
            s.pixel_count = src.pixel_count;
            s.vote_ratio = src.vote_ratio;
        } else {
            s.pixel_count = 0;
            s.vote_ratio = 1.0;
        }
        out.push_back(s);
    }
    return out;
}

// Kernel flags shared by kernel, svm-train and kta-train.
struct KernelFlags {
    std::string arch;
    int qubits = 2;
    std::string params_path;
    std::string pca_path;
    std::string estimator = "exact_inversion";
    std::uint64_t shots = 0;
    double gamma = 1.0;

    void add(CLI::App* cmd, bool with_estimator) {
        cmd->add_option("--arch", arch, "Feature-map architecture, e.g. WS");
        cmd->add_option("--qubits,--components", qubits, "Qubits, equal to the PCA component count")
            ->capture_default_str()
            ->check(CLI::Range(1, 24));
        cmd->add_option("--pca", pca_path, "PCA model JSON (fitted on --data when absent)");
        if (!with_estimator) return;
        cmd->add_option("--params", params_path, "Tuned parameter JSON");
        cmd->add_option("--estimator", estimator,
                        "exact_inversion, shots_inversion, hadamard_test, swap_test, rbf or linear")
            ->capture_default_str();
        cmd->add_option("--shots", shots, "Shots per kernel entry (0 = exact)");
        cmd->add_option("--gamma", gamma, "RBF width")->capture_default_str();
    }

    // Checks that need no file access.
    void validate() const {
        const auto kind = parse_estimator(estimator);
        if (is_fidelity_kernel(kind) && arch.empty() && params_path.empty())
            throw ArgumentError("a quantum kernel needs --arch or --params");
        if (!arch.empty()) parse_architecture(arch, qubits);
    }

    PcaModel pca(const Eigen::MatrixXd& X, const std::string& save_to = {}) const {
        PcaModel m = pca_path.empty() ? pca_fit(X, qubits) : pca_from_json(read_text(pca_path));
        if (m.k() != qubits) throw ArgumentError("PCA model has " + std::to_string(m.k()) + " components, expected " +
                                                 std::to_string(qubits));
        if (!save_to.empty()) write_text(save_to, pca_to_json(m));
        return m;
    }

    KernelSpec spec(std::uint64_t seed, KernelDescriptor* desc) const {
        EstimatorConfig est;
        est.kind = parse_estimator(estimator);
        est.shots = shots;
        est.seed = seed;
        est.gamma = gamma;
        if (est.kind == EstimatorKind::Rbf) {
            if (desc) desc->kind = "rbf", desc->gamma = gamma, desc->n_qubits = qubits;
            return KernelSpec::rbf(gamma);
        }
        if (est.kind == EstimatorKind::Linear) {
            if (desc) desc->kind = "linear", desc->n_qubits = qubits;
            return KernelSpec::linear();
        }
        ArchitectureSpec a;
        ParamVector params;
        if (!params_path.empty()) {
            const auto file = read_params_file(params_path);
            if (!arch.empty() && file.arch.text() != arch)
                throw ArgumentError("--arch " + arch + " does not match the parameter file (" + file.arch.text() + ")");
            if (file.arch.n_qubits != qubits)
                throw ArgumentError("parameter file is for " + std::to_string(file.arch.n_qubits) + " qubits");
            a = file.arch;
            params = file.params;
        } else {
            a = parse_architecture(arch, qubits);
            if (a.param_count() > 0) throw ArgumentError("architecture " + arch + " has parameters; pass --params");
        }
        Embedding emb{a, params, {}};
        if (desc) {
            desc->kind = "quantum";
            desc->architecture = a.text();
            desc->n_qubits = qubits;
            desc->params = params;
            desc->params_hash = hash_params(params);
            desc->w = emb.scaling.w;
            desc->estimator = std::string(estimator_name(est.effective_kind()));
        }
        return KernelSpec::quantum(std::move(emb), est);
    }
};

int cmd_reduce(const std::string& in_dir, const std::string& out, const SlicConfig& slic, const Common& c) {
    slic.validate();
    if (!fs::is_directory(in_dir)) throw ArgumentError(in_dir + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(in_dir))
        if (e.is_regular_file() && e.path().extension() == ".qpr") files.push_back(e.path());
    std::sort(files.begin(), files.end());

    std::vector<std::vector<Superpixel>> reduced(files.size());
    std::vector<std::string> errors(files.size());
    std::vector<std::size_t> pixels(files.size(), 0);
    parallel_for(files.size(), c.workers(), [&](std::size_t i) {
        try {
            const auto patch = read_qpr(files[i].string());
            pixels[i] = patch.pixel_count();
            reduced[i] = reduce_patch(patch, slic);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    bool failed = false;
    for (std::size_t i = 0; i < files.size(); ++i)
        if (!errors[i].empty()) {
            std::cerr << "error: " << errors[i] << "\n";
            failed = true;
        }
    if (failed) return kUsage;

    std::vector<Superpixel> rows;
    std::size_t total_pixels = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        rows.insert(rows.end(), reduced[i].begin(), reduced[i].end());
        total_pixels += pixels[i];
    }
    write_superpixel_csv(out, rows);
    std::cout << "reduced " << files.size() << " patches: " << total_pixels << " pixels -> " << rows.size()
              << " superpixels";
    if (!rows.empty())
        std::cout << " (reduction factor " << format_double(static_cast<double>(total_pixels) / rows.size()) << ")";
    std::cout << "\n";
    return kOk;
}

int cmd_synth(const std::string& out, int count, SceneSpec spec, const Common& c) {
    spec.validate();
    if (count < 1) throw ArgumentError("--count must be >= 1");
    fs::create_directories(out);
    for (int i = 0; i < count; ++i) {
        spec.seed = derive_seed(c.seed, static_cast<std::uint64_t>(i));
        const auto scene = generate_scene(spec);
        std::ostringstream name;
        name << "scene_" << std::setw(3) << std::setfill('0') << i << ".qpr";
        write_qpr((fs::path(out) / name.str()).string(), scene);
        double cloud = 0.0;
        for (auto v : scene.ground_truth) cloud += v;
        std::cout << name.str() << ": cloud share " << format_double(cloud / scene.pixel_count()) << "\n";
    }
    return kOk;
}

int cmd_sample(const std::string& pool_path, int N, const std::string& out, const std::string& val_out, int val_min,
               const Common& c) {
    const auto pool = read_superpixel_csv(pool_path);
    const auto train = balanced_sample(pool, N, derive_seed(c.seed, 1));
    write_superpixel_csv(out, dataset_rows(train, pool));
    std::cout << "training sample: " << train.size() << " rows\n";
    if (!val_out.empty()) {
        const auto val = validation_sample(pool, train, N, derive_seed(c.seed, 2), val_min);
        write_superpixel_csv(val_out, dataset_rows(val, pool));
        std::cout << "validation sample: " << val.size() << " rows\n";
    }
    return kOk;
}

int cmd_kta(const std::string& data, const KernelFlags& k, AdamConfig adam, const std::string& out,
            const std::string& pca_out, const std::string& traj_out, const Common& c) {
    if (k.arch.empty()) throw ArgumentError("--arch is required");
    const auto arch = parse_architecture(k.arch, k.qubits);
    adam.seed = c.seed;
    adam.validate();
    const auto d = load_dataset(data);
    const auto pca = k.pca(d.X, pca_out);
    const auto r = optimize_kta(arch, pca_transform(pca, d.X), d.y, adam, {}, {}, c.workers());
    write_params_file(out, arch, r.params);
    if (!traj_out.empty()) write_trajectory_csv(traj_out, r.trajectory);
    std::cout << "alignment " << format_double(r.initial_alignment) << " -> " << format_double(r.best_alignment) << " in "
              << r.trajectory.size() << " evaluations\n";
    return kOk;
}

int cmd_kernel(const std::string& data, const KernelFlags& k, const std::string& out, const std::string& csv,
               const std::string& pca_out, const Common& c) {
    k.validate();
    const auto d = load_dataset(data);
    const auto pca = k.pca(d.X, pca_out);
    const auto spec = k.spec(c.seed, nullptr);
    const auto K = build_kernel_matrix(pca_transform(pca, d.X), spec, c.workers());
    write_qkm(out, K);
    if (!csv.empty()) write_kernel_csv(csv, K);
    std::cout << "kernel " << K.size() << "x" << K.size() << " (" << estimator_name(K.estimator) << ") -> " << out << "\n";
    return kOk;
}

int cmd_svm_train(const std::string& data, const KernelFlags& k, const std::string& kernel_path, TrainConfig tc,
                  const std::string& out, const std::string& pca_out, const Common& c) {
    k.validate();
    tc.seed = c.seed;
    tc.validate();
    const auto d = load_dataset(data);
    KernelDescriptor desc;
    const auto spec = k.spec(c.seed, &desc);
    Eigen::MatrixXd K;
    if (!kernel_path.empty()) {
        K = read_qkm(kernel_path).values;
        if (K.rows() != static_cast<Eigen::Index>(d.size()))
            throw ShapeError("kernel matrix has " + std::to_string(K.rows()) + " rows but the data has " +
                             std::to_string(d.size()));
    } else {
        const auto pca = k.pca(d.X, pca_out);
        K = build_kernel_matrix(pca_transform(pca, d.X), spec, c.workers()).values;
    }
    auto model = train_dual(K, d.y, tc);
    model.kernel = desc;
    write_model(out, model);
    std::cout << "trained on " << d.size() << " rows: " << model.support_indices.size() << " support vectors, "
              << (model.converged ? "converged" : "iteration cap reached") << " after " << model.iterations
              << " iterations\n";
    return kOk;
}

int cmd_evaluate(const std::string& model_path, const std::string& data, const std::string& pca_path,
                 const std::vector<std::string>& scenes, const std::string& out, const SlicConfig& slic,
                 std::uint64_t shots, const Common& c) {
    slic.validate();
    const auto model = read_model(model_path);
    const auto d = load_dataset(data);
    if (d.size() != model.n_train()) throw ShapeError("training data does not match the model");
    const auto pca = pca_from_json(read_text(pca_path));
    EstimatorConfig est;
    est.shots = shots;
    est.seed = c.seed;
    const auto spec = kernel_from_descriptor(model.kernel, est);
    const Eigen::MatrixXd Xt = pca_transform(pca, d.X);
    const auto files = expand_scene_paths(scenes);
    if (files.empty()) throw ArgumentError("no scenes to evaluate");

    std::ostringstream csv;
    csv << "scene,tp,tn,fp,fn,accuracy,jaccard,precision,recall,specificity\n";
    auto na = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
    double mean = 0.0;
    for (const auto& f : files) {
        const auto scene = prepare_test_scene(read_qpr(f.string()), f.stem().string(), slic);
        const auto counts = evaluate_scene(model, spec, pca, Xt, scene, c.workers());
        const auto m = compute_metrics(counts);
        mean += m.accuracy;
        csv << scene.name << ',' << counts.tp << ',' << counts.tn << ',' << counts.fp << ',' << counts.fn << ','
            << format_double(m.accuracy) << ',' << na(m.jaccard) << ',' << na(m.precision) << ',' << na(m.recall)
            << ',' << na(m.specificity) << '\n';
    }
    write_text(out, csv.str());
    std::cout << "mean accuracy over " << files.size() << " scenes: " << format_double(mean / files.size()) << "\n";
    return kOk;
}

struct PipelineFlags {
    std::string config;
    std::string out_dir;
    std::vector<int> sizes;
    int repeats = 0;
    std::vector<std::string> models;
    std::string kta_scope;
};

int cmd_pipeline(const PipelineFlags& f, const CLI::App* cmd, const Common& c) {
    auto cfg = read_run_config(f.config);
    if (cmd->count("--seed")) cfg.seed = c.seed;
    if (!f.out_dir.empty()) cfg.output_dir = fs::absolute(f.out_dir).lexically_normal().string();
    if (!f.sizes.empty()) cfg.sizes = f.sizes;
    if (f.repeats > 0) cfg.repeats = f.repeats;
    if (!f.models.empty()) cfg.models = f.models;
    if (!f.kta_scope.empty()) cfg.kta_scope = f.kta_scope;
    cfg.validate();
    for (const auto& p : expand_scene_paths(cfg.train_scenes))
        if (!fs::exists(p)) throw ArgumentError("training scene not found: " + p.string());
    for (const auto& p : expand_scene_paths(cfg.test_scenes))
        if (!fs::exists(p)) throw ArgumentError("test scene not found: " + p.string());

    const auto rep = run_pipeline(cfg, c.workers(), std::cerr);
    std::cout << "run directory: " << rep.run_dir.string() << "\n"
              << rep.cells << " cells: " << rep.cached << " cached, " << rep.completed << " completed, " << rep.failed
              << " failed\n";
    return rep.failed == 0 ? kOk : kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum-kernel SVM toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "qksvm 0.1.0");

    Common common;
    std::function<int()> action;

    // reduce
    auto* reduce = app.add_subcommand("reduce", "Reduce QPR1 rasters to a superpixel CSV");
    std::string reduce_in, reduce_out;
    SlicConfig reduce_slic;
    reduce->add_option("--in", reduce_in, "Directory of .qpr files")->required();
    reduce->add_option("--out", reduce_out, "Output CSV")->required();
    add_slic(reduce, reduce_slic);
    add_common(reduce, common);
    reduce->callback([&] { action = [&] { return cmd_reduce(reduce_in, reduce_out, reduce_slic, common); }; });

    // synth
    auto* synth = app.add_subcommand("synth", "Generate synthetic four-band scenes");
    std::string synth_out;
    int synth_count = 1;
    SceneSpec scene;
    bool no_margin = false;
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--count", synth_count, "Number of scenes")->capture_default_str();
    synth->add_option("--width", scene.width)->capture_default_str();
    synth->add_option("--height", scene.height)->capture_default_str();
    synth->add_option("--cloud-fraction", scene.cloud_fraction)->capture_default_str();
    synth->add_flag("--no-margin", no_margin, "Do not cut empty corners");
    add_common(synth, common);
    synth->callback([&] {
        action = [&] {
            scene.margin = !no_margin;
            return cmd_synth(synth_out, synth_count, scene, common);
        };
    });

    // sample
    auto* sample = app.add_subcommand("sample", "Draw a balanced training sample from a superpixel pool");
    std::string pool_path, sample_out, val_out;
    int sample_n = 0, val_min = 300;
    sample->add_option("--pool", pool_path, "Superpixel CSV")->required();
    sample->add_option("-n,--size", sample_n, "Sample size N (even)")->required();
    sample->add_option("--out", sample_out, "Training sample CSV")->required();
    sample->add_option("--validation", val_out, "Also write a disjoint validation sample");
    sample->add_option("--validation-min", val_min)->capture_default_str();
    add_common(sample, common);
    sample->callback([&] { action = [&] { return cmd_sample(pool_path, sample_n, sample_out, val_out, val_min, common); }; });

    // kta-train
    auto* kta = app.add_subcommand("kta-train", "Tune feature-map parameters by kernel-target alignment");
    std::string kta_data, kta_out, kta_pca_out, kta_traj;
    KernelFlags kta_k;
    AdamConfig adam;
    kta->add_option("--data", kta_data, "Training sample CSV")->required();
    kta_k.add(kta, false);
    kta->add_option("--out", kta_out, "Parameter JSON")->required();
    kta->add_option("--pca-out", kta_pca_out, "Write the PCA model used");
    kta->add_option("--trajectory", kta_traj, "Trajectory CSV");
    kta->add_option("--lr", adam.learning_rate)->capture_default_str();
    kta->add_option("--iters", adam.max_iters)->capture_default_str();
    kta->add_option("--patience", adam.patience)->capture_default_str();
    add_common(kta, common);
    kta->callback([&] { action = [&] { return cmd_kta(kta_data, kta_k, adam, kta_out, kta_pca_out, kta_traj, common); }; });

    // kernel
    auto* kernel = app.add_subcommand("kernel", "Build a kernel matrix");
    std::string kernel_data, kernel_out, kernel_csv, kernel_pca_out;
    KernelFlags kernel_k;
    kernel->add_option("--data", kernel_data, "Sample CSV")->required();
    kernel_k.add(kernel, true);
    kernel->add_option("--out", kernel_out, "QKM1 output")->required();
    kernel->add_option("--csv", kernel_csv, "Also write the matrix as CSV");
    kernel->add_option("--pca-out", kernel_pca_out, "Write the PCA model used");
    add_common(kernel, common);
    kernel->callback([&] {
        action = [&] { return cmd_kernel(kernel_data, kernel_k, kernel_out, kernel_csv, kernel_pca_out, common); };
    });

    // svm-train
    auto* svm = app.add_subcommand("svm-train", "Train a soft-margin SVM");
    std::string svm_data, svm_kernel, svm_out, svm_pca_out;
    KernelFlags svm_k;
    TrainConfig tc;
    svm->add_option("--data", svm_data, "Training sample CSV")->required();
    svm_k.add(svm, true);
    svm->add_option("--kernel", svm_kernel, "Precomputed QKM1 training kernel");
    svm->add_option("-C,--C", tc.C, "Box constraint")->capture_default_str();
    svm->add_option("--tol", tc.tol)->capture_default_str();
    svm->add_option("--max-passes", tc.max_passes)->capture_default_str();
    svm->add_option("--out", svm_out, "Model JSON")->required();
    svm->add_option("--pca-out", svm_pca_out, "Write the PCA model used");
    add_common(svm, common);
    svm->callback([&] { action = [&] { return cmd_svm_train(svm_data, svm_k, svm_kernel, tc, svm_out, svm_pca_out, common); }; });

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Score a trained model per pixel on test scenes");
    std::string eval_model, eval_data, eval_pca, eval_out;
    std::vector<std::string> eval_scenes;
    SlicConfig eval_slic;
    std::uint64_t eval_shots = 0;
    eval->add_option("--model", eval_model, "Model JSON")->required();
    eval->add_option("--data", eval_data, "Training sample CSV the model was fitted on")->required();
    eval->add_option("--pca", eval_pca, "PCA model JSON")->required();
    eval->add_option("--scenes", eval_scenes, "QPR1 files or directories")->required();
    eval->add_option("--out", eval_out, "Metrics CSV")->required();
    eval->add_option("--shots", eval_shots, "Shots for shot-based models");
    add_slic(eval, eval_slic);
    add_common(eval, common);
    eval->callback([&] {
        action = [&] {
            return cmd_evaluate(eval_model, eval_data, eval_pca, eval_scenes, eval_out, eval_slic, eval_shots, common);
        };
    });

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "Run a full experiment from a JSON configuration");
    PipelineFlags pf;
    pipe->add_option("--config", pf.config, "Run configuration JSON")->required();
    pipe->add_option("--out-dir", pf.out_dir, "Parent directory for run directories");
    pipe->add_option("--sizes", pf.sizes, "Override sample sizes");
    pipe->add_option("--repeats", pf.repeats, "Override repeats");
    pipe->add_option("--models", pf.models, "Override models");
    pipe->add_option("--kta-scope", pf.kta_scope, "per_sample or global");
    add_common(pipe, common);
    pipe->callback([&] { action = [&] { return cmd_pipeline(pf, pipe, common); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        return action();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}
