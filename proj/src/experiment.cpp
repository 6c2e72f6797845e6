#include "qksvm/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "qksvm/error.hpp"
#include "qksvm/grid_search.hpp"
#include "qksvm/parallel.hpp"
#include "qksvm/pca.hpp"
#include "qksvm/random.hpp"
#include "qksvm/sampling.hpp"
#include "qksvm/svm.hpp"

namespace qksvm {

namespace {

std::string na_or(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

nlohmann::json json_or_null(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

KernelSpec classical_spec(const ModelSpec& m, std::optional<double> gamma) {
    if (m.kind == ModelKind::Linear) return KernelSpec::linear();
    return KernelSpec::rbf(gamma.value_or(1.0));
}

// Held-out rows projected with the training scaler, clipped to its range.
Eigen::MatrixXd project_clipped(const PcaModel& pca, const Eigen::MatrixXd& X) {
    return pca_transform(pca, X).cwiseMax(0.0).cwiseMin(1.0);
}

// Feature rows of a scene plus one all-zero row standing in for margin pixels.
Eigen::MatrixXd scene_rows(const TestScene& s) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(s.features.rows() + 1, kFeatureCount);
    if (s.features.rows() > 0) X.topRows(s.features.rows()) = s.features;
    return X;
}

}  // namespace

bool ModelSpec::has_variational_layers() const {
    return kind == ModelKind::Quantum && architecture.find_first_of("WE") != std::string::npos;
}

ModelSpec parse_model_spec(std::string_view name) {
    std::size_t cut = name.size();
    while (cut > 0 && std::isdigit(static_cast<unsigned char>(name[cut - 1]))) --cut;
    const std::string head(name.substr(0, cut));
    const std::string digits(name.substr(cut));
    if (head.empty() || digits.empty() || digits.size() > 2)
        throw ArgumentError("model name must be a kernel family followed by a component count: " + std::string(name));
    ModelSpec m;
    m.name = std::string(name);
    m.components = std::stoi(digits);
    if (m.components < 1 || m.components > kFeatureCount)
        throw ArgumentError("component count out of range in " + std::string(name));
    if (head == "Lin") {
        m.kind = ModelKind::Linear;
    } else if (head == "RBF") {
        m.kind = ModelKind::Rbf;
    } else {
        m.kind = ModelKind::Quantum;
        m.architecture = head;
        parse_architecture(head, m.components);  // throws on bad tokens
    }
    return m;
}

void ExperimentPlan::validate() const {
    if (sizes.empty()) throw ValidationError("experiment needs at least one sample size");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 4 || sizes[i] % 2 != 0) throw ValidationError("sample sizes must be even and at least 4");
        if (i > 0 && sizes[i] <= sizes[i - 1]) throw ValidationError("sample sizes must be increasing");
        for (const auto& m : models)
            if (m.components >= sizes[i])
                throw ValidationError("model " + m.name + " needs more than " + std::to_string(m.components) +
                                      " training rows");
    }
    if (repeats < 1) throw ValidationError("repeats must be >= 1");
    if (models.empty()) throw ValidationError("experiment needs at least one model");
    if (validation_min < 2) throw ValidationError("validation_min must be >= 2");
    adam.validate();
    estimator.validate();
    if (!is_fidelity_kernel(estimator.kind)) throw ValidationError("quantum models need a fidelity estimator");
}

TestScene prepare_test_scene(const RasterPatch& patch, std::string name, const SlicConfig& slic) {
    const auto red = reduce_patch_detailed(patch, slic);
    TestScene s;
    s.name = std::move(name);
    s.width = patch.width;
    s.height = patch.height;
    s.features.resize(static_cast<Eigen::Index>(red.superpixels.size()), kFeatureCount);
    for (std::size_t r = 0; r < red.superpixels.size(); ++r)
        for (int c = 0; c < kFeatureCount; ++c)
            s.features(static_cast<Eigen::Index>(r), c) = red.superpixels[r].features[static_cast<std::size_t>(c)];
    const std::size_t P = static_cast<std::size_t>(patch.width) * patch.height;
    s.pixel_truth.resize(P);
    s.pixel_superpixel.resize(P);
    for (std::size_t p = 0; p < P; ++p) {
        s.pixel_truth[p] = patch.ground_truth[p] ? 1 : -1;
        s.pixel_superpixel[p] = patch.is_margin(p) ? -1 : red.segment_to_superpixel[static_cast<std::size_t>(red.segmentation.labels[p])];
    }
    return s;
}

ConfusionCounts evaluate_scene(const SvmModel& model, const KernelSpec& kernel, const PcaModel& pca,
                               const Eigen::MatrixXd& train_projected, const TestScene& scene, int jobs) {
    if (pca.dim() != kFeatureCount) throw ShapeError("scene evaluation needs a PCA over the superpixel features");
    const Eigen::MatrixXd Z = project_clipped(pca, scene_rows(scene));
    const auto pred = predict(model, build_cross_kernel(Z, train_projected, kernel, jobs));
    const int margin_pred = pred.back();
    ConfusionCounts c;
    for (std::size_t p = 0; p < scene.pixel_truth.size(); ++p) {
        const int sp = scene.pixel_superpixel[p];
        c.add(sp < 0 ? margin_pred : pred[static_cast<std::size_t>(sp)], scene.pixel_truth[p]);
    }
    return c;
}

KernelSpec kernel_from_descriptor(const KernelDescriptor& d, const EstimatorConfig& estimator) {
    if (d.kind == "linear") return KernelSpec::linear();
    if (d.kind == "rbf") return KernelSpec::rbf(d.gamma);
    if (d.kind != "quantum") throw ArgumentError("model kernel \"" + d.kind + "\" cannot be rebuilt from its descriptor");
    const auto arch = parse_architecture(d.architecture, d.n_qubits);
    ScalingConfig scaling;
    if (d.w != 0.0) scaling.w = d.w;
    EstimatorConfig est = estimator;
    if (!d.estimator.empty()) est.kind = parse_estimator(d.estimator);
    if (est.kind == EstimatorKind::ShotsInversion) {
        if (est.shots == 0) throw ArgumentError("the model was trained with a shot-based kernel; give a shot count");
        est.kind = EstimatorKind::ExactInversion;
    }
    return KernelSpec::quantum(Embedding{arch, d.params, scaling}, est);
}

std::uint64_t cell_seed(std::uint64_t base, int N, int repeat) {
    return derive_seed(base, static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(repeat));
}

CellArtifacts run_cell(const ExperimentPlan& plan, const CellKey& key, std::span<const Superpixel> pool,
                       std::span<const TestScene> scenes, int jobs) {
    return run_cell(plan, key, cell_seed(plan.base_seed, key.N, key.repeat), pool, scenes, jobs);
}

CellArtifacts run_cell(const ExperimentPlan& plan, const CellKey& key, std::uint64_t seed,
                       std::span<const Superpixel> pool, std::span<const TestScene> scenes, int jobs) {
    if (key.model >= plan.models.size()) throw IndexError("model index out of range");
    const ModelSpec& model = plan.models[key.model];

    // The sample depends only on (N, repeat), so all models see the same data.
    const Dataset train = balanced_sample(pool, key.N, derive_seed(seed, 1));
    const Dataset val = validation_sample(pool, train, key.N, derive_seed(seed, 2), plan.validation_min);
    const PcaModel pca = pca_fit(train.X, model.components);
    const Eigen::MatrixXd Xt = pca_transform(pca, train.X);
    const Eigen::MatrixXd Xv = project_clipped(pca, val.X);

    const auto c_grid = plan.c_grid.empty() ? default_c_grid() : plan.c_grid;
    const auto g_grid = plan.gamma_grid.empty() ? default_gamma_grid() : plan.gamma_grid;
    TrainConfig tc;
    tc.tol = plan.svm_tol;
    tc.seed = derive_seed(seed, 4);

    CellArtifacts out;
    ResultRow base;
    base.model = model.name;
    base.N = key.N;
    base.repeat = key.repeat;
    base.seed = seed;

    KernelSpec spec;
    GridSearchResult best;
    if (model.kind == ModelKind::Quantum) {
        const ArchitectureSpec arch = parse_architecture(model.architecture, model.components);
        EstimatorConfig est = plan.estimator;
        est.seed = derive_seed(seed, 5);
        Embedding emb{arch, {}, plan.scaling};
        const auto fixed = plan.fixed_params.find(model.name);
        if (model.has_variational_layers() && fixed != plan.fixed_params.end()) {
            if (fixed->second.size() != arch.param_count())
                throw ShapeError("fixed parameters for " + model.name + " do not match the architecture");
            emb.params = fixed->second;
            out.params = fixed->second;
        } else if (model.has_variational_layers()) {
            AdamConfig adam = plan.adam;
            adam.seed = derive_seed(seed, 3);
            EstimatorConfig exact = est;
            exact.shots = 0;
            const auto kta = optimize_kta(arch, Xt, train.y, adam, plan.scaling, exact, 1);
            emb.params = kta.params;
            out.params = kta.params;
            out.trajectory = kta.trajectory;
            base.alignment_initial = kta.initial_alignment;
            base.alignment_final = kta.best_alignment;
        }
        spec = KernelSpec::quantum(emb, est);
        out.train_kernel = build_kernel_matrix(Xt, spec, jobs);
        if (!base.alignment_final) {
            base.alignment_initial = alignment(out.train_kernel.values, train.y);
            base.alignment_final = base.alignment_initial;
        }
        const Eigen::MatrixXd Kv = build_cross_kernel(Xv, Xt, spec, jobs);
        best = grid_search_precomputed(out.train_kernel.values, train.y, Kv, val.y, c_grid, tc, jobs);
    } else {
        std::span<const double> gammas;
        if (model.kind == ModelKind::Rbf) gammas = g_grid;
        best = grid_search(Xt, train.y, Xv, val.y, [&](std::optional<double> g) { return classical_spec(model, g); },
                           c_grid, gammas, tc, jobs);
        spec = classical_spec(model, best.gamma);
        out.train_kernel = build_kernel_matrix(Xt, spec, jobs);
    }

    tc.C = best.C;
    SvmModel svm = train_dual(out.train_kernel.values, train.y, tc);
    svm.kernel.kind = model.kind == ModelKind::Linear ? "linear" : model.kind == ModelKind::Rbf ? "rbf" : "quantum";
    svm.kernel.n_qubits = model.components;
    if (model.kind == ModelKind::Quantum) {
        svm.kernel.architecture = model.architecture;
        svm.kernel.params = spec.embedding->params;
        svm.kernel.params_hash = hash_params(svm.kernel.params);
        svm.kernel.w = plan.scaling.w;
        svm.kernel.estimator = std::string(estimator_name(spec.estimator.effective_kind()));
    }
    if (best.gamma) svm.kernel.gamma = *best.gamma;
    out.model_json = model_to_json(svm);
    out.pca_json = pca_to_json(pca);

    base.C = best.C;
    base.gamma = best.gamma;
    base.validation_accuracy = best.accuracy;
    base.n_support = svm.support_indices.size();

    for (const auto& scene : scenes) {
        ResultRow row = base;
        row.scene = scene.name;
        row.counts = evaluate_scene(svm, spec, pca, Xt, scene, jobs);
        row.metrics = compute_metrics(row.counts);
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::vector<CellKey> plan_cells(const ExperimentPlan& plan) {
    std::vector<CellKey> cells;
    for (int N : plan.sizes)
        for (int r = 0; r < plan.repeats; ++r)
            for (std::size_t m = 0; m < plan.models.size(); ++m) cells.push_back({N, r, m});
    return cells;
}

std::vector<ResultRow> run_experiment(const ExperimentPlan& plan, std::span<const Superpixel> pool,
                                      std::span<const TestScene> scenes, int jobs) {
    plan.validate();
    if (jobs <= 0) jobs = default_jobs();
    const auto cells = plan_cells(plan);
    std::vector<std::vector<ResultRow>> per_cell(cells.size());
    parallel_for(cells.size(), jobs, [&](std::size_t i) { per_cell[i] = run_cell(plan, cells[i], pool, scenes, 1).rows; });
    std::vector<ResultRow> rows;
    for (auto& c : per_cell)
        for (auto& r : c) rows.push_back(std::move(r));
    return rows;
}

std::string result_csv_header() {
    return "model,N,repeat,scene,seed,C,gamma,alignment_initial,alignment_final,validation_accuracy,n_support,"
           "tp,tn,fp,fn,accuracy,jaccard,precision,recall,specificity";
}

std::string result_csv_line(const ResultRow& r) {
    std::ostringstream o;
    o << r.model << ',' << r.N << ',' << r.repeat << ',' << r.scene << ',' << r.seed << ',' << format_double(r.C) << ','
      << na_or(r.gamma) << ',' << na_or(r.alignment_initial) << ',' << na_or(r.alignment_final) << ','
      << format_double(r.validation_accuracy) << ',' << r.n_support << ',' << r.counts.tp << ',' << r.counts.tn << ','
      << r.counts.fp << ',' << r.counts.fn << ',' << format_double(r.metrics.accuracy) << ','
      << na_or(r.metrics.jaccard) << ',' << na_or(r.metrics.precision) << ',' << na_or(r.metrics.recall) << ','
      << na_or(r.metrics.specificity);
    return o.str();
}

ResultRow parse_result_csv_line(std::string_view line) {
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            f.push_back(cur);
            cur.clear();
        } else if (c != '\r' && c != '\n') {
            cur += c;
        }
    }
    f.push_back(cur);
    if (f.size() != 20) throw FormatError("result row has " + std::to_string(f.size()) + " fields, expected 20");
    auto num = [&](std::size_t i) {
        double v = 0.0;
        const auto res = std::from_chars(f[i].data(), f[i].data() + f[i].size(), v);
        if (res.ec != std::errc() || res.ptr != f[i].data() + f[i].size() || f[i].empty())
            throw FormatError("bad number in result row: " + f[i]);
        return v;
    };
    auto opt = [&](std::size_t i) -> std::optional<double> {
        if (f[i] == "NA") return std::nullopt;
        return num(i);
    };
    auto count = [&](std::size_t i) {
        const double v = num(i);
        if (v < 0 || v != std::floor(v)) throw FormatError("bad count in result row: " + f[i]);
        return static_cast<std::uint64_t>(v);
    };
    ResultRow r;
    r.model = f[0];
    r.N = static_cast<int>(count(1));
    r.repeat = static_cast<int>(count(2));
    r.scene = f[3];
    try {
        r.seed = std::stoull(f[4]);
    } catch (const std::exception&) {
        throw FormatError("bad seed in result row: " + f[4]);
    }
    r.C = num(5);
    r.gamma = opt(6);
    r.alignment_initial = opt(7);
    r.alignment_final = opt(8);
    r.validation_accuracy = num(9);
    r.n_support = count(10);
    r.counts = {count(11), count(12), count(13), count(14)};
    r.metrics.accuracy = num(15);
    r.metrics.jaccard = opt(16);
    r.metrics.precision = opt(17);
    r.metrics.recall = opt(18);
    r.metrics.specificity = opt(19);
    return r;
}

void write_results_csv(const std::string& path, std::span<const ResultRow> rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    out << result_csv_header() << '\n';
    for (const auto& r : rows) out << result_csv_line(r) << '\n';
}

Summary summarize(std::span<const double> values) {
    Summary s;
    s.count = values.size();
    if (values.empty()) return s;
    // Offsets from the first value keep the mean of identical values exact.
    double shift = 0.0;
    for (double v : values) shift += v - values[0];
    const double mean = values[0] + shift / static_cast<double>(values.size());
    s.mean = mean;
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

std::vector<Aggregate> aggregate(std::span<const ResultRow> rows) {
    // (model first-seen order, N) -> repeat -> per-metric scene values
    using Values = std::array<std::vector<double>, 5>;
    std::vector<std::string> model_order;
    std::map<std::pair<std::size_t, int>, std::map<int, Values>> groups;
    for (const auto& r : rows) {
        auto it = std::find(model_order.begin(), model_order.end(), r.model);
        if (it == model_order.end()) it = model_order.insert(model_order.end(), r.model);
        const auto mi = static_cast<std::size_t>(it - model_order.begin());
        auto& v = groups[{mi, r.N}][r.repeat];
        const std::array<std::optional<double>, 5> m{r.metrics.accuracy, r.metrics.jaccard, r.metrics.precision,
                                                     r.metrics.recall, r.metrics.specificity};
        for (std::size_t k = 0; k < 5; ++k)
            if (m[k]) v[k].push_back(*m[k]);
    }
    std::vector<Aggregate> out;
    for (const auto& [key, repeats] : groups) {
        Aggregate a;
        a.model = model_order[key.first];
        a.N = key.second;
        a.repeats = static_cast<int>(repeats.size());
        std::array<std::vector<double>, 5> means;
        for (const auto& [rep, vals] : repeats)
            for (std::size_t k = 0; k < 5; ++k)
                if (auto s = summarize(vals[k]); s.mean) means[k].push_back(*s.mean);
        a.accuracy = summarize(means[0]);
        a.jaccard = summarize(means[1]);
        a.precision = summarize(means[2]);
        a.recall = summarize(means[3]);
        a.specificity = summarize(means[4]);
        out.push_back(std::move(a));
    }
    return out;
}

std::string aggregates_to_json(std::span<const Aggregate> aggs) {
    auto summary = [](const Summary& s) {
        return nlohmann::json{{"mean", json_or_null(s.mean)}, {"std", json_or_null(s.std)}, {"count", s.count}};
    };
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& a : aggs)
        arr.push_back({{"model", a.model},
                       {"N", a.N},
                       {"repeats", a.repeats},
                       {"accuracy", summary(a.accuracy)},
                       {"jaccard", summary(a.jaccard)},
                       {"precision", summary(a.precision)},
                       {"recall", summary(a.recall)},
                       {"specificity", summary(a.specificity)}});
    return nlohmann::json{{"aggregates", arr}}.dump(2);
}

std::string plot_data_csv(std::span<const Aggregate> aggs) {
    std::string out = "model,N,mean_accuracy,std_accuracy\n";
    for (const auto& a : aggs)
        out += a.model + ',' + std::to_string(a.N) + ',' + na_or(a.accuracy.mean) + ',' + na_or(a.accuracy.std) + '\n';
    return out;
}

}  // namespace qksvm
