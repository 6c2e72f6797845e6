#include "qksvm/grid_search.hpp"

#include <algorithm>

#include "qksvm/error.hpp"
#include "qksvm/parallel.hpp"

namespace qksvm {

namespace {

void check_grids(std::span<const double> c_grid, std::span<const int> y_val) {
    if (c_grid.empty()) throw ValidationError("C grid is empty");
    for (double c : c_grid)
        if (!(c > 0.0)) throw ValidationError("C grid values must be positive");
    const bool pos = std::find(y_val.begin(), y_val.end(), 1) != y_val.end();
    const bool neg = std::find(y_val.begin(), y_val.end(), -1) != y_val.end();
    if (!pos || !neg) throw ValidationError("validation set must contain both classes");
}

// Validation accuracy for each C on fixed kernel blocks.
std::vector<double> score_c_axis(const Eigen::MatrixXd& K_train, std::span<const int> y_train,
                                 const Eigen::MatrixXd& K_val, std::span<const int> y_val,
                                 std::span<const double> c_grid, const TrainConfig& base, int jobs) {
    std::vector<double> acc(c_grid.size());
    parallel_for(c_grid.size(), jobs, [&](std::size_t i) {
        TrainConfig cfg = base;
        cfg.C = c_grid[i];
        const auto model = train_dual(K_train, y_train, cfg);
        const auto pred = predict(model, K_val);
        std::size_t hit = 0;
        for (std::size_t r = 0; r < pred.size(); ++r) hit += pred[r] == y_val[r];
        acc[i] = static_cast<double>(hit) / static_cast<double>(pred.size());
    });
    return acc;
}

}  // namespace

std::vector<double> default_c_grid() {
    std::vector<double> g;
    for (int k = 0; k < 50; ++k) g.push_back(0.01 + 3.0 * k);
    return g;
}

std::vector<double> default_gamma_grid() {
    std::vector<double> g;
    for (int k = 0; k < 50; ++k) g.push_back(0.01 + 0.2 * k);
    return g;
}

GridSearchResult grid_search_precomputed(const Eigen::MatrixXd& K_train, std::span<const int> y_train,
                                         const Eigen::MatrixXd& K_val, std::span<const int> y_val,
                                         std::span<const double> c_grid, const TrainConfig& base, int jobs) {
    check_grids(c_grid, y_val);
    if (K_val.rows() != static_cast<Eigen::Index>(y_val.size())) throw ShapeError("validation block and labels differ");
    // Ascending C so that strict improvement keeps the smallest C among ties.
    std::vector<double> cs(c_grid.begin(), c_grid.end());
    std::sort(cs.begin(), cs.end());
    const auto acc = score_c_axis(K_train, y_train, K_val, y_val, cs, base, jobs);
    GridSearchResult best;
    best.accuracy = -1.0;
    for (std::size_t i = 0; i < cs.size(); ++i)
        if (acc[i] > best.accuracy) {
            best.accuracy = acc[i];
            best.C = cs[i];
        }
    best.cells = cs.size();
    return best;
}

GridSearchResult grid_search(const Eigen::MatrixXd& X_train, std::span<const int> y_train,
                             const Eigen::MatrixXd& X_val, std::span<const int> y_val, const KernelFactory& kernel,
                             std::span<const double> c_grid, std::span<const double> gamma_grid,
                             const TrainConfig& base, int jobs) {
    check_grids(c_grid, y_val);
    std::vector<std::optional<double>> gammas;
    if (gamma_grid.empty()) {
        gammas.emplace_back(std::nullopt);
    } else {
        std::vector<double> g(gamma_grid.begin(), gamma_grid.end());
        std::sort(g.begin(), g.end());
        for (double v : g) {
            if (!(v > 0.0)) throw ValidationError("gamma grid values must be positive");
            gammas.emplace_back(v);
        }
    }
    std::vector<double> cs(c_grid.begin(), c_grid.end());
    std::sort(cs.begin(), cs.end());

    GridSearchResult best;
    best.accuracy = -1.0;
    // C is the outer key of the tie-break, so scan C-major over the score table.
    std::vector<std::vector<double>> table;
    for (const auto& g : gammas) {
        const auto spec = kernel(g);
        const auto K = build_kernel_matrix(X_train, spec, jobs).values;
        const auto Kv = build_cross_kernel(X_val, X_train, spec, jobs);
        table.push_back(score_c_axis(K, y_train, Kv, y_val, cs, base, jobs));
    }
    for (std::size_t c = 0; c < cs.size(); ++c)
        for (std::size_t g = 0; g < gammas.size(); ++g)
            if (table[g][c] > best.accuracy) {
                best.accuracy = table[g][c];
                best.C = cs[c];
                best.gamma = gammas[g];
            }
    best.cells = cs.size() * gammas.size();
    return best;
}

}  // namespace qksvm
