#include "qksvm/sampling.hpp"

#include <algorithm>
#include <sstream>

#include "qksvm/error.hpp"
#include "qksvm/random.hpp"

namespace qksvm {

namespace {

// First k entries of a seeded Fisher-Yates shuffle.
std::vector<long> draw(std::vector<long> items, std::size_t k, Rng& rng) {
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(items.size() - i));
        std::swap(items[i], items[j]);
    }
    items.resize(k);
    return items;
}

Dataset assemble(std::span<const Superpixel> pool, const std::vector<long>& rows) {
    Dataset d;
    d.X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), kFeatureCount);
    d.y.reserve(rows.size());
    d.source = rows;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] < 0) {
            d.y.push_back(-1);
            continue;
        }
        const auto& sp = pool[static_cast<std::size_t>(rows[r])];
        for (int f = 0; f < kFeatureCount; ++f) d.X(static_cast<Eigen::Index>(r), f) = sp.features[static_cast<std::size_t>(f)];
        d.y.push_back(sp.label);
    }
    return d;
}

}  // namespace

Dataset to_dataset(std::span<const Superpixel> rows) {
    std::vector<long> idx(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) idx[i] = static_cast<long>(i);
    return assemble(rows, idx);
}

Dataset balanced_sample(std::span<const Superpixel> pool, int N, std::uint64_t seed) {
    if (N < 4 || N % 2 != 0) throw ValidationError("sample size N must be even and >= 4, got " + std::to_string(N));
    std::vector<long> cloud, clear;
    for (std::size_t i = 0; i < pool.size(); ++i) (pool[i].label == 1 ? cloud : clear).push_back(static_cast<long>(i));
    const auto half = static_cast<std::size_t>(N / 2);
    if (cloud.size() < half || clear.size() < half - 1) {
        std::ostringstream msg;
        msg << "pool has " << cloud.size() << " cloud and " << clear.size() << " clear superpixels; N=" << N
            << " needs " << half << " and " << half - 1;
        throw SamplingError(msg.str());
    }
    Rng rng(seed);
    auto rows = draw(std::move(cloud), half, rng);
    const auto neg = draw(std::move(clear), half - 1, rng);
    rows.insert(rows.end(), neg.begin(), neg.end());
    rows.push_back(-1);
    rng.shuffle(std::span<long>(rows));
    return assemble(pool, rows);
}

Dataset validation_sample(std::span<const Superpixel> pool, const Dataset& training, int N, std::uint64_t seed,
                          int min_size) {
    std::vector<bool> used(pool.size(), false);
    for (long s : training.source)
        if (s >= 0) used[static_cast<std::size_t>(s)] = true;
    std::vector<long> cloud, clear;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (used[i]) continue;
        (pool[i].label == 1 ? cloud : clear).push_back(static_cast<long>(i));
    }
    const auto target = static_cast<std::size_t>(std::max(N / 2, min_size));
    const std::size_t per_class = std::min({target / 2, cloud.size(), clear.size()});
    if (per_class == 0) throw ValidationError("validation set would contain a single class");
    Rng rng(seed);
    auto rows = draw(std::move(cloud), per_class, rng);
    const auto neg = draw(std::move(clear), per_class, rng);
    rows.insert(rows.end(), neg.begin(), neg.end());
    rng.shuffle(std::span<long>(rows));
    return assemble(pool, rows);
}

}  // namespace qksvm
