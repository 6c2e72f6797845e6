#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qksvm/superpixel.hpp"

namespace qksvm {

// Feature rows with +-1 labels. `source` holds the pool index of each row,
// or -1 for the synthetic margin row.
struct Dataset {
    Eigen::MatrixXd X;
    std::vector<int> y;
    std::vector<long> source;

    std::size_t size() const { return y.size(); }
};

Dataset to_dataset(std::span<const Superpixel> rows);

// N/2 cloud rows and N/2 - 1 clear rows drawn without replacement, plus one
// all-zero clear row for the raster margin, shuffled. ValidationError for odd
// N or N < 4; SamplingError when the pool is short of either class.
Dataset balanced_sample(std::span<const Superpixel> pool, int N, std::uint64_t seed);

// Balanced draw of max(N/2, min_size) rows from the pool rows not used by
// `training`, capped by what each class has left.
Dataset validation_sample(std::span<const Superpixel> pool, const Dataset& training, int N, std::uint64_t seed,
                          int min_size = 300);

}  // namespace qksvm
