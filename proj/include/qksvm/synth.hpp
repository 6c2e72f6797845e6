#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qksvm/raster.hpp"

namespace qksvm {

struct SceneSpec {
    std::uint32_t width = 384;
    std::uint32_t height = 384;
    double cloud_fraction = 0.5;  // target share of cloud-labelled pixels
    bool margin = true;           // cut empty corners as in tiled scene edges
    std::uint64_t seed = 0;

    void validate() const;
};

// Four-band scene over a mixed land cover (water, vegetation, soil, bright
// ground) with semi-transparent cloud blobs. A pixel is labelled cloud where
// the blob opacity reaches 0.5. Blobs are added until the labelled share
// reaches the target (or the non-margin area runs out).
RasterPatch generate_scene(const SceneSpec& spec);

// Two well separated Gaussian clusters in [0, 1]^2 with balanced +-1 labels.
struct ToyDataset {
    Eigen::MatrixXd X;
    std::vector<int> y;
};
ToyDataset make_toy_dataset(int n, std::uint64_t seed);

}  // namespace qksvm
