#pragma once

#include <cstdint>
#include <vector>

#include "qksvm/raster.hpp"

namespace qksvm {

struct SlicConfig {
    int n_segments = 200;
    double sigma = 5.0;         // Gaussian pre-smoothing, pixels; 0 disables it
    double compactness = 10.0;  // weight of the spatial term, bands scaled to [0, 1]
    int iterations = 10;

    void validate() const;
};

struct Segmentation {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<int> labels;  // row-major, contiguous ids 0..count-1
    int count = 0;
};

// SLIC k-means over (scaled band values, x, y) from a regular grid of seeds,
// followed by a connectivity pass that leaves every segment 4-connected.
// ValidationError when n_segments exceeds the pixel count.
Segmentation slic_segment(const RasterPatch& patch, const SlicConfig& cfg = {});

// Seed grid dimensions (rows, cols) used for `n_segments` on a w x h image.
std::pair<int, int> slic_grid(int n_segments, std::uint32_t width, std::uint32_t height);

// Helpers exposed for testing.
std::vector<double> gaussian_blur(const std::vector<double>& plane, std::uint32_t width, std::uint32_t height,
                                  double sigma);
// Each label keeps its largest 4-connected piece; other pieces join the
// largest adjacent segment (ties to the smaller id). Ids are renumbered in
// scan order of first appearance.
int enforce_connectivity(std::vector<int>& labels, std::uint32_t width, std::uint32_t height);

}  // namespace qksvm
