#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qksvm/raster.hpp"
#include "qksvm/slic.hpp"

namespace qksvm {

inline constexpr int kStatsPerBand = 6;
inline constexpr int kFeatureCount = kBandCount * kStatsPerBand;
inline constexpr std::array<const char*, kStatsPerBand> kStatNames{"mean", "median", "iqr", "min", "max", "std"};

// Prototype vector of one segment. Features are ordered band-major (blue,
// green, red, nir) and statistic-minor (mean, median, iqr, min, max, std).
struct Superpixel {
    std::array<double, kFeatureCount> features{};
    int label = -1;  // +1 cloud, -1 clear
    std::size_t pixel_count = 0;
    double vote_ratio = 1.0;

    bool operator==(const Superpixel&) const = default;
};

// Linear-interpolation percentile (q in [0, 100]) of sorted values.
double percentile_sorted(std::span<const double> sorted, double q);

// The six statistics of one band over a set of pixel values (population std).
std::array<double, kStatsPerBand> band_statistics(std::vector<double> values);

struct PatchReduction {
    Segmentation segmentation;
    std::vector<Superpixel> superpixels;
    // Superpixel index per segment id, -1 for segments made only of margin.
    std::vector<int> segment_to_superpixel;
};

// Segments the patch, drops margin pixels, summarizes every remaining segment
// and labels it by majority vote (ties go to clear).
PatchReduction reduce_patch_detailed(const RasterPatch& patch, const SlicConfig& cfg = {});
std::vector<Superpixel> reduce_patch(const RasterPatch& patch, const SlicConfig& cfg = {});

// Header: blue_mean,...,nir_std,label,pixel_count,vote_ratio
std::vector<std::string> superpixel_csv_columns();
std::string superpixel_csv_header();
void write_superpixel_csv(const std::string& path, std::span<const Superpixel> rows);
std::vector<Superpixel> read_superpixel_csv(const std::string& path);

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

}  // namespace qksvm
