#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qksvm {

enum Band : int { kBlue = 0, kGreen = 1, kRed = 2, kNir = 3 };
inline constexpr int kBandCount = 4;
inline constexpr std::array<const char*, kBandCount> kBandNames{"blue", "green", "red", "nir"};

// Four-band raster with a per-pixel ground truth (0 clear, 1 cloud). Planes
// are row-major. Margin pixels are those with all four bands exactly zero.
struct RasterPatch {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::array<std::vector<float>, kBandCount> bands;
    std::vector<std::uint8_t> ground_truth;

    RasterPatch() = default;
    RasterPatch(std::uint32_t w, std::uint32_t h);

    std::size_t pixel_count() const { return std::size_t{width} * height; }
    std::size_t index(std::uint32_t x, std::uint32_t y) const { return std::size_t{y} * width + x; }
    bool is_margin(std::size_t i) const;
    // Throws ShapeError when plane sizes disagree, ValidationError on labels
    // outside {0, 1} or non-finite band values.
    void validate() const;

    bool operator==(const RasterPatch&) const = default;
};

// "QPR1" | width u32 | height u32 | 4 float32 planes | u8 label plane, all LE.
std::string encode_qpr(const RasterPatch& patch);
RasterPatch decode_qpr(std::string_view bytes);
void write_qpr(const std::string& path, const RasterPatch& patch);
RasterPatch read_qpr(const std::string& path);

}  // namespace qksvm
