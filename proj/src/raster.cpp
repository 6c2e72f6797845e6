#include "qksvm/raster.hpp"

#include <cmath>

#include "binary_io.hpp"
#include "qksvm/error.hpp"

namespace qksvm {

RasterPatch::RasterPatch(std::uint32_t w, std::uint32_t h) : width(w), height(h) {
    for (auto& b : bands) b.assign(std::size_t{w} * h, 0.0f);
    ground_truth.assign(std::size_t{w} * h, 0);
}

bool RasterPatch::is_margin(std::size_t i) const {
    for (const auto& b : bands)
        if (b[i] != 0.0f) return false;
    return true;
}

void RasterPatch::validate() const {
    const std::size_t n = pixel_count();
    for (const auto& b : bands)
        if (b.size() != n) throw ShapeError("band plane size does not match width * height");
    if (ground_truth.size() != n) throw ShapeError("label plane size does not match width * height");
    for (const auto& b : bands)
        for (float v : b)
            if (!std::isfinite(v)) throw ValidationError("band values must be finite");
    for (auto l : ground_truth)
        if (l > 1) throw ValidationError("ground truth labels must be 0 or 1");
}

std::string encode_qpr(const RasterPatch& patch) {
    patch.validate();
    std::string out = "QPR1";
    out.reserve(12 + patch.pixel_count() * 17);
    detail::put_le<std::uint32_t>(out, patch.width);
    detail::put_le<std::uint32_t>(out, patch.height);
    for (const auto& b : patch.bands)
        for (float v : b) detail::put_f32(out, v);
    for (auto l : patch.ground_truth) out.push_back(static_cast<char>(l));
    return out;
}

RasterPatch decode_qpr(std::string_view bytes) {
    detail::ByteReader in(bytes, "QPR1");
    if (in.remaining() < 4 || in.take(4) != "QPR1") throw FormatError("not a QPR1 raster (bad magic)");
    const auto w = in.get_le<std::uint32_t>();
    const auto h = in.get_le<std::uint32_t>();
    const std::size_t n = std::size_t{w} * h;
    if (in.remaining() != n * 17) throw FormatError("QPR1: payload size does not match the header");
    RasterPatch p(w, h);
    for (auto& b : p.bands)
        for (auto& v : b) v = in.get_f32();
    for (auto& l : p.ground_truth) l = in.get_le<std::uint8_t>();
    try {
        p.validate();
    } catch (const Error& e) {
        throw FormatError(std::string("QPR1: ") + e.what());
    }
    return p;
}

void write_qpr(const std::string& path, const RasterPatch& patch) { detail::write_file_bytes(path, encode_qpr(patch)); }

RasterPatch read_qpr(const std::string& path) {
    try {
        return decode_qpr(detail::read_file_bytes(path));
    } catch (const Error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

}  // namespace qksvm
