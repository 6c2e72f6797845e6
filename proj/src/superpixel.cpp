#include "qksvm/superpixel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qksvm/error.hpp"

namespace qksvm {

double percentile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw ShapeError("percentile of an empty set");
    const double pos = (q / 100.0) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

std::array<double, kStatsPerBand> band_statistics(std::vector<double> values) {
    if (values.empty()) throw ShapeError("statistics of an empty segment");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= n;
    // Rounding can push the mean a hair outside [min, max] for constant data.
    mean = std::clamp(mean, values.front(), values.back());
    return {mean,
            percentile_sorted(values, 50.0),
            percentile_sorted(values, 75.0) - percentile_sorted(values, 25.0),
            values.front(),
            values.back(),
            std::sqrt(var)};
}

PatchReduction reduce_patch_detailed(const RasterPatch& patch, const SlicConfig& cfg) {
    PatchReduction out;
    out.segmentation = slic_segment(patch, cfg);
    const auto& seg = out.segmentation;
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(seg.count));
    for (std::size_t p = 0; p < seg.labels.size(); ++p)
        if (!patch.is_margin(p)) members[static_cast<std::size_t>(seg.labels[p])].push_back(p);

    out.segment_to_superpixel.assign(static_cast<std::size_t>(seg.count), -1);
    for (int s = 0; s < seg.count; ++s) {
        const auto& px = members[static_cast<std::size_t>(s)];
        if (px.empty()) continue;
        Superpixel sp;
        for (int b = 0; b < kBandCount; ++b) {
            std::vector<double> vals;
            vals.reserve(px.size());
            for (std::size_t p : px) vals.push_back(patch.bands[static_cast<std::size_t>(b)][p]);
            const auto st = band_statistics(std::move(vals));
            std::copy(st.begin(), st.end(), sp.features.begin() + b * kStatsPerBand);
        }
        std::size_t cloud = 0;
        for (std::size_t p : px) cloud += patch.ground_truth[p] == 1;
        const std::size_t clear = px.size() - cloud;
        sp.label = cloud > clear ? 1 : -1;
        sp.pixel_count = px.size();
        sp.vote_ratio = static_cast<double>(std::max(cloud, clear)) / static_cast<double>(px.size());
        out.segment_to_superpixel[static_cast<std::size_t>(s)] = static_cast<int>(out.superpixels.size());
        out.superpixels.push_back(sp);
    }
    return out;
}

std::vector<Superpixel> reduce_patch(const RasterPatch& patch, const SlicConfig& cfg) {
    return reduce_patch_detailed(patch, cfg).superpixels;
}

std::vector<std::string> superpixel_csv_columns() {
    std::vector<std::string> cols;
    for (const char* band : kBandNames)
        for (const char* stat : kStatNames) cols.push_back(std::string(band) + "_" + stat);
    cols.emplace_back("label");
    cols.emplace_back("pixel_count");
    cols.emplace_back("vote_ratio");
    return cols;
}

std::string superpixel_csv_header() {
    std::string h;
    for (const auto& c : superpixel_csv_columns()) {
        if (!h.empty()) h += ',';
        h += c;
    }
    return h;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_superpixel_csv(const std::string& path, std::span<const Superpixel> rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    out << superpixel_csv_header() << '\n';
    for (const auto& sp : rows) {
        for (double f : sp.features) out << format_double(f) << ',';
        out << sp.label << ',' << sp.pixel_count << ',' << format_double(sp.vote_ratio) << '\n';
    }
    if (!out) throw FormatError("write failed for " + path);
}

namespace {

double parse_double(std::string_view s, const std::string& where) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw FormatError(where + ": bad number '" + std::string(s) + "'");
    return v;
}

}  // namespace

std::vector<Superpixel> read_superpixel_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != superpixel_csv_header())
        throw FormatError(path + ": unexpected superpixel CSV header");
    std::vector<Superpixel> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        std::vector<std::string_view> cells;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            cells.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (cells.size() != kFeatureCount + 3) throw FormatError(where + ": wrong column count");
        Superpixel sp;
        for (int f = 0; f < kFeatureCount; ++f) sp.features[static_cast<std::size_t>(f)] = parse_double(cells[static_cast<std::size_t>(f)], where);
        const double label = parse_double(cells[kFeatureCount], where);
        if (label != 1.0 && label != -1.0) throw FormatError(where + ": label must be 1 or -1");
        sp.label = static_cast<int>(label);
        const double count = parse_double(cells[kFeatureCount + 1], where);
        if (count < 0 || count != std::floor(count)) throw FormatError(where + ": bad pixel_count");
        sp.pixel_count = static_cast<std::size_t>(count);
        sp.vote_ratio = parse_double(cells[kFeatureCount + 2], where);
        rows.push_back(sp);
    }
    return rows;
}

}  // namespace qksvm
