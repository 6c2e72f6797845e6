#include "qksvm/slic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "qksvm/error.hpp"

namespace qksvm {

namespace {

struct Center {
    std::array<double, kBandCount> color{};
    double x = 0.0;
    double y = 0.0;
};

// 4-connected components of equal labels; returns component id per pixel.
int label_components(const std::vector<int>& labels, std::uint32_t w, std::uint32_t h, std::vector<int>& comp) {
    comp.assign(labels.size(), -1);
    std::vector<std::size_t> stack;
    int count = 0;
    for (std::size_t start = 0; start < labels.size(); ++start) {
        if (comp[start] >= 0) continue;
        comp[start] = count;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            const std::uint32_t x = static_cast<std::uint32_t>(p % w), y = static_cast<std::uint32_t>(p / w);
            auto visit = [&](std::size_t q) {
                if (comp[q] < 0 && labels[q] == labels[start]) {
                    comp[q] = count;
                    stack.push_back(q);
                }
            };
            if (x > 0) visit(p - 1);
            if (x + 1 < w) visit(p + 1);
            if (y > 0) visit(p - w);
            if (y + 1 < h) visit(p + w);
        }
        ++count;
    }
    return count;
}

}  // namespace

void SlicConfig::validate() const {
    if (n_segments < 1) throw ValidationError("n_segments must be >= 1");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be finite and >= 0");
    if (!(compactness > 0.0) || !std::isfinite(compactness)) throw ValidationError("compactness must be positive");
    if (iterations < 1) throw ValidationError("iterations must be >= 1");
}

std::pair<int, int> slic_grid(int n_segments, std::uint32_t width, std::uint32_t height) {
    const double aspect = static_cast<double>(height) / static_cast<double>(width);
    int ny = std::max(1, static_cast<int>(std::lround(std::sqrt(n_segments * aspect))));
    ny = std::min<int>(ny, static_cast<int>(height));
    int nx = std::max(1, n_segments / ny);
    nx = std::min<int>(nx, static_cast<int>(width));
    return {ny, nx};
}

std::vector<double> gaussian_blur(const std::vector<double>& plane, std::uint32_t w, std::uint32_t h, double sigma) {
    if (sigma <= 0.0) return plane;
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double v = std::exp(-0.5 * k * k / (sigma * sigma));
        kernel[static_cast<std::size_t>(k + radius)] = v;
        total += v;
    }
    for (auto& v : kernel) v /= total;
    const auto clampi = [](long v, long hi) { return std::clamp<long>(v, 0, hi); };

    std::vector<double> tmp(plane.size()), out(plane.size());
    for (std::uint32_t y = 0; y < h; ++y)
        for (std::uint32_t x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k)
                s += kernel[static_cast<std::size_t>(k + radius)] *
                     plane[std::size_t{y} * w + static_cast<std::size_t>(clampi(long{x} + k, long{w} - 1))];
            tmp[std::size_t{y} * w + x] = s;
        }
    for (std::uint32_t y = 0; y < h; ++y)
        for (std::uint32_t x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k)
                s += kernel[static_cast<std::size_t>(k + radius)] *
                     tmp[static_cast<std::size_t>(clampi(long{y} + k, long{h} - 1)) * w + x];
            out[std::size_t{y} * w + x] = s;
        }
    return out;
}

int enforce_connectivity(std::vector<int>& labels, std::uint32_t w, std::uint32_t h) {
    std::vector<int> comp;
    const int n_comp = label_components(labels, w, h, comp);
    std::vector<std::size_t> comp_size(static_cast<std::size_t>(n_comp), 0);
    std::vector<int> comp_label(static_cast<std::size_t>(n_comp), -1);
    for (std::size_t p = 0; p < labels.size(); ++p) {
        ++comp_size[static_cast<std::size_t>(comp[p])];
        comp_label[static_cast<std::size_t>(comp[p])] = labels[p];
    }
    // Largest component per label is kept; first in scan order wins ties.
    int max_label = 0;
    for (int l : labels) max_label = std::max(max_label, l);
    std::vector<int> keeper(static_cast<std::size_t>(max_label) + 1, -1);
    for (int c = 0; c < n_comp; ++c) {
        auto& k = keeper[static_cast<std::size_t>(comp_label[static_cast<std::size_t>(c)])];
        if (k < 0 || comp_size[static_cast<std::size_t>(c)] > comp_size[static_cast<std::size_t>(k)]) k = c;
    }
    // group[c]: label a component currently belongs to, -1 while orphaned.
    std::vector<int> group(static_cast<std::size_t>(n_comp), -1);
    std::vector<std::size_t> group_size(static_cast<std::size_t>(max_label) + 1, 0);
    for (int l = 0; l <= max_label; ++l) {
        const int k = keeper[static_cast<std::size_t>(l)];
        if (k >= 0) {
            group[static_cast<std::size_t>(k)] = l;
            group_size[static_cast<std::size_t>(l)] = comp_size[static_cast<std::size_t>(k)];
        }
    }
    // Pixel lists per component, for neighbour scans.
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(n_comp));
    for (std::size_t p = 0; p < labels.size(); ++p) members[static_cast<std::size_t>(comp[p])].push_back(p);

    bool pending = true;
    while (pending) {
        pending = false;
        bool progress = false;
        for (int c = 0; c < n_comp; ++c) {
            if (group[static_cast<std::size_t>(c)] >= 0) continue;
            int best = -1;
            for (std::size_t p : members[static_cast<std::size_t>(c)]) {
                const std::uint32_t x = static_cast<std::uint32_t>(p % w), y = static_cast<std::uint32_t>(p / w);
                std::array<std::size_t, 4> nb{};
                int count = 0;
                if (x > 0) nb[count++] = p - 1;
                if (x + 1 < w) nb[count++] = p + 1;
                if (y > 0) nb[count++] = p - w;
                if (y + 1 < h) nb[count++] = p + w;
                for (int k = 0; k < count; ++k) {
                    const int g = group[static_cast<std::size_t>(comp[nb[static_cast<std::size_t>(k)]])];
                    if (g < 0 || comp[nb[static_cast<std::size_t>(k)]] == c) continue;
                    if (best < 0 || group_size[static_cast<std::size_t>(g)] > group_size[static_cast<std::size_t>(best)] ||
                        (group_size[static_cast<std::size_t>(g)] == group_size[static_cast<std::size_t>(best)] && g < best))
                        best = g;
                }
            }
            if (best < 0) {
                pending = true;
                continue;
            }
            group[static_cast<std::size_t>(c)] = best;
            group_size[static_cast<std::size_t>(best)] += comp_size[static_cast<std::size_t>(c)];
            progress = true;
        }
        if (pending && !progress) throw Error("connectivity pass could not place an isolated component");
    }

    std::vector<int> remap(static_cast<std::size_t>(max_label) + 1, -1);
    int next = 0;
    for (std::size_t p = 0; p < labels.size(); ++p) {
        const int g = group[static_cast<std::size_t>(comp[p])];
        auto& r = remap[static_cast<std::size_t>(g)];
        if (r < 0) r = next++;
        labels[p] = r;
    }
    return next;
}

Segmentation slic_segment(const RasterPatch& patch, const SlicConfig& cfg) {
    cfg.validate();
    patch.validate();
    const std::uint32_t w = patch.width, h = patch.height;
    const std::size_t n = patch.pixel_count();
    if (n == 0) throw ValidationError("cannot segment an empty patch");
    if (static_cast<std::size_t>(cfg.n_segments) > n) {
        std::ostringstream msg;
        msg << "n_segments " << cfg.n_segments << " exceeds the pixel count " << n;
        throw ValidationError(msg.str());
    }

    // Per-band min-max scaling to [0, 1], then smoothing.
    std::array<std::vector<double>, kBandCount> img;
    for (int b = 0; b < kBandCount; ++b) {
        const auto& src = patch.bands[static_cast<std::size_t>(b)];
        const auto [lo, hi] = std::minmax_element(src.begin(), src.end());
        const double range = static_cast<double>(*hi) - static_cast<double>(*lo);
        std::vector<double> plane(n);
        for (std::size_t i = 0; i < n; ++i)
            plane[i] = range > 0.0 ? (static_cast<double>(src[i]) - *lo) / range : 0.0;
        img[static_cast<std::size_t>(b)] = gaussian_blur(plane, w, h, cfg.sigma);
    }

    const auto [ny, nx] = slic_grid(cfg.n_segments, w, h);
    const double step_x = static_cast<double>(w) / nx, step_y = static_cast<double>(h) / ny;
    const double S = std::sqrt(static_cast<double>(n) / (static_cast<double>(nx) * ny));
    const double window = std::ceil(std::max({S, step_x, step_y}));
    const double spatial = (cfg.compactness / S) * (cfg.compactness / S);

    std::vector<Center> centers;
    std::vector<int> labels(n, 0);
    for (int r = 0; r < ny; ++r)
        for (int c = 0; c < nx; ++c) {
            Center ctr;
            ctr.x = (c + 0.5) * step_x;
            ctr.y = (r + 0.5) * step_y;
            const auto px = std::min<std::uint32_t>(static_cast<std::uint32_t>(ctr.x), w - 1);
            const auto py = std::min<std::uint32_t>(static_cast<std::uint32_t>(ctr.y), h - 1);
            for (int b = 0; b < kBandCount; ++b)
                ctr.color[static_cast<std::size_t>(b)] = img[static_cast<std::size_t>(b)][std::size_t{py} * w + px];
            centers.push_back(ctr);
        }
    // Initial assignment: the grid cell each pixel falls in.
    for (std::uint32_t y = 0; y < h; ++y)
        for (std::uint32_t x = 0; x < w; ++x) {
            const int r = std::min(ny - 1, static_cast<int>(y / step_y));
            const int c = std::min(nx - 1, static_cast<int>(x / step_x));
            labels[std::size_t{y} * w + x] = r * nx + c;
        }

    std::vector<double> dist(n);
    const int k_count = static_cast<int>(centers.size());
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        for (int k = 0; k < k_count; ++k) {
            const auto& ctr = centers[static_cast<std::size_t>(k)];
            const long x0 = std::max<long>(0, static_cast<long>(std::floor(ctr.x - window)));
            const long x1 = std::min<long>(long{w} - 1, static_cast<long>(std::ceil(ctr.x + window)));
            const long y0 = std::max<long>(0, static_cast<long>(std::floor(ctr.y - window)));
            const long y1 = std::min<long>(long{h} - 1, static_cast<long>(std::ceil(ctr.y + window)));
            for (long y = y0; y <= y1; ++y)
                for (long x = x0; x <= x1; ++x) {
                    const std::size_t p = static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x);
                    double dc = 0.0;
                    for (int b = 0; b < kBandCount; ++b) {
                        const double d = img[static_cast<std::size_t>(b)][p] - ctr.color[static_cast<std::size_t>(b)];
                        dc += d * d;
                    }
                    // Pixel centres sit at integer + 0.5.
                    const double dx = static_cast<double>(x) + 0.5 - ctr.x, dy = static_cast<double>(y) + 0.5 - ctr.y;
                    const double D = dc + (dx * dx + dy * dy) * spatial;
                    if (D < dist[p]) {
                        dist[p] = D;
                        labels[p] = k;
                    }
                }
        }
        std::vector<Center> sum(centers.size());
        std::vector<std::size_t> count(centers.size(), 0);
        for (std::size_t p = 0; p < n; ++p) {
            const auto k = static_cast<std::size_t>(labels[p]);
            for (int b = 0; b < kBandCount; ++b) sum[k].color[static_cast<std::size_t>(b)] += img[static_cast<std::size_t>(b)][p];
            sum[k].x += static_cast<double>(p % w) + 0.5;
            sum[k].y += static_cast<double>(p / w) + 0.5;
            ++count[k];
        }
        for (std::size_t k = 0; k < centers.size(); ++k) {
            if (count[k] == 0) continue;
            const double inv = 1.0 / static_cast<double>(count[k]);
            for (int b = 0; b < kBandCount; ++b) centers[k].color[static_cast<std::size_t>(b)] = sum[k].color[static_cast<std::size_t>(b)] * inv;
            centers[k].x = sum[k].x * inv;
            centers[k].y = sum[k].y * inv;
        }
    }

    Segmentation seg;
    seg.width = w;
    seg.height = h;
    seg.count = enforce_connectivity(labels, w, h);
    seg.labels = std::move(labels);
    return seg;
}

}  // namespace qksvm
