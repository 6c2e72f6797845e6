#include "qksvm/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "qksvm/error.hpp"
#include "qksvm/random.hpp"

namespace qksvm {

namespace {

// Smooth noise in [0, 1]: a few octaves of bilinear-interpolated lattice values.
class ValueNoise {
  public:
    ValueNoise(Rng& rng, double base_cell, int octaves) : base_cell_(base_cell) {
        for (int o = 0; o < octaves; ++o) {
            Octave oct;
            oct.cell = base_cell / std::pow(2.0, o);
            oct.weight = std::pow(0.5, o);
            oct.size = 64;
            oct.lattice.resize(static_cast<std::size_t>(oct.size * oct.size));
            for (auto& v : oct.lattice) v = rng.uniform();
            total_ += oct.weight;
            octaves_.push_back(std::move(oct));
        }
    }

    double at(double x, double y) const {
        double s = 0.0;
        for (const auto& o : octaves_) s += o.weight * sample(o, x / o.cell, y / o.cell);
        return s / total_;
    }

  private:
    struct Octave {
        double cell = 1.0;
        double weight = 1.0;
        int size = 0;
        std::vector<double> lattice;
    };

    static double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

    static double sample(const Octave& o, double u, double v) {
        const double fu = std::floor(u), fv = std::floor(v);
        const int iu = static_cast<int>(fu), iv = static_cast<int>(fv);
        const double tu = smooth(u - fu), tv = smooth(v - fv);
        auto L = [&](int a, int b) {
            const int x = ((a % o.size) + o.size) % o.size, y = ((b % o.size) + o.size) % o.size;
            return o.lattice[static_cast<std::size_t>(y * o.size + x)];
        };
        const double top = L(iu, iv) * (1 - tu) + L(iu + 1, iv) * tu;
        const double bot = L(iu, iv + 1) * (1 - tu) + L(iu + 1, iv + 1) * tu;
        return top * (1 - tv) + bot * tv;
    }

    double base_cell_;
    double total_ = 0.0;
    std::vector<Octave> octaves_;
};

// Typical reflectances (blue, green, red, nir).
constexpr std::array<std::array<double, 4>, 4> kSurfaces{{
    {0.06, 0.07, 0.05, 0.03},  // water
    {0.05, 0.09, 0.06, 0.38},  // vegetation
    {0.12, 0.16, 0.21, 0.28},  // soil
    {0.30, 0.36, 0.42, 0.46},  // bright ground
}};
constexpr std::array<double, 4> kCloud{0.78, 0.76, 0.74, 0.70};

}  // namespace

void SceneSpec::validate() const {
    if (width == 0 || height == 0) throw ValidationError("scene dimensions must be positive");
    if (!(cloud_fraction >= 0.0 && cloud_fraction <= 1.0)) throw ValidationError("cloud_fraction must lie in [0, 1]");
}

RasterPatch generate_scene(const SceneSpec& spec) {
    spec.validate();
    const std::uint32_t w = spec.width, h = spec.height;
    const std::size_t n = std::size_t{w} * h;
    Rng rng(derive_seed(spec.seed, 0x5CE7E));
    RasterPatch patch(w, h);
    const double scale = std::max(w, h) / 384.0;

    // Margin: one or two empty corner triangles.
    std::vector<bool> margin(n, false);
    if (spec.margin) {
        const int corners = 1 + static_cast<int>(rng.below(2));
        const int first = static_cast<int>(rng.below(4));
        for (int c = 0; c < corners; ++c) {
            const int corner = (first + 2 * c) % 4;
            const double a = rng.uniform(0.15, 0.35) * w, b = rng.uniform(0.15, 0.35) * h;
            for (std::uint32_t y = 0; y < h; ++y)
                for (std::uint32_t x = 0; x < w; ++x) {
                    const double dx = (corner & 1) ? (w - 1.0 - x) : x;
                    const double dy = (corner & 2) ? (h - 1.0 - y) : y;
                    if (dx / a + dy / b < 1.0) margin[std::size_t{y} * w + x] = true;
                }
        }
    }

    // Land cover: a smooth field thresholded into the four surface types,
    // blended across a soft boundary, with brightness and grain variation.
    ValueNoise cover(rng, 90.0 * scale, 3), tone(rng, 40.0 * scale, 2);
    std::array<double, 3> cuts{rng.uniform(0.30, 0.38), rng.uniform(0.48, 0.56), rng.uniform(0.66, 0.74)};
    std::vector<std::array<double, 4>> surface(n);
    for (std::uint32_t y = 0; y < h; ++y)
        for (std::uint32_t x = 0; x < w; ++x) {
            const double c = cover.at(x, y);
            int t = 0;
            while (t < 3 && c > cuts[static_cast<std::size_t>(t)]) ++t;
            const double bright = 0.85 + 0.3 * tone.at(x, y);
            auto& s = surface[std::size_t{y} * w + x];
            for (int b = 0; b < 4; ++b)
                s[static_cast<std::size_t>(b)] =
                    std::max(0.01, kSurfaces[static_cast<std::size_t>(t)][static_cast<std::size_t>(b)] * bright + 0.01 * rng.normal());
        }

    // Cloud opacity from elliptical blobs with ragged edges.
    std::vector<double> alpha(n, 0.0);
    ValueNoise rag(rng, 12.0 * scale, 2), texture(rng, 20.0 * scale, 3);
    std::size_t non_margin = 0;
    for (bool m : margin) non_margin += !m;
    const auto target = static_cast<std::size_t>(std::llround(spec.cloud_fraction * static_cast<double>(n)));
    std::size_t labelled = 0;
    for (int blob = 0; blob < 10000 && labelled < target && labelled < non_margin; ++blob) {
        const double deficit = static_cast<double>(target - labelled);
        const double r_cap = std::sqrt(deficit / std::numbers::pi);
        const double r_max = std::max(4.0, std::min(70.0 * scale, 1.2 * r_cap));
        const double r_min = std::min(r_max, 20.0 * scale);
        const double rx = rng.uniform(r_min, r_max), ry = rx * rng.uniform(0.6, 1.0);
        const double cx = rng.uniform(0.0, w), cy = rng.uniform(0.0, h);
        const double theta = rng.uniform(0.0, std::numbers::pi);
        const double ct = std::cos(theta), st = std::sin(theta);
        const double peak = rng.uniform(0.75, 1.0);
        const double reach = 1.5 * std::max(rx, ry);
        const long x0 = std::max<long>(0, static_cast<long>(cx - reach)), x1 = std::min<long>(w - 1, static_cast<long>(cx + reach));
        const long y0 = std::max<long>(0, static_cast<long>(cy - reach)), y1 = std::min<long>(h - 1, static_cast<long>(cy + reach));
        for (long y = y0; y <= y1; ++y)
            for (long x = x0; x <= x1; ++x) {
                const std::size_t p = static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x);
                if (margin[p]) continue;
                const double dx = x - cx, dy = y - cy;
                const double u = (dx * ct + dy * st) / rx, v = (-dx * st + dy * ct) / ry;
                const double d = std::sqrt(u * u + v * v) + 0.35 * (rag.at(x, y) - 0.5);
                // Opacity falls from `peak` inside to 0 over the blob rim.
                const double a = peak * std::clamp((1.25 - d) / 0.5, 0.0, 1.0);
                if (a <= alpha[p]) continue;
                const bool was = alpha[p] >= 0.5;
                alpha[p] = a;
                if (!was && a >= 0.5) ++labelled;
            }
    }

    for (std::size_t p = 0; p < n; ++p) {
        if (margin[p]) continue;
        const std::uint32_t x = static_cast<std::uint32_t>(p % w), y = static_cast<std::uint32_t>(p / w);
        const double a = alpha[p];
        const double tex = 0.9 + 0.2 * texture.at(x, y);
        for (int b = 0; b < 4; ++b) {
            const double v = (1.0 - a) * surface[p][static_cast<std::size_t>(b)] + a * kCloud[static_cast<std::size_t>(b)] * tex;
            patch.bands[static_cast<std::size_t>(b)][p] = static_cast<float>(std::max(0.005, v));
        }
        patch.ground_truth[p] = a >= 0.5 ? 1 : 0;
    }
    return patch;
}

ToyDataset make_toy_dataset(int n, std::uint64_t seed) {
    if (n < 2) throw ValidationError("toy dataset needs at least two points");
    Rng rng(seed);
    ToyDataset d;
    d.X.resize(n, 2);
    d.y.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int label = i % 2 == 0 ? 1 : -1;
        const double c = label == 1 ? 0.25 : 0.75;
        for (int f = 0; f < 2; ++f) d.X(i, f) = std::clamp(c + 0.08 * rng.normal(), 0.0, 1.0);
        d.y[static_cast<std::size_t>(i)] = label;
    }
    return d;
}

}  // namespace qksvm
