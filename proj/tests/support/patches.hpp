#pragma once

#include <functional>
#include <queue>
#include <set>

#include "qksvm/raster.hpp"

namespace qksvm::testing {

// Patch whose four bands all equal f(x, y); labels from g(x, y).
inline RasterPatch make_patch(std::uint32_t w, std::uint32_t h, const std::function<float(std::uint32_t, std::uint32_t)>& f,
                              const std::function<int(std::uint32_t, std::uint32_t)>& g = nullptr) {
    RasterPatch p(w, h);
    for (std::uint32_t y = 0; y < h; ++y)
        for (std::uint32_t x = 0; x < w; ++x) {
            const auto i = p.index(x, y);
            for (auto& b : p.bands) b[i] = f(x, y);
            p.ground_truth[i] = g ? static_cast<std::uint8_t>(g(x, y)) : 0;
        }
    return p;
}

// Number of 4-connected pieces of each label.
inline std::vector<int> component_counts(const std::vector<int>& labels, std::uint32_t w, std::uint32_t h, int count) {
    std::vector<int> pieces(static_cast<std::size_t>(count), 0);
    std::vector<char> seen(labels.size(), 0);
    for (std::size_t s = 0; s < labels.size(); ++s) {
        if (seen[s]) continue;
        ++pieces[static_cast<std::size_t>(labels[s])];
        std::queue<std::size_t> q;
        q.push(s);
        seen[s] = 1;
        while (!q.empty()) {
            const auto i = q.front();
            q.pop();
            const auto x = i % w, y = i / w;
            const std::size_t nb[4] = {x > 0 ? i - 1 : i, x + 1 < w ? i + 1 : i, y > 0 ? i - w : i, y + 1 < h ? i + w : i};
            for (auto j : nb)
                if (!seen[j] && labels[j] == labels[i]) {
                    seen[j] = 1;
                    q.push(j);
                }
        }
    }
    return pieces;
}

}  // namespace qksvm::testing
