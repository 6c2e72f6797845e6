#pragma once

#include <cstdint>
#include <optional>
#include <span>

namespace qksvm {

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + tn + fp + fn; }
    void add(int predicted, int truth);
    ConfusionCounts& operator+=(const ConfusionCounts& o);
    bool operator==(const ConfusionCounts&) const = default;
};

// Ratios with a zero denominator are empty rather than 0.
struct Metrics {
    double accuracy = 0.0;
    std::optional<double> jaccard;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> specificity;
};

// Positive class is +1. ValidationError on length mismatch or labels other than +-1.
ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> truth);

// ValidationError when all counts are zero.
Metrics compute_metrics(const ConfusionCounts& counts);

}  // namespace qksvm
