#include "qksvm/metrics.hpp"

#include "qksvm/error.hpp"

namespace qksvm {

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

void ConfusionCounts::add(int predicted, int truth) {
    if ((predicted != 1 && predicted != -1) || (truth != 1 && truth != -1))
        throw ValidationError("confusion counts take +1/-1 labels");
    if (truth == 1)
        (predicted == 1 ? tp : fn) += 1;
    else
        (predicted == 1 ? fp : tn) += 1;
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    return *this;
}

ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) throw ValidationError("prediction and truth lengths differ");
    ConfusionCounts c;
    for (std::size_t i = 0; i < truth.size(); ++i) c.add(predicted[i], truth[i]);
    return c;
}

Metrics compute_metrics(const ConfusionCounts& c) {
    if (c.total() == 0) throw ValidationError("metrics of an empty confusion matrix");
    Metrics m;
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    m.jaccard = ratio(c.tp, c.tp + c.fn + c.fp);
    m.precision = ratio(c.tp, c.tp + c.fp);
    m.recall = ratio(c.tp, c.tp + c.fn);
    m.specificity = ratio(c.tn, c.tn + c.fp);
    return m;
}

}  // namespace qksvm
