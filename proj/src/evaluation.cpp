#include "foggen/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace foggen {
namespace {

inline double choose2(double n) { return 0.5 * n * (n - 1.0); }

}  // namespace

std::uint64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    return *this;
}

void confusion_accumulate(const LabelMap& pred, const LabelMap& gt,
                          ConfusionMatrix& cm) {
    if (pred.width != gt.width || pred.height != gt.height)
        throw std::invalid_argument("confusion_accumulate: dimension mismatch");
    for (std::size_t i = 0; i < gt.ids.size(); ++i) {
        const std::uint8_t g = gt.ids[i];
        if (g == kVoidId) continue;
        const std::uint8_t p = pred.ids[i];
        if (g >= kNumClasses)
            throw std::invalid_argument("confusion_accumulate: invalid ground-truth id");
        if (p >= kNumClasses)
            throw std::invalid_argument(
                "confusion_accumulate: void/invalid prediction at evaluated pixel");
        ++cm.at(g, p);
    }
}

std::array<std::optional<double>, kNumClasses> class_iou(const ConfusionMatrix& cm) {
    std::array<std::uint64_t, kNumClasses> row_sum{};
    std::array<std::uint64_t, kNumClasses> col_sum{};
    for (int g = 0; g < kNumClasses; ++g) {
        for (int p = 0; p < kNumClasses; ++p) {
            row_sum[g] += cm.at(g, p);
            col_sum[p] += cm.at(g, p);
        }
    }
    std::array<std::optional<double>, kNumClasses> out;
    for (int c = 0; c < kNumClasses; ++c) {
        const std::uint64_t tp = cm.at(c, c);
        const std::uint64_t denom = row_sum[c] + col_sum[c] - tp;
        if (denom > 0)
            out[c] = static_cast<double>(tp) / static_cast<double>(denom);
    }
    return out;
}

double mean_iou(const ConfusionMatrix& cm, std::span<const std::uint8_t> class_subset) {
    if (class_subset.empty()) throw std::invalid_argument("mean_iou: empty class subset");
    const auto iou = class_iou(cm);
    double sum = 0.0;
    int present = 0;
    for (std::uint8_t c : class_subset) {
        if (c >= kNumClasses) throw std::invalid_argument("mean_iou: invalid class id");
        if (iou[c].has_value()) {
            sum += *iou[c];
            ++present;
        }
    }
    if (present == 0) throw std::runtime_error("mean_iou: nothing to evaluate");
    return sum / present;
}

double mean_iou_all(const ConfusionMatrix& cm) {
    static constexpr auto kAll = [] {
        std::array<std::uint8_t, kNumClasses> a{};
        for (int i = 0; i < kNumClasses; ++i) a[i] = static_cast<std::uint8_t>(i);
        return a;
    }();
    return mean_iou(cm, kAll);
}

std::vector<double> default_distance_edges() {
    return {0.0, 20.0, 50.0, 80.0, 120.0, 160.0, 230.0, 400.0,
            std::numeric_limits<double>::infinity()};
}

void confusion_accumulate_binned(const LabelMap& pred, const LabelMap& gt,
                                 const ScalarField& distance,
                                 std::span<const double> edges,
                                 std::span<ConfusionMatrix> bins) {
    if (pred.width != gt.width || pred.height != gt.height ||
        distance.width != gt.width || distance.height != gt.height)
        throw std::invalid_argument("distance_binned_iou: dimension mismatch");
    if (!distance.all_valid())
        throw std::invalid_argument("distance_binned_iou: distance map has holes");
    if (edges.size() < 2)
        throw std::invalid_argument("distance_binned_iou: need at least two edges");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1]))
            throw std::invalid_argument("distance_binned_iou: edges must increase");
    if (bins.size() != edges.size() - 1)
        throw std::invalid_argument("distance_binned_iou: bin count mismatch");

    for (std::size_t b = 0; b < bins.size(); ++b) {
        LabelMap masked = gt;
        for (std::size_t i = 0; i < masked.ids.size(); ++i) {
            const double l = distance.values[i];
            if (!(l >= edges[b] && l < edges[b + 1])) masked.ids[i] = kVoidId;
        }
        confusion_accumulate(pred, masked, bins[b]);
    }
}

std::vector<DistanceBin> distance_binned_iou(const LabelMap& pred, const LabelMap& gt,
                                             const ScalarField& distance,
                                             std::span<const double> edges) {
    std::vector<ConfusionMatrix> cms(edges.size() < 2 ? 0 : edges.size() - 1);
    confusion_accumulate_binned(pred, gt, distance, edges, cms);

    std::vector<DistanceBin> out(cms.size());
    for (std::size_t b = 0; b < out.size(); ++b) {
        out[b].lo = edges[b];
        out[b].hi = edges[b + 1];
        out[b].pixels = cms[b].total();
        if (out[b].pixels > 0) out[b].miou = mean_iou_all(cms[b]);
    }
    return out;
}

double agreement_coefficient(const PairwiseCounts& counts) {
    if (counts.subjects < 2)
        throw std::invalid_argument("agreement_coefficient: need at least 2 subjects");
    if (counts.options < 2)
        throw std::invalid_argument("agreement_coefficient: need at least 2 options");

    double sigma = 0.0;
    for (int i = 0; i < counts.options; ++i) {
        for (int j = 0; j < counts.options; ++j) {
            if (i == j) continue;
            sigma += choose2(static_cast<double>(counts.at(i, j)));
        }
    }
    const double denom =
        choose2(counts.subjects) * choose2(static_cast<double>(counts.options));
    return 2.0 * sigma / denom - 1.0;
}

double kendall_tau(std::span<const double> rank_a, std::span<const double> rank_b) {
    if (rank_a.size() != rank_b.size())
        throw std::invalid_argument("kendall_tau: length mismatch");
    const std::size_t n = rank_a.size();
    if (n < 2) throw std::invalid_argument("kendall_tau: need at least 2 items");

    // O(n^2) pair scan with tau-b tie correction; rankings here are short
    // (handfuls of methods), so the quadratic form is the clear choice.
    std::int64_t concordant = 0, discordant = 0;
    std::int64_t ties_a = 0, ties_b = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double da = rank_a[i] - rank_a[j];
            const double db = rank_b[i] - rank_b[j];
            if (da == 0.0 && db == 0.0) {
                ++ties_a;
                ++ties_b;
            } else if (da == 0.0) {
                ++ties_a;
            } else if (db == 0.0) {
                ++ties_b;
            } else if ((da > 0.0) == (db > 0.0)) {
                ++concordant;
            } else {
                ++discordant;
            }
        }
    }
    const double n0 = choose2(static_cast<double>(n));
    const double denom = std::sqrt((n0 - ties_a) * (n0 - ties_b));
    if (denom == 0.0) throw std::runtime_error("kendall_tau: a ranking has no variation");
    return (concordant - discordant) / denom;
}

}  // namespace foggen
