#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "foggen/dataset.hpp"
#include "foggen/image.hpp"

namespace foggen {

// Ground truth indexes rows, predictions index columns; void pixels are
// never counted.
struct ConfusionMatrix {
    std::array<std::uint64_t, static_cast<std::size_t>(kNumClasses) * kNumClasses>
        counts{};

    std::uint64_t& at(int gt, int pred) {
        return counts[static_cast<std::size_t>(gt) * kNumClasses + pred];
    }
    std::uint64_t at(int gt, int pred) const {
        return counts[static_cast<std::size_t>(gt) * kNumClasses + pred];
    }
    std::uint64_t total() const;
    ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

void confusion_accumulate(const LabelMap& pred, const LabelMap& gt, ConfusionMatrix& cm);

// Per-class intersection over union; nullopt for classes absent from both
// prediction and ground truth.
std::array<std::optional<double>, kNumClasses> class_iou(const ConfusionMatrix& cm);

// Mean IoU over the subset, skipping absent classes. Throws when every class
// in the subset is absent.
double mean_iou(const ConfusionMatrix& cm,
                std::span<const std::uint8_t> class_subset = kFrequentClasses);
double mean_iou_all(const ConfusionMatrix& cm);

struct DistanceBin {
    double lo = 0.0;
    double hi = 0.0;                // exclusive
    std::optional<double> miou;     // nullopt when the bin holds no evaluated pixels
    std::uint64_t pixels = 0;       // evaluated (non-void) pixels in the bin
};

// Mean IoU restricted to half-open distance ranges [lo, hi); pixels outside
// a bin are treated as void for that bin.
std::vector<DistanceBin> distance_binned_iou(const LabelMap& pred, const LabelMap& gt,
                                             const ScalarField& distance,
                                             std::span<const double> edges);

// Adds one image's counts into per-bin confusion matrices (bins.size() must
// be edges.size()-1); lets callers aggregate binned IoU across a dataset.
void confusion_accumulate_binned(const LabelMap& pred, const LabelMap& gt,
                                 const ScalarField& distance,
                                 std::span<const double> edges,
                                 std::span<ConfusionMatrix> bins);

// Default distance-bin edges in meters (last bin open-ended).
std::vector<double> default_distance_edges();

// a(i,j) = number of subjects preferring option i over option j.
struct PairwiseCounts {
    int options = 0;   // t
    int subjects = 0;  // m, per comparison
    std::vector<std::uint64_t> a;

    PairwiseCounts() = default;
    PairwiseCounts(int t, int m)
        : options(t), subjects(m), a(static_cast<std::size_t>(t) * t, 0) {}
    std::uint64_t& at(int i, int j) {
        return a[static_cast<std::size_t>(i) * options + j];
    }
    std::uint64_t at(int i, int j) const {
        return a[static_cast<std::size_t>(i) * options + j];
    }
};

// Coefficient of agreement mu = 2*sigma / (C(m,2)*C(t,2)) - 1 with
// sigma = sum over ordered pairs of C(a_ij, 2).
double agreement_coefficient(const PairwiseCounts& counts);

// Kendall rank correlation between two equal-length rankings; ties handled
// by the tau-b normalization.
double kendall_tau(std::span<const double> rank_a, std::span<const double> rank_b);

}  // namespace foggen
