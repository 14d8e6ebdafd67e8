#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "foggen/evaluation.hpp"
#include "foggen/rng.hpp"

using namespace foggen;

namespace {

LabelMap random_labels(int w, int h, std::uint64_t seed, double void_fraction = 0.1) {
    LabelMap m(w, h);
    SplitMix64 rng(seed);
    for (auto& id : m.ids)
        id = rng.next_double() < void_fraction
                 ? kVoidId
                 : static_cast<std::uint8_t>(rng.next_below(kNumClasses));
    return m;
}

}  // namespace

TEST_SUITE("confusion") {
    TEST_CASE("perfect prediction fills only the diagonal") {
        const LabelMap gt = random_labels(32, 24, 1);
        ConfusionMatrix cm;
        confusion_accumulate(gt, gt, cm);
        std::uint64_t non_void = 0;
        for (auto id : gt.ids)
            if (id != kVoidId) ++non_void;
        CHECK(cm.total() == non_void);
        for (int i = 0; i < kNumClasses; ++i)
            for (int j = 0; j < kNumClasses; ++j)
                if (i != j) CHECK(cm.at(i, j) == 0);
    }

    TEST_CASE("void ground truth is ignored even under invalid predictions") {
        LabelMap gt(4, 1, kVoidId);
        LabelMap pred(4, 1, 0);
        pred.at(2, 0) = 200;  // invalid but under void gt
        ConfusionMatrix cm;
        confusion_accumulate(pred, gt, cm);
        CHECK(cm.total() == 0);
    }

    TEST_CASE("counts match a brute-force tally") {
        const LabelMap gt = random_labels(40, 30, 2);
        const LabelMap pred = random_labels(40, 30, 3, 0.0);
        ConfusionMatrix cm;
        confusion_accumulate(pred, gt, cm);
        ConfusionMatrix ref;
        for (std::size_t i = 0; i < gt.ids.size(); ++i)
            if (gt.ids[i] != kVoidId) ++ref.at(gt.ids[i], pred.ids[i]);
        CHECK(cm.counts == ref.counts);
    }

    TEST_CASE("accumulation adds across images") {
        const LabelMap gt1 = random_labels(16, 16, 4);
        const LabelMap pred1 = random_labels(16, 16, 5, 0.0);
        const LabelMap gt2 = random_labels(16, 16, 6);
        const LabelMap pred2 = random_labels(16, 16, 7, 0.0);
        ConfusionMatrix joint, a, b;
        confusion_accumulate(pred1, gt1, joint);
        confusion_accumulate(pred2, gt2, joint);
        confusion_accumulate(pred1, gt1, a);
        confusion_accumulate(pred2, gt2, b);
        a += b;
        CHECK(joint.counts == a.counts);
    }

    TEST_CASE("invalid ids and size mismatches are rejected") {
        LabelMap gt(2, 2, 0);
        LabelMap pred(2, 2, 0);
        ConfusionMatrix cm;
        pred.at(0, 0) = 19;
        CHECK_THROWS_AS(confusion_accumulate(pred, gt, cm), std::invalid_argument);
        pred.at(0, 0) = 0;
        gt.at(1, 1) = 42;  // neither a class nor void
        CHECK_THROWS_AS(confusion_accumulate(pred, gt, cm), std::invalid_argument);
        CHECK_THROWS_AS(confusion_accumulate(LabelMap(3, 2, 0), LabelMap(2, 2, 0), cm),
                        std::invalid_argument);
    }
}

TEST_SUITE("iou") {
    TEST_CASE("half-wrong single class scores 0.5") {
        LabelMap gt(10, 10, 0);       // 100 road pixels
        LabelMap pred(10, 10, 0);
        for (int x = 0; x < 10; ++x)
            for (int y = 0; y < 5; ++y) pred.at(x, y) = 2;  // half mislabeled
        ConfusionMatrix cm;
        confusion_accumulate(pred, gt, cm);
        const auto iou = class_iou(cm);
        REQUIRE(iou[0].has_value());
        CHECK(*iou[0] == doctest::Approx(0.5).epsilon(1e-12));
        REQUIRE(iou[2].has_value());  // present via prediction only
        CHECK(*iou[2] == 0.0);
    }

    TEST_CASE("classes absent from both sides are excluded") {
        LabelMap gt(8, 8, 0);
        ConfusionMatrix cm;
        confusion_accumulate(gt, gt, cm);
        const auto iou = class_iou(cm);
        CHECK(iou[0] == 1.0);
        for (int c = 1; c < kNumClasses; ++c) CHECK_FALSE(iou[c].has_value());
        CHECK(mean_iou_all(cm) == 1.0);  // only the present class counts
    }

    TEST_CASE("frequent-class mean skips infrequent classes") {
        LabelMap gt(8, 2, 0);
        LabelMap pred(8, 2, 0);
        for (int x = 0; x < 8; ++x) {
            gt.at(x, 1) = 3;    // wall: not in the frequent subset
            pred.at(x, 1) = 4;  // all wrong
        }
        ConfusionMatrix cm;
        confusion_accumulate(pred, gt, cm);
        CHECK(mean_iou(cm) == 1.0);                       // road only
        CHECK(mean_iou_all(cm) == doctest::Approx(1.0 / 3.0));  // road, wall, fence
    }

    TEST_CASE("an empty matrix has nothing to evaluate") {
        ConfusionMatrix cm;
        CHECK_THROWS_AS(mean_iou(cm), std::runtime_error);
        CHECK_THROWS_AS(mean_iou_all(cm), std::runtime_error);
    }

    TEST_CASE("consistent relabeling permutes per-class IoU") {
        const LabelMap gt = random_labels(32, 32, 8);
        const LabelMap pred = random_labels(32, 32, 9, 0.0);
        ConfusionMatrix cm;
        confusion_accumulate(pred, gt, cm);
        const auto iou = class_iou(cm);

        // Swap classes 0 and 5 everywhere.
        auto swap05 = [](LabelMap m) {
            for (auto& id : m.ids)
                id = id == 0 ? 5 : (id == 5 ? std::uint8_t{0} : id);
            return m;
        };
        ConfusionMatrix cm2;
        confusion_accumulate(swap05(pred), swap05(gt), cm2);
        const auto iou2 = class_iou(cm2);
        CHECK(iou2[0] == iou[5]);
        CHECK(iou2[5] == iou[0]);
        for (int c = 0; c < kNumClasses; ++c)
            if (c != 0 && c != 5) CHECK(iou2[c] == iou[c]);
        CHECK(mean_iou_all(cm2) == doctest::Approx(mean_iou_all(cm)).epsilon(1e-12));
    }
}

TEST_SUITE("distance_binned") {
    TEST_CASE("a single unbounded bin reproduces the plain scores") {
        const LabelMap gt = random_labels(24, 24, 10);
        const LabelMap pred = random_labels(24, 24, 11, 0.0);
        ScalarField dist = ScalarField::complete(24, 24);
        SplitMix64 rng(12);
        for (double& v : dist.values) v = rng.next_double() * 400.0;

        const std::array<double, 2> edges{0.0, std::numeric_limits<double>::infinity()};
        const auto bins = distance_binned_iou(pred, gt, dist, edges);
        REQUIRE(bins.size() == 1);
        ConfusionMatrix cm;
        confusion_accumulate(pred, gt, cm);
        REQUIRE(bins[0].miou.has_value());
        CHECK(*bins[0].miou == doctest::Approx(mean_iou_all(cm)).epsilon(1e-12));
        CHECK(bins[0].pixels == cm.total());
    }

    TEST_CASE("bins partition the evaluated pixels") {
        const LabelMap gt = random_labels(32, 32, 13);
        const LabelMap pred = random_labels(32, 32, 14, 0.0);
        ScalarField dist = ScalarField::complete(32, 32);
        SplitMix64 rng(15);
        for (double& v : dist.values) v = rng.next_double() * 500.0;

        const auto edges = default_distance_edges();
        const auto bins = distance_binned_iou(pred, gt, dist, edges);
        REQUIRE(bins.size() == edges.size() - 1);
        ConfusionMatrix cm;
        confusion_accumulate(pred, gt, cm);
        std::uint64_t sum = 0;
        for (const auto& b : bins) sum += b.pixels;
        CHECK(sum == cm.total());
        for (std::size_t i = 0; i < bins.size(); ++i) {
            CHECK(bins[i].lo == edges[i]);
            CHECK(bins[i].hi == edges[i + 1]);
        }
    }

    TEST_CASE("binning equals manual masking") {
        const LabelMap gt = random_labels(20, 20, 16);
        const LabelMap pred = random_labels(20, 20, 17, 0.0);
        ScalarField dist = ScalarField::complete(20, 20);
        SplitMix64 rng(18);
        for (double& v : dist.values) v = rng.next_double() * 100.0;

        const std::array<double, 3> edges{0.0, 50.0, 100.0};
        const auto bins = distance_binned_iou(pred, gt, dist, edges);
        for (int b = 0; b < 2; ++b) {
            LabelMap masked = gt;
            for (int y = 0; y < 20; ++y)
                for (int x = 0; x < 20; ++x)
                    if (dist.at(x, y) < edges[b] || dist.at(x, y) >= edges[b + 1])
                        masked.at(x, y) = kVoidId;
            ConfusionMatrix cm;
            confusion_accumulate(pred, masked, cm);
            REQUIRE(bins[b].miou.has_value());
            CHECK(*bins[b].miou == doctest::Approx(mean_iou_all(cm)).epsilon(1e-12));
            CHECK(bins[b].pixels == cm.total());
        }
    }

    TEST_CASE("bins without evaluated pixels report no score") {
        const LabelMap gt(8, 8, 0);
        ScalarField dist = ScalarField::complete(8, 8, 10.0);  // all in the first bin
        const std::array<double, 3> edges{0.0, 100.0, 200.0};
        const auto bins = distance_binned_iou(gt, gt, dist, edges);
        REQUIRE(bins.size() == 2);
        CHECK(bins[0].miou == 1.0);
        CHECK_FALSE(bins[1].miou.has_value());
        CHECK(bins[1].pixels == 0);
    }

    TEST_CASE("edges must be strictly increasing and cover at least one bin") {
        const LabelMap gt(4, 4, 0);
        const ScalarField dist = ScalarField::complete(4, 4, 1.0);
        CHECK_THROWS_AS(
            distance_binned_iou(gt, gt, dist, std::array<double, 3>{0.0, 50.0, 50.0}),
            std::invalid_argument);
        CHECK_THROWS_AS(
            distance_binned_iou(gt, gt, dist, std::array<double, 3>{0.0, 80.0, 50.0}),
            std::invalid_argument);
        CHECK_THROWS_AS(distance_binned_iou(gt, gt, dist, std::array<double, 1>{0.0}),
                        std::invalid_argument);
        ScalarField holey = dist;
        holey.set_valid(0, 0, false);
        CHECK_THROWS_AS(
            distance_binned_iou(gt, gt, holey, std::array<double, 2>{0.0, 100.0}),
            std::invalid_argument);
    }

    TEST_CASE("the default edges follow the documented breakpoints") {
        const auto edges = default_distance_edges();
        REQUIRE(edges.size() == 9);
        const std::array<double, 8> finite{0, 20, 50, 80, 120, 160, 230, 400};
        for (std::size_t i = 0; i < finite.size(); ++i) CHECK(edges[i] == finite[i]);
        CHECK(std::isinf(edges.back()));
    }
}

TEST_SUITE("rankings") {
    TEST_CASE("unanimous preferences give full agreement") {
        PairwiseCounts unanimous(2, 3);  // three subjects, one pair, no dissent
        unanimous.at(0, 1) = 3;
        CHECK(agreement_coefficient(unanimous) == doctest::Approx(1.0).epsilon(1e-12));

        PairwiseCounts counts(3, 4);  // t=3 options, m=4 subjects
        counts.at(0, 1) = 4;
        counts.at(0, 2) = 4;
        counts.at(1, 2) = 4;
        CHECK(agreement_coefficient(counts) == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("maximal disagreement of three subjects gives minus one third") {
        PairwiseCounts counts(2, 3);  // 2-vs-1 split: sigma = 1
        counts.at(0, 1) = 2;
        counts.at(1, 0) = 1;
        CHECK(agreement_coefficient(counts) ==
              doctest::Approx(-1.0 / 3.0).epsilon(1e-12));

        PairwiseCounts even(2, 4);  // even split of four subjects: same value
        even.at(0, 1) = 2;
        even.at(1, 0) = 2;
        CHECK(agreement_coefficient(even) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
    }

    TEST_CASE("agreement depends on split sizes, not direction") {
        PairwiseCounts counts(2, 7);
        counts.at(0, 1) = 5;
        counts.at(1, 0) = 2;
        PairwiseCounts flipped(2, 7);
        flipped.at(0, 1) = 2;
        flipped.at(1, 0) = 5;
        CHECK(agreement_coefficient(counts) == agreement_coefficient(flipped));
    }

    TEST_CASE("two subjects in total opposition reach the minimum") {
        PairwiseCounts counts(2, 2);
        counts.at(0, 1) = 1;
        counts.at(1, 0) = 1;
        CHECK(agreement_coefficient(counts) == doctest::Approx(-1.0).epsilon(1e-12));
    }

    TEST_CASE("agreement is invariant to relabeling the options") {
        PairwiseCounts counts(3, 5);
        counts.at(0, 1) = 4;
        counts.at(1, 0) = 1;
        counts.at(0, 2) = 3;
        counts.at(2, 0) = 2;
        counts.at(1, 2) = 5;
        const double mu = agreement_coefficient(counts);

        PairwiseCounts swapped(3, 5);  // swap options 0 and 2
        swapped.at(2, 1) = 4;
        swapped.at(1, 2) = 1;
        swapped.at(2, 0) = 3;
        swapped.at(0, 2) = 2;
        swapped.at(1, 0) = 5;
        CHECK(agreement_coefficient(swapped) == doctest::Approx(mu).epsilon(1e-12));
    }

    TEST_CASE("degenerate sizes are rejected") {
        CHECK_THROWS_AS(agreement_coefficient(PairwiseCounts(1, 4)),
                        std::invalid_argument);
        CHECK_THROWS_AS(agreement_coefficient(PairwiseCounts(3, 1)),
                        std::invalid_argument);
    }

    TEST_CASE("kendall tau endpoints and a hand-worked middle case") {
        const std::array<double, 5> a{1, 2, 3, 4, 5};
        const std::array<double, 5> rev{5, 4, 3, 2, 1};
        CHECK(kendall_tau(a, a) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(kendall_tau(a, rev) == doctest::Approx(-1.0).epsilon(1e-12));

        // One discordant pair out of six.
        const std::array<double, 4> x{1, 2, 3, 4};
        const std::array<double, 4> y{1, 3, 2, 4};
        CHECK(kendall_tau(x, y) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    }

    TEST_CASE("ties use the tau-b normalization") {
        const std::array<double, 4> a{1, 2, 2, 3};
        const std::array<double, 4> b{1, 2, 3, 3};
        // C=4, D=0, one tied pair on each side: 4 / sqrt(5*5).
        CHECK(kendall_tau(a, b) == doctest::Approx(0.8).epsilon(1e-12));
    }

    TEST_CASE("random permutations match the pair-count oracle") {
        SplitMix64 rng(19);
        for (int trial = 0; trial < 50; ++trial) {
            const int n = 3 + static_cast<int>(rng.next_below(8));
            std::vector<double> a(n), b(n);
            for (int i = 0; i < n; ++i) a[i] = b[i] = i + 1;
            for (int i = n; i > 1; --i) {
                std::swap(a[i - 1], a[rng.next_below(static_cast<std::uint32_t>(i))]);
                std::swap(b[i - 1], b[rng.next_below(static_cast<std::uint32_t>(i))]);
            }
            std::int64_t c = 0, d = 0;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    (((a[i] < a[j]) == (b[i] < b[j])) ? c : d) += 1;
            const double expected =
                static_cast<double>(c - d) / (0.5 * n * (n - 1));
            CHECK(kendall_tau(a, b) == doctest::Approx(expected).epsilon(1e-12));
        }
    }

    TEST_CASE("kendall tau rejects degenerate inputs") {
        const std::array<double, 3> a{1, 2, 3};
        const std::array<double, 2> b{1, 2};
        CHECK_THROWS_AS(kendall_tau(a, b), std::invalid_argument);
        const std::array<double, 1> one{1};
        CHECK_THROWS_AS(kendall_tau(one, one), std::invalid_argument);
        const std::array<double, 3> flat{2, 2, 2};
        CHECK_THROWS_AS(kendall_tau(a, flat), std::runtime_error);
    }
}
