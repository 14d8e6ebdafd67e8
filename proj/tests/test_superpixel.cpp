#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "foggen/color.hpp"
#include "foggen/rng.hpp"
#include "foggen/superpixel.hpp"

using namespace foggen;

namespace {

Image random_image(int w, int h, std::uint64_t seed) {
    Image img(w, h);
    SplitMix64 rng(seed);
    // Smooth random field: random low-resolution grid, bilinearly upsampled,
    // so clusters have coherent colors to lock onto.
    const int gw = 8, gh = 8;
    std::vector<double> grid(gw * gh * 3);
    for (double& v : grid) v = rng.next_double();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = x * (gw - 1.0) / (w - 1.0);
            const double gy = y * (gh - 1.0) / (h - 1.0);
            const int x0 = static_cast<int>(gx), y0 = static_cast<int>(gy);
            const int x1 = std::min(x0 + 1, gw - 1), y1 = std::min(y0 + 1, gh - 1);
            const double fx = gx - x0, fy = gy - y0;
            for (int c = 0; c < 3; ++c) {
                const double v00 = grid[(y0 * gw + x0) * 3 + c];
                const double v10 = grid[(y0 * gw + x1) * 3 + c];
                const double v01 = grid[(y1 * gw + x0) * 3 + c];
                const double v11 = grid[(y1 * gw + x1) * 3 + c];
                img.at(x, y, c) = (1 - fy) * ((1 - fx) * v00 + fx * v10) +
                                  fy * ((1 - fx) * v01 + fx * v11);
            }
        }
    }
    return img;
}

void check_partition(const SuperpixelSegmentation& seg) {
    REQUIRE(seg.count >= 1);
    std::vector<int> counts(seg.count, 0);
    for (std::int32_t id : seg.labels) {
        REQUIRE(id >= 0);
        REQUIRE(id < seg.count);
        ++counts[id];
    }
    std::size_t total = 0;
    for (int k = 0; k < seg.count; ++k) {
        CHECK(counts[k] >= 1);
        CHECK(counts[k] == seg.records[k].pixel_count);
        total += counts[k];
    }
    CHECK(total == seg.labels.size());
}

// Flood fill from each superpixel's first pixel must reach all its pixels.
void check_connectivity(const SuperpixelSegmentation& seg) {
    std::vector<std::uint8_t> seen(seg.labels.size(), 0);
    std::vector<int> first(seg.count, -1);
    for (std::size_t i = 0; i < seg.labels.size(); ++i)
        if (first[seg.labels[i]] < 0) first[seg.labels[i]] = static_cast<int>(i);

    std::vector<int> stack;
    for (int k = 0; k < seg.count; ++k) {
        int reached = 0;
        stack.push_back(first[k]);
        seen[first[k]] = 1;
        while (!stack.empty()) {
            const int i = stack.back();
            stack.pop_back();
            ++reached;
            const int x = i % seg.width, y = i / seg.width;
            const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
            for (int d = 0; d < 4; ++d) {
                const int nx = x + dx[d], ny = y + dy[d];
                if (nx < 0 || nx >= seg.width || ny < 0 || ny >= seg.height) continue;
                const int ni = ny * seg.width + nx;
                if (!seen[ni] && seg.labels[ni] == k) {
                    seen[ni] = 1;
                    stack.push_back(ni);
                }
            }
        }
        CHECK(reached == seg.records[k].pixel_count);
    }
}

}  // namespace

TEST_SUITE("superpixel") {
    TEST_CASE("uniform 64x64 with four clusters splits into exact quadrants") {
        const Image img(64, 64, 0.5);
        const SuperpixelSegmentation seg = slic_segment(img, 4, 10.0);
        REQUIRE(seg.count == 4);
        for (int k = 0; k < 4; ++k) CHECK(seg.records[k].pixel_count == 1024);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) {
                const int expected = (y < 32 ? 0 : 2) + (x < 32 ? 0 : 1);
                REQUIRE(seg.label_at(x, y) == expected);
            }
        CHECK(seg.records[0].centroid_x == doctest::Approx(15.5));
        CHECK(seg.records[0].centroid_y == doctest::Approx(15.5));
        CHECK(seg.records[3].centroid_x == doctest::Approx(47.5));
        CHECK(seg.records[3].centroid_y == doctest::Approx(47.5));
    }

    TEST_CASE("single cluster covers the image with centroid at its center") {
        const Image img = random_image(40, 30, 7);
        const SuperpixelSegmentation seg = slic_segment(img, 1, 10.0);
        REQUIRE(seg.count == 1);
        CHECK(seg.records[0].pixel_count == 1200);
        CHECK(seg.records[0].centroid_x == doctest::Approx(19.5));
        CHECK(seg.records[0].centroid_y == doctest::Approx(14.5));
    }

    TEST_CASE("two-tone vertical split lands within one column of the boundary") {
        Image img(64, 64);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                img.set_rgb(x, y, x < 32 ? std::array<double, 3>{0.9, 0.1, 0.1}
                                         : std::array<double, 3>{0.1, 0.1, 0.9});
        const SuperpixelSegmentation seg = slic_segment(img, 2, 10.0);
        REQUIRE(seg.count == 2);
        int misplaced = 0;
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) {
                if (x >= 31 && x <= 32) continue;  // one-column tolerance band
                const int expected = x < 32 ? seg.label_at(0, y) : seg.label_at(63, y);
                if (seg.label_at(x, y) != expected) ++misplaced;
            }
        CHECK(misplaced == 0);
    }

    TEST_CASE("partition and connectivity hold on random images") {
        for (int k_hat : {1, 4, 64, 256}) {
            const Image img = random_image(96, 64, 100 + k_hat);
            const SuperpixelSegmentation seg = slic_segment(img, k_hat, 10.0);
            check_partition(seg);
            check_connectivity(seg);
        }
    }

    TEST_CASE("segmentation is deterministic") {
        const Image img = random_image(80, 60, 42);
        const SuperpixelSegmentation a = slic_segment(img, 32, 10.0);
        const SuperpixelSegmentation b = slic_segment(img, 32, 10.0);
        CHECK(a.count == b.count);
        CHECK(a.labels == b.labels);
    }

    TEST_CASE("records reproduce a direct recomputation exactly") {
        const Image img = random_image(64, 48, 9);
        const SuperpixelSegmentation seg = slic_segment(img, 24, 10.0);
        const std::vector<LabColor> lab = image_to_cielab(img);

        // Same raster-order accumulation and single divide as the library.
        std::vector<double> sl(seg.count, 0), sa(seg.count, 0), sb(seg.count, 0);
        std::vector<double> sx(seg.count, 0), sy(seg.count, 0);
        std::vector<int> n(seg.count, 0);
        for (int y = 0; y < seg.height; ++y)
            for (int x = 0; x < seg.width; ++x) {
                const int k = seg.label_at(x, y);
                const std::size_t i = static_cast<std::size_t>(y) * seg.width + x;
                sl[k] += lab[i].L;
                sa[k] += lab[i].a;
                sb[k] += lab[i].b;
                sx[k] += x;
                sy[k] += y;
                ++n[k];
            }
        for (int k = 0; k < seg.count; ++k) {
            CHECK(seg.records[k].mean_lab.L == sl[k] / n[k]);
            CHECK(seg.records[k].mean_lab.a == sa[k] / n[k]);
            CHECK(seg.records[k].mean_lab.b == sb[k] / n[k]);
            CHECK(seg.records[k].centroid_x == sx[k] / n[k]);
            CHECK(seg.records[k].centroid_y == sy[k] / n[k]);
        }
    }

    TEST_CASE("centroids lie inside their superpixel bounding boxes") {
        const Image img = random_image(72, 56, 17);
        const SuperpixelSegmentation seg = slic_segment(img, 48, 10.0);
        std::vector<double> xmin(seg.count, 1e9), xmax(seg.count, -1e9);
        std::vector<double> ymin(seg.count, 1e9), ymax(seg.count, -1e9);
        for (int y = 0; y < seg.height; ++y)
            for (int x = 0; x < seg.width; ++x) {
                const int k = seg.label_at(x, y);
                xmin[k] = std::min(xmin[k], double(x));
                xmax[k] = std::max(xmax[k], double(x));
                ymin[k] = std::min(ymin[k], double(y));
                ymax[k] = std::max(ymax[k], double(y));
            }
        for (int k = 0; k < seg.count; ++k) {
            CHECK(seg.records[k].centroid_x >= xmin[k]);
            CHECK(seg.records[k].centroid_x <= xmax[k]);
            CHECK(seg.records[k].centroid_y >= ymin[k]);
            CHECK(seg.records[k].centroid_y <= ymax[k]);
        }
    }

    TEST_CASE("invalid arguments are rejected") {
        const Image img(16, 16, 0.5);
        CHECK_THROWS_AS(slic_segment(img, 0, 10.0), std::invalid_argument);
        CHECK_THROWS_AS(slic_segment(img, 257, 10.0), std::invalid_argument);
        CHECK_THROWS_AS(slic_segment(img, 4, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(slic_segment(Image(), 1, 10.0), std::invalid_argument);
    }
}
