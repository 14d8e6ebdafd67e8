#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "foggen/image.hpp"
#include "foggen/plane.hpp"

namespace foggen {

struct SuperpixelRecord {
    int pixel_count = 0;
    LabColor mean_lab;        // C_s
    double centroid_x = 0.0;  // x_s
    double centroid_y = 0.0;
    bool reliable = false;
    std::optional<Plane> plane;
};

// Partition of the image into 4-connected superpixels, ids 0..count-1.
struct SuperpixelSegmentation {
    int width = 0;
    int height = 0;
    int count = 0;
    std::vector<std::int32_t> labels;
    std::vector<SuperpixelRecord> records;

    int label_at(int x, int y) const {
        return labels[static_cast<std::size_t>(y) * width + x];
    }
};

// SLIC in CIELAB-xy space with grid interval S = sqrt(N / k_hat), 10
// iterations, distance d = d_lab + (compactness / S) * d_xy. Orphan
// components smaller than S^2/4 are merged into the largest adjacent
// superpixel (ties to the smallest id). Fully deterministic.
SuperpixelSegmentation slic_segment(const Image& image, int k_hat, double compactness);

}  // namespace foggen
