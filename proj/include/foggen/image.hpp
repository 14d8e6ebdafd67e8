#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace foggen {

// Color raster with sRGB-encoded channel values in [0,1], row-major,
// interleaved RGB.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, double fill = 0.0);
    Image(int w, int h, const std::array<double, 3>& fill);

    std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }

    double& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    double at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }

    std::array<double, 3> rgb(int x, int y) const {
        const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
        return {data[i], data[i + 1], data[i + 2]};
    }
    void set_rgb(int x, int y, const std::array<double, 3>& c) {
        const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
        data[i] = c[0];
        data[i + 1] = c[1];
        data[i + 2] = c[2];
    }

    bool same_size(const Image& o) const { return width == o.width && height == o.height; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

// Single-channel raster (depth, distance, disparity, transmission) with a
// per-pixel validity mask. Invalid pixels carry no meaningful value.
struct ScalarField {
    int width = 0;
    int height = 0;
    std::vector<double> values;
    std::vector<std::uint8_t> valid;

    ScalarField() = default;
    ScalarField(int w, int h);

    // Field with every pixel valid and set to `fill`.
    static ScalarField complete(int w, int h, double fill = 0.0);

    std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }

    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }

    bool is_valid(int x, int y) const {
        return valid[static_cast<std::size_t>(y) * width + x] != 0;
    }
    void set_valid(int x, int y, bool v) {
        valid[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
    }

    std::size_t valid_count() const;
    bool all_valid() const;
    bool same_size(const ScalarField& o) const { return width == o.width && height == o.height; }
};

// CIELAB coordinates, D65 reference white.
struct LabColor {
    double L = 0.0;
    double a = 0.0;
    double b = 0.0;
};

// Pinhole stereo rig: focal lengths and principal point in pixels,
// baseline in meters.
struct CameraRig {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    double baseline = 0.0;

    // Throws std::invalid_argument if the rig is unusable for the given
    // raster dimensions.
    void validate(int width, int height) const;
};

}  // namespace foggen
