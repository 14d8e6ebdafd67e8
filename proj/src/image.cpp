#include "foggen/image.hpp"

#include <algorithm>
#include <stdexcept>

namespace foggen {

Image::Image(int w, int h, double fill)
    : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

Image::Image(int w, int h, const std::array<double, 3>& fill) : Image(w, h, 0.0) {
    for (std::size_t i = 0; i < data.size(); i += 3) {
        data[i] = fill[0];
        data[i + 1] = fill[1];
        data[i + 2] = fill[2];
    }
}

ScalarField::ScalarField(int w, int h)
    : width(w),
      height(h),
      values(static_cast<std::size_t>(w) * h, 0.0),
      valid(static_cast<std::size_t>(w) * h, 0) {}

ScalarField ScalarField::complete(int w, int h, double fill) {
    ScalarField f(w, h);
    std::fill(f.values.begin(), f.values.end(), fill);
    std::fill(f.valid.begin(), f.valid.end(), std::uint8_t{1});
    return f;
}

std::size_t ScalarField::valid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

bool ScalarField::all_valid() const {
    return std::all_of(valid.begin(), valid.end(), [](std::uint8_t v) { return v != 0; });
}

void CameraRig::validate(int width, int height) const {
    if (fx <= 0.0 || fy <= 0.0) throw std::invalid_argument("camera: focal length must be > 0");
    if (baseline <= 0.0) throw std::invalid_argument("camera: baseline must be > 0");
    if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
        throw std::invalid_argument("camera: principal point outside image");
}

}  // namespace foggen
