#pragma once

#include <array>
#include <vector>

#include "foggen/image.hpp"

namespace foggen {

// sRGB (gamma-encoded, [0,1]) to CIELAB under D65. The linearization here is
// internal to the conversion; compositing elsewhere stays gamma-encoded.
LabColor srgb_to_cielab(double r, double g, double b);
LabColor srgb_to_cielab(const std::array<double, 3>& rgb);

// Per-pixel CIELAB of a whole image, row-major.
std::vector<LabColor> image_to_cielab(const Image& image);

}  // namespace foggen
