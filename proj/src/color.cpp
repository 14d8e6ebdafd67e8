#include "foggen/color.hpp"

#include <cmath>

namespace foggen {
namespace {

// sRGB -> XYZ (D65) matrix. The reference white is taken as the matrix row
// sums so that pure white maps to exactly (100, 0, 0) and grays stay on the
// L* axis.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};
constexpr double kWhiteX = kRgbToXyz[0][0] + kRgbToXyz[0][1] + kRgbToXyz[0][2];
constexpr double kWhiteY = kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2];
constexpr double kWhiteZ = kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2];

inline double srgb_linearize(double s) {
    return s <= 0.04045 ? s / 12.92 : std::pow((s + 0.055) / 1.055, 2.4);
}

inline double lab_f(double t) {
    constexpr double kDelta3 = (6.0 / 29.0) * (6.0 / 29.0) * (6.0 / 29.0);
    constexpr double kSlope = (29.0 / 6.0) * (29.0 / 6.0) / 3.0;
    return t > kDelta3 ? std::cbrt(t) : kSlope * t + 4.0 / 29.0;
}

}  // namespace

LabColor srgb_to_cielab(double r, double g, double b) {
    const double lr = srgb_linearize(r);
    const double lg = srgb_linearize(g);
    const double lb = srgb_linearize(b);

    const double x = kRgbToXyz[0][0] * lr + kRgbToXyz[0][1] * lg + kRgbToXyz[0][2] * lb;
    const double y = kRgbToXyz[1][0] * lr + kRgbToXyz[1][1] * lg + kRgbToXyz[1][2] * lb;
    const double z = kRgbToXyz[2][0] * lr + kRgbToXyz[2][1] * lg + kRgbToXyz[2][2] * lb;

    const double fx = lab_f(x / kWhiteX);
    const double fy = lab_f(y / kWhiteY);
    const double fz = lab_f(z / kWhiteZ);

    LabColor lab;
    lab.L = 116.0 * fy - 16.0;
    lab.a = 500.0 * (fx - fy);
    lab.b = 200.0 * (fy - fz);
    return lab;
}

LabColor srgb_to_cielab(const std::array<double, 3>& rgb) {
    return srgb_to_cielab(rgb[0], rgb[1], rgb[2]);
}

std::vector<LabColor> image_to_cielab(const Image& image) {
    std::vector<LabColor> out(image.pixels());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = srgb_to_cielab(image.data[i * 3], image.data[i * 3 + 1], image.data[i * 3 + 2]);
    }
    return out;
}

}  // namespace foggen
