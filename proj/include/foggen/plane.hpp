#pragma once

namespace foggen {

// Depth as an affine function of pixel coordinates: d(u,v) = a*u + b*v + c.
// a, b in meters/pixel, c in meters.
struct Plane {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double predict(double u, double v) const { return a * u + b * v + c; }
};

}  // namespace foggen
