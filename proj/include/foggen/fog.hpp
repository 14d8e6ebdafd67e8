#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "foggen/image.hpp"
#include "foggen/params.hpp"

namespace foggen {

// Lowest attenuation coefficient (1/m) that still qualifies as fog, i.e. a
// meteorological optical range of 1 km.
inline constexpr double kFogBetaMin = 2.996e-3;

struct AtmosphericLight {
    std::array<double, 3> color{};  // RGB in [0,1]
    int px = 0;
    int py = 0;
};

// Per-pixel min over an RGB patch of the given (odd) side length, truncated
// at the image border.
ScalarField dark_channel(const Image& image, int patch);

// Brightest pixel among the top `top_fraction` of the dark channel. Ties on
// the dark channel, and on brightness, resolve to the lowest pixel index.
AtmosphericLight estimate_atmospheric_light(const Image& image, int patch = 15,
                                            double top_fraction = 0.001);

// Meteorological optical range in meters for attenuation coefficient beta.
double mor_from_beta(double beta);

// t(x) = exp(-beta * distance(x)); requires a complete, nonnegative distance
// map and beta >= 0.
ScalarField transmission_from_distance(const ScalarField& distance, double beta);

// Guided-filter smoothing of the transmission under the clear image, clamped
// into (floor, 1].
ScalarField refine_transmission(const ScalarField& t_hat, const Image& guide,
                                int radius, double mu, double floor = 1e-6);

// I = R*t + L*(1-t), channel-wise, clamped to [0,1].
Image composite_fog(const Image& clear, const ScalarField& transmission,
                    const std::array<double, 3>& light);

struct InvertResult {
    Image image;
    std::vector<std::uint8_t> invertible;  // 1 where t >= floor
};

// Algebraic inversion of the fog model: R = (I - L*(1-t)) / t, clamped to
// [0,1]. Pixels with t below `t_floor` are marked uninvertible and passed
// through unchanged.
InvertResult invert_fog(const Image& foggy, const ScalarField& transmission,
                        const std::array<double, 3>& light, double t_floor = 0.01);

struct FogResult {
    Image foggy;
    ScalarField transmission;  // refined t
    ScalarField depth;         // completed d'
    ScalarField distance;      // l
    AtmosphericLight light;
};

// Full clear-to-foggy pipeline: depth denoising/completion, distance,
// transmission, atmospheric light, refinement, compositing. Deterministic
// for fixed inputs and seed.
FogResult simulate_fog(const Image& left, const Image& right,
                       const ScalarField& disparity, const CameraRig& rig, double beta,
                       const PipelineParams& params, std::uint64_t seed);

}  // namespace foggen
