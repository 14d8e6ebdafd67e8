#pragma once

#include "foggen/image.hpp"

namespace foggen {

// depth = fx * baseline / disparity at valid pixels with disparity > 0.
// Pixels that are invalid or have non-positive disparity come out invalid.
ScalarField disparity_to_depth(const ScalarField& disparity, const CameraRig& rig);

// Along-ray distance from planar depth:
//   distance(u,v) = depth(u,v) * sqrt(((u-cx)/fx)^2 + ((v-cy)/fy)^2 + 1)
// which reduces to depth * sqrt((u-cx)^2 + (v-cy)^2 + f^2) / f for square
// pixels. Requires a hole-free depth map.
ScalarField depth_to_distance(const ScalarField& depth, const CameraRig& rig);

}  // namespace foggen
