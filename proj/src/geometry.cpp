#include "foggen/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace foggen {

ScalarField disparity_to_depth(const ScalarField& disparity, const CameraRig& rig) {
    rig.validate(disparity.width, disparity.height);
    ScalarField depth(disparity.width, disparity.height);
    const double fb = rig.fx * rig.baseline;
    for (std::size_t i = 0; i < disparity.values.size(); ++i) {
        if (disparity.valid[i] && disparity.values[i] > 0.0) {
            depth.values[i] = fb / disparity.values[i];
            depth.valid[i] = 1;
        }
    }
    return depth;
}

ScalarField depth_to_distance(const ScalarField& depth, const CameraRig& rig) {
    rig.validate(depth.width, depth.height);
    if (!depth.all_valid())
        throw std::invalid_argument("depth_to_distance: depth map has holes; complete it first");

    ScalarField distance = ScalarField::complete(depth.width, depth.height);
    for (int y = 0; y < depth.height; ++y) {
        const double dv = (y - rig.cy) / rig.fy;
        for (int x = 0; x < depth.width; ++x) {
            const double du = (x - rig.cx) / rig.fx;
            distance.at(x, y) = depth.at(x, y) * std::sqrt(du * du + dv * dv + 1.0);
        }
    }
    return distance;
}

}  // namespace foggen
