#pragma once

#include "foggen/image.hpp"

namespace foggen {

// Edge-preserving smoothing of a dense scalar map under an RGB guide.
// Windows are (2*radius+1)^2 boxes truncated at the image border; mu is the
// regularizer added to the guide covariance. The input must be complete.
ScalarField guided_filter(const Image& guide, const ScalarField& input, int radius,
                          double mu);

}  // namespace foggen
