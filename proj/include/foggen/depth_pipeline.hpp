#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "foggen/image.hpp"
#include "foggen/params.hpp"
#include "foggen/plane.hpp"
#include "foggen/superpixel.hpp"

namespace foggen {

// Invalidates disparities whose induced left/right correspondence disagrees
// in RGB by more than epsilon (Euclidean norm). The correspondence column is
// rounded to the nearest pixel; correspondences outside the right image are
// invalidated. Returns the disparity field with the tightened validity mask.
ScalarField photo_consistency_check(const Image& left, const Image& right,
                                    const ScalarField& disparity, double epsilon);

// A superpixel is reliable iff its valid-depth pixel count is at least
// max(min_valid, valid_fraction * pixel_count). Flags are written into
// seg.records.
void classify_superpixels(SuperpixelSegmentation& seg, const ScalarField& depth,
                          int min_valid, double valid_fraction);

struct PlanePoint {
    double u, v, d;
};

struct RansacParams {
    int max_iters = 2000;
    double p = 0.99;
    double theta_factor = 0.01;
};

struct PlaneFit {
    Plane plane;
    std::vector<int> inliers;  // indices into the input point list
    double threshold = 0.0;    // the adaptive inlier threshold used
};

// Adaptive RANSAC over minimal 3-point samples with inlier threshold
// theta = theta_factor * median depth, followed by a least-squares refit on
// the best inlier set. Returns nullopt when no non-degenerate sample exists
// (fewer than 3 points or collinear pixels). Deterministic given the seed.
std::optional<PlaneFit> fit_plane_ransac(std::span<const PlanePoint> points,
                                         const RansacParams& params, std::uint64_t seed);

// Matching objective: squared CIELAB distance of mean colors plus
// alpha * squared centroid distance.
double matching_cost(const SuperpixelRecord& s, const SuperpixelRecord& t, double alpha);

// Cosine-similarity color cost (the baseline this pipeline replaces); kept
// for comparison. Errors on zero vectors.
double cosine_color_cost(const std::array<double, 3>& cs, const std::array<double, 3>& ct);
double matching_cost_cosine(const SuperpixelRecord& s, const SuperpixelRecord& t);

struct MatchPair {
    int unreliable_id;
    int source_id;
    double cost;
};

struct MatchAssignment {
    std::vector<MatchPair> pairs;
};

// Greedily pairs each plane-less superpixel with the minimum-cost superpixel
// that already has a plane, copies that plane over, and promotes the newly
// assigned superpixel into the source pool. Ties break on the lowest
// (unreliable id, source id). Errors when no superpixel has a plane.
MatchAssignment match_superpixels(SuperpixelSegmentation& seg, double alpha);

// Fills invalid pixels from their superpixel's plane and replaces valid
// pixels deviating more than theta_hat from the plane; everything else is
// kept bit-exact. Output is hole-free, clamped to at least depth_floor.
ScalarField complete_depth(const ScalarField& depth, const SuperpixelSegmentation& seg,
                           double theta_hat, double depth_floor);

struct DepthPipelineResult {
    ScalarField depth;         // the completed map d'
    ScalarField raw_depth;     // depth after photo-consistency, before completion
    SuperpixelSegmentation seg;
    MatchAssignment matches;
    double alpha = 0.0;
};

// Full denoising/completion: photo-consistency check, SLIC, reliability
// classification, per-superpixel RANSAC planes, greedy matching for the
// rest, plane-based completion.
DepthPipelineResult denoise_and_complete_detailed(const Image& left, const Image& right,
                                                  const ScalarField& disparity,
                                                  const CameraRig& rig,
                                                  const PipelineParams& params,
                                                  std::uint64_t seed);

ScalarField denoise_and_complete(const Image& left, const Image& right,
                                 const ScalarField& disparity, const CameraRig& rig,
                                 const PipelineParams& params, std::uint64_t seed);

}  // namespace foggen
