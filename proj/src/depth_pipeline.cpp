#include "foggen/depth_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "foggen/geometry.hpp"
#include "foggen/rng.hpp"

namespace foggen {
namespace {

inline double sq(double v) { return v * v; }

// Solves a general 3x3 system by Cramer's rule. Returns false when the
// determinant vanishes.
bool solve3x3(const double m[3][3], const double rhs[3], double out[3]) {
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if (det == 0.0 || !std::isfinite(det)) return false;
    double mx[3][3];
    for (int col = 0; col < 3; ++col) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) mx[i][j] = (j == col) ? rhs[i] : m[i][j];
        out[col] = (mx[0][0] * (mx[1][1] * mx[2][2] - mx[1][2] * mx[2][1]) -
                    mx[0][1] * (mx[1][0] * mx[2][2] - mx[1][2] * mx[2][0]) +
                    mx[0][2] * (mx[1][0] * mx[2][1] - mx[1][1] * mx[2][0])) /
                   det;
    }
    return std::isfinite(out[0]) && std::isfinite(out[1]) && std::isfinite(out[2]);
}

double median(std::vector<double> v) {
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    const double upper = v[mid];
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lower + upper);
}

// Least-squares plane through the given points (normal equations).
bool fit_plane_lsq(std::span<const PlanePoint> pts, std::span<const int> idx, Plane& out) {
    double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    double rhs[3] = {0, 0, 0};
    for (int i : idx) {
        const PlanePoint& p = pts[i];
        m[0][0] += p.u * p.u;
        m[0][1] += p.u * p.v;
        m[0][2] += p.u;
        m[1][1] += p.v * p.v;
        m[1][2] += p.v;
        m[2][2] += 1.0;
        rhs[0] += p.u * p.d;
        rhs[1] += p.v * p.d;
        rhs[2] += p.d;
    }
    m[1][0] = m[0][1];
    m[2][0] = m[0][2];
    m[2][1] = m[1][2];
    double sol[3];
    if (!solve3x3(m, rhs, sol)) return false;
    out = {sol[0], sol[1], sol[2]};
    return true;
}

}  // namespace

ScalarField photo_consistency_check(const Image& left, const Image& right,
                                    const ScalarField& disparity, double epsilon) {
    if (!left.same_size(right) || left.width != disparity.width ||
        left.height != disparity.height)
        throw std::invalid_argument("photo_consistency_check: dimension mismatch");

    ScalarField out = disparity;
    const double eps2 = epsilon * epsilon;
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            if (!out.is_valid(x, y)) continue;
            const long xr = std::lround(x - out.at(x, y));
            if (xr < 0 || xr >= out.width) {
                out.set_valid(x, y, false);
                continue;
            }
            const auto l = left.rgb(x, y);
            const auto r = right.rgb(static_cast<int>(xr), y);
            const double d2 = sq(l[0] - r[0]) + sq(l[1] - r[1]) + sq(l[2] - r[2]);
            if (d2 > eps2) out.set_valid(x, y, false);
        }
    }
    return out;
}

void classify_superpixels(SuperpixelSegmentation& seg, const ScalarField& depth,
                          int min_valid, double valid_fraction) {
    if (seg.width != depth.width || seg.height != depth.height)
        throw std::invalid_argument("classify_superpixels: dimension mismatch");
    if (min_valid < 1 || valid_fraction <= 0.0 || valid_fraction >= 1.0)
        throw std::invalid_argument("classify_superpixels: bad reliability parameters");

    std::vector<std::int64_t> valid_count(seg.records.size(), 0);
    for (std::size_t i = 0; i < depth.valid.size(); ++i)
        if (depth.valid[i]) ++valid_count[static_cast<std::size_t>(seg.labels[i])];

    for (std::size_t k = 0; k < seg.records.size(); ++k) {
        const double bound =
            std::max(static_cast<double>(min_valid),
                     valid_fraction * seg.records[k].pixel_count);
        seg.records[k].reliable = static_cast<double>(valid_count[k]) >= bound;
    }
}

std::optional<PlaneFit> fit_plane_ransac(std::span<const PlanePoint> points,
                                         const RansacParams& params, std::uint64_t seed) {
    const std::size_t n = points.size();
    if (n < 3) return std::nullopt;

    std::vector<double> depths(n);
    for (std::size_t i = 0; i < n; ++i) depths[i] = points[i].d;
    const double theta = params.theta_factor * median(std::move(depths));

    SplitMix64 rng(seed);
    constexpr double kDegenerateArea = 1e-9;
    constexpr int kDegenerateRetries = 100;

    std::vector<int> best_inliers;
    Plane best_plane;
    int iter = 0;
    int allowed = params.max_iters;

    while (iter < allowed) {
        // Minimal sample; retry degenerate (collinear) draws a bounded
        // number of times before declaring the input unfittable.
        int ia = 0, ib = 0, ic = 0;
        bool ok = false;
        for (int attempt = 0; attempt < kDegenerateRetries; ++attempt) {
            ia = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(n)));
            ib = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(n)));
            ic = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(n)));
            if (ia == ib || ia == ic || ib == ic) continue;
            const double area2 =
                std::abs((points[ib].u - points[ia].u) * (points[ic].v - points[ia].v) -
                         (points[ic].u - points[ia].u) * (points[ib].v - points[ia].v));
            if (area2 > kDegenerateArea) {
                ok = true;
                break;
            }
        }
        if (!ok) return best_inliers.empty() ? std::nullopt
                                             : std::optional<PlaneFit>({best_plane, best_inliers, theta});

        const double m[3][3] = {{points[ia].u, points[ia].v, 1.0},
                                {points[ib].u, points[ib].v, 1.0},
                                {points[ic].u, points[ic].v, 1.0}};
        const double rhs[3] = {points[ia].d, points[ib].d, points[ic].d};
        double sol[3];
        if (!solve3x3(m, rhs, sol)) {
            ++iter;
            continue;
        }
        const Plane candidate{sol[0], sol[1], sol[2]};

        std::vector<int> inliers;
        inliers.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(points[i].d - candidate.predict(points[i].u, points[i].v)) <= theta)
                inliers.push_back(static_cast<int>(i));
        }
        if (inliers.size() > best_inliers.size()) {
            best_inliers = std::move(inliers);
            best_plane = candidate;
            // Adaptive bound on iterations from the current inlier ratio.
            const double ratio = static_cast<double>(best_inliers.size()) / n;
            const double w3 = ratio * ratio * ratio;
            if (w3 >= 1.0 - 1e-15) {
                allowed = iter + 1;
            } else {
                const double bound = std::log(1.0 - params.p) / std::log(1.0 - w3);
                allowed = std::min(allowed,
                                   static_cast<int>(std::min(
                                       std::ceil(bound), static_cast<double>(params.max_iters))));
            }
        }
        ++iter;
    }

    if (best_inliers.size() < 3) return std::nullopt;
    PlaneFit fit;
    fit.inliers = std::move(best_inliers);
    fit.threshold = theta;
    if (!fit_plane_lsq(points, fit.inliers, fit.plane)) fit.plane = best_plane;
    return fit;
}

double matching_cost(const SuperpixelRecord& s, const SuperpixelRecord& t, double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("matching_cost: alpha must be > 0");
    const double color = sq(s.mean_lab.L - t.mean_lab.L) + sq(s.mean_lab.a - t.mean_lab.a) +
                         sq(s.mean_lab.b - t.mean_lab.b);
    const double spatial = sq(s.centroid_x - t.centroid_x) + sq(s.centroid_y - t.centroid_y);
    return color + alpha * spatial;
}

double cosine_color_cost(const std::array<double, 3>& cs, const std::array<double, 3>& ct) {
    const double ns = std::sqrt(sq(cs[0]) + sq(cs[1]) + sq(cs[2]));
    const double nt = std::sqrt(sq(ct[0]) + sq(ct[1]) + sq(ct[2]));
    if (ns == 0.0 || nt == 0.0)
        throw std::invalid_argument("cosine_color_cost: zero color vector");
    const double dot = cs[0] * ct[0] + cs[1] * ct[1] + cs[2] * ct[2];
    return 1.0 - dot / (ns * nt);
}

double matching_cost_cosine(const SuperpixelRecord& s, const SuperpixelRecord& t) {
    return cosine_color_cost({s.mean_lab.L, s.mean_lab.a, s.mean_lab.b},
                             {t.mean_lab.L, t.mean_lab.a, t.mean_lab.b});
}

MatchAssignment match_superpixels(SuperpixelSegmentation& seg, double alpha) {
    std::vector<int> sources;
    std::vector<int> pending;
    for (int k = 0; k < seg.count; ++k) {
        if (seg.records[k].plane.has_value())
            sources.push_back(k);
        else
            pending.push_back(k);
    }
    MatchAssignment result;
    if (pending.empty()) return result;
    if (sources.empty()) throw std::runtime_error("match_superpixels: no depth anchors");

    // Cached best source per pending superpixel; refreshed incrementally as
    // matched superpixels join the source pool.
    struct Best {
        double cost = std::numeric_limits<double>::infinity();
        int source = -1;
    };
    std::vector<Best> best(pending.size());
    for (std::size_t i = 0; i < pending.size(); ++i) {
        for (int s : sources) {
            const double c = matching_cost(seg.records[pending[i]], seg.records[s], alpha);
            if (c < best[i].cost || (c == best[i].cost && s < best[i].source)) {
                best[i] = {c, s};
            }
        }
    }

    std::vector<bool> done(pending.size(), false);
    for (std::size_t round = 0; round < pending.size(); ++round) {
        std::size_t pick = pending.size();
        for (std::size_t i = 0; i < pending.size(); ++i) {
            if (done[i]) continue;
            if (pick == pending.size() || best[i].cost < best[pick].cost ||
                (best[i].cost == best[pick].cost && pending[i] < pending[pick]))
                pick = i;
        }
        const int u = pending[pick];
        seg.records[u].plane = seg.records[best[pick].source].plane;
        result.pairs.push_back({u, best[pick].source, best[pick].cost});
        done[pick] = true;

        for (std::size_t i = 0; i < pending.size(); ++i) {
            if (done[i]) continue;
            const double c = matching_cost(seg.records[pending[i]], seg.records[u], alpha);
            if (c < best[i].cost || (c == best[i].cost && u < best[i].source)) {
                best[i] = {c, u};
            }
        }
    }
    return result;
}

ScalarField complete_depth(const ScalarField& depth, const SuperpixelSegmentation& seg,
                           double theta_hat, double depth_floor) {
    if (seg.width != depth.width || seg.height != depth.height)
        throw std::invalid_argument("complete_depth: dimension mismatch");
    for (const SuperpixelRecord& rec : seg.records)
        if (!rec.plane.has_value())
            throw std::runtime_error("complete_depth: superpixel without a depth plane");

    ScalarField out = ScalarField::complete(depth.width, depth.height);
    for (int y = 0; y < depth.height; ++y) {
        for (int x = 0; x < depth.width; ++x) {
            const Plane& plane = *seg.records[seg.label_at(x, y)].plane;
            const double d = depth.at(x, y);
            if (depth.is_valid(x, y) && std::abs(d - plane.predict(x, y)) <= theta_hat) {
                out.at(x, y) = std::max(d, depth_floor);
            } else {
                out.at(x, y) = std::max(plane.predict(x, y), depth_floor);
            }
        }
    }
    return out;
}

DepthPipelineResult denoise_and_complete_detailed(const Image& left, const Image& right,
                                                  const ScalarField& disparity,
                                                  const CameraRig& rig,
                                                  const PipelineParams& params,
                                                  std::uint64_t seed) {
    const ScalarField checked =
        photo_consistency_check(left, right, disparity, params.epsilon);

    DepthPipelineResult res;
    res.raw_depth = disparity_to_depth(checked, rig);
    res.seg = slic_segment(left, params.k_hat, params.compactness);
    classify_superpixels(res.seg, res.raw_depth, params.min_valid, params.valid_fraction);

    // Per-superpixel plane fits on reliable superpixels; failures are demoted
    // to unreliable so the matching stage covers them.
    std::vector<std::vector<PlanePoint>> pts(res.seg.count);
    for (int y = 0; y < res.raw_depth.height; ++y) {
        for (int x = 0; x < res.raw_depth.width; ++x) {
            if (!res.raw_depth.is_valid(x, y)) continue;
            const int k = res.seg.label_at(x, y);
            if (res.seg.records[k].reliable)
                pts[k].push_back({static_cast<double>(x), static_cast<double>(y),
                                  res.raw_depth.at(x, y)});
        }
    }
    const RansacParams rp{params.ransac_max_iters, params.ransac_p, params.theta_factor};
    for (int k = 0; k < res.seg.count; ++k) {
        if (!res.seg.records[k].reliable) continue;
        const std::uint64_t sp_seed = hash_combine(seed, static_cast<std::uint64_t>(k));
        auto fit = fit_plane_ransac(pts[k], rp, sp_seed);
        if (fit.has_value())
            res.seg.records[k].plane = fit->plane;
        else
            res.seg.records[k].reliable = false;
    }

    const double grid_s =
        std::sqrt(static_cast<double>(res.seg.labels.size()) / res.seg.count);
    res.alpha = sq(params.compactness) / sq(grid_s);
    res.matches = match_superpixels(res.seg, res.alpha);
    res.depth = complete_depth(res.raw_depth, res.seg, params.theta_hat, params.depth_floor);
    return res;
}

ScalarField denoise_and_complete(const Image& left, const Image& right,
                                 const ScalarField& disparity, const CameraRig& rig,
                                 const PipelineParams& params, std::uint64_t seed) {
    return denoise_and_complete_detailed(left, right, disparity, rig, params, seed).depth;
}

}  // namespace foggen
