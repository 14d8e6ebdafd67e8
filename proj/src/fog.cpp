#include "foggen/fog.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "foggen/depth_pipeline.hpp"
#include "foggen/geometry.hpp"
#include "foggen/guided_filter.hpp"

namespace foggen {
namespace {

// Separable sliding-window minimum with border truncation.
void min_filter_rows(const std::vector<double>& src, std::vector<double>& dst, int w,
                     int h, int radius) {
    for (int y = 0; y < h; ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            const int hi = std::min(x + radius, w - 1);
            double m = src[row + std::max(x - radius, 0)];
            for (int j = std::max(x - radius, 0) + 1; j <= hi; ++j)
                m = std::min(m, src[row + j]);
            dst[row + x] = m;
        }
    }
}

void min_filter_cols(const std::vector<double>& src, std::vector<double>& dst, int w,
                     int h, int radius) {
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) {
            const int hi = std::min(y + radius, h - 1);
            double m = src[static_cast<std::size_t>(std::max(y - radius, 0)) * w + x];
            for (int j = std::max(y - radius, 0) + 1; j <= hi; ++j)
                m = std::min(m, src[static_cast<std::size_t>(j) * w + x]);
            dst[static_cast<std::size_t>(y) * w + x] = m;
        }
    }
}

}  // namespace

ScalarField dark_channel(const Image& image, int patch) {
    if (image.width <= 0 || image.height <= 0)
        throw std::invalid_argument("dark_channel: empty image");
    if (patch < 1 || patch % 2 == 0)
        throw std::invalid_argument("dark_channel: patch must be odd and >= 1");

    const int w = image.width;
    const int h = image.height;
    const int radius = patch / 2;
    const std::size_t n = static_cast<std::size_t>(w) * h;

    std::vector<double> chan_min(n);
    for (std::size_t i = 0; i < n; ++i)
        chan_min[i] = std::min({image.data[i * 3], image.data[i * 3 + 1],
                                image.data[i * 3 + 2]});

    std::vector<double> horiz(n);
    min_filter_rows(chan_min, horiz, w, h, radius);
    std::vector<double> vert(n);
    min_filter_cols(horiz, vert, w, h, radius);

    ScalarField out = ScalarField::complete(w, h);
    out.values = std::move(vert);
    return out;
}

AtmosphericLight estimate_atmospheric_light(const Image& image, int patch,
                                            double top_fraction) {
    if (top_fraction <= 0.0 || top_fraction > 1.0)
        throw std::invalid_argument("estimate_atmospheric_light: bad top fraction");
    const ScalarField dc = dark_channel(image, patch);
    const std::size_t n = dc.values.size();
    const std::size_t k = std::max<std::size_t>(
        1, static_cast<std::size_t>(static_cast<double>(n) * top_fraction));

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&dc](std::uint32_t a, std::uint32_t b) {
                          if (dc.values[a] != dc.values[b])
                              return dc.values[a] > dc.values[b];
                          return a < b;
                      });
    // Candidates scanned in index order so equal sums keep the lowest index.
    std::sort(order.begin(), order.begin() + k);

    std::size_t best = order[0];
    double best_sum = -1.0;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t idx = order[i];
        const double sum = image.data[idx * 3] + image.data[idx * 3 + 1] +
                           image.data[idx * 3 + 2];
        if (sum > best_sum) {
            best_sum = sum;
            best = idx;
        }
    }

    AtmosphericLight light;
    light.px = static_cast<int>(best % image.width);
    light.py = static_cast<int>(best / image.width);
    light.color = image.rgb(light.px, light.py);
    return light;
}

double mor_from_beta(double beta) {
    if (beta <= 0.0) throw std::invalid_argument("mor_from_beta: beta must be > 0");
    return 2.996 / beta;
}

ScalarField transmission_from_distance(const ScalarField& distance, double beta) {
    if (!distance.all_valid())
        throw std::invalid_argument("transmission_from_distance: distance has holes");
    if (beta < 0.0)
        throw std::invalid_argument("transmission_from_distance: beta must be >= 0");

    ScalarField out = ScalarField::complete(distance.width, distance.height);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double l = distance.values[i];
        if (!(l >= 0.0))
            throw std::invalid_argument("transmission_from_distance: negative distance");
        out.values[i] = std::exp(-beta * l);
    }
    return out;
}

ScalarField refine_transmission(const ScalarField& t_hat, const Image& guide,
                                int radius, double mu, double floor) {
    ScalarField out = guided_filter(guide, t_hat, radius, mu);
    for (double& v : out.values) v = std::clamp(v, floor, 1.0);
    return out;
}

Image composite_fog(const Image& clear, const ScalarField& transmission,
                    const std::array<double, 3>& light) {
    if (clear.width != transmission.width || clear.height != transmission.height)
        throw std::invalid_argument("composite_fog: dimension mismatch");
    if (!transmission.all_valid())
        throw std::invalid_argument("composite_fog: transmission has holes");

    Image out(clear.width, clear.height);
    for (std::size_t i = 0; i < transmission.values.size(); ++i) {
        const double t = transmission.values[i];
        if (!(t > 0.0 && t <= 1.0))
            throw std::invalid_argument("composite_fog: transmission outside (0,1]");
        for (int c = 0; c < 3; ++c) {
            const double v = clear.data[i * 3 + c] * t + light[c] * (1.0 - t);
            out.data[i * 3 + c] = std::clamp(v, 0.0, 1.0);
        }
    }
    return out;
}

InvertResult invert_fog(const Image& foggy, const ScalarField& transmission,
                        const std::array<double, 3>& light, double t_floor) {
    if (foggy.width != transmission.width || foggy.height != transmission.height)
        throw std::invalid_argument("invert_fog: dimension mismatch");
    if (!transmission.all_valid())
        throw std::invalid_argument("invert_fog: transmission has holes");

    InvertResult res;
    res.image = foggy;
    res.invertible.assign(transmission.values.size(), 1);
    for (std::size_t i = 0; i < transmission.values.size(); ++i) {
        const double t = transmission.values[i];
        if (t < t_floor) {
            res.invertible[i] = 0;
            continue;
        }
        for (int c = 0; c < 3; ++c) {
            const double v = (foggy.data[i * 3 + c] - light[c] * (1.0 - t)) / t;
            res.image.data[i * 3 + c] = std::clamp(v, 0.0, 1.0);
        }
    }
    return res;
}

FogResult simulate_fog(const Image& left, const Image& right,
                       const ScalarField& disparity, const CameraRig& rig, double beta,
                       const PipelineParams& params, std::uint64_t seed) {
    if (beta < 0.0) throw std::invalid_argument("simulate_fog: beta must be >= 0");
    rig.validate(left.width, left.height);

    FogResult res;
    res.depth = denoise_and_complete(left, right, disparity, rig, params, seed);
    res.distance = depth_to_distance(res.depth, rig);
    const ScalarField t_hat = transmission_from_distance(res.distance, beta);
    res.light = estimate_atmospheric_light(left, params.dark_channel_patch,
                                           params.light_top_fraction);
    res.transmission = refine_transmission(t_hat, left, params.guided_radius,
                                           params.guided_mu, params.transmission_floor);
    res.foggy = composite_fog(left, res.transmission, res.light.color);
    return res;
}

}  // namespace foggen
