#include "foggen/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "foggen/color.hpp"

namespace foggen {
namespace {

struct Center {
    double L, a, b;
    double x, y;
};

inline double sq(double v) { return v * v; }

// Squared Lab gradient over a 3x3 cross, border-clamped.
double lab_gradient(const std::vector<LabColor>& lab, int w, int h, int x, int y) {
    const auto& px = [&](int xx, int yy) -> const LabColor& {
        xx = std::clamp(xx, 0, w - 1);
        yy = std::clamp(yy, 0, h - 1);
        return lab[static_cast<std::size_t>(yy) * w + xx];
    };
    const LabColor& l = px(x - 1, y);
    const LabColor& r = px(x + 1, y);
    const LabColor& u = px(x, y - 1);
    const LabColor& d = px(x, y + 1);
    return sq(r.L - l.L) + sq(r.a - l.a) + sq(r.b - l.b) +
           sq(d.L - u.L) + sq(d.a - u.a) + sq(d.b - u.b);
}

}  // namespace

SuperpixelSegmentation slic_segment(const Image& image, int k_hat, double compactness) {
    const int w = image.width;
    const int h = image.height;
    const std::size_t n = image.pixels();
    if (n == 0) throw std::invalid_argument("slic: empty image");
    if (k_hat < 1 || static_cast<std::size_t>(k_hat) > n)
        throw std::invalid_argument("slic: superpixel count must be in [1, pixel count]");
    if (compactness <= 0.0) throw std::invalid_argument("slic: compactness must be > 0");

    const double grid_s = std::sqrt(static_cast<double>(n) / k_hat);
    if (grid_s < 1.0) throw std::invalid_argument("slic: image too small for requested K-hat");

    const std::vector<LabColor> lab = image_to_cielab(image);

    // Seed grid: near-square cells with nx * ny as close to k_hat as the
    // aspect ratio allows, preferring the wider grid on ties.
    const double ideal_nx = std::sqrt(static_cast<double>(k_hat) * w / h);
    int nx = 1, ny = 1;
    long best_err = std::numeric_limits<long>::max();
    for (const int cand : {static_cast<int>(std::floor(ideal_nx)),
                           static_cast<int>(std::ceil(ideal_nx))}) {
        const int cnx = std::clamp(cand, 1, w);
        const int cny = std::clamp(
            static_cast<int>(std::lround(static_cast<double>(k_hat) / cnx)), 1, h);
        const long err = std::labs(static_cast<long>(cnx) * cny - k_hat);
        if (err < best_err || (err == best_err && cnx > nx)) {
            best_err = err;
            nx = cnx;
            ny = cny;
        }
    }

    const double sx = static_cast<double>(w) / nx;
    const double sy = static_cast<double>(h) / ny;

    std::vector<Center> centers;
    centers.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            // Continuous cell center in pixel-centroid coordinates.
            double cx = (i + 0.5) * sx - 0.5;
            double cy = (j + 0.5) * sy - 0.5;
            int px = std::clamp(static_cast<int>(std::lround(cx)), 0, w - 1);
            int py = std::clamp(static_cast<int>(std::lround(cy)), 0, h - 1);

            // Perturb to the lowest-gradient pixel in a 3x3 neighborhood;
            // moves only on a strict improvement so flat regions keep the
            // exact grid position.
            double best_grad = lab_gradient(lab, w, h, px, py);
            int best_x = -1, best_y = -1;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int qx = px + dx;
                    const int qy = py + dy;
                    if (qx < 0 || qx >= w || qy < 0 || qy >= h) continue;
                    const double g = lab_gradient(lab, w, h, qx, qy);
                    if (g < best_grad) {
                        best_grad = g;
                        best_x = qx;
                        best_y = qy;
                    }
                }
            }
            if (best_x >= 0) {
                cx = best_x;
                cy = best_y;
                px = best_x;
                py = best_y;
            }
            const LabColor& c = lab[static_cast<std::size_t>(py) * w + px];
            centers.push_back({c.L, c.a, c.b, cx, cy});
        }
    }

    const double spatial_weight = compactness / grid_s;
    const double search = 2.0 * grid_s;

    std::vector<std::int32_t> assign(n, -1);
    std::vector<double> best_dist(n);

    for (int iter = 0; iter < 10; ++iter) {
        std::fill(assign.begin(), assign.end(), std::int32_t{-1});
        std::fill(best_dist.begin(), best_dist.end(), std::numeric_limits<double>::infinity());

        for (std::size_t k = 0; k < centers.size(); ++k) {
            const Center& c = centers[k];
            const int x0 = std::max(0, static_cast<int>(std::ceil(c.x - search)));
            const int x1 = std::min(w - 1, static_cast<int>(std::floor(c.x + search)));
            const int y0 = std::max(0, static_cast<int>(std::ceil(c.y - search)));
            const int y1 = std::min(h - 1, static_cast<int>(std::floor(c.y + search)));
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const std::size_t idx = static_cast<std::size_t>(y) * w + x;
                    const LabColor& p = lab[idx];
                    const double d_lab =
                        std::sqrt(sq(p.L - c.L) + sq(p.a - c.a) + sq(p.b - c.b));
                    const double d_xy = std::sqrt(sq(x - c.x) + sq(y - c.y));
                    const double d = d_lab + spatial_weight * d_xy;
                    if (d < best_dist[idx]) {
                        best_dist[idx] = d;
                        assign[idx] = static_cast<std::int32_t>(k);
                    }
                }
            }
        }

        // Pixels outside every search window (rare, extreme aspect ratios):
        // brute-force against all centers.
        for (std::size_t idx = 0; idx < n; ++idx) {
            if (assign[idx] >= 0) continue;
            const int x = static_cast<int>(idx % w);
            const int y = static_cast<int>(idx / w);
            const LabColor& p = lab[idx];
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < centers.size(); ++k) {
                const Center& c = centers[k];
                const double d =
                    std::sqrt(sq(p.L - c.L) + sq(p.a - c.a) + sq(p.b - c.b)) +
                    spatial_weight * std::sqrt(sq(x - c.x) + sq(y - c.y));
                if (d < best) {
                    best = d;
                    assign[idx] = static_cast<std::int32_t>(k);
                }
            }
        }

        // Update step: move centers to the mean of their pixels.
        std::vector<double> sums(centers.size() * 5, 0.0);
        std::vector<std::int64_t> counts(centers.size(), 0);
        for (std::size_t idx = 0; idx < n; ++idx) {
            const std::size_t k = static_cast<std::size_t>(assign[idx]);
            double* s = &sums[k * 5];
            const LabColor& p = lab[idx];
            s[0] += p.L;
            s[1] += p.a;
            s[2] += p.b;
            s[3] += static_cast<double>(idx % w);
            s[4] += static_cast<double>(idx / w);
            ++counts[k];
        }
        for (std::size_t k = 0; k < centers.size(); ++k) {
            if (counts[k] == 0) continue;  // empty cluster keeps its center
            const double inv = 1.0 / static_cast<double>(counts[k]);
            const double* s = &sums[k * 5];
            centers[k] = {s[0] * inv, s[1] * inv, s[2] * inv, s[3] * inv, s[4] * inv};
        }
    }

    // Connectivity enforcement. Discover 4-connected components of the raw
    // assignment in raster order; components of at least S^2/4 pixels become
    // final superpixels, the rest are merged into the largest adjacent one.
    const double min_size = grid_s * grid_s / 4.0;
    std::vector<std::int32_t> final_label(n, -1);
    std::vector<std::int64_t> region_size;

    struct Component {
        std::vector<std::int32_t> pixels;
        bool resolved = false;
    };
    std::vector<Component> small_components;

    {
        std::vector<std::uint8_t> seen(n, 0);
        std::vector<std::int32_t> stack;
        for (std::size_t start = 0; start < n; ++start) {
            if (seen[start]) continue;
            const std::int32_t raw = assign[start];
            Component comp;
            stack.push_back(static_cast<std::int32_t>(start));
            seen[start] = 1;
            while (!stack.empty()) {
                const std::int32_t p = stack.back();
                stack.pop_back();
                comp.pixels.push_back(p);
                const int x = p % w;
                const int y = p / w;
                const int nbr[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
                for (const auto& nb : nbr) {
                    if (nb[0] < 0 || nb[0] >= w || nb[1] < 0 || nb[1] >= h) continue;
                    const std::size_t q = static_cast<std::size_t>(nb[1]) * w + nb[0];
                    if (!seen[q] && assign[q] == raw) {
                        seen[q] = 1;
                        stack.push_back(static_cast<std::int32_t>(q));
                    }
                }
            }
            if (static_cast<double>(comp.pixels.size()) >= min_size) {
                const std::int32_t id = static_cast<std::int32_t>(region_size.size());
                for (std::int32_t p : comp.pixels) final_label[p] = id;
                region_size.push_back(static_cast<std::int64_t>(comp.pixels.size()));
            } else {
                small_components.push_back(std::move(comp));
            }
        }
    }

    std::size_t unresolved = small_components.size();
    while (unresolved > 0) {
        bool progress = false;
        for (Component& comp : small_components) {
            if (comp.resolved) continue;
            std::int32_t target = -1;
            std::int64_t target_size = -1;
            for (std::int32_t p : comp.pixels) {
                const int x = p % w;
                const int y = p / w;
                const int nbr[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
                for (const auto& nb : nbr) {
                    if (nb[0] < 0 || nb[0] >= w || nb[1] < 0 || nb[1] >= h) continue;
                    const std::int32_t t = final_label[static_cast<std::size_t>(nb[1]) * w + nb[0]];
                    if (t < 0) continue;
                    if (region_size[t] > target_size ||
                        (region_size[t] == target_size && t < target)) {
                        target = t;
                        target_size = region_size[t];
                    }
                }
            }
            if (target < 0) continue;
            for (std::int32_t p : comp.pixels) final_label[p] = target;
            region_size[target] += static_cast<std::int64_t>(comp.pixels.size());
            comp.resolved = true;
            --unresolved;
            progress = true;
        }
        if (!progress) {
            // No component touches an accepted region, so none exists yet;
            // promote the largest unresolved component (earliest on ties).
            std::size_t best = 0;
            std::size_t best_size = 0;
            for (std::size_t i = 0; i < small_components.size(); ++i) {
                if (small_components[i].resolved) continue;
                if (small_components[i].pixels.size() > best_size) {
                    best_size = small_components[i].pixels.size();
                    best = i;
                }
            }
            const std::int32_t id = static_cast<std::int32_t>(region_size.size());
            for (std::int32_t p : small_components[best].pixels) final_label[p] = id;
            region_size.push_back(static_cast<std::int64_t>(best_size));
            small_components[best].resolved = true;
            --unresolved;
        }
    }

    SuperpixelSegmentation seg;
    seg.width = w;
    seg.height = h;
    seg.count = static_cast<int>(region_size.size());
    seg.labels = std::move(final_label);
    seg.records.resize(region_size.size());

    std::vector<double> acc(region_size.size() * 5, 0.0);
    for (std::size_t idx = 0; idx < n; ++idx) {
        const std::size_t k = static_cast<std::size_t>(seg.labels[idx]);
        double* s = &acc[k * 5];
        const LabColor& p = lab[idx];
        s[0] += p.L;
        s[1] += p.a;
        s[2] += p.b;
        s[3] += static_cast<double>(idx % w);
        s[4] += static_cast<double>(idx / w);
        seg.records[k].pixel_count += 1;
    }
    for (std::size_t k = 0; k < region_size.size(); ++k) {
        SuperpixelRecord& rec = seg.records[k];
        const double cnt = static_cast<double>(rec.pixel_count);
        const double* s = &acc[k * 5];
        rec.mean_lab = {s[0] / cnt, s[1] / cnt, s[2] / cnt};
        rec.centroid_x = s[3] / cnt;
        rec.centroid_y = s[4] / cnt;
    }
    return seg;
}

}  // namespace foggen
