#include "foggen/guided_filter.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace foggen {
namespace {

// Box-mean over truncated windows via a summed-area table. Normalizes by the
// actual window area so border pixels average only in-image samples.
class BoxMean {
   public:
    BoxMean(int width, int height, int radius)
        : w_(width), h_(height), r_(radius), sat_((width + 1) * (height + 1)) {}

    void build(const std::vector<double>& src) {
        for (int y = 0; y < h_; ++y) {
            const double* row = src.data() + static_cast<std::size_t>(y) * w_;
            double run = 0.0;
            double* out = sat_.data() + static_cast<std::size_t>(y + 1) * (w_ + 1);
            const double* prev = sat_.data() + static_cast<std::size_t>(y) * (w_ + 1);
            out[0] = 0.0;
            for (int x = 0; x < w_; ++x) {
                run += row[x];
                out[x + 1] = prev[x + 1] + run;
            }
        }
    }

    double mean(int x, int y) const {
        const int x0 = std::max(x - r_, 0);
        const int y0 = std::max(y - r_, 0);
        const int x1 = std::min(x + r_, w_ - 1) + 1;
        const int y1 = std::min(y + r_, h_ - 1) + 1;
        const std::size_t stride = w_ + 1;
        const double sum = sat_[y1 * stride + x1] - sat_[y0 * stride + x1] -
                           sat_[y1 * stride + x0] + sat_[y0 * stride + x0];
        return sum / ((x1 - x0) * (y1 - y0));
    }

   private:
    int w_, h_, r_;
    std::vector<double> sat_;
};

}  // namespace

ScalarField guided_filter(const Image& guide, const ScalarField& input, int radius,
                          double mu) {
    if (guide.width != input.width || guide.height != input.height)
        throw std::invalid_argument("guided_filter: dimension mismatch");
    if (radius < 1) throw std::invalid_argument("guided_filter: radius must be >= 1");
    if (mu <= 0.0) throw std::invalid_argument("guided_filter: mu must be > 0");
    if (!input.all_valid())
        throw std::invalid_argument("guided_filter: input must be complete");

    const int w = guide.width;
    const int h = guide.height;
    const std::size_t n = static_cast<std::size_t>(w) * h;

    std::vector<double> chan[3];
    for (int c = 0; c < 3; ++c) {
        chan[c].resize(n);
        for (std::size_t i = 0; i < n; ++i) chan[c][i] = guide.data[i * 3 + c];
    }

    // First pass of box means: guide channels, input, and the products needed
    // for the covariance terms.
    BoxMean box(w, h, radius);
    std::vector<double> buf(n);
    auto boxed = [&](const std::vector<double>& src) {
        box.build(src);
        std::vector<double> out(n);
        std::size_t i = 0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x, ++i) out[i] = box.mean(x, y);
        return out;
    };
    auto boxed_product = [&](const std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < n; ++i) buf[i] = a[i] * b[i];
        return boxed(buf);
    };

    const std::vector<double> mean_r = boxed(chan[0]);
    const std::vector<double> mean_g = boxed(chan[1]);
    const std::vector<double> mean_b = boxed(chan[2]);
    const std::vector<double> mean_p = boxed(input.values);

    const std::vector<double> mean_rp = boxed_product(chan[0], input.values);
    const std::vector<double> mean_gp = boxed_product(chan[1], input.values);
    const std::vector<double> mean_bp = boxed_product(chan[2], input.values);

    const std::vector<double> mean_rr = boxed_product(chan[0], chan[0]);
    const std::vector<double> mean_rg = boxed_product(chan[0], chan[1]);
    const std::vector<double> mean_rb = boxed_product(chan[0], chan[2]);
    const std::vector<double> mean_gg = boxed_product(chan[1], chan[1]);
    const std::vector<double> mean_gb = boxed_product(chan[1], chan[2]);
    const std::vector<double> mean_bb = boxed_product(chan[2], chan[2]);

    // Per-pixel linear coefficients a (3-vector) and b: a = (Sigma + mu I)^-1
    // cov(I, p), solved with the symmetric cofactor inverse.
    std::vector<double> a_r(n), a_g(n), a_b(n), b_term(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s_rr = mean_rr[i] - mean_r[i] * mean_r[i] + mu;
        const double s_rg = mean_rg[i] - mean_r[i] * mean_g[i];
        const double s_rb = mean_rb[i] - mean_r[i] * mean_b[i];
        const double s_gg = mean_gg[i] - mean_g[i] * mean_g[i] + mu;
        const double s_gb = mean_gb[i] - mean_g[i] * mean_b[i];
        const double s_bb = mean_bb[i] - mean_b[i] * mean_b[i] + mu;

        const double c_rr = s_gg * s_bb - s_gb * s_gb;
        const double c_rg = s_gb * s_rb - s_rg * s_bb;
        const double c_rb = s_rg * s_gb - s_gg * s_rb;
        const double c_gg = s_rr * s_bb - s_rb * s_rb;
        const double c_gb = s_rb * s_rg - s_rr * s_gb;
        const double c_bb = s_rr * s_gg - s_rg * s_rg;
        const double det = s_rr * c_rr + s_rg * c_rg + s_rb * c_rb;

        const double cov_rp = mean_rp[i] - mean_r[i] * mean_p[i];
        const double cov_gp = mean_gp[i] - mean_g[i] * mean_p[i];
        const double cov_bp = mean_bp[i] - mean_b[i] * mean_p[i];

        a_r[i] = (c_rr * cov_rp + c_rg * cov_gp + c_rb * cov_bp) / det;
        a_g[i] = (c_rg * cov_rp + c_gg * cov_gp + c_gb * cov_bp) / det;
        a_b[i] = (c_rb * cov_rp + c_gb * cov_gp + c_bb * cov_bp) / det;
        b_term[i] = mean_p[i] - a_r[i] * mean_r[i] - a_g[i] * mean_g[i] -
                    a_b[i] * mean_b[i];
    }

    const std::vector<double> mean_ar = boxed(a_r);
    const std::vector<double> mean_ag = boxed(a_g);
    const std::vector<double> mean_ab = boxed(a_b);
    const std::vector<double> mean_bt = boxed(b_term);

    ScalarField out = ScalarField::complete(w, h);
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = mean_ar[i] * chan[0][i] + mean_ag[i] * chan[1][i] +
                        mean_ab[i] * chan[2][i] + mean_bt[i];
    }
    return out;
}

}  // namespace foggen
