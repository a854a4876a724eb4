#pragma once

// Fusion-quality metrics: windowed SSIM, histogram-based normalized mutual
// information, and the gradient-preservation measure Q_abf.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cawm/losses.hpp"
#include "cawm/tensor.hpp"

namespace cawm {

struct MetricReport {
    double ssim = 0, q_mi = 0, q_abf = 0;
};

namespace detail {

// 8-bit luminance plane of the first batch item.
inline std::vector<uint8_t> luminance8(const Tensor<float>& img) {
    const Shape s = img.shape();
    std::vector<uint8_t> out(static_cast<size_t>(s.h * s.w));
    for (int64_t h = 0; h < s.h; ++h)
        for (int64_t w = 0; w < s.w; ++w) {
            double y;
            if (s.c >= 3)
                y = 0.299 * img.at(0, 0, h, w) + 0.587 * img.at(0, 1, h, w) +
                    0.114 * img.at(0, 2, h, w);
            else
                y = img.at(0, 0, h, w);
            y = std::clamp(y, 0.0, 1.0);
            out[h * s.w + w] = static_cast<uint8_t>(std::floor(y * 255.0 + 0.5));
        }
    return out;
}

inline std::vector<double> luminance(const Tensor<float>& img) {
    const Shape s = img.shape();
    std::vector<double> out(static_cast<size_t>(s.h * s.w));
    for (int64_t h = 0; h < s.h; ++h)
        for (int64_t w = 0; w < s.w; ++w) {
            double y;
            if (s.c >= 3)
                y = 0.299 * img.at(0, 0, h, w) + 0.587 * img.at(0, 1, h, w) +
                    0.114 * img.at(0, 2, h, w);
            else
                y = img.at(0, 0, h, w);
            out[h * s.w + w] = y;
        }
    return out;
}

// Normalized MI of one pair: 2*MI(a,b)/(H(a)+H(b)); 0 when either entropy
// vanishes (constant image).
inline double normalized_mi(const std::vector<uint8_t>& a,
                            const std::vector<uint8_t>& b) {
    std::array<double, 256> pa{}, pb{};
    std::vector<double> pab(256 * 256, 0.0);
    const double inv = 1.0 / static_cast<double>(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        pa[a[i]] += inv;
        pb[b[i]] += inv;
        pab[a[i] * 256 + b[i]] += inv;
    }
    auto entropy = [](const auto& p) {
        double h = 0;
        for (double v : p)
            if (v > 0) h -= v * std::log2(v);
        return h;
    };
    const double ha = entropy(pa), hb = entropy(pb);
    if (ha <= 0 || hb <= 0) return 0.0;
    double mi = 0;
    for (int i = 0; i < 256; ++i)
        for (int j = 0; j < 256; ++j) {
            const double p = pab[i * 256 + j];
            if (p > 0) mi += p * std::log2(p / (pa[i] * pb[j]));
        }
    return 2.0 * mi / (ha + hb);
}

struct EdgeField {
    std::vector<double> strength, angle;
};

inline EdgeField sobel_field(const std::vector<double>& lum, int64_t H, int64_t W) {
    EdgeField f;
    f.strength.assign(lum.size(), 0.0);
    f.angle.assign(lum.size(), 0.0);
    auto px = [&](int64_t h, int64_t w) {
        h = std::clamp<int64_t>(h, 0, H - 1);
        w = std::clamp<int64_t>(w, 0, W - 1);
        return lum[h * W + w];
    };
    for (int64_t h = 0; h < H; ++h)
        for (int64_t w = 0; w < W; ++w) {
            const double gx = px(h - 1, w + 1) + 2 * px(h, w + 1) + px(h + 1, w + 1) -
                              px(h - 1, w - 1) - 2 * px(h, w - 1) - px(h + 1, w - 1);
            const double gy = px(h + 1, w - 1) + 2 * px(h + 1, w) + px(h + 1, w + 1) -
                              px(h - 1, w - 1) - 2 * px(h - 1, w) - px(h - 1, w + 1);
            f.strength[h * W + w] = std::sqrt(gx * gx + gy * gy);
            f.angle[h * W + w] = std::atan2(gy, gx == 0.0 && gy == 0.0 ? 1.0 : gx);
        }
    return f;
}

// Xydeas-Petrovic per-pixel edge preservation of source s in fused f.
inline double edge_preservation(double gs, double as, double gf, double af) {
    constexpr double kGammaG = 0.9994, kKappaG = -15.0, kSigmaG = 0.5;
    constexpr double kGammaA = 0.9879, kKappaA = -22.0, kSigmaA = 0.8;
    double g;
    if (gs == 0.0 && gf == 0.0)
        g = 1.0;
    else if (gs == 0.0 || gf == 0.0)
        g = 0.0;
    else
        g = gs > gf ? gf / gs : gs / gf;
    double da = std::abs(as - af);
    if (da > M_PI) da = 2 * M_PI - da;
    if (da > M_PI / 2) da = M_PI - da;
    const double a = 1.0 - da / (M_PI / 2);
    const double qg = kGammaG / (1.0 + std::exp(kKappaG * (g - kSigmaG)));
    const double qa = kGammaA / (1.0 + std::exp(kKappaA * (a - kSigmaA)));
    return qg * qa;
}

}  // namespace detail

// Normalized mutual-information transfer from both sources to the fused
// image. Each pair contributes 2*MI/(H+H), so the self-similarity ceiling
// is 2 per pair.
inline double metric_q_mi(const Tensor<float>& fused, const Tensor<float>& vis,
                          const Tensor<float>& ir) {
    auto f = detail::luminance8(fused);
    auto v = detail::luminance8(vis);
    auto i = detail::luminance8(ir);
    return detail::normalized_mi(f, v) + detail::normalized_mi(f, i);
}

inline double metric_q_abf(const Tensor<float>& fused, const Tensor<float>& vis,
                           const Tensor<float>& ir) {
    const int64_t H = fused.shape().h, W = fused.shape().w;
    auto ef = detail::sobel_field(detail::luminance(fused), H, W);
    auto ev = detail::sobel_field(detail::luminance(vis), H, W);
    auto ei = detail::sobel_field(detail::luminance(ir), H, W);
    double num = 0, den = 0;
    for (size_t p = 0; p < ef.strength.size(); ++p) {
        const double qv = detail::edge_preservation(ev.strength[p], ev.angle[p],
                                                    ef.strength[p], ef.angle[p]);
        const double qi = detail::edge_preservation(ei.strength[p], ei.angle[p],
                                                    ef.strength[p], ef.angle[p]);
        num += qv * ev.strength[p] + qi * ei.strength[p];
        den += ev.strength[p] + ei.strength[p];
    }
    if (den == 0.0) return 0.0;
    return std::clamp(num / den, 0.0, 1.0);
}

// Mean of SSIM(fused, vis) and SSIM(fused, ir).
inline double metric_ssim(const Tensor<float>& fused, const Tensor<float>& vis,
                          const Tensor<float>& ir) {
    Tensor<float> ir3 = detail::repeat_channels3(ir.detach());
    const double sv = ssim(fused.detach(), vis.detach()).item();
    const double si = ssim(fused.detach(), ir3).item();
    return 0.5 * (sv + si);
}

inline MetricReport compute_metrics(const Tensor<float>& fused,
                                    const Tensor<float>& vis,
                                    const Tensor<float>& ir) {
    MetricReport r;
    r.ssim = metric_ssim(fused, vis, ir);
    r.q_mi = metric_q_mi(fused, vis, ir);
    r.q_abf = metric_q_abf(fused, vis, ir);
    return r;
}

}  // namespace cawm
