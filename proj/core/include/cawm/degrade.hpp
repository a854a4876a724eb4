#pragma once

// Synthetic weather degradations (haze, rain, snow) plus clean-scene and
// infrared image generators for building training/eval pairs. All
// generators are deterministic per seed and map [0,1] images into [0,1].

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cawm/error.hpp"
#include "cawm/random.hpp"
#include "cawm/tensor.hpp"

namespace cawm {

enum class WeatherKind { Haze, Rain, Snow };

inline std::string to_string(WeatherKind k) {
    switch (k) {
        case WeatherKind::Haze: return "haze";
        case WeatherKind::Rain: return "rain";
        case WeatherKind::Snow: return "snow";
    }
    return "?";
}

inline WeatherKind weather_kind_from_string(const std::string& s) {
    if (s == "haze") return WeatherKind::Haze;
    if (s == "rain") return WeatherKind::Rain;
    if (s == "snow") return WeatherKind::Snow;
    throw UsageError("unknown weather kind '" + s + "' (expected haze|rain|snow)");
}

struct DegradationSpec {
    std::vector<WeatherKind> kinds;
    std::vector<double> severities;  // parallel to kinds, each in [0,1]
    uint64_t seed = 0;

    void validate() const {
        if (kinds.empty()) throw UsageError("degradation spec: at least one kind required");
        if (severities.size() != kinds.size())
            throw UsageError("degradation spec: one severity per kind required");
        for (double s : severities)
            if (s < 0.0 || s > 1.0)
                throw UsageError("degradation spec: severity " + std::to_string(s) +
                                 " outside [0,1]");
    }
};

namespace detail {

inline float clamp01(double v) {
    return static_cast<float>(std::clamp(v, 0.0, 1.0));
}

}  // namespace detail

// Atmospheric-scattering haze with a caller-supplied transmission depth
// field d in [0,1]: I = J*t + A*(1-t), t = exp(-beta*d), beta = 0.5 + 2s.
inline Tensor<float> apply_haze_with_depth(const Tensor<float>& img, double severity,
                                           const std::vector<double>& depth) {
    const Shape s = img.shape();
    if (depth.size() != static_cast<size_t>(s.h * s.w))
        throw UsageError("apply_haze_with_depth: depth size mismatch");
    const double beta = 0.5 + 2.0 * severity;
    const double a_atm = 0.9;
    Tensor<float> out = Tensor<float>::zeros(s);
    for (int64_t b = 0; b < s.b; ++b)
        for (int64_t c = 0; c < s.c; ++c)
            for (int64_t h = 0; h < s.h; ++h)
                for (int64_t w = 0; w < s.w; ++w) {
                    const double t = std::exp(-beta * depth[h * s.w + w]);
                    const double j = img.at(b, c, h, w);
                    out.at(b, c, h, w) = detail::clamp01(j * t + a_atm * (1.0 - t));
                }
    return out;
}

// Default smooth depth ramp increasing toward the bottom-right corner.
inline std::vector<double> haze_depth_ramp(int64_t H, int64_t W) {
    std::vector<double> d(static_cast<size_t>(H * W));
    for (int64_t h = 0; h < H; ++h)
        for (int64_t w = 0; w < W; ++w) {
            const double dh = H > 1 ? static_cast<double>(h) / (H - 1) : 1.0;
            const double dw = W > 1 ? static_cast<double>(w) / (W - 1) : 1.0;
            d[h * W + w] = 0.5 * (dh + dw);
        }
    return d;
}

inline Tensor<float> apply_haze(const Tensor<float>& img, double severity,
                                uint64_t /*seed*/ = 0) {
    return apply_haze_with_depth(img, severity,
                                 haze_depth_ramp(img.shape().h, img.shape().w));
}

// Bright oriented streaks: sparse seeded impulses convolved with a line
// kernel at an angle in [60, 120] degrees from the horizontal axis.
inline Tensor<float> apply_rain(const Tensor<float>& img, double severity,
                                uint64_t seed) {
    if (severity == 0.0) return img.detach();
    const Shape s = img.shape();
    Rng rng(seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull);
    const double angle_deg = rng.uniform(60.0, 120.0);
    const double ang = angle_deg * M_PI / 180.0;
    const double dx = std::cos(ang), dy = std::sin(ang);
    const int64_t streak_len = 7 + static_cast<int64_t>(std::floor(8.0 * severity));
    const int64_t n_streaks = std::max<int64_t>(
        1, static_cast<int64_t>(0.02 * severity * static_cast<double>(s.h * s.w)));
    std::vector<double> field(static_cast<size_t>(s.h * s.w), 0.0);
    for (int64_t k = 0; k < n_streaks; ++k) {
        const int64_t h0 = rng.uniform_int(0, s.h - 1);
        const int64_t w0 = rng.uniform_int(0, s.w - 1);
        const double amp = 0.4 + 0.6 * rng.uniform(0.0, 1.0);
        for (int64_t t = 0; t < streak_len; ++t) {
            const int64_t hh = h0 + static_cast<int64_t>(std::lround(dy * t));
            const int64_t ww = w0 + static_cast<int64_t>(std::lround(dx * t));
            if (hh < 0 || hh >= s.h || ww < 0 || ww >= s.w) continue;
            // alternate the intensity along the streak so drops read as
            // broken dashes rather than solid low-frequency bars
            const double a = t % 2 == 0 ? amp : 0.2 * amp;
            field[hh * s.w + ww] = std::max(field[hh * s.w + ww], a);
        }
    }
    Tensor<float> out = Tensor<float>::zeros(s);
    const double gain = 0.35 + 0.45 * severity;
    for (int64_t b = 0; b < s.b; ++b)
        for (int64_t c = 0; c < s.c; ++c)
            for (int64_t h = 0; h < s.h; ++h)
                for (int64_t w = 0; w < s.w; ++w)
                    out.at(b, c, h, w) = detail::clamp01(
                        img.at(b, c, h, w) + gain * field[h * s.w + w]);
    return out;
}

// Bright specks of radius 0-1 px (single pixels and small crosses), so the
// residual stays concentrated in the high-frequency bands; density scales
// with severity.
inline Tensor<float> apply_snow(const Tensor<float>& img, double severity,
                                uint64_t seed) {
    if (severity == 0.0) return img.detach();
    const Shape s = img.shape();
    Rng rng(seed * 0xbf58476d1ce4e5b9ull + 0x94d049bb133111ebull);
    const int64_t n_flakes = std::max<int64_t>(
        1, static_cast<int64_t>(0.01 * severity * static_cast<double>(s.h * s.w)));
    std::vector<double> field(static_cast<size_t>(s.h * s.w), 0.0);
    for (int64_t k = 0; k < n_flakes; ++k) {
        const int64_t h0 = rng.uniform_int(0, s.h - 1);
        const int64_t w0 = rng.uniform_int(0, s.w - 1);
        // mostly single-pixel specks, occasionally a small cross
        const int64_t r = rng.uniform(0.0, 1.0) < 0.9 ? 0 : 1;
        const double amp = 0.5 + 0.5 * rng.uniform(0.0, 1.0);
        for (int64_t hh = std::max<int64_t>(0, h0 - r);
             hh <= std::min(s.h - 1, h0 + r); ++hh)
            for (int64_t ww = std::max<int64_t>(0, w0 - r);
                 ww <= std::min(s.w - 1, w0 + r); ++ww) {
                const int64_t d2 = (hh - h0) * (hh - h0) + (ww - w0) * (ww - w0);
                if (d2 <= r * r)
                    field[hh * s.w + ww] = std::max(field[hh * s.w + ww], amp);
            }
    }
    Tensor<float> out = Tensor<float>::zeros(s);
    const double gain = 0.4 + 0.5 * severity;
    for (int64_t b = 0; b < s.b; ++b)
        for (int64_t c = 0; c < s.c; ++c)
            for (int64_t h = 0; h < s.h; ++h)
                for (int64_t w = 0; w < s.w; ++w)
                    out.at(b, c, h, w) = detail::clamp01(
                        img.at(b, c, h, w) + gain * field[h * s.w + w]);
    return out;
}

// Fixed composition order: atmospheric veil first, precipitation on top
// (haze -> rain -> snow). Each stage draws from seed, seed+1, seed+2.
inline Tensor<float> apply_compound(const Tensor<float>& img,
                                    const DegradationSpec& spec) {
    spec.validate();
    auto severity_of = [&](WeatherKind k) -> double {
        for (size_t i = 0; i < spec.kinds.size(); ++i)
            if (spec.kinds[i] == k) return spec.severities[i];
        return -1.0;
    };
    Tensor<float> cur = img.detach();
    if (double sv = severity_of(WeatherKind::Haze); sv > 0.0)
        cur = apply_haze(cur, sv, spec.seed);
    if (double sv = severity_of(WeatherKind::Rain); sv > 0.0)
        cur = apply_rain(cur, sv, spec.seed + 1);
    if (double sv = severity_of(WeatherKind::Snow); sv > 0.0)
        cur = apply_snow(cur, sv, spec.seed + 2);
    return cur;
}

// Procedural clean RGB scene: smooth color gradients plus a few soft
// rectangles and discs so the image has both low- and mid-frequency
// structure.
inline Tensor<float> synth_clean_image(int64_t H, int64_t W, uint64_t seed) {
    Rng rng(seed * 0xd6e8feb86659fd93ull + 1);
    Tensor<float> img = Tensor<float>::zeros({1, 3, H, W});
    double phase[3], fx[3], fy[3];
    for (int c = 0; c < 3; ++c) {
        phase[c] = rng.uniform(0.0, 2.0 * M_PI);
        fx[c] = rng.uniform(0.5, 2.5);
        fy[c] = rng.uniform(0.5, 2.5);
    }
    for (int c = 0; c < 3; ++c)
        for (int64_t h = 0; h < H; ++h)
            for (int64_t w = 0; w < W; ++w) {
                const double u = static_cast<double>(h) / std::max<int64_t>(1, H - 1);
                const double v = static_cast<double>(w) / std::max<int64_t>(1, W - 1);
                const double val =
                    0.5 + 0.35 * std::sin(2.0 * M_PI * (fx[c] * u + fy[c] * v) + phase[c]);
                img.at(0, c, h, w) = detail::clamp01(val);
            }
    const int n_shapes = 4;
    for (int k = 0; k < n_shapes; ++k) {
        const int64_t h0 = rng.uniform_int(0, H - 1);
        const int64_t w0 = rng.uniform_int(0, W - 1);
        const int64_t rh = std::max<int64_t>(2, rng.uniform_int(H / 8, H / 3));
        const int64_t rw = std::max<int64_t>(2, rng.uniform_int(W / 8, W / 3));
        double col[3];
        for (int c = 0; c < 3; ++c) col[c] = rng.uniform(0.1, 0.9);
        const double mix = rng.uniform(0.4, 0.8);
        for (int64_t h = std::max<int64_t>(0, h0 - rh);
             h <= std::min(H - 1, h0 + rh); ++h)
            for (int64_t w = std::max<int64_t>(0, w0 - rw);
                 w <= std::min(W - 1, w0 + rw); ++w)
                for (int c = 0; c < 3; ++c)
                    img.at(0, c, h, w) = detail::clamp01(
                        (1.0 - mix) * img.at(0, c, h, w) + mix * col[c]);
    }
    return img;
}

// Single-channel infrared proxy: scene luminance plus a few bright
// "thermal" blobs with Gaussian falloff.
inline Tensor<float> synth_ir_image(const Tensor<float>& clean_rgb, uint64_t seed) {
    const Shape s = clean_rgb.shape();
    if (s.c != 3) throw UsageError("synth_ir_image: expected 3-channel input");
    Rng rng(seed * 0xa0761d6478bd642full + 2);
    Tensor<float> ir = Tensor<float>::zeros({s.b, 1, s.h, s.w});
    for (int64_t b = 0; b < s.b; ++b)
        for (int64_t h = 0; h < s.h; ++h)
            for (int64_t w = 0; w < s.w; ++w)
                ir.at(b, 0, h, w) = detail::clamp01(
                    0.299 * clean_rgb.at(b, 0, h, w) + 0.587 * clean_rgb.at(b, 1, h, w) +
                    0.114 * clean_rgb.at(b, 2, h, w));
    const int n_blobs = 3;
    for (int k = 0; k < n_blobs; ++k) {
        const double h0 = rng.uniform(0.0, static_cast<double>(s.h - 1));
        const double w0 = rng.uniform(0.0, static_cast<double>(s.w - 1));
        const double sigma = rng.uniform(static_cast<double>(s.h) / 12.0,
                                         static_cast<double>(s.h) / 6.0);
        const double amp = rng.uniform(0.1, 0.25);
        for (int64_t b = 0; b < s.b; ++b)
            for (int64_t h = 0; h < s.h; ++h)
                for (int64_t w = 0; w < s.w; ++w) {
                    const double d2 = (h - h0) * (h - h0) + (w - w0) * (w - w0);
                    const double g = amp * std::exp(-d2 / (2.0 * sigma * sigma));
                    ir.at(b, 0, h, w) = detail::clamp01(ir.at(b, 0, h, w) + g);
                }
    }
    return ir;
}

}  // namespace cawm
