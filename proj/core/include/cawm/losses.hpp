#pragma once

// Training losses: wavelet-domain L1, intensity, CbCr color consistency,
// perceptual (pluggable frozen extractor), Sobel gradient, SSIM, and the
// alpha-weighted total.

#include <functional>
#include <vector>

#include "cawm/nn.hpp"
#include "cawm/random.hpp"
#include "cawm/tensor.hpp"
#include "cawm/wavelet.hpp"

namespace cawm {

template <typename T>
struct LossReport {
    T wavelet = 0, intensity = 0, color = 0, perceptual = 0, gradient = 0, ssim = 0;
    T total = 0;
    T alpha = 0;
};

namespace detail {

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* who) {
    if (!(a.shape() == b.shape()))
        throw UsageError(std::string(who) + ": shape mismatch " + a.shape().str() +
                         " vs " + b.shape().str());
}

template <typename T>
Tensor<T> repeat_channels3(const Tensor<T>& x) {
    if (x.shape().c == 3) return x;
    if (x.shape().c != 1)
        throw UsageError("expected 1 or 3 channels, got " +
                         std::to_string(x.shape().c));
    return concat_channels<T>({x, x, x});
}

}  // namespace detail

// L_wavelet = L_low + (L_LH + L_HL + L_HH)/3, each an L1 between one-level
// Haar subbands of the fused and clean-visible images.
template <typename T>
Tensor<T> wavelet_loss(const Tensor<T>& fused, const Tensor<T>& vis_clean) {
    detail::require_same_shape(fused, vis_clean, "wavelet_loss");
    WaveletPack<T> pf = dwt2(fused);
    WaveletPack<T> pv = dwt2(vis_clean);
    Tensor<T> low = mean_abs(sub(pf.ll, pv.ll));
    Tensor<T> high = add(add(mean_abs(sub(pf.lh, pv.lh)), mean_abs(sub(pf.hl, pv.hl))),
                         mean_abs(sub(pf.hh, pv.hh)));
    return add(low, scale(high, T(1) / T(3)));
}

// L1 against the elementwise max of the clean sources; ir is broadcast to
// three channels.
template <typename T>
Tensor<T> intensity_loss(const Tensor<T>& fused, const Tensor<T>& vis_clean,
                         const Tensor<T>& ir_clean) {
    Tensor<T> ir3 = detail::repeat_channels3(ir_clean);
    detail::require_same_shape(fused, vis_clean, "intensity_loss");
    detail::require_same_shape(fused, ir3, "intensity_loss");
    return mean_abs(sub(fused, maximum(vis_clean, ir3)));
}

namespace detail {

// BT.601 chroma planes, each offset to 0.5 for neutral gray.
template <typename T>
Tensor<T> rgb_to_cbcr(const Tensor<T>& x) {
    if (x.shape().c != 3) throw UsageError("rgb_to_cbcr: expected 3 channels");
    Tensor<T> r = slice_channels(x, 0, 1);
    Tensor<T> g = slice_channels(x, 1, 2);
    Tensor<T> b = slice_channels(x, 2, 3);
    Tensor<T> cb = add_scalar(
        add(add(scale(r, T(-0.168736)), scale(g, T(-0.331264))), scale(b, T(0.5))),
        T(0.5));
    Tensor<T> cr = add_scalar(
        add(add(scale(r, T(0.5)), scale(g, T(-0.418688))), scale(b, T(-0.081312))),
        T(0.5));
    return concat_channels<T>({cb, cr});
}

}  // namespace detail

template <typename T>
Tensor<T> color_loss(const Tensor<T>& fused, const Tensor<T>& vis_clean) {
    detail::require_same_shape(fused, vis_clean, "color_loss");
    return mean_abs(sub(detail::rgb_to_cbcr(fused), detail::rgb_to_cbcr(vis_clean)));
}

// ---- perceptual ----

// A feature pyramid: list of feature maps per stage. The default is a
// frozen, seeded random conv stack standing in for a pretrained backbone;
// any extractor with this signature can be plugged in.
template <typename T>
using FeatureExtractor = std::function<std::vector<Tensor<T>>(const Tensor<T>&)>;

template <typename T>
FeatureExtractor<T> make_random_pyramid_extractor(uint64_t seed = 42) {
    auto weights = std::make_shared<std::vector<Tensor<T>>>();
    Rng rng(seed);
    const int64_t chans[4] = {3, 8, 16, 32};
    for (int i = 0; i < 3; ++i) {
        Tensor<T> w = Tensor<T>::zeros({chans[i + 1], chans[i], 3, 3});
        kaiming_uniform_(w, chans[i] * 9, rng);
        weights->push_back(std::move(w));
    }
    return [weights](const Tensor<T>& x) {
        std::vector<Tensor<T>> feats;
        Tensor<T> cur = x;
        for (const auto& w : *weights) {
            cur = relu(conv2d(cur, w, /*stride=*/2, /*padding=*/1));
            feats.push_back(cur);
        }
        return feats;
    };
}

template <typename T>
Tensor<T> perceptual_loss(const Tensor<T>& fused, const Tensor<T>& vis_clean,
                          const FeatureExtractor<T>& extractor) {
    detail::require_same_shape(fused, vis_clean, "perceptual_loss");
    std::vector<Tensor<T>> ff = extractor(fused);
    std::vector<Tensor<T>> fv = extractor(vis_clean);
    if (ff.size() != fv.size() || ff.empty())
        throw UsageError("perceptual_loss: extractor stage mismatch");
    Tensor<T> acc = mean_abs(sub(ff[0], fv[0]));
    for (size_t l = 1; l < ff.size(); ++l)
        acc = add(acc, mean_abs(sub(ff[l], fv[l])));
    return scale(acc, T(1) / static_cast<T>(ff.size()));
}

// ---- gradient ----

namespace detail {

// Per-pixel |d/dx| + |d/dy| via 3x3 Sobel kernels, same-size output.
template <typename T>
Tensor<T> sobel_magnitude(const Tensor<T>& x) {
    static const std::vector<T> kx = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
    static const std::vector<T> ky = {-1, -2, -1, 0, 0, 0, 1, 2, 1};
    Tensor<T> gx = depthwise_fixed_conv2d(x, kx, 3, 1);
    Tensor<T> gy = depthwise_fixed_conv2d(x, ky, 3, 1);
    return add(abs_t(gx), abs_t(gy));
}

}  // namespace detail

template <typename T>
Tensor<T> gradient_loss(const Tensor<T>& fused, const Tensor<T>& vis_clean,
                        const Tensor<T>& ir_clean) {
    Tensor<T> ir3 = detail::repeat_channels3(ir_clean);
    detail::require_same_shape(fused, vis_clean, "gradient_loss");
    Tensor<T> gf = detail::sobel_magnitude(fused);
    Tensor<T> gmax = maximum(detail::sobel_magnitude(vis_clean),
                             detail::sobel_magnitude(ir3));
    return mean_abs(sub(gf, gmax));
}

// ---- SSIM ----

namespace detail {

template <typename T>
std::vector<T> gaussian_window_11(T sigma = T(1.5)) {
    std::vector<T> w(11 * 11);
    T sum = T(0);
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
            const T di = T(i - 5), dj = T(j - 5);
            w[i * 11 + j] = std::exp(-(di * di + dj * dj) / (T(2) * sigma * sigma));
            sum += w[i * 11 + j];
        }
    for (auto& v : w) v /= sum;
    return w;
}

}  // namespace detail

// Mean SSIM over an 11x11 Gaussian window (sigma 1.5), C1=0.01^2, C2=0.03^2,
// valid-region windows only. Differentiable; symmetric in its arguments.
template <typename T>
Tensor<T> ssim(const Tensor<T>& x, const Tensor<T>& y) {
    detail::require_same_shape(x, y, "ssim");
    if (x.shape().h < 11 || x.shape().w < 11)
        throw UsageError("ssim: image " + x.shape().str() + " smaller than 11x11 window");
    static const std::vector<T> win = detail::gaussian_window_11<T>();
    auto blur = [&](const Tensor<T>& t) {
        return depthwise_fixed_conv2d(t, win, 11, 0);
    };
    const T c1 = T(0.01) * T(0.01), c2 = T(0.03) * T(0.03);
    Tensor<T> mx = blur(x), my = blur(y);
    Tensor<T> mx2 = square(mx), my2 = square(my), mxy = mul(mx, my);
    Tensor<T> sx = sub(blur(square(x)), mx2);
    Tensor<T> sy = sub(blur(square(y)), my2);
    Tensor<T> sxy = sub(blur(mul(x, y)), mxy);
    Tensor<T> num = mul(add_scalar(scale(mxy, T(2)), c1), add_scalar(scale(sxy, T(2)), c2));
    Tensor<T> den = mul(add_scalar(add(mx2, my2), c1), add_scalar(add(sx, sy), c2));
    return mean(div(num, den));
}

// 1 - mean of SSIM(fused, vis) and SSIM(fused, ir).
template <typename T>
Tensor<T> ssim_loss(const Tensor<T>& fused, const Tensor<T>& vis_clean,
                    const Tensor<T>& ir_clean) {
    Tensor<T> ir3 = detail::repeat_channels3(ir_clean);
    Tensor<T> s = scale(add(ssim(fused, vis_clean), ssim(fused, ir3)), T(0.5));
    return add_scalar(scale(s, T(-1)), T(1));
}

// ---- total ----

// L_total = alpha * L_wavelet + L_color + L_per + L_grad + L_int + L_ssim.
// alpha is a learnable scalar tensor and receives gradient.
template <typename T>
std::pair<Tensor<T>, LossReport<T>> total_loss(const Tensor<T>& fused,
                                               const Tensor<T>& vis_clean,
                                               const Tensor<T>& ir_clean,
                                               const Tensor<T>& alpha,
                                               const FeatureExtractor<T>& extractor) {
    if (alpha.numel() != 1) throw UsageError("total_loss: alpha must be scalar");
    Tensor<T> lw = wavelet_loss(fused, vis_clean);
    Tensor<T> li = intensity_loss(fused, vis_clean, ir_clean);
    Tensor<T> lc = color_loss(fused, vis_clean);
    Tensor<T> lp = perceptual_loss(fused, vis_clean, extractor);
    Tensor<T> lg = gradient_loss(fused, vis_clean, ir_clean);
    Tensor<T> ls = ssim_loss(fused, vis_clean, ir_clean);
    Tensor<T> total =
        add(mul(lw, alpha), add(add(lc, lp), add(add(lg, li), ls)));
    LossReport<T> rep;
    rep.wavelet = lw.item();
    rep.intensity = li.item();
    rep.color = lc.item();
    rep.perceptual = lp.item();
    rep.gradient = lg.item();
    rep.ssim = ls.item();
    rep.alpha = alpha.item();
    rep.total = total.item();
    return {total, rep};
}

}  // namespace cawm
