#pragma once

// One-level 2D Haar DWT/IDWT with orthonormal scaling (1/2 per 2x2 block),
// so energy is preserved on even dimensions. Odd inputs are zero-padded to
// even before filtering and cropped back on inverse.

#include "cawm/nn.hpp"
#include "cawm/tensor.hpp"

namespace cawm {

template <typename T>
struct WaveletPack {
    Tensor<T> ll, lh, hl, hh;
    int64_t original_h = 0, original_w = 0;
};

namespace detail {

// Zero-pads the bottom/right edge by one row/column when odd.
template <typename T>
Tensor<T> zero_pad_even(const Tensor<T>& x) {
    const Shape s = x.shape();
    const int64_t h2 = s.h + (s.h % 2), w2 = s.w + (s.w % 2);
    if (h2 == s.h && w2 == s.w) return x;
    Shape so{s.b, s.c, h2, w2};
    std::vector<T> v(so.numel(), T(0));
    const auto& xv = x.data();
    for (int64_t bc = 0; bc < s.b * s.c; ++bc)
        for (int64_t h = 0; h < s.h; ++h)
            for (int64_t w = 0; w < s.w; ++w)
                v[(bc * h2 + h) * w2 + w] = xv[(bc * s.h + h) * s.w + w];
    auto xn = x.n;
    return make_node<T>(so, std::move(v), {x}, [xn, s, h2, w2](Node<T>& out) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (int64_t bc = 0; bc < s.b * s.c; ++bc)
            for (int64_t h = 0; h < s.h; ++h)
                for (int64_t w = 0; w < s.w; ++w)
                    xn->grad[(bc * s.h + h) * s.w + w] +=
                        out.grad[(bc * h2 + h) * w2 + w];
    });
}

}  // namespace detail

// For each 2x2 block [[a,b],[c,d]]:
//   LL=(a+b+c+d)/2, LH=(a+b-c-d)/2, HL=(a-b+c-d)/2, HH=(a-b-c+d)/2.
// LH is the vertical-detail band (high-pass along height), HL horizontal.
template <typename T>
WaveletPack<T> dwt2(const Tensor<T>& x) {
    const Shape sin = x.shape();
    if (sin.h < 2 || sin.w < 2)
        throw DegenerateInputError("dwt2: spatial size " + sin.str() + " below 2x2");
    Tensor<T> xe = detail::zero_pad_even(x);
    const Shape s = xe.shape();
    const int64_t ho = s.h / 2, wo = s.w / 2;
    Shape so{s.b, s.c, ho, wo};
    std::vector<T> vll(so.numel()), vlh(so.numel()), vhl(so.numel()), vhh(so.numel());
    const auto& xv = xe.data();
    for (int64_t bc = 0; bc < s.b * s.c; ++bc)
        for (int64_t oh = 0; oh < ho; ++oh)
            for (int64_t ow = 0; ow < wo; ++ow) {
                const int64_t base = (bc * s.h + 2 * oh) * s.w + 2 * ow;
                const T a = xv[base], b = xv[base + 1];
                const T c = xv[base + s.w], d = xv[base + s.w + 1];
                const int64_t j = (bc * ho + oh) * wo + ow;
                vll[j] = (a + b + c + d) * T(0.5);
                vlh[j] = (a + b - c - d) * T(0.5);
                vhl[j] = (a - b + c - d) * T(0.5);
                vhh[j] = (a - b - c + d) * T(0.5);
            }
    auto xn = xe.n;
    auto band = [&](std::vector<T>&& v, int sign_r, int sign_c) {
        // sign_r: -1 if high-pass along rows (height), sign_c along columns.
        return detail::make_node<T>(
            so, std::move(v), {xe}, [xn, s, so, sign_r, sign_c](Node<T>& out) {
                if (!xn->requires_grad) return;
                xn->ensure_grad();
                for (int64_t bc = 0; bc < s.b * s.c; ++bc)
                    for (int64_t oh = 0; oh < so.h; ++oh)
                        for (int64_t ow = 0; ow < so.w; ++ow) {
                            const T g =
                                out.grad[(bc * so.h + oh) * so.w + ow] * T(0.5);
                            const int64_t base = (bc * s.h + 2 * oh) * s.w + 2 * ow;
                            xn->grad[base] += g;
                            xn->grad[base + 1] += g * sign_c;
                            xn->grad[base + s.w] += g * sign_r;
                            xn->grad[base + s.w + 1] += g * sign_r * sign_c;
                        }
            });
    };
    WaveletPack<T> p;
    p.ll = band(std::move(vll), 1, 1);
    p.lh = band(std::move(vlh), -1, 1);
    p.hl = band(std::move(vhl), 1, -1);
    p.hh = band(std::move(vhh), -1, -1);
    p.original_h = sin.h;
    p.original_w = sin.w;
    return p;
}

template <typename T>
Tensor<T> idwt2(const WaveletPack<T>& p) {
    const Shape s = p.ll.shape();
    if (!(p.lh.shape() == s) || !(p.hl.shape() == s) || !(p.hh.shape() == s))
        throw ConfigError("idwt2: subband shapes differ");
    Shape so{s.b, s.c, s.h * 2, s.w * 2};
    std::vector<T> v(so.numel());
    const auto& ll = p.ll.data();
    const auto& lh = p.lh.data();
    const auto& hl = p.hl.data();
    const auto& hh = p.hh.data();
    for (int64_t bc = 0; bc < s.b * s.c; ++bc)
        for (int64_t oh = 0; oh < s.h; ++oh)
            for (int64_t ow = 0; ow < s.w; ++ow) {
                const int64_t j = (bc * s.h + oh) * s.w + ow;
                const int64_t base = (bc * so.h + 2 * oh) * so.w + 2 * ow;
                v[base] = (ll[j] + lh[j] + hl[j] + hh[j]) * T(0.5);
                v[base + 1] = (ll[j] + lh[j] - hl[j] - hh[j]) * T(0.5);
                v[base + so.w] = (ll[j] - lh[j] + hl[j] - hh[j]) * T(0.5);
                v[base + so.w + 1] = (ll[j] - lh[j] - hl[j] + hh[j]) * T(0.5);
            }
    auto lln = p.ll.n;
    auto lhn = p.lh.n;
    auto hln = p.hl.n;
    auto hhn = p.hh.n;
    Tensor<T> full = detail::make_node<T>(
        so, std::move(v), {p.ll, p.lh, p.hl, p.hh},
        [lln, lhn, hln, hhn, s, so](Node<T>& out) {
            auto acc = [&](std::shared_ptr<Node<T>> n, int sr, int sc) {
                if (!n->requires_grad) return;
                n->ensure_grad();
                for (int64_t bc = 0; bc < s.b * s.c; ++bc)
                    for (int64_t oh = 0; oh < s.h; ++oh)
                        for (int64_t ow = 0; ow < s.w; ++ow) {
                            const int64_t j = (bc * s.h + oh) * s.w + ow;
                            const int64_t base = (bc * so.h + 2 * oh) * so.w + 2 * ow;
                            n->grad[j] += T(0.5) * (out.grad[base] +
                                                    sc * out.grad[base + 1] +
                                                    sr * out.grad[base + so.w] +
                                                    sr * sc * out.grad[base + so.w + 1]);
                        }
            };
            acc(lln, 1, 1);
            acc(lhn, -1, 1);
            acc(hln, 1, -1);
            acc(hhn, -1, -1);
        });
    if (p.original_h > 0 &&
        (p.original_h != so.h || p.original_w != so.w))
        return crop_to(full, p.original_h, p.original_w);
    return full;
}

}  // namespace cawm
