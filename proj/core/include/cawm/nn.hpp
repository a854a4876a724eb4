#pragma once

// Convolution, pooling, normalization and padding ops on the tape.
// Convolution is cross-correlation (no kernel flip).

#include <cmath>
#include <vector>

#include "cawm/tensor.hpp"

namespace cawm {

// x: (B,Cin,H,W), w: (Cout,Cin,k,k), bias: (1,Cout,1,1) or undefined.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                 int64_t stride, int64_t padding) {
    const Shape sx = x.shape(), sw = w.shape();
    if (sw.h != sw.w) throw ConfigError("conv2d: non-square kernel " + sw.str());
    if (sx.c != sw.c)
        throw ConfigError("conv2d: input channels " + std::to_string(sx.c) +
                          " != kernel channels " + std::to_string(sw.c));
    if (padding < 0 || stride < 1) throw ConfigError("conv2d: bad stride/padding");
    if (bias.defined() && bias.numel() != sw.b)
        throw ConfigError("conv2d: bias length mismatch");
    const int64_t k = sw.h;
    // Floor division: trailing rows/columns that do not fit a full stride
    // step are dropped, the usual convention for strided convolution.
    const int64_t ho = (sx.h + 2 * padding - k) / stride + 1;
    const int64_t wo = (sx.w + 2 * padding - k) / stride + 1;
    if (ho < 1 || wo < 1) throw ConfigError("conv2d: empty output for input " + sx.str());
    Shape so{sx.b, sw.b, ho, wo};

    std::vector<T> v(so.numel(), T(0));
    const auto& xv = x.data();
    const auto& wv = w.data();
    for (int64_t b = 0; b < sx.b; ++b)
        for (int64_t co = 0; co < sw.b; ++co) {
            const T bval = bias.defined() ? bias.data()[co] : T(0);
            for (int64_t oh = 0; oh < ho; ++oh)
                for (int64_t ow = 0; ow < wo; ++ow) {
                    T acc = bval;
                    for (int64_t ci = 0; ci < sx.c; ++ci)
                        for (int64_t kh = 0; kh < k; ++kh) {
                            const int64_t ih = oh * stride - padding + kh;
                            if (ih < 0 || ih >= sx.h) continue;
                            const T* xrow = &xv[((b * sx.c + ci) * sx.h + ih) * sx.w];
                            const T* wrow = &wv[((co * sw.c + ci) * k + kh) * k];
                            for (int64_t kw = 0; kw < k; ++kw) {
                                const int64_t iw = ow * stride - padding + kw;
                                if (iw < 0 || iw >= sx.w) continue;
                                acc += xrow[iw] * wrow[kw];
                            }
                        }
                    v[((b * so.c + co) * ho + oh) * wo + ow] = acc;
                }
        }

    auto xn = x.n;
    auto wn = w.n;
    auto bn = bias.defined() ? bias.n : nullptr;
    auto bwd = [xn, wn, bn, sx, sw, so, k, stride, padding](Node<T>& out) {
        const bool gx = xn->requires_grad, gw = wn->requires_grad;
        const bool gb = bn && bn->requires_grad;
        if (gx) xn->ensure_grad();
        if (gw) wn->ensure_grad();
        if (gb) bn->ensure_grad();
        for (int64_t b = 0; b < sx.b; ++b)
            for (int64_t co = 0; co < sw.b; ++co)
                for (int64_t oh = 0; oh < so.h; ++oh)
                    for (int64_t ow = 0; ow < so.w; ++ow) {
                        const T g = out.grad[((b * so.c + co) * so.h + oh) * so.w + ow];
                        if (g == T(0)) continue;
                        if (gb) bn->grad[co] += g;
                        for (int64_t ci = 0; ci < sx.c; ++ci)
                            for (int64_t kh = 0; kh < k; ++kh) {
                                const int64_t ih = oh * stride - padding + kh;
                                if (ih < 0 || ih >= sx.h) continue;
                                const int64_t xo = ((b * sx.c + ci) * sx.h + ih) * sx.w;
                                const int64_t wo2 = ((co * sw.c + ci) * k + kh) * k;
                                for (int64_t kw = 0; kw < k; ++kw) {
                                    const int64_t iw = ow * stride - padding + kw;
                                    if (iw < 0 || iw >= sx.w) continue;
                                    if (gx) xn->grad[xo + iw] += g * wn->value[wo2 + kw];
                                    if (gw) wn->grad[wo2 + kw] += g * xn->value[xo + iw];
                                }
                            }
                    }
    };
    if (bias.defined())
        return detail::make_node<T>(so, std::move(v), {x, w, bias}, bwd);
    return detail::make_node<T>(so, std::move(v), {x, w}, bwd);
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, int64_t stride,
                 int64_t padding) {
    return conv2d(x, w, Tensor<T>{}, stride, padding);
}

// Transposed convolution, stride-s upsampling. w: (Cin,Cout,k,k).
// Output spatial size: (H-1)*s + k.
template <typename T>
Tensor<T> conv_transpose2d(const Tensor<T>& x, const Tensor<T>& w,
                           const Tensor<T>& bias, int64_t stride) {
    const Shape sx = x.shape(), sw = w.shape();
    if (sx.c != sw.b)
        throw ConfigError("conv_transpose2d: input channels " + std::to_string(sx.c) +
                          " != kernel in-channels " + std::to_string(sw.b));
    const int64_t k = sw.h;
    const int64_t ho = (sx.h - 1) * stride + k;
    const int64_t wo = (sx.w - 1) * stride + k;
    Shape so{sx.b, sw.c, ho, wo};
    std::vector<T> v(so.numel(), T(0));
    const auto& xv = x.data();
    const auto& wv = w.data();
    for (int64_t b = 0; b < sx.b; ++b) {
        for (int64_t ci = 0; ci < sx.c; ++ci)
            for (int64_t ih = 0; ih < sx.h; ++ih)
                for (int64_t iw = 0; iw < sx.w; ++iw) {
                    const T xval = xv[((b * sx.c + ci) * sx.h + ih) * sx.w + iw];
                    if (xval == T(0)) continue;
                    for (int64_t co = 0; co < sw.c; ++co)
                        for (int64_t kh = 0; kh < k; ++kh)
                            for (int64_t kw = 0; kw < k; ++kw)
                                v[((b * so.c + co) * ho + ih * stride + kh) * wo +
                                  iw * stride + kw] +=
                                    xval * wv[((ci * sw.c + co) * k + kh) * k + kw];
                }
        if (bias.defined())
            for (int64_t co = 0; co < sw.c; ++co) {
                const T bval = bias.data()[co];
                for (int64_t i = 0; i < ho * wo; ++i)
                    v[(b * so.c + co) * ho * wo + i] += bval;
            }
    }
    auto xn = x.n;
    auto wn = w.n;
    auto bn = bias.defined() ? bias.n : nullptr;
    auto bwd = [xn, wn, bn, sx, sw, so, k, stride](Node<T>& out) {
        const bool gx = xn->requires_grad, gw = wn->requires_grad;
        const bool gb = bn && bn->requires_grad;
        if (gx) xn->ensure_grad();
        if (gw) wn->ensure_grad();
        if (gb) bn->ensure_grad();
        for (int64_t b = 0; b < sx.b; ++b) {
            for (int64_t ci = 0; ci < sx.c; ++ci)
                for (int64_t ih = 0; ih < sx.h; ++ih)
                    for (int64_t iw = 0; iw < sx.w; ++iw) {
                        const int64_t xi = ((b * sx.c + ci) * sx.h + ih) * sx.w + iw;
                        for (int64_t co = 0; co < sw.c; ++co)
                            for (int64_t kh = 0; kh < k; ++kh)
                                for (int64_t kw = 0; kw < k; ++kw) {
                                    const T g =
                                        out.grad[((b * so.c + co) * so.h + ih * stride +
                                                  kh) * so.w + iw * stride + kw];
                                    if (g == T(0)) continue;
                                    const int64_t wi = ((ci * sw.c + co) * k + kh) * k + kw;
                                    if (gx) xn->grad[xi] += g * wn->value[wi];
                                    if (gw) wn->grad[wi] += g * xn->value[xi];
                                }
                    }
            if (gb)
                for (int64_t co = 0; co < sw.c; ++co)
                    for (int64_t i = 0; i < so.h * so.w; ++i)
                        bn->grad[co] += out.grad[(b * so.c + co) * so.h * so.w + i];
        }
    };
    if (bias.defined())
        return detail::make_node<T>(so, std::move(v), {x, w, bias}, bwd);
    return detail::make_node<T>(so, std::move(v), {x, w}, bwd);
}

// Depthwise convolution with one fixed (non-learnable) k*k kernel applied to
// every channel. Gradient flows to x only. padding may be 0 (valid) or k/2.
template <typename T>
Tensor<T> depthwise_fixed_conv2d(const Tensor<T>& x, const std::vector<T>& kernel,
                                 int64_t k, int64_t padding) {
    const Shape sx = x.shape();
    if (static_cast<int64_t>(kernel.size()) != k * k)
        throw ConfigError("depthwise_fixed_conv2d: kernel size mismatch");
    const int64_t ho = sx.h + 2 * padding - k + 1;
    const int64_t wo = sx.w + 2 * padding - k + 1;
    if (ho < 1 || wo < 1)
        throw UsageError("depthwise_fixed_conv2d: input " + sx.str() +
                         " smaller than kernel " + std::to_string(k));
    Shape so{sx.b, sx.c, ho, wo};
    std::vector<T> v(so.numel(), T(0));
    const auto& xv = x.data();
    for (int64_t b = 0; b < sx.b; ++b)
        for (int64_t c = 0; c < sx.c; ++c)
            for (int64_t oh = 0; oh < ho; ++oh)
                for (int64_t ow = 0; ow < wo; ++ow) {
                    T acc = T(0);
                    for (int64_t kh = 0; kh < k; ++kh) {
                        const int64_t ih = oh - padding + kh;
                        if (ih < 0 || ih >= sx.h) continue;
                        for (int64_t kw = 0; kw < k; ++kw) {
                            const int64_t iw = ow - padding + kw;
                            if (iw < 0 || iw >= sx.w) continue;
                            acc += xv[((b * sx.c + c) * sx.h + ih) * sx.w + iw] *
                                   kernel[kh * k + kw];
                        }
                    }
                    v[((b * so.c + c) * ho + oh) * wo + ow] = acc;
                }
    auto xn = x.n;
    return detail::make_node<T>(
        so, std::move(v), {x}, [xn, sx, so, kernel, k, padding](Node<T>& out) {
            if (!xn->requires_grad) return;
            xn->ensure_grad();
            for (int64_t b = 0; b < sx.b; ++b)
                for (int64_t c = 0; c < sx.c; ++c)
                    for (int64_t oh = 0; oh < so.h; ++oh)
                        for (int64_t ow = 0; ow < so.w; ++ow) {
                            const T g =
                                out.grad[((b * so.c + c) * so.h + oh) * so.w + ow];
                            if (g == T(0)) continue;
                            for (int64_t kh = 0; kh < k; ++kh) {
                                const int64_t ih = oh - padding + kh;
                                if (ih < 0 || ih >= sx.h) continue;
                                for (int64_t kw = 0; kw < k; ++kw) {
                                    const int64_t iw = ow - padding + kw;
                                    if (iw < 0 || iw >= sx.w) continue;
                                    xn->grad[((b * sx.c + c) * sx.h + ih) * sx.w + iw] +=
                                        g * kernel[kh * k + kw];
                                }
                            }
                        }
        });
}

// ---- pooling ----

namespace detail {
template <typename T>
void require_nonempty(const Tensor<T>& x, const char* what) {
    if (x.numel() == 0) throw ConfigError(std::string(what) + ": empty tensor");
}
}  // namespace detail

// Reduce over channels -> (B,1,H,W). Ties broken by the first channel.
template <typename T>
Tensor<T> max_pool_channelwise(const Tensor<T>& x) {
    detail::require_nonempty(x, "max_pool_channelwise");
    const Shape s = x.shape();
    Shape so{s.b, 1, s.h, s.w};
    std::vector<T> v(so.numel());
    std::vector<int64_t> arg(so.numel());
    const auto& xv = x.data();
    const int64_t plane = s.h * s.w;
    for (int64_t b = 0; b < s.b; ++b)
        for (int64_t i = 0; i < plane; ++i) {
            int64_t best = (b * s.c) * plane + i;
            for (int64_t c = 1; c < s.c; ++c) {
                int64_t j = (b * s.c + c) * plane + i;
                if (xv[j] > xv[best]) best = j;
            }
            v[b * plane + i] = xv[best];
            arg[b * plane + i] = best;
        }
    auto xn = x.n;
    return detail::make_node<T>(so, std::move(v), {x}, [xn, arg](Node<T>& out) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (size_t i = 0; i < out.grad.size(); ++i) xn->grad[arg[i]] += out.grad[i];
    });
}

template <typename T>
Tensor<T> avg_pool_channelwise(const Tensor<T>& x) {
    detail::require_nonempty(x, "avg_pool_channelwise");
    const Shape s = x.shape();
    Shape so{s.b, 1, s.h, s.w};
    std::vector<T> v(so.numel(), T(0));
    const auto& xv = x.data();
    const int64_t plane = s.h * s.w;
    const T inv = T(1) / static_cast<T>(s.c);
    for (int64_t b = 0; b < s.b; ++b)
        for (int64_t c = 0; c < s.c; ++c)
            for (int64_t i = 0; i < plane; ++i)
                v[b * plane + i] += xv[(b * s.c + c) * plane + i] * inv;
    auto xn = x.n;
    return detail::make_node<T>(so, std::move(v), {x}, [xn, s, plane, inv](Node<T>& out) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (int64_t b = 0; b < s.b; ++b)
            for (int64_t c = 0; c < s.c; ++c)
                for (int64_t i = 0; i < plane; ++i)
                    xn->grad[(b * s.c + c) * plane + i] += out.grad[b * plane + i] * inv;
    });
}

// Reduce over H,W -> (B,C,1,1).
template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& x) {
    detail::require_nonempty(x, "global_avg_pool");
    const Shape s = x.shape();
    Shape so{s.b, s.c, 1, 1};
    std::vector<T> v(so.numel(), T(0));
    const auto& xv = x.data();
    const int64_t plane = s.h * s.w;
    const T inv = T(1) / static_cast<T>(plane);
    for (int64_t bc = 0; bc < s.b * s.c; ++bc) {
        T acc = T(0);
        for (int64_t i = 0; i < plane; ++i) acc += xv[bc * plane + i];
        v[bc] = acc * inv;
    }
    auto xn = x.n;
    return detail::make_node<T>(so, std::move(v), {x}, [xn, plane, inv](Node<T>& out) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (size_t bc = 0; bc < out.grad.size(); ++bc)
            for (int64_t i = 0; i < plane; ++i)
                xn->grad[bc * plane + i] += out.grad[bc] * inv;
    });
}

template <typename T>
Tensor<T> global_max_pool(const Tensor<T>& x) {
    detail::require_nonempty(x, "global_max_pool");
    const Shape s = x.shape();
    Shape so{s.b, s.c, 1, 1};
    std::vector<T> v(so.numel());
    std::vector<int64_t> arg(so.numel());
    const auto& xv = x.data();
    const int64_t plane = s.h * s.w;
    for (int64_t bc = 0; bc < s.b * s.c; ++bc) {
        int64_t best = bc * plane;
        for (int64_t i = 1; i < plane; ++i)
            if (xv[bc * plane + i] > xv[best]) best = bc * plane + i;
        v[bc] = xv[best];
        arg[bc] = best;
    }
    auto xn = x.n;
    return detail::make_node<T>(so, std::move(v), {x}, [xn, arg](Node<T>& out) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (size_t i = 0; i < out.grad.size(); ++i) xn->grad[arg[i]] += out.grad[i];
    });
}

// ---- layer norm over the channel axis, per spatial location ----

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     T eps = T(1e-5)) {
    const Shape s = x.shape();
    if (s.c == 0) throw ConfigError("layer_norm: zero channels");
    if (gamma.numel() != s.c || beta.numel() != s.c)
        throw ConfigError("layer_norm: gamma/beta length != C");
    std::vector<T> v(x.numel());
    std::vector<T> means(s.b * s.h * s.w), rstds(s.b * s.h * s.w);
    const auto& xv = x.data();
    const auto& gv = gamma.data();
    const auto& bv = beta.data();
    const int64_t plane = s.h * s.w;
    const T invc = T(1) / static_cast<T>(s.c);
    for (int64_t b = 0; b < s.b; ++b)
        for (int64_t i = 0; i < plane; ++i) {
            T m = T(0);
            for (int64_t c = 0; c < s.c; ++c) m += xv[(b * s.c + c) * plane + i];
            m *= invc;
            T var = T(0);
            for (int64_t c = 0; c < s.c; ++c) {
                T d = xv[(b * s.c + c) * plane + i] - m;
                var += d * d;
            }
            var *= invc;
            T r = T(1) / std::sqrt(var + eps);
            means[b * plane + i] = m;
            rstds[b * plane + i] = r;
            for (int64_t c = 0; c < s.c; ++c)
                v[(b * s.c + c) * plane + i] =
                    (xv[(b * s.c + c) * plane + i] - m) * r * gv[c] + bv[c];
        }
    auto xn = x.n;
    auto gn = gamma.n;
    auto bn = beta.n;
    return detail::make_node<T>(
        s, std::move(v), {x, gamma, beta},
        [xn, gn, bn, s, plane, invc, means, rstds](Node<T>& out) {
            const bool gx = xn->requires_grad;
            const bool gg = gn->requires_grad;
            const bool gb = bn->requires_grad;
            if (gx) xn->ensure_grad();
            if (gg) gn->ensure_grad();
            if (gb) bn->ensure_grad();
            for (int64_t b = 0; b < s.b; ++b)
                for (int64_t i = 0; i < plane; ++i) {
                    const T m = means[b * plane + i];
                    const T r = rstds[b * plane + i];
                    // xhat_c = (x_c - m) r ; out_c = xhat_c * gamma_c + beta_c
                    T sum_gxh = T(0), sum_gxh_xh = T(0);
                    for (int64_t c = 0; c < s.c; ++c) {
                        const int64_t j = (b * s.c + c) * plane + i;
                        const T xh = (xn->value[j] - m) * r;
                        const T go = out.grad[j];
                        if (gg) gn->grad[c] += go * xh;
                        if (gb) bn->grad[c] += go;
                        if (gx) {
                            const T gxh = go * gn->value[c];
                            sum_gxh += gxh;
                            sum_gxh_xh += gxh * xh;
                        }
                    }
                    if (gx)
                        for (int64_t c = 0; c < s.c; ++c) {
                            const int64_t j = (b * s.c + c) * plane + i;
                            const T xh = (xn->value[j] - m) * r;
                            const T gxh = out.grad[j] * gn->value[c];
                            xn->grad[j] +=
                                r * (gxh - invc * sum_gxh - invc * xh * sum_gxh_xh);
                        }
                }
        });
}

// ---- padding / cropping ----

// Reflect-pads the bottom/right edges until (target_h, target_w).
template <typename T>
Tensor<T> reflect_pad_to(const Tensor<T>& x, int64_t target_h, int64_t target_w) {
    const Shape s = x.shape();
    if (target_h == s.h && target_w == s.w) return x;
    if (target_h < s.h || target_w < s.w)
        throw ConfigError("reflect_pad_to: target smaller than input");
    if (target_h - s.h >= s.h || target_w - s.w >= s.w)
        throw ConfigError("reflect_pad_to: padding exceeds input size");
    Shape so{s.b, s.c, target_h, target_w};
    auto src_h = [sh = s.h](int64_t h) { return h < sh ? h : 2 * sh - 2 - h; };
    auto src_w = [sw = s.w](int64_t w) { return w < sw ? w : 2 * sw - 2 - w; };
    std::vector<T> v(so.numel());
    const auto& xv = x.data();
    for (int64_t bc = 0; bc < s.b * s.c; ++bc)
        for (int64_t h = 0; h < target_h; ++h)
            for (int64_t w = 0; w < target_w; ++w)
                v[(bc * target_h + h) * target_w + w] =
                    xv[(bc * s.h + src_h(h)) * s.w + src_w(w)];
    auto xn = x.n;
    return detail::make_node<T>(
        so, std::move(v), {x}, [xn, s, target_h, target_w, src_h, src_w](Node<T>& out) {
            if (!xn->requires_grad) return;
            xn->ensure_grad();
            for (int64_t bc = 0; bc < s.b * s.c; ++bc)
                for (int64_t h = 0; h < target_h; ++h)
                    for (int64_t w = 0; w < target_w; ++w)
                        xn->grad[(bc * s.h + src_h(h)) * s.w + src_w(w)] +=
                            out.grad[(bc * target_h + h) * target_w + w];
        });
}

// Keeps the top-left (target_h, target_w) region.
template <typename T>
Tensor<T> crop_to(const Tensor<T>& x, int64_t target_h, int64_t target_w) {
    const Shape s = x.shape();
    if (target_h == s.h && target_w == s.w) return x;
    if (target_h > s.h || target_w > s.w)
        throw ConfigError("crop_to: target larger than input");
    Shape so{s.b, s.c, target_h, target_w};
    std::vector<T> v(so.numel());
    const auto& xv = x.data();
    for (int64_t bc = 0; bc < s.b * s.c; ++bc)
        for (int64_t h = 0; h < target_h; ++h)
            for (int64_t w = 0; w < target_w; ++w)
                v[(bc * target_h + h) * target_w + w] = xv[(bc * s.h + h) * s.w + w];
    auto xn = x.n;
    return detail::make_node<T>(
        so, std::move(v), {x}, [xn, s, target_h, target_w](Node<T>& out) {
            if (!xn->requires_grad) return;
            xn->ensure_grad();
            for (int64_t bc = 0; bc < s.b * s.c; ++bc)
                for (int64_t h = 0; h < target_h; ++h)
                    for (int64_t w = 0; w < target_w; ++w)
                        xn->grad[(bc * s.h + h) * s.w + w] +=
                            out.grad[(bc * target_h + h) * target_w + w];
        });
}

}  // namespace cawm
