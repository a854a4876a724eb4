#pragma once

// Selective state-space core: ZOH discretization, the sequential recurrence
// (fused forward/backward), and the 2D traversal wrappers. The regular scan
// sweeps four directions; the frequency-aligned scan sweeps only the two
// directions matching its subband.

#include <array>
#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "cawm/nn.hpp"
#include "cawm/optim.hpp"
#include "cawm/random.hpp"
#include "cawm/tensor.hpp"

namespace cawm {

// ---- ZOH helpers ----

namespace detail {

inline constexpr double kZohSeriesThreshold = 1e-4;

// phi(z) = (exp(z)-1)/z, with a short series below the cancellation
// threshold: 1 + z/2 + z^2/6.
template <typename T>
T zoh_phi(T z) {
    if (std::abs(z) < T(kZohSeriesThreshold))
        return T(1) + z / T(2) + z * z / T(6);
    return (std::exp(z) - T(1)) / z;
}

// d phi / dz; series branch: 1/2 + z/3 + z^2/8.
template <typename T>
T zoh_phi_deriv(T z) {
    if (std::abs(z) < T(kZohSeriesThreshold))
        return T(0.5) + z / T(3) + z * z / T(8);
    const T ez = std::exp(z);
    return (z * ez - (ez - T(1))) / (z * z);
}

}  // namespace detail

// Elementwise ZOH rule on a diagonal system:
//   A_bar = exp(delta*A),  B_bar = phi(delta*A) * delta * B.
template <typename T>
void zoh_discretize(const std::vector<T>& a_diag, const std::vector<T>& b,
                    const std::vector<T>& delta, std::vector<T>& a_bar,
                    std::vector<T>& b_bar) {
    if (a_diag.size() != b.size() || a_diag.size() != delta.size())
        throw ConfigError("zoh_discretize: length mismatch");
    a_bar.resize(a_diag.size());
    b_bar.resize(a_diag.size());
    for (size_t i = 0; i < a_diag.size(); ++i) {
        if (!(delta[i] > T(0)))
            throw DomainError("zoh_discretize: delta must be positive, got " +
                              std::to_string(static_cast<double>(delta[i])));
        const T z = delta[i] * a_diag[i];
        a_bar[i] = std::exp(z);
        b_bar[i] = detail::zoh_phi(z) * delta[i] * b[i];
    }
}

// ---- scan orders ----

enum class ScanKind { HorizontalBi, VerticalBi, DiagonalBi };

struct ScanOrder {
    ScanKind kind;
    std::vector<int64_t> index_map;  // sequence position t -> spatial index h*W+w
    std::vector<int64_t> inverse;    // spatial index -> sequence position
};

inline ScanOrder build_scan_order(ScanKind kind, int64_t H, int64_t W) {
    if (H < 1 || W < 1) throw ConfigError("build_scan_order: empty grid");
    ScanOrder o;
    o.kind = kind;
    o.index_map.reserve(H * W);
    switch (kind) {
        case ScanKind::HorizontalBi:
            for (int64_t h = 0; h < H; ++h)
                for (int64_t w = 0; w < W; ++w) o.index_map.push_back(h * W + w);
            break;
        case ScanKind::VerticalBi:
            for (int64_t w = 0; w < W; ++w)
                for (int64_t h = 0; h < H; ++h) o.index_map.push_back(h * W + w);
            break;
        case ScanKind::DiagonalBi:
            // Anti-diagonals h+w = 0 .. H+W-2, rows increasing within each.
            for (int64_t d = 0; d <= H + W - 2; ++d)
                for (int64_t h = std::max<int64_t>(0, d - W + 1);
                     h <= std::min<int64_t>(H - 1, d); ++h)
                    o.index_map.push_back(h * W + (d - h));
            break;
    }
    o.inverse.assign(H * W, 0);
    for (int64_t t = 0; t < static_cast<int64_t>(o.index_map.size()); ++t)
        o.inverse[o.index_map[t]] = t;
    return o;
}

// (B,C,H,W) -> (B,C,L,1) where position t holds x at order[t].
template <typename T>
Tensor<T> gather_spatial(const Tensor<T>& x, const std::vector<int64_t>& order) {
    const Shape s = x.shape();
    const int64_t L = static_cast<int64_t>(order.size());
    if (L != s.h * s.w) throw ConfigError("gather_spatial: order length != H*W");
    Shape so{s.b, s.c, L, 1};
    std::vector<T> v(so.numel());
    const auto& xv = x.data();
    for (int64_t bc = 0; bc < s.b * s.c; ++bc)
        for (int64_t t = 0; t < L; ++t) v[bc * L + t] = xv[bc * L + order[t]];
    auto xn = x.n;
    return detail::make_node<T>(so, std::move(v), {x}, [xn, order, L](Node<T>& out) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        const int64_t groups = static_cast<int64_t>(out.value.size()) / L;
        for (int64_t bc = 0; bc < groups; ++bc)
            for (int64_t t = 0; t < L; ++t)
                xn->grad[bc * L + order[t]] += out.grad[bc * L + t];
    });
}

// (B,C,L,1) -> (B,C,H,W): spatial position order[t] receives sequence slot t.
template <typename T>
Tensor<T> scatter_spatial(const Tensor<T>& y, const std::vector<int64_t>& order,
                          int64_t H, int64_t W) {
    const Shape s = y.shape();
    const int64_t L = static_cast<int64_t>(order.size());
    if (s.h != L || s.w != 1 || L != H * W)
        throw ConfigError("scatter_spatial: shape/order mismatch");
    Shape so{s.b, s.c, H, W};
    std::vector<T> v(so.numel());
    const auto& yv = y.data();
    for (int64_t bc = 0; bc < s.b * s.c; ++bc)
        for (int64_t t = 0; t < L; ++t) v[bc * L + order[t]] = yv[bc * L + t];
    auto yn = y.n;
    return detail::make_node<T>(so, std::move(v), {y}, [yn, order, L](Node<T>& out) {
        if (!yn->requires_grad) return;
        yn->ensure_grad();
        const int64_t groups = static_cast<int64_t>(out.value.size()) / L;
        for (int64_t bc = 0; bc < groups; ++bc)
            for (int64_t t = 0; t < L; ++t)
                yn->grad[bc * L + t] += out.grad[bc * L + order[t]];
    });
}

// ---- recurrence step accounting (for the cost property) ----

inline std::atomic<int64_t>& scan_step_counter() {
    static std::atomic<int64_t> counter{0};
    return counter;
}
inline void reset_scan_steps() { scan_step_counter().store(0); }
inline int64_t scan_steps() { return scan_step_counter().load(); }

// ---- selective scan (fused) ----

// x, delta: (B,C,L,1); bm, cm: (B,N,L,1); a_log: (C,N,1,1); d_skip: (1,C,1,1).
// Per channel c and state n:  A = -exp(a_log),  z_t = delta_t*A,
//   h_t = exp(z_t) h_{t-1} + phi(z_t) delta_t B_t x_t,
//   y_t = sum_n C_t[n] h_t[n] + D x_t.
template <typename T>
Tensor<T> selective_scan(const Tensor<T>& x, const Tensor<T>& delta,
                         const Tensor<T>& bm, const Tensor<T>& cm,
                         const Tensor<T>& a_log, const Tensor<T>& d_skip) {
    const Shape sx = x.shape();
    const int64_t B = sx.b, C = sx.c, L = sx.h;
    const int64_t N = a_log.shape().c;
    if (!(delta.shape() == sx)) throw ConfigError("selective_scan: delta shape mismatch");
    if (bm.shape().c != N || bm.shape().h != L || cm.shape().c != N || cm.shape().h != L)
        throw ConfigError("selective_scan: B/C projection shape mismatch");
    if (a_log.shape().b != C || d_skip.numel() != C)
        throw ConfigError("selective_scan: parameter shape mismatch");
    if (L == 0) return Tensor<T>::zeros(sx);

    scan_step_counter().fetch_add(L);

    std::vector<T> y(sx.numel(), T(0));
    // Full state history, used by the backward pass.
    auto hs = std::make_shared<std::vector<T>>(
        static_cast<size_t>(B) * C * L * N, T(0));
    const auto& xv = x.data();
    const auto& dv = delta.data();
    const auto& bv = bm.data();
    const auto& cv = cm.data();
    const auto& av = a_log.data();
    const auto& Dv = d_skip.data();
    std::vector<T> h(N);
    for (int64_t b = 0; b < B; ++b)
        for (int64_t c = 0; c < C; ++c) {
            std::fill(h.begin(), h.end(), T(0));
            for (int64_t t = 0; t < L; ++t) {
                const T xt = xv[(b * C + c) * L + t];
                const T dt = dv[(b * C + c) * L + t];
                T acc = Dv[c] * xt;
                for (int64_t n = 0; n < N; ++n) {
                    const T A = -std::exp(av[c * N + n]);
                    const T z = dt * A;
                    const T abar = std::exp(z);
                    const T bbar = detail::zoh_phi(z) * dt * bv[(b * N + n) * L + t];
                    h[n] = abar * h[n] + bbar * xt;
                    (*hs)[((b * C + c) * L + t) * N + n] = h[n];
                    acc += cv[(b * N + n) * L + t] * h[n];
                }
                y[(b * C + c) * L + t] = acc;
            }
        }

    auto xn = x.n;
    auto dn = delta.n;
    auto bn = bm.n;
    auto cn = cm.n;
    auto an = a_log.n;
    auto Dn = d_skip.n;
    auto bwd = [xn, dn, bn, cn, an, Dn, hs, B, C, L, N](Node<T>& out) {
        const bool gx = xn->requires_grad, gd = dn->requires_grad;
        const bool gb = bn->requires_grad, gc = cn->requires_grad;
        const bool ga = an->requires_grad, gD = Dn->requires_grad;
        if (gx) xn->ensure_grad();
        if (gd) dn->ensure_grad();
        if (gb) bn->ensure_grad();
        if (gc) cn->ensure_grad();
        if (ga) an->ensure_grad();
        if (gD) Dn->ensure_grad();
        std::vector<T> gh(N);
        for (int64_t b = 0; b < B; ++b)
            for (int64_t c = 0; c < C; ++c) {
                std::fill(gh.begin(), gh.end(), T(0));
                for (int64_t t = L - 1; t >= 0; --t) {
                    const int64_t xi = (b * C + c) * L + t;
                    const T gy = out.grad[xi];
                    const T xt = xn->value[xi];
                    const T dt = dn->value[xi];
                    if (gD) Dn->grad[c] += gy * xt;
                    T gxt = Dn->value[c] * gy;
                    T gdt = T(0);
                    for (int64_t n = 0; n < N; ++n) {
                        const int64_t hi = (xi)*N + n;
                        const int64_t pi = (b * N + n) * L + t;
                        const T ht = (*hs)[hi];
                        if (gc) cn->grad[pi] += gy * ht;
                        T ghn = gh[n] + cn->value[pi] * gy;
                        const T A = -std::exp(an->value[c * N + n]);
                        const T z = dt * A;
                        const T abar = std::exp(z);
                        const T phi = detail::zoh_phi(z);
                        const T bt = bn->value[pi];
                        const T bbar = phi * dt * bt;
                        const T hprev =
                            t > 0 ? (*hs)[((b * C + c) * L + t - 1) * N + n] : T(0);
                        // h = abar*hprev + bbar*x
                        const T gabar = ghn * hprev;
                        const T gbbar = ghn * xt;
                        gxt += ghn * bbar;
                        gh[n] = ghn * abar;
                        T gz = gabar * abar;
                        // bbar = phi(z) * dt * bt
                        gz += gbbar * detail::zoh_phi_deriv(z) * dt * bt;
                        gdt += gbbar * phi * bt;
                        if (gb) bn->grad[pi] += gbbar * phi * dt;
                        // z = dt * A,  dA/d(a_log) = A
                        gdt += gz * A;
                        if (ga) an->grad[c * N + n] += gz * dt * A;
                    }
                    if (gx) xn->grad[xi] += gxt;
                    if (gd) dn->grad[xi] += gdt;
                }
            }
    };
    return detail::make_node<T>(sx, std::move(y), {x, delta, bm, cm, a_log, d_skip},
                                bwd);
}

// ---- the selective layer: input-dependent (delta, B, C) projections ----

template <typename T>
struct SsmLayer {
    int64_t channels = 0, state_dim = 0;
    Tensor<T> a_log;       // (C,N,1,1)
    Tensor<T> d_skip;      // (1,C,1,1)
    Tensor<T> w_delta;     // (C,C,1,1)
    Tensor<T> delta_bias;  // (1,C,1,1)
    Tensor<T> w_b, w_c;    // (N,C,1,1)

    SsmLayer() = default;
    SsmLayer(ParamStore<T>& ps, const std::string& prefix, int64_t C, int64_t N,
             Rng& rng) {
        channels = C;
        state_dim = N;
        a_log = Tensor<T>::zeros({C, N, 1, 1});
        // A = -exp(a_log) in [-4, -0.5]; stable for any positive delta.
        uniform_(a_log, std::log(0.5), std::log(4.0), rng);
        d_skip = Tensor<T>::filled({1, C, 1, 1}, T(1));
        w_delta = Tensor<T>::zeros({C, C, 1, 1});
        kaiming_uniform_(w_delta, C, rng);
        // softplus(bias) ~ 0.1 at init so steps start small.
        delta_bias = Tensor<T>::filled({1, C, 1, 1},
                                       static_cast<T>(std::log(std::exp(0.1) - 1.0)));
        w_b = Tensor<T>::zeros({N, C, 1, 1});
        kaiming_uniform_(w_b, C, rng);
        w_c = Tensor<T>::zeros({N, C, 1, 1});
        kaiming_uniform_(w_c, C, rng);
        ps.add(prefix + ".a_log", a_log);
        ps.add(prefix + ".d_skip", d_skip);
        ps.add(prefix + ".w_delta", w_delta);
        ps.add(prefix + ".delta_bias", delta_bias);
        ps.add(prefix + ".w_b", w_b);
        ps.add(prefix + ".w_c", w_c);
    }
};

// x_seq: (B,C,L,1) -> y_seq of the same shape.
template <typename T>
Tensor<T> ssm_recurrence(const Tensor<T>& x_seq, const SsmLayer<T>& layer) {
    if (x_seq.shape().h == 0) return Tensor<T>::zeros(x_seq.shape());
    Tensor<T> delta = softplus(conv2d(x_seq, layer.w_delta, layer.delta_bias, 1, 0));
    Tensor<T> bm = conv2d(x_seq, layer.w_b, 1, 0);
    Tensor<T> cm = conv2d(x_seq, layer.w_c, 1, 0);
    return selective_scan(x_seq, delta, bm, cm, layer.a_log, layer.d_skip);
}

namespace detail {

template <typename T>
Tensor<T> sweep(const Tensor<T>& x, const SsmLayer<T>& layer,
                const std::vector<int64_t>& order, bool reversed) {
    std::vector<int64_t> ord = order;
    if (reversed) std::reverse(ord.begin(), ord.end());
    Tensor<T> seq = gather_spatial(x, ord);
    Tensor<T> y = ssm_recurrence(seq, layer);
    return scatter_spatial(y, ord, x.shape().h, x.shape().w);
}

}  // namespace detail

// Four sweeps (left-right, right-left, top-bottom, bottom-up) with shared
// parameters, summed.
template <typename T>
Tensor<T> scan_2d_regular(const Tensor<T>& x, const SsmLayer<T>& layer) {
    const Shape s = x.shape();
    ScanOrder horiz = build_scan_order(ScanKind::HorizontalBi, s.h, s.w);
    ScanOrder vert = build_scan_order(ScanKind::VerticalBi, s.h, s.w);
    Tensor<T> out = detail::sweep(x, layer, horiz.index_map, false);
    out = add(out, detail::sweep(x, layer, horiz.index_map, true));
    out = add(out, detail::sweep(x, layer, vert.index_map, false));
    out = add(out, detail::sweep(x, layer, vert.index_map, true));
    return out;
}

enum class Subband { LH, HL, HH };

// Two sweeps (forward + reverse) along the subband's dominant direction:
// LH column-major, HL row-major, HH anti-diagonal.
template <typename T>
Tensor<T> freq_scan(const Tensor<T>& x, Subband band, const SsmLayer<T>& layer) {
    const Shape s = x.shape();
    ScanKind kind;
    switch (band) {
        case Subband::LH: kind = ScanKind::VerticalBi; break;
        case Subband::HL: kind = ScanKind::HorizontalBi; break;
        case Subband::HH: kind = ScanKind::DiagonalBi; break;
        default: throw UsageError("freq_scan: unknown subband tag");
    }
    ScanOrder order = build_scan_order(kind, s.h, s.w);
    Tensor<T> out = detail::sweep(x, layer, order.index_map, false);
    return add(out, detail::sweep(x, layer, order.index_map, true));
}

}  // namespace cawm
