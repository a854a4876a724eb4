#pragma once

// Invariant suites runnable from the CLI: wavelet round-trip, the O(T^2)
// unrolled-recurrence oracle, softmax normalization, CDSM zero-init
// identity, and forward determinism. Also exposes the unrolled oracle for
// reuse by external test binaries.

#include <cmath>
#include <ostream>
#include <vector>

#include "cawm/blocks.hpp"
#include "cawm/network.hpp"
#include "cawm/ssm.hpp"
#include "cawm/tensor.hpp"
#include "cawm/wavelet.hpp"

namespace cawm {

namespace oracle {

// Direct expansion of the selective recurrence:
//   y_t = D x_t + sum_n C_t[n] * sum_{k<=t} (prod_{j=k+1..t} Abar_j[n]) Bbar_k[n] x_k
// O(T^2) per channel; independent of the sequential implementation.
template <typename T>
std::vector<T> unrolled_selective_scan(
    int64_t B, int64_t C, int64_t L, int64_t N, const std::vector<T>& x,
    const std::vector<T>& delta, const std::vector<T>& bm, const std::vector<T>& cm,
    const std::vector<T>& a_log, const std::vector<T>& d_skip) {
    auto phi = [](T z) {
        if (std::abs(z) < T(1e-4)) return T(1) + z / T(2) + z * z / T(6);
        return (std::exp(z) - T(1)) / z;
    };
    std::vector<T> y(static_cast<size_t>(B * C * L), T(0));
    for (int64_t b = 0; b < B; ++b)
        for (int64_t c = 0; c < C; ++c)
            for (int64_t t = 0; t < L; ++t) {
                T acc = d_skip[c] * x[(b * C + c) * L + t];
                for (int64_t n = 0; n < N; ++n) {
                    const T A = -std::exp(a_log[c * N + n]);
                    T inner = T(0);
                    for (int64_t k = 0; k <= t; ++k) {
                        T prod = T(1);
                        for (int64_t j = k + 1; j <= t; ++j)
                            prod *= std::exp(delta[(b * C + c) * L + j] * A);
                        const T dk = delta[(b * C + c) * L + k];
                        const T bbar = phi(dk * A) * dk * bm[(b * N + n) * L + k];
                        inner += prod * bbar * x[(b * C + c) * L + k];
                    }
                    acc += cm[(b * N + n) * L + t] * inner;
                }
                y[(b * C + c) * L + t] = acc;
            }
    return y;
}

}  // namespace oracle

namespace detail {

inline bool report(std::ostream& os, const char* name, bool ok, double worst) {
    os << (ok ? "PASS " : "FAIL ") << name << " worst=" << worst << "\n";
    return ok;
}

}  // namespace detail

// Runs the five invariant suites; one line per suite; true when all pass.
inline bool run_selftest(std::ostream& os) {
    bool all_ok = true;

    // 1. Wavelet round-trip, including odd dims.
    {
        Rng rng(101);
        double worst = 0;
        for (int k = 0; k < 20; ++k) {
            const int64_t H = rng.uniform_int(2, 17), W = rng.uniform_int(2, 23);
            Tensor<float> x = Tensor<float>::zeros({1, 2, H, W});
            for (auto& v : x.data()) v = static_cast<float>(rng.uniform(-1, 1));
            Tensor<float> r = idwt2(dwt2(x));
            for (size_t i = 0; i < x.data().size(); ++i)
                worst = std::max(worst,
                                 static_cast<double>(std::abs(r.data()[i] - x.data()[i])));
        }
        all_ok &= detail::report(os, "wavelet_round_trip", worst < 1e-5, worst);
    }

    // 2. Sequential scan vs the O(T^2) unrolled oracle, in double.
    {
        Rng rng(102);
        double worst = 0;
        for (int k = 0; k < 10; ++k) {
            const int64_t B = 1, C = 2, L = rng.uniform_int(2, 32), N = 3;
            auto mk = [&](Shape s, double lo, double hi) {
                Tensor<double> t = Tensor<double>::zeros(s);
                for (auto& v : t.data()) v = rng.uniform(lo, hi);
                return t;
            };
            Tensor<double> x = mk({B, C, L, 1}, -1, 1);
            Tensor<double> delta = mk({B, C, L, 1}, 0.01, 1.0);
            Tensor<double> bm = mk({B, N, L, 1}, -1, 1);
            Tensor<double> cm = mk({B, N, L, 1}, -1, 1);
            Tensor<double> a_log = mk({C, N, 1, 1}, std::log(0.5), std::log(2.0));
            Tensor<double> d_skip = mk({1, C, 1, 1}, 0.5, 1.5);
            Tensor<double> y = selective_scan(x, delta, bm, cm, a_log, d_skip);
            std::vector<double> ref = oracle::unrolled_selective_scan(
                B, C, L, N, x.data(), delta.data(), bm.data(), cm.data(), a_log.data(),
                d_skip.data());
            for (size_t i = 0; i < ref.size(); ++i) {
                const double rel = std::abs(y.data()[i] - ref[i]) /
                                   std::max(1.0, std::abs(ref[i]));
                worst = std::max(worst, rel);
            }
        }
        all_ok &= detail::report(os, "scan_unrolled_oracle", worst < 1e-4, worst);
    }

    // 3. Softmax sums along both axes.
    {
        Rng rng(103);
        double worst = 0;
        Tensor<float> x = Tensor<float>::zeros({2, 5, 4, 3});
        for (auto& v : x.data()) v = static_cast<float>(rng.uniform(-3, 3));
        Tensor<float> sp = softmax(x, SoftmaxAxis::Spatial);
        for (int64_t b = 0; b < 2; ++b)
            for (int64_t c = 0; c < 5; ++c) {
                double s = 0;
                for (int64_t h = 0; h < 4; ++h)
                    for (int64_t w = 0; w < 3; ++w) s += sp.at(b, c, h, w);
                worst = std::max(worst, std::abs(s - 1.0));
            }
        Tensor<float> ch = softmax(x, SoftmaxAxis::Channel);
        for (int64_t b = 0; b < 2; ++b)
            for (int64_t h = 0; h < 4; ++h)
                for (int64_t w = 0; w < 3; ++w) {
                    double s = 0;
                    for (int64_t c = 0; c < 5; ++c) s += ch.at(b, c, h, w);
                    worst = std::max(worst, std::abs(s - 1.0));
                }
        all_ok &= detail::report(os, "softmax_normalization", worst < 1e-6, worst);
    }

    // 4. CDSM with all weights zero is exactly the identity.
    {
        Rng rng(104);
        ParamStore<float> ps;
        Cdsm<float> cdsm(ps, "cdsm", 4, 3, rng);
        for (auto& [name, t] : ps) std::fill(t.data().begin(), t.data().end(), 0.0f);
        Tensor<float> x = Tensor<float>::zeros({1, 4, 6, 6});
        for (auto& v : x.data()) v = static_cast<float>(rng.uniform(-1, 1));
        Tensor<float> y = cdsm(x);
        double worst = 0;
        for (size_t i = 0; i < x.data().size(); ++i)
            worst = std::max(worst,
                             static_cast<double>(std::abs(y.data()[i] - x.data()[i])));
        all_ok &= detail::report(os, "cdsm_zero_init_identity", worst < 1e-6, worst);
    }

    // 5. Same seed, same input -> bit-identical forward twice.
    {
        double worst = 0;
        std::vector<float> out[2];
        for (int run = 0; run < 2; ++run) {
            Rng rng(105);
            ParamStore<float> ps;
            CawmNet<float> net(ps, NetConfig::tiny_preset(), rng);
            Rng drng(106);
            Tensor<float> vi = Tensor<float>::zeros({1, 3, 16, 16});
            Tensor<float> ir = Tensor<float>::zeros({1, 1, 16, 16});
            for (auto& v : vi.data()) v = static_cast<float>(drng.uniform(0, 1));
            for (auto& v : ir.data()) v = static_cast<float>(drng.uniform(0, 1));
            out[run] = net.forward(vi, ir).data();
        }
        bool same = out[0] == out[1];
        if (!same) worst = 1;
        all_ok &= detail::report(os, "forward_determinism", same, worst);
    }

    return all_ok;
}

}  // namespace cawm
