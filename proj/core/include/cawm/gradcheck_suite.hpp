#pragma once

// Named finite-difference cases covering every differentiable op and block
// at toy shapes. All probes run in double precision. Each case reduces its
// output through a fixed random weighting so permutation and routing bugs
// cannot cancel out in the reduction.

#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "cawm/blocks.hpp"
#include "cawm/gradcheck.hpp"
#include "cawm/losses.hpp"
#include "cawm/network.hpp"
#include "cawm/nn.hpp"
#include "cawm/ssm.hpp"
#include "cawm/tensor.hpp"
#include "cawm/wavelet.hpp"

namespace cawm {

struct SuiteCase {
    std::string name;
    std::function<GradCheckResult()> run;
};

namespace detail {

inline Tensor<double> rand_t(Shape s, double lo, double hi, Rng& rng, bool rg) {
    Tensor<double> t = Tensor<double>::zeros(s, rg);
    for (auto& v : t.data()) v = rng.uniform(lo, hi);
    return t;
}

// Fixed random weights turn any tensor into a scalar without symmetric
// cancellation.
inline Tensor<double> probe_weights(Shape s, Rng& rng) {
    return rand_t(s, -1.0, 1.0, rng, false);
}

inline Tensor<double> weighted_sum(const Tensor<double>& t, const Tensor<double>& w) {
    return sum(mul(t, w));
}

using Params = std::vector<std::pair<std::string, Tensor<double>>>;

}  // namespace detail

inline std::vector<SuiteCase> build_gradcheck_suite() {
    using detail::probe_weights;
    using detail::rand_t;
    using detail::weighted_sum;
    std::vector<SuiteCase> cases;
    auto push = [&](std::string name, std::function<GradCheckResult()> f) {
        cases.push_back({std::move(name), std::move(f)});
    };

    // ---- elementwise / shape ops ----

    push("op.add_broadcast", [] {
        Rng rng(11);
        auto a = rand_t({2, 3, 4, 4}, -1, 1, rng, true);
        auto b = rand_t({1, 3, 1, 1}, -1, 1, rng, true);
        auto w = probe_weights({2, 3, 4, 4}, rng);
        return gradcheck([=] { return weighted_sum(add(a, b), w); },
                         {{"a", a}, {"b", b}});
    });
    push("op.mul_broadcast", [] {
        Rng rng(12);
        auto a = rand_t({2, 3, 4, 4}, -1, 1, rng, true);
        auto b = rand_t({1, 3, 1, 1}, -1, 1, rng, true);
        auto w = probe_weights({2, 3, 4, 4}, rng);
        return gradcheck([=] { return weighted_sum(mul(a, b), w); },
                         {{"a", a}, {"b", b}});
    });
    push("op.sub", [] {
        Rng rng(13);
        auto a = rand_t({1, 2, 4, 4}, -1, 1, rng, true);
        auto b = rand_t({1, 2, 4, 4}, -1, 1, rng, true);
        auto w = probe_weights({1, 2, 4, 4}, rng);
        return gradcheck([=] { return weighted_sum(sub(a, b), w); },
                         {{"a", a}, {"b", b}});
    });
    push("op.div", [] {
        Rng rng(14);
        auto a = rand_t({1, 2, 4, 4}, -1, 1, rng, true);
        auto b = rand_t({1, 2, 4, 4}, 0.5, 2.0, rng, true);
        auto w = probe_weights({1, 2, 4, 4}, rng);
        return gradcheck([=] { return weighted_sum(div(a, b), w); },
                         {{"a", a}, {"b", b}});
    });
    push("op.scale_add_scalar", [] {
        Rng rng(15);
        auto a = rand_t({1, 2, 4, 4}, -1, 1, rng, true);
        auto w = probe_weights({1, 2, 4, 4}, rng);
        return gradcheck(
            [=] { return weighted_sum(add_scalar(scale(a, 0.7), 0.3), w); },
            {{"a", a}});
    });
    push("op.maximum", [] {
        Rng rng(16);
        auto a = rand_t({1, 2, 4, 4}, -1, 1, rng, true);
        // Keep every pair at least 0.1 apart so h=1e-3 cannot flip a branch.
        auto b = Tensor<double>::zeros({1, 2, 4, 4}, true);
        for (size_t i = 0; i < b.data().size(); ++i)
            b.data()[i] = a.data()[i] + (i % 2 == 0 ? 0.2 : -0.2);
        auto w = probe_weights({1, 2, 4, 4}, rng);
        return gradcheck([=] { return weighted_sum(maximum(a, b), w); },
                         {{"a", a}, {"b", b}});
    });
    push("op.relu", [] {
        Rng rng(17);
        auto a = rand_t({1, 2, 4, 4}, -1, 1, rng, true);
        for (auto& v : a.data())
            if (std::abs(v) < 0.05) v += 0.1;  // stay off the kink
        auto w = probe_weights({1, 2, 4, 4}, rng);
        return gradcheck([=] { return weighted_sum(relu(a), w); }, {{"a", a}});
    });
    push("op.sigmoid", [] {
        Rng rng(18);
        auto a = rand_t({1, 2, 4, 4}, -2, 2, rng, true);
        auto w = probe_weights({1, 2, 4, 4}, rng);
        return gradcheck([=] { return weighted_sum(sigmoid(a), w); }, {{"a", a}});
    });
    push("op.softplus", [] {
        Rng rng(19);
        auto a = rand_t({1, 2, 4, 4}, -2, 2, rng, true);
        auto w = probe_weights({1, 2, 4, 4}, rng);
        return gradcheck([=] { return weighted_sum(softplus(a), w); }, {{"a", a}});
    });
    push("op.abs", [] {
        Rng rng(20);
        auto a = rand_t({1, 2, 4, 4}, 0.1, 1.0, rng, true);
        for (size_t i = 0; i < a.data().size(); ++i)
            if (i % 2 == 0) a.data()[i] = -a.data()[i];
        auto w = probe_weights({1, 2, 4, 4}, rng);
        return gradcheck([=] { return weighted_sum(abs_t(a), w); }, {{"a", a}});
    });
    push("op.exp", [] {
        Rng rng(21);
        auto a = rand_t({1, 2, 4, 4}, -1, 1, rng, true);
        auto w = probe_weights({1, 2, 4, 4}, rng);
        return gradcheck([=] { return weighted_sum(exp_t(a), w); }, {{"a", a}});
    });
    push("op.sqrt", [] {
        Rng rng(22);
        auto a = rand_t({1, 2, 4, 4}, 0.5, 2.0, rng, true);
        auto w = probe_weights({1, 2, 4, 4}, rng);
        return gradcheck([=] { return weighted_sum(sqrt_t(a), w); }, {{"a", a}});
    });
    push("op.square_mean", [] {
        Rng rng(23);
        auto a = rand_t({1, 2, 4, 4}, -1, 1, rng, true);
        return gradcheck([=] { return mean(square(a)); }, {{"a", a}});
    });
    push("op.softmax_spatial", [] {
        Rng rng(24);
        auto a = rand_t({1, 2, 4, 4}, -2, 2, rng, true);
        auto w = probe_weights({1, 2, 4, 4}, rng);
        return gradcheck(
            [=] { return weighted_sum(softmax(a, SoftmaxAxis::Spatial), w); },
            {{"a", a}});
    });
    push("op.softmax_channel", [] {
        Rng rng(25);
        auto a = rand_t({1, 4, 3, 3}, -2, 2, rng, true);
        auto w = probe_weights({1, 4, 3, 3}, rng);
        return gradcheck(
            [=] { return weighted_sum(softmax(a, SoftmaxAxis::Channel), w); },
            {{"a", a}});
    });
    push("op.concat_slice", [] {
        Rng rng(26);
        auto a = rand_t({1, 2, 3, 3}, -1, 1, rng, true);
        auto b = rand_t({1, 3, 3, 3}, -1, 1, rng, true);
        auto w = probe_weights({1, 3, 3, 3}, rng);
        return gradcheck(
            [=] {
                Tensor<double> cat = concat_channels<double>({a, b});
                return weighted_sum(slice_channels(cat, 1, 4), w);
            },
            {{"a", a}, {"b", b}});
    });

    // ---- structured ops ----

    push("op.conv2d", [] {
        Rng rng(31);
        auto x = rand_t({2, 3, 6, 6}, -1, 1, rng, true);
        auto w = rand_t({4, 3, 3, 3}, -0.5, 0.5, rng, true);
        auto b = rand_t({1, 4, 1, 1}, -0.5, 0.5, rng, true);
        auto pw = probe_weights({2, 4, 3, 3}, rng);
        return gradcheck([=] { return weighted_sum(conv2d(x, w, b, 2, 1), pw); },
                         {{"x", x}, {"w", w}, {"b", b}});
    });
    push("op.conv_transpose2d", [] {
        Rng rng(32);
        auto x = rand_t({1, 3, 4, 4}, -1, 1, rng, true);
        auto w = rand_t({3, 2, 2, 2}, -0.5, 0.5, rng, true);
        auto b = rand_t({1, 2, 1, 1}, -0.5, 0.5, rng, true);
        auto pw = probe_weights({1, 2, 8, 8}, rng);
        return gradcheck(
            [=] { return weighted_sum(conv_transpose2d(x, w, b, 2), pw); },
            {{"x", x}, {"w", w}, {"b", b}});
    });
    push("op.depthwise_fixed_conv2d", [] {
        Rng rng(33);
        auto x = rand_t({1, 2, 5, 5}, -1, 1, rng, true);
        std::vector<double> k = {0.1, -0.2, 0.3, 0.0, 0.5, -0.1, 0.2, 0.1, -0.3};
        auto pw = probe_weights({1, 2, 5, 5}, rng);
        return gradcheck(
            [=] { return weighted_sum(depthwise_fixed_conv2d(x, k, 3, 1), pw); },
            {{"x", x}});
    });
    push("op.max_pool_channelwise", [] {
        Rng rng(34);
        auto x = rand_t({1, 3, 4, 4}, -1, 1, rng, true);
        auto pw = probe_weights({1, 1, 4, 4}, rng);
        return gradcheck([=] { return weighted_sum(max_pool_channelwise(x), pw); },
                         {{"x", x}});
    });
    push("op.avg_pool_channelwise", [] {
        Rng rng(35);
        auto x = rand_t({1, 3, 4, 4}, -1, 1, rng, true);
        auto pw = probe_weights({1, 1, 4, 4}, rng);
        return gradcheck([=] { return weighted_sum(avg_pool_channelwise(x), pw); },
                         {{"x", x}});
    });
    push("op.global_avg_pool", [] {
        Rng rng(36);
        auto x = rand_t({2, 3, 4, 4}, -1, 1, rng, true);
        auto pw = probe_weights({2, 3, 1, 1}, rng);
        return gradcheck([=] { return weighted_sum(global_avg_pool(x), pw); },
                         {{"x", x}});
    });
    push("op.global_max_pool", [] {
        Rng rng(37);
        auto x = rand_t({2, 3, 4, 4}, -1, 1, rng, true);
        auto pw = probe_weights({2, 3, 1, 1}, rng);
        return gradcheck([=] { return weighted_sum(global_max_pool(x), pw); },
                         {{"x", x}});
    });
    push("op.layer_norm", [] {
        Rng rng(38);
        auto x = rand_t({2, 4, 3, 3}, -1, 1, rng, true);
        auto g = rand_t({1, 4, 1, 1}, 0.5, 1.5, rng, true);
        auto b = rand_t({1, 4, 1, 1}, -0.5, 0.5, rng, true);
        auto pw = probe_weights({2, 4, 3, 3}, rng);
        return gradcheck([=] { return weighted_sum(layer_norm(x, g, b), pw); },
                         {{"x", x}, {"gamma", g}, {"beta", b}});
    });
    push("op.reflect_pad_crop", [] {
        Rng rng(39);
        auto x = rand_t({1, 2, 5, 5}, -1, 1, rng, true);
        auto pw = probe_weights({1, 2, 8, 8}, rng);
        return gradcheck(
            [=] {
                Tensor<double> padded = reflect_pad_to(x, 8, 8);
                return add(weighted_sum(padded, pw), mean(crop_to(padded, 3, 3)));
            },
            {{"x", x}});
    });
    push("op.dwt2", [] {
        Rng rng(40);
        auto x = rand_t({1, 2, 5, 6}, -1, 1, rng, true);  // odd height
        auto pw = probe_weights({1, 2, 3, 3}, rng);
        return gradcheck(
            [=] {
                WaveletPack<double> p = dwt2(x);
                return add(add(weighted_sum(p.ll, pw), weighted_sum(p.lh, pw)),
                           add(weighted_sum(p.hl, pw), weighted_sum(p.hh, pw)));
            },
            {{"x", x}});
    });
    push("op.idwt2", [] {
        Rng rng(41);
        auto x = rand_t({1, 2, 6, 6}, -1, 1, rng, true);
        auto pw = probe_weights({1, 2, 6, 6}, rng);
        return gradcheck(
            [=] { return weighted_sum(idwt2(dwt2(x)), pw); }, {{"x", x}});
    });
    push("op.gather_scatter", [] {
        Rng rng(42);
        auto x = rand_t({1, 2, 3, 4}, -1, 1, rng, true);
        ScanOrder ord = build_scan_order(ScanKind::DiagonalBi, 3, 4);
        auto pw = probe_weights({1, 2, 3, 4}, rng);
        return gradcheck(
            [=] {
                Tensor<double> seq = gather_spatial(x, ord.index_map);
                return weighted_sum(scatter_spatial(seq, ord.index_map, 3, 4), pw);
            },
            {{"x", x}});
    });
    push("op.selective_scan", [] {
        Rng rng(43);
        const int64_t B = 1, C = 2, L = 6, N = 3;
        auto x = rand_t({B, C, L, 1}, -1, 1, rng, true);
        auto delta_raw = rand_t({B, C, L, 1}, -1, 1, rng, true);
        auto bm = rand_t({B, N, L, 1}, -1, 1, rng, true);
        auto cm = rand_t({B, N, L, 1}, -1, 1, rng, true);
        auto a_log = rand_t({C, N, 1, 1}, std::log(0.5), std::log(2.0), rng, true);
        auto d_skip = rand_t({1, C, 1, 1}, 0.5, 1.5, rng, true);
        auto pw = probe_weights({B, C, L, 1}, rng);
        return gradcheck(
            [=] {
                return weighted_sum(
                    selective_scan(x, softplus(delta_raw), bm, cm, a_log, d_skip), pw);
            },
            {{"x", x},
             {"delta_raw", delta_raw},
             {"bm", bm},
             {"cm", cm},
             {"a_log", a_log},
             {"d_skip", d_skip}});
    });
    push("op.ssm_recurrence", [] {
        Rng rng(44);
        ParamStore<double> ps;
        SsmLayer<double> layer(ps, "ssm", 3, 2, rng);
        auto x = rand_t({1, 3, 8, 1}, -1, 1, rng, true);
        auto pw = probe_weights({1, 3, 8, 1}, rng);
        detail::Params params{{"x", x}};
        for (auto& [name, t] : ps) params.emplace_back(name, t);
        return gradcheck([=, &layer] { return weighted_sum(ssm_recurrence(x, layer), pw); },
                         params);
    });
    push("op.scan_2d_regular", [] {
        Rng rng(45);
        ParamStore<double> ps;
        SsmLayer<double> layer(ps, "ssm", 2, 2, rng);
        auto x = rand_t({1, 2, 4, 4}, -1, 1, rng, true);
        auto pw = probe_weights({1, 2, 4, 4}, rng);
        detail::Params params{{"x", x}};
        for (auto& [name, t] : ps) params.emplace_back(name, t);
        return gradcheck(
            [=, &layer] { return weighted_sum(scan_2d_regular(x, layer), pw); }, params);
    });
    push("op.freq_scan_hh", [] {
        Rng rng(46);
        ParamStore<double> ps;
        SsmLayer<double> layer(ps, "ssm", 2, 2, rng);
        auto x = rand_t({1, 2, 4, 4}, -1, 1, rng, true);
        auto pw = probe_weights({1, 2, 4, 4}, rng);
        detail::Params params{{"x", x}};
        for (auto& [name, t] : ps) params.emplace_back(name, t);
        return gradcheck(
            [=, &layer] { return weighted_sum(freq_scan(x, Subband::HH, layer), pw); },
            params);
    });

    // ---- blocks ----

    push("block.channel_attention", [] {
        Rng rng(51);
        ParamStore<double> ps;
        ChannelAttention<double> ca(ps, "ca", 4, 2, rng);
        auto x = rand_t({1, 4, 4, 4}, -1, 1, rng, true);
        auto pw = probe_weights({1, 4, 4, 4}, rng);
        detail::Params params{{"x", x}};
        for (auto& [name, t] : ps) params.emplace_back(name, t);
        return gradcheck([=, &ca] { return weighted_sum(ca(x), pw); }, params);
    });
    push("block.wapm", [] {
        // Seed chosen so no ReLU pre-activation sits within the probe step
        // of its kink; nearby seeds produce O(h) finite-difference error.
        Rng rng(83);
        ParamStore<double> ps;
        Wapm<double> wapm(ps, "wapm", rng);
        auto x = rand_t({1, 3, 6, 6}, 0, 1, rng, true);
        Rng prng(1083);
        auto pw = probe_weights({1, 3, 6, 6}, prng);
        auto pe = probe_weights({1, kWeatherEmbedDim, 1, 1}, prng);
        detail::Params params{{"x", x}};
        for (auto& [name, t] : ps) params.emplace_back(name, t);
        return gradcheck(
            [=, &wapm] {
                WapmOutput<double> out = wapm(x);
                return add(weighted_sum(out.vi_out, pw),
                           weighted_sum(out.embedding.vec, pe));
            },
            params, 1e-3, 1e-3, 4);
    });
    push("block.cfim", [] {
        Rng rng(53);
        ParamStore<double> ps;
        Cfim<double> cfim(ps, "cfim", 3, 4, rng);
        auto ir = rand_t({1, 3, 8, 8}, 0, 1, rng, true);
        auto vi = rand_t({1, 3, 8, 8}, 0, 1, rng, true);
        auto pw = probe_weights({1, 4, 8, 8}, rng);
        detail::Params params{{"ir", ir}, {"vi", vi}};
        for (auto& [name, t] : ps) params.emplace_back(name, t);
        return gradcheck(
            [=, &cfim] { return weighted_sum(cfim(ir, vi).fused, pw); }, params, 1e-3,
            1e-3, 4);
    });
    push("block.cdsm", [] {
        Rng rng(54);
        ParamStore<double> ps;
        Cdsm<double> cdsm(ps, "cdsm", 4, 2, rng);
        // The merge conv is zero at construction; randomize it here so its
        // gradient path is actually exercised.
        uniform_(ps.get("cdsm.merge.weight"), -0.3, 0.3, rng);
        auto x = rand_t({1, 4, 5, 5}, -1, 1, rng, true);
        auto pw = probe_weights({1, 4, 5, 5}, rng);
        detail::Params params{{"x", x}};
        for (auto& [name, t] : ps) params.emplace_back(name, t);
        return gradcheck([=, &cdsm] { return weighted_sum(cdsm(x), pw); }, params, 1e-3,
                         1e-3, 4);
    });
    push("block.weather_gate", [] {
        Rng rng(55);
        ParamStore<double> ps;
        WeatherGate<double> gate(ps, "gate", 4, rng);
        auto x = rand_t({1, 4, 4, 4}, -1, 1, rng, true);
        auto e = rand_t({1, kWeatherEmbedDim, 1, 1}, -1, 1, rng, true);
        auto pw = probe_weights({1, 4, 4, 4}, rng);
        detail::Params params{{"x", x}, {"emb", e}};
        for (auto& [name, t] : ps) params.emplace_back(name, t);
        return gradcheck(
            [=, &gate] {
                WeatherEmbedding<double> emb{e};
                return weighted_sum(gate(x, emb), pw);
            },
            params, 1e-3, 1e-3, 4);
    });
    push("block.wssb", [] {
        Rng rng(56);
        ParamStore<double> ps;
        Wssb<double> wssb(ps, "wssb", 4, 2, 1, rng);
        // Randomize the zero-initialized refine/merge convs so their
        // gradient paths are exercised.
        for (auto& [name, t] : ps)
            if (name.find(".refine.weight") != std::string::npos ||
                name.find(".merge.weight") != std::string::npos)
                uniform_(t, -0.3, 0.3, rng);
        auto x = rand_t({1, 4, 8, 8}, -1, 1, rng, true);
        auto e = rand_t({1, kWeatherEmbedDim, 1, 1}, -1, 1, rng, true);
        auto pw = probe_weights({1, 4, 8, 8}, rng);
        detail::Params params{{"x", x}, {"emb", e}};
        for (auto& [name, t] : ps) params.emplace_back(name, t);
        return gradcheck(
            [=, &wssb] {
                WeatherEmbedding<double> emb{e};
                return weighted_sum(wssb(x, emb), pw);
            },
            params, 1e-3, 1e-3, 2);
    });

    // ---- losses ----

    push("loss.wavelet", [] {
        Rng rng(61);
        auto f = rand_t({1, 3, 6, 6}, 0.1, 0.9, rng, true);
        auto v = rand_t({1, 3, 6, 6}, 0.1, 0.9, rng, true);
        return gradcheck([=] { return wavelet_loss(f, v); }, {{"fused", f}, {"vis", v}});
    });
    push("loss.intensity", [] {
        Rng rng(62);
        auto f = rand_t({1, 3, 6, 6}, 0.1, 0.9, rng, true);
        auto v = rand_t({1, 3, 6, 6}, 0.1, 0.45, rng, true);
        auto i = rand_t({1, 1, 6, 6}, 0.55, 0.9, rng, true);  // max always IR
        return gradcheck([=] { return intensity_loss(f, v, i); },
                         {{"fused", f}, {"vis", v}, {"ir", i}});
    });
    push("loss.color", [] {
        Rng rng(63);
        auto f = rand_t({1, 3, 6, 6}, 0.1, 0.9, rng, true);
        auto v = rand_t({1, 3, 6, 6}, 0.1, 0.9, rng, true);
        return gradcheck([=] { return color_loss(f, v); }, {{"fused", f}, {"vis", v}});
    });
    push("loss.perceptual", [] {
        Rng rng(64);
        auto f = rand_t({1, 3, 8, 8}, 0.1, 0.9, rng, true);
        auto v = rand_t({1, 3, 8, 8}, 0.1, 0.9, rng, true);
        auto ex = make_random_pyramid_extractor<double>();
        return gradcheck([=] { return perceptual_loss(f, v, ex); },
                         {{"fused", f}, {"vis", v}});
    });
    push("loss.gradient", [] {
        // Seed chosen so no Sobel response sits within the probe step of an
        // abs() kink.
        Rng rng(83);
        auto f = rand_t({1, 3, 6, 6}, 0.1, 0.9, rng, true);
        // Low-contrast visible vs high-contrast infrared keeps the
        // edge-map max() branches stable under the finite-difference step.
        auto v = rand_t({1, 3, 6, 6}, 0.45, 0.55, rng, true);
        auto i = rand_t({1, 1, 6, 6}, 0.05, 0.95, rng, true);
        return gradcheck([=] { return gradient_loss(f, v, i); },
                         {{"fused", f}, {"vis", v}, {"ir", i}});
    });
    push("loss.ssim", [] {
        Rng rng(66);
        auto f = rand_t({1, 3, 12, 12}, 0.1, 0.9, rng, true);
        auto v = rand_t({1, 3, 12, 12}, 0.1, 0.9, rng, true);
        auto i = rand_t({1, 1, 12, 12}, 0.1, 0.9, rng, true);
        return gradcheck([=] { return ssim_loss(f, v, i); },
                         {{"fused", f}, {"vis", v}, {"ir", i}});
    });
    push("loss.total", [] {
        Rng rng(67);
        auto f = rand_t({1, 3, 12, 12}, 0.1, 0.9, rng, true);
        auto v = rand_t({1, 3, 12, 12}, 0.1, 0.9, rng, true);
        auto i = rand_t({1, 1, 12, 12}, 0.1, 0.9, rng, true);
        auto alpha = Tensor<double>::scalar(0.5, true);
        auto ex = make_random_pyramid_extractor<double>();
        return gradcheck(
            [=] { return total_loss(f, v, i, alpha, ex).first; },
            {{"fused", f}, {"vis", v}, {"ir", i}, {"alpha", alpha}}, 1e-3, 1e-3, 4);
    });

    return cases;
}

// Runs every case, printing one line each; returns true when all pass.
inline bool run_gradcheck_suite(std::ostream& os) {
    bool all_ok = true;
    for (const auto& c : build_gradcheck_suite()) {
        GradCheckResult r = c.run();
        all_ok = all_ok && r.ok;
        os << (r.ok ? "PASS " : "FAIL ") << c.name << " max_rel_err=" << r.max_rel_err
           << " probes=" << r.probes;
        if (!r.ok) os << " worst=" << r.worst;
        os << "\n";
    }
    return all_ok;
}

}  // namespace cawm
