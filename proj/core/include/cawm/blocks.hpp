#pragma once

// The named fusion blocks: weather-aware preprocessing, cross-modal feature
// interaction, channel attention, the common-degradation residual stack and
// the weather-guided gate.

#include <string>

#include "cawm/nn.hpp"
#include "cawm/optim.hpp"
#include "cawm/random.hpp"
#include "cawm/tensor.hpp"

namespace cawm {

inline constexpr int64_t kWeatherEmbedDim = 48;

template <typename T>
struct WeatherEmbedding {
    Tensor<T> vec;  // (B, 48, 1, 1)
};

// ---- parameterized layer helpers ----

template <typename T>
struct Conv2dLayer {
    Tensor<T> weight, bias;
    int64_t stride = 1, padding = 0;

    Conv2dLayer() = default;
    // padding -1 selects "same" padding (k/2) for odd kernels.
    Conv2dLayer(ParamStore<T>& ps, const std::string& name, int64_t cin, int64_t cout,
                int64_t k, Rng& rng, int64_t stride_ = 1, int64_t padding_ = -1,
                bool with_bias = true) {
        stride = stride_;
        padding = padding_ < 0 ? k / 2 : padding_;
        weight = Tensor<T>::zeros({cout, cin, k, k});
        kaiming_uniform_(weight, cin * k * k, rng);
        ps.add(name + ".weight", weight);
        if (with_bias) {
            bias = Tensor<T>::zeros({1, cout, 1, 1});
            ps.add(name + ".bias", bias);
        }
    }

    Tensor<T> operator()(const Tensor<T>& x) const {
        return conv2d(x, weight, bias, stride, padding);
    }
};

template <typename T>
struct ConvTranspose2dLayer {
    Tensor<T> weight, bias;  // weight (Cin,Cout,k,k)
    int64_t stride = 2;

    ConvTranspose2dLayer() = default;
    ConvTranspose2dLayer(ParamStore<T>& ps, const std::string& name, int64_t cin,
                         int64_t cout, int64_t k, Rng& rng, int64_t stride_ = 2) {
        stride = stride_;
        weight = Tensor<T>::zeros({cin, cout, k, k});
        kaiming_uniform_(weight, cin * k * k, rng);
        bias = Tensor<T>::zeros({1, cout, 1, 1});
        ps.add(name + ".weight", weight);
        ps.add(name + ".bias", bias);
    }

    Tensor<T> operator()(const Tensor<T>& x) const {
        return conv_transpose2d(x, weight, bias, stride);
    }
};

template <typename T>
struct LayerNormLayer {
    Tensor<T> gamma, beta;

    LayerNormLayer() = default;
    LayerNormLayer(ParamStore<T>& ps, const std::string& name, int64_t c) {
        gamma = Tensor<T>::filled({1, c, 1, 1}, T(1));
        beta = Tensor<T>::zeros({1, c, 1, 1});
        ps.add(name + ".gamma", gamma);
        ps.add(name + ".beta", beta);
    }

    Tensor<T> operator()(const Tensor<T>& x) const { return layer_norm(x, gamma, beta); }
};

// Learnable scalar, e.g. the skip-scale S' (init 1) or the loss weight alpha.
template <typename T>
struct ScalarParam {
    Tensor<T> value;

    ScalarParam() = default;
    ScalarParam(ParamStore<T>& ps, const std::string& name, T init) {
        value = Tensor<T>::scalar(init);
        ps.add(name, value);
    }

    Tensor<T> operator*(const Tensor<T>& x) const { return mul(x, value); }
};

// ---- channel attention: GAP -> 1x1 (C->C/r) -> ReLU -> 1x1 (C/r->C) -> Sigmoid ----

template <typename T>
struct ChannelAttention {
    Conv2dLayer<T> squeeze, excite;
    int64_t reduction = 4;

    ChannelAttention() = default;
    ChannelAttention(ParamStore<T>& ps, const std::string& name, int64_t c,
                     int64_t reduction_, Rng& rng) {
        if (reduction_ < 1 || c % reduction_ != 0)
            throw ConfigError("channel_attention: C=" + std::to_string(c) +
                              " not divisible by reduction " + std::to_string(reduction_));
        reduction = reduction_;
        squeeze = Conv2dLayer<T>(ps, name + ".squeeze", c, c / reduction_, 1, rng);
        excite = Conv2dLayer<T>(ps, name + ".excite", c / reduction_, c, 1, rng);
    }

    Tensor<T> weights(const Tensor<T>& x) const {
        return sigmoid(excite(relu(squeeze(global_avg_pool(x)))));
    }
    Tensor<T> operator()(const Tensor<T>& x) const { return mul(x, weights(x)); }
};

// ---- WAPM ----

template <typename T>
struct WapmOutput {
    Tensor<T> vi_out;  // (B,3,H,W)
    WeatherEmbedding<T> embedding;
};

// Two 3x3 conv+ReLU stages, channel attention on the 48-wide feature map, a
// 1x1 projection back to 3 channels, and a separate GAP -> conv -> ReLU ->
// conv head producing the 48-dim global weather embedding.
template <typename T>
struct Wapm {
    static constexpr int64_t kFeatWidth = 48;

    Conv2dLayer<T> conv1, conv2, to_rgb;
    ChannelAttention<T> attention;
    Conv2dLayer<T> embed1, embed2;

    Wapm() = default;
    Wapm(ParamStore<T>& ps, const std::string& name, Rng& rng) {
        conv1 = Conv2dLayer<T>(ps, name + ".conv1", 3, kFeatWidth, 3, rng);
        conv2 = Conv2dLayer<T>(ps, name + ".conv2", kFeatWidth, kFeatWidth, 3, rng);
        attention = ChannelAttention<T>(ps, name + ".attention", kFeatWidth, 4, rng);
        to_rgb = Conv2dLayer<T>(ps, name + ".to_rgb", kFeatWidth, 3, 1, rng);
        embed1 = Conv2dLayer<T>(ps, name + ".embed1", kFeatWidth, kWeatherEmbedDim, 1, rng);
        embed2 = Conv2dLayer<T>(ps, name + ".embed2", kWeatherEmbedDim, kWeatherEmbedDim,
                                1, rng);
    }

    WapmOutput<T> operator()(const Tensor<T>& vi) const {
        if (vi.shape().c != 3)
            throw ConfigError("wapm: expected 3 input channels, got " +
                              std::to_string(vi.shape().c));
        Tensor<T> feat = relu(conv2(relu(conv1(vi))));
        Tensor<T> enhanced = attention(feat);
        WapmOutput<T> out;
        out.vi_out = to_rgb(enhanced);
        out.embedding.vec = embed2(relu(embed1(global_avg_pool(enhanced))));
        return out;
    }
};

// ---- CFIM ----

template <typename T>
struct CfimOutput {
    Tensor<T> fused;  // (B, 2*half, H, W) = per-modality width doubled
};

// Cross-gating between the IR saliency path and the VI texture path. Each
// modality is unified to `width` channels and split in half; the pooled map
// of one modality gates the other (cross wiring), the global-pooled second
// halves produce channel weights for their own modality.
template <typename T>
struct Cfim {
    int64_t width = 0;
    Conv2dLayer<T> unify_ir, unify_vi;
    Conv2dLayer<T> spatial_ir, spatial_vi;  // 7x7 on single-channel maps
    Conv2dLayer<T> chan_ir, chan_vi;        // 1x1 on (B,C/2,1,1)

    Cfim() = default;
    Cfim(ParamStore<T>& ps, const std::string& name, int64_t cin, int64_t width_,
         Rng& rng) {
        if (width_ % 2 != 0)
            throw ConfigError("cfim: width " + std::to_string(width_) + " must be even");
        width = width_;
        const int64_t half = width / 2;
        unify_ir = Conv2dLayer<T>(ps, name + ".unify_ir", cin, width, 1, rng);
        unify_vi = Conv2dLayer<T>(ps, name + ".unify_vi", cin, width, 1, rng);
        spatial_ir = Conv2dLayer<T>(ps, name + ".spatial_ir", 1, 1, 7, rng);
        spatial_vi = Conv2dLayer<T>(ps, name + ".spatial_vi", 1, 1, 7, rng);
        chan_ir = Conv2dLayer<T>(ps, name + ".chan_ir", half, half, 1, rng);
        chan_vi = Conv2dLayer<T>(ps, name + ".chan_vi", half, half, 1, rng);
    }

    CfimOutput<T> operator()(const Tensor<T>& ir, const Tensor<T>& vi) const {
        if (!(ir.shape() == vi.shape()))
            throw ConfigError("cfim: ir shape " + ir.shape().str() + " != vi shape " +
                              vi.shape().str());
        const int64_t half = width / 2;
        Tensor<T> fir = unify_ir(ir);
        Tensor<T> fvi = unify_vi(vi);
        Tensor<T> fir_mp = slice_channels(fir, 0, half);
        Tensor<T> fir_gmp = slice_channels(fir, half, width);
        Tensor<T> fvi_ap = slice_channels(fvi, 0, half);
        Tensor<T> fvi_gap = slice_channels(fvi, half, width);

        Tensor<T> p_ir_mp = max_pool_channelwise(fir_mp);   // (B,1,H,W)
        Tensor<T> p_vi_ap = avg_pool_channelwise(fvi_ap);   // (B,1,H,W)
        // Cross wiring: IR saliency gates VI, VI texture gates IR.
        Tensor<T> a_vi_ap =
            softmax(relu(spatial_vi(p_ir_mp)), SoftmaxAxis::Spatial);
        Tensor<T> a_ir_mp =
            softmax(relu(spatial_ir(p_vi_ap)), SoftmaxAxis::Spatial);

        Tensor<T> a_ir_gmp = softmax(relu(chan_ir(global_max_pool(fir_gmp))),
                                     SoftmaxAxis::Channel);
        Tensor<T> a_vi_gmp = softmax(relu(chan_vi(global_avg_pool(fvi_gap))),
                                     SoftmaxAxis::Channel);

        Tensor<T> fir_out = mul(mul(fir_mp, a_ir_mp), a_ir_gmp);
        Tensor<T> fvi_out = mul(mul(fvi_ap, a_vi_ap), a_vi_gmp);
        CfimOutput<T> out;
        out.fused = concat_channels<T>({fir_out, fvi_out});
        return out;
    }
};

// ---- CDSM ----

// 3x3 stem, `depth` residual conv units, a 3x3 merge, channel attention, and
// a global residual back to the module input. With all weights zero this is
// exactly the identity.
template <typename T>
struct Cdsm {
    Conv2dLayer<T> stem, merge;
    std::vector<std::pair<Conv2dLayer<T>, Conv2dLayer<T>>> residual_units;
    ChannelAttention<T> attention;

    Cdsm() = default;
    Cdsm(ParamStore<T>& ps, const std::string& name, int64_t c, int64_t depth, Rng& rng) {
        if (depth < 1) throw ConfigError("cdsm: depth must be >= 1");
        stem = Conv2dLayer<T>(ps, name + ".stem", c, c, 3, rng);
        for (int64_t i = 0; i < depth; ++i) {
            auto u1 = Conv2dLayer<T>(ps, name + ".unit" + std::to_string(i) + ".conv1",
                                     c, c, 3, rng);
            auto u2 = Conv2dLayer<T>(ps, name + ".unit" + std::to_string(i) + ".conv2",
                                     c, c, 3, rng);
            residual_units.emplace_back(std::move(u1), std::move(u2));
        }
        merge = Conv2dLayer<T>(ps, name + ".merge", c, c, 3, rng);
        // Zero merge weights make the whole module start as the identity
        // (the global residual passes through unchanged), which speeds up
        // early training.
        std::fill(merge.weight.data().begin(), merge.weight.data().end(), T(0));
        attention = ChannelAttention<T>(ps, name + ".attention", c, 4, rng);
    }

    Tensor<T> operator()(const Tensor<T>& x) const {
        Tensor<T> a = stem(x);
        for (const auto& [c1, c2] : residual_units) a = add(c2(relu(c1(a))), a);
        Tensor<T> mid = merge(a);
        Tensor<T> gated = attention(mid);
        return add(gated, x);  // global residual
    }
};

// ---- weather-guided feature modulation gate ----

// GAP of the refined features concatenated with a projection of the 48-dim
// weather embedding; an MLP produces per-channel calibration weights in
// (0,1) that scale the features.
template <typename T>
struct WeatherGate {
    int64_t channels = 0;
    Conv2dLayer<T> embed_proj;  // 48 -> C
    Conv2dLayer<T> fc1, fc2;    // 2C -> C -> C

    WeatherGate() = default;
    WeatherGate(ParamStore<T>& ps, const std::string& name, int64_t c, Rng& rng) {
        channels = c;
        embed_proj = Conv2dLayer<T>(ps, name + ".embed_proj", kWeatherEmbedDim, c, 1, rng);
        fc1 = Conv2dLayer<T>(ps, name + ".fc1", 2 * c, c, 1, rng);
        fc2 = Conv2dLayer<T>(ps, name + ".fc2", c, c, 1, rng);
        // Start with the gate mostly open (sigmoid(2) ~ 0.88) so early
        // training is not attenuated by a half-closed gate at every block.
        std::fill(fc2.bias.data().begin(), fc2.bias.data().end(), T(2));
    }

    Tensor<T> operator()(const Tensor<T>& x_refined,
                         const WeatherEmbedding<T>& emb) const {
        if (emb.vec.shape().c != kWeatherEmbedDim)
            throw ConfigError("weather_gate: embedding width " +
                              std::to_string(emb.vec.shape().c) + " != 48");
        Tensor<T> stats = global_avg_pool(x_refined);        // (B,C,1,1)
        Tensor<T> prior = embed_proj(emb.vec);               // (B,C,1,1)
        Tensor<T> descriptor = concat_channels<T>({stats, prior});
        Tensor<T> w = sigmoid(fc2(relu(fc1(descriptor))));   // (B,C,1,1)
        return mul(x_refined, w);
    }
};

}  // namespace cawm
