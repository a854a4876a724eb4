#pragma once

// WSSB (wavelet -> per-band state-space scans -> channel attention ->
// inverse wavelet -> degradation stack -> weather gate) and the U-Net that
// stacks them into the end-to-end restoration-fusion forward pass.

#include <string>
#include <vector>

#include "cawm/blocks.hpp"
#include "cawm/ssm.hpp"
#include "cawm/wavelet.hpp"

namespace cawm {

struct NetConfig {
    std::vector<int64_t> block_counts;      // WSSBs per U-Net level, odd length
    int64_t base_channels = 48;
    std::vector<int64_t> channel_schedule;  // per level, rises then falls
    int64_t ssm_state_dim = 8;
    int64_t cdsm_depth = 3;
    int64_t embed_dim = kWeatherEmbedDim;

    static NetConfig paper_preset() {
        NetConfig c;
        c.block_counts = {8, 10, 10, 12, 10, 10, 8};
        c.base_channels = 48;
        c.channel_schedule = {48, 96, 192, 384, 192, 96, 48};
        c.ssm_state_dim = 16;
        c.cdsm_depth = 3;
        return c;
    }
    static NetConfig tiny_preset() {
        NetConfig c;
        c.block_counts = {1, 1, 1};
        c.base_channels = 8;
        c.channel_schedule = {8, 16, 8};
        c.ssm_state_dim = 2;
        c.cdsm_depth = 3;
        return c;
    }

    int64_t levels() const { return static_cast<int64_t>(block_counts.size()); }

    void validate() const {
        if (block_counts.empty() || block_counts.size() % 2 == 0)
            throw ConfigError("net config: block_counts length must be odd");
        if (channel_schedule.size() != block_counts.size())
            throw ConfigError("net config: channel_schedule length != block_counts length");
        if (embed_dim != kWeatherEmbedDim)
            throw ConfigError("net config: embed_dim must be 48");
        const size_t mid = channel_schedule.size() / 2;
        for (size_t i = 0; i < mid; ++i) {
            if (channel_schedule[i] > channel_schedule[i + 1])
                throw ConfigError("net config: channel_schedule must rise to its peak");
            if (channel_schedule[i] != channel_schedule[channel_schedule.size() - 1 - i])
                throw ConfigError("net config: channel_schedule must be symmetric");
        }
        if (channel_schedule.front() != base_channels)
            throw ConfigError("net config: channel_schedule must start at base_channels");
        if (ssm_state_dim < 1 || cdsm_depth < 1)
            throw ConfigError("net config: state dim and cdsm depth must be positive");
    }
};

// ---- WSSB ----

template <typename T>
struct Wssb {
    LayerNormLayer<T> norm_ll;
    SsmLayer<T> ssm_ll;
    ScalarParam<T> skip_ll;

    struct HighBranch {
        LayerNormLayer<T> norm_in;
        SsmLayer<T> ssm;
        ScalarParam<T> skip_scan;
        LayerNormLayer<T> norm_refine;
        Conv2dLayer<T> refine;
        ScalarParam<T> skip_refine;
        ChannelAttention<T> attention;
        Subband band;
    };
    std::array<HighBranch, 3> high;  // LH, HL, HH

    Cdsm<T> cdsm;
    WeatherGate<T> gate;

    Wssb() = default;
    Wssb(ParamStore<T>& ps, const std::string& name, int64_t c, int64_t state_dim,
         int64_t cdsm_depth, Rng& rng) {
        norm_ll = LayerNormLayer<T>(ps, name + ".ll.norm", c);
        ssm_ll = SsmLayer<T>(ps, name + ".ll.ssm", c, state_dim, rng);
        skip_ll = ScalarParam<T>(ps, name + ".ll.skip", T(1));
        const char* tags[3] = {"lh", "hl", "hh"};
        const Subband bands[3] = {Subband::LH, Subband::HL, Subband::HH};
        for (int i = 0; i < 3; ++i) {
            auto& h = high[i];
            std::string base = name + "." + tags[i];
            h.norm_in = LayerNormLayer<T>(ps, base + ".norm_in", c);
            h.ssm = SsmLayer<T>(ps, base + ".ssm", c, state_dim, rng);
            h.skip_scan = ScalarParam<T>(ps, base + ".skip_scan", T(1));
            h.norm_refine = LayerNormLayer<T>(ps, base + ".norm_refine", c);
            h.refine = Conv2dLayer<T>(ps, base + ".refine", c, c, 3, rng);
            // Zero refinement weights: each high branch starts as the pure
            // scan-plus-skip path.
            std::fill(h.refine.weight.data().begin(), h.refine.weight.data().end(),
                      T(0));
            h.skip_refine = ScalarParam<T>(ps, base + ".skip_refine", T(1));
            h.attention = ChannelAttention<T>(ps, base + ".attention", c, 4, rng);
            h.band = bands[i];
        }
        cdsm = Cdsm<T>(ps, name + ".cdsm", c, cdsm_depth, rng);
        gate = WeatherGate<T>(ps, name + ".gate", c, rng);
    }

    Tensor<T> operator()(const Tensor<T>& x, const WeatherEmbedding<T>& emb) const {
        WaveletPack<T> p = dwt2(x);

        Tensor<T> f_ll = norm_ll(p.ll);
        Tensor<T> out_ll = add(skip_ll * f_ll, scan_2d_regular(f_ll, ssm_ll));

        auto refine_band = [&](const HighBranch& hb, const Tensor<T>& band) {
            Tensor<T> f = hb.norm_in(band);
            Tensor<T> attn = add(hb.skip_scan * f, freq_scan(f, hb.band, hb.ssm));
            return hb.attention(
                add(hb.refine(hb.norm_refine(attn)), hb.skip_refine * attn));
        };
        WaveletPack<T> out_pack;
        out_pack.ll = out_ll;
        out_pack.lh = refine_band(high[0], p.lh);
        out_pack.hl = refine_band(high[1], p.hl);
        out_pack.hh = refine_band(high[2], p.hh);
        out_pack.original_h = p.original_h;
        out_pack.original_w = p.original_w;

        Tensor<T> recombined = idwt2(out_pack);
        Tensor<T> refined = cdsm(recombined);
        return gate(refined, emb);
    }
};

// ---- the full network ----

template <typename T>
class CawmNet {
public:
    CawmNet(ParamStore<T>& ps, const NetConfig& cfg, Rng& rng) : cfg_(cfg) {
        cfg_.validate();
        const int64_t levels = cfg_.levels();
        const int64_t mid = levels / 2;
        wapm_ = Wapm<T>(ps, "wapm", rng);
        ir_lift_ = Conv2dLayer<T>(ps, "ir_lift", 1, 3, 1, rng);
        cfim_ = Cfim<T>(ps, "cfim", 3, cfg_.base_channels, rng);
        blocks_.resize(levels);
        for (int64_t lvl = 0; lvl < levels; ++lvl) {
            const int64_t c = cfg_.channel_schedule[lvl];
            for (int64_t i = 0; i < cfg_.block_counts[lvl]; ++i)
                blocks_[lvl].emplace_back(
                    ps, "level" + std::to_string(lvl) + ".wssb" + std::to_string(i), c,
                    cfg_.ssm_state_dim, cfg_.cdsm_depth, rng);
        }
        for (int64_t i = 0; i < mid; ++i)
            down_.emplace_back(ps, "down" + std::to_string(i), cfg_.channel_schedule[i],
                               cfg_.channel_schedule[i + 1], 3, rng, /*stride=*/2,
                               /*padding=*/1);
        for (int64_t i = mid; i < levels - 1; ++i)
            up_.emplace_back(ps, "up" + std::to_string(i), cfg_.channel_schedule[i],
                             cfg_.channel_schedule[i + 1], 2, rng, /*stride=*/2);
        head_ = Conv2dLayer<T>(ps, "head", cfg_.channel_schedule.back(), 3, 3, rng);
    }

    const NetConfig& config() const { return cfg_; }

    // vi: (B,3,H,W), ir: (B,1,H,W), both in [0,1]; returns fused (B,3,H,W)
    // in (0,1). Inputs are reflect-padded to the required multiple and the
    // output cropped back.
    Tensor<T> forward(const Tensor<T>& vi, const Tensor<T>& ir) const {
        const Shape sv = vi.shape(), si = ir.shape();
        if (sv.c != 3) throw ConfigError("cawm_forward: vi must have 3 channels");
        if (si.c != 1) throw ConfigError("cawm_forward: ir must have 1 channel");
        if (sv.b != si.b || sv.h != si.h || sv.w != si.w)
            throw ConfigError("cawm_forward: vi/ir spatial mismatch");
        if (sv.h == 0 || sv.w == 0)
            throw DegenerateInputError("cawm_forward: zero-sized input");
        const int64_t mid = cfg_.levels() / 2;
        const int64_t mult = int64_t(1) << (mid + 1);
        const int64_t ph = (sv.h + mult - 1) / mult * mult;
        const int64_t pw = (sv.w + mult - 1) / mult * mult;
        Tensor<T> vi_p = reflect_pad_to(vi, ph, pw);
        Tensor<T> ir_p = reflect_pad_to(ir, ph, pw);

        WapmOutput<T> pre = wapm_(vi_p);
        Tensor<T> ir3 = ir_lift_(ir_p);
        Tensor<T> x = cfim_(ir3, pre.vi_out).fused;

        std::vector<Tensor<T>> skips;
        const int64_t levels = cfg_.levels();
        for (int64_t lvl = 0; lvl < mid; ++lvl) {
            for (const auto& blk : blocks_[lvl]) x = blk(x, pre.embedding);
            skips.push_back(x);
            x = down_[lvl](x);
        }
        for (const auto& blk : blocks_[mid]) x = blk(x, pre.embedding);
        for (int64_t lvl = mid + 1; lvl < levels; ++lvl) {
            x = up_[lvl - mid - 1](x);
            x = add(x, skips[levels - 1 - lvl]);
            for (const auto& blk : blocks_[lvl]) x = blk(x, pre.embedding);
        }
        Tensor<T> fused = sigmoid(head_(x));
        return crop_to(fused, sv.h, sv.w);
    }

private:
    NetConfig cfg_;
    Wapm<T> wapm_;
    Conv2dLayer<T> ir_lift_;
    Cfim<T> cfim_;
    std::vector<std::vector<Wssb<T>>> blocks_;
    std::vector<Conv2dLayer<T>> down_;
    std::vector<ConvTranspose2dLayer<T>> up_;
    Conv2dLayer<T> head_;
};

}  // namespace cawm
