#include <doctest.h>

#include <cmath>

#include "cawm/blocks.hpp"
#include "cawm/random.hpp"

using namespace cawm;

namespace {

Tensor<float> rand_t(Shape s, uint64_t seed, double lo = -1, double hi = 1) {
    Rng rng(seed);
    Tensor<float> t = Tensor<float>::zeros(s);
    for (auto& v : t.data()) v = static_cast<float>(rng.uniform(lo, hi));
    return t;
}

}  // namespace

TEST_CASE("channel attention: gate weights lie in (0,1) and bound the output") {
    ParamStore<float> ps;
    Rng rng(201);
    ChannelAttention<float> ca(ps, "ca", 8, 4, rng);
    Tensor<float> x = rand_t({2, 8, 5, 5}, 202);
    Tensor<float> w = ca.weights(x);
    CHECK(w.shape() == Shape{2, 8, 1, 1});
    for (float v : w.data()) {
        CHECK(v > 0.0f);
        CHECK(v < 1.0f);
    }
    Tensor<float> y = ca(x);
    for (size_t i = 0; i < y.data().size(); ++i)
        CHECK(std::abs(y.data()[i]) <= std::abs(x.data()[i]) + 1e-7f);
}

TEST_CASE("channel attention: zero input maps to zero output") {
    ParamStore<float> ps;
    Rng rng(203);
    ChannelAttention<float> ca(ps, "ca", 4, 4, rng);
    Tensor<float> y = ca(Tensor<float>::zeros({1, 4, 3, 3}));
    for (float v : y.data()) CHECK(v == 0.0f);
}

TEST_CASE("channel attention rejects indivisible widths") {
    ParamStore<float> ps;
    Rng rng(204);
    CHECK_THROWS_AS(ChannelAttention<float>(ps, "ca", 6, 4, rng), ConfigError);
}

TEST_CASE("wapm: output shapes and fixed-width embedding") {
    ParamStore<float> ps;
    Rng rng(211);
    Wapm<float> wapm(ps, "wapm", rng);
    for (int64_t side : {8, 12}) {
        Tensor<float> vi = rand_t({1, 3, side, side}, 212 + side, 0, 1);
        WapmOutput<float> out = wapm(vi);
        CHECK(out.vi_out.shape() == Shape{1, 3, side, side});
        // embedding width is 48 regardless of input spatial size
        CHECK(out.embedding.vec.shape() == Shape{1, kWeatherEmbedDim, 1, 1});
    }
    CHECK_THROWS_AS(wapm(rand_t({1, 2, 8, 8}, 213)), ConfigError);
}

TEST_CASE("wapm: internal attention weights lie in (0,1)") {
    ParamStore<float> ps;
    Rng rng(214);
    Wapm<float> wapm(ps, "wapm", rng);
    Tensor<float> vi = rand_t({1, 3, 8, 8}, 215, 0, 1);
    Tensor<float> feat = relu(wapm.conv2(relu(wapm.conv1(vi))));
    Tensor<float> aw = wapm.attention.weights(feat);
    for (float v : aw.data()) {
        CHECK(v > 0.0f);
        CHECK(v < 1.0f);
    }
}

TEST_CASE("cfim: output doubles the per-modality width and keeps H,W") {
    ParamStore<float> ps;
    Rng rng(221);
    Cfim<float> cfim(ps, "cfim", 3, 32, rng);
    Tensor<float> ir = rand_t({2, 3, 9, 7}, 222);
    Tensor<float> vi = rand_t({2, 3, 9, 7}, 223);
    Tensor<float> fused = cfim(ir, vi).fused;
    CHECK(fused.shape() == Shape{2, 32, 9, 7});  // 2 * (width/2) per modality
    CHECK_THROWS_AS(Cfim<float>(ps, "cfim_odd", 3, 7, rng), ConfigError);
    CHECK_THROWS_AS(cfim(ir, rand_t({2, 3, 5, 5}, 224)), ConfigError);
}

TEST_CASE("cfim: symmetric when pooling paths coincide and weights are tied") {
    // With ir == vi and tied ir/vi weights the only asymmetry left is
    // max pooling vs avg pooling. A spatially constant input collapses the
    // global spatial pools, and making the first-half unify rows identical
    // collapses the across-channel pools, so both modality outputs must
    // agree exactly.
    ParamStore<float> ps;
    Rng rng(225);
    Cfim<float> cfim(ps, "cfim", 2, 8, rng);
    auto tie = [&](const std::string& a, const std::string& b) {
        ps.get("cfim." + b).data() = ps.get("cfim." + a).data();
    };
    // unify: (width=8, cin=2, 1, 1); copy row 0 into rows 1..3 so the first
    // half of the unified features is constant across channels
    {
        Tensor<float>& w = ps.get("cfim.unify_ir.weight");
        for (int64_t o = 1; o < 4; ++o)
            for (int64_t i = 0; i < 2; ++i) w.at(o, i, 0, 0) = w.at(0, i, 0, 0);
        Tensor<float>& b = ps.get("cfim.unify_ir.bias");
        for (int64_t o = 1; o < 4; ++o) b.data()[o] = b.data()[0];
    }
    tie("unify_ir.weight", "unify_vi.weight");
    tie("unify_ir.bias", "unify_vi.bias");
    tie("spatial_ir.weight", "spatial_vi.weight");
    tie("spatial_ir.bias", "spatial_vi.bias");
    tie("chan_ir.weight", "chan_vi.weight");
    tie("chan_ir.bias", "chan_vi.bias");
    Tensor<float> x = Tensor<float>::zeros({1, 2, 6, 6});
    Rng xr(226);
    for (int64_t c = 0; c < 2; ++c) {
        const float v = static_cast<float>(xr.uniform(-1, 1));
        for (int64_t h = 0; h < 6; ++h)
            for (int64_t w = 0; w < 6; ++w) x.at(0, c, h, w) = v;
    }
    Tensor<float> fused = cfim(x, x).fused;
    Tensor<float> ir_out = slice_channels(fused, 0, 4);
    Tensor<float> vi_out = slice_channels(fused, 4, 8);
    for (size_t i = 0; i < ir_out.data().size(); ++i)
        CHECK(ir_out.data()[i] == doctest::Approx(vi_out.data()[i]).epsilon(1e-5));
}

TEST_CASE("cdsm: zero weights make the exact identity, any depth keeps shape") {
    Rng rng(231);
    for (int64_t depth : {1, 2, 4}) {
        ParamStore<float> ps;
        Cdsm<float> cdsm(ps, "cdsm", 4, depth, rng);
        Tensor<float> x = rand_t({1, 4, 6, 5}, 232 + depth);
        CHECK(cdsm(x).shape() == x.shape());
        for (auto& [name, t] : ps) std::fill(t.data().begin(), t.data().end(), 0.0f);
        Tensor<float> y = cdsm(x);
        for (size_t i = 0; i < x.data().size(); ++i)
            CHECK(std::abs(y.data()[i] - x.data()[i]) < 1e-6f);
    }
    ParamStore<float> ps;
    CHECK_THROWS_AS(Cdsm<float>(ps, "cdsm", 4, 0, rng), ConfigError);
}

TEST_CASE("weather gate: attenuating gate, embedding-sensitive") {
    ParamStore<float> ps;
    Rng rng(241);
    WeatherGate<float> gate(ps, "gate", 6, rng);
    Tensor<float> x = rand_t({1, 6, 4, 4}, 242, 0.2, 1.0);
    WeatherEmbedding<float> e1{rand_t({1, 48, 1, 1}, 243)};
    WeatherEmbedding<float> e2{rand_t({1, 48, 1, 1}, 244)};
    Tensor<float> y1 = gate(x, e1);
    CHECK(y1.shape() == x.shape());
    // w in (0,1): output strictly between 0 and the input
    for (size_t i = 0; i < y1.data().size(); ++i) {
        CHECK(y1.data()[i] > 0.0f);
        CHECK(y1.data()[i] < x.data()[i]);
    }
    // different embeddings change the output
    Tensor<float> y2 = gate(x, e2);
    double diff = 0;
    for (size_t i = 0; i < y1.data().size(); ++i)
        diff = std::max(diff, static_cast<double>(std::abs(y1.data()[i] - y2.data()[i])));
    CHECK(diff > 1e-6);
    // wrong embedding width
    WeatherEmbedding<float> bad{rand_t({1, 24, 1, 1}, 245)};
    CHECK_THROWS_AS(gate(x, bad), ConfigError);
}

TEST_CASE("weather gate: gradient reaches both the features and the embedding") {
    ParamStore<float> ps;
    Rng rng(251);
    WeatherGate<float> gate(ps, "gate", 4, rng);
    Tensor<float> x = rand_t({1, 4, 3, 3}, 252);
    x.set_requires_grad(true);
    WeatherEmbedding<float> emb{rand_t({1, 48, 1, 1}, 253)};
    emb.vec.set_requires_grad(true);
    backward(sum(gate(x, emb)));
    auto has_nonzero = [](const std::vector<float>& g) {
        for (float v : g)
            if (v != 0.0f) return true;
        return false;
    };
    CHECK(has_nonzero(x.grad()));
    CHECK(has_nonzero(emb.vec.grad()));
}
