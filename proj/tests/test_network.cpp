#include <doctest.h>

#include <cmath>

#include "cawm/losses.hpp"
#include "cawm/network.hpp"
#include "cawm/random.hpp"

using namespace cawm;

namespace {

Tensor<float> rand_t(Shape s, uint64_t seed, double lo = 0, double hi = 1) {
    Rng rng(seed);
    Tensor<float> t = Tensor<float>::zeros(s);
    for (auto& v : t.data()) v = static_cast<float>(rng.uniform(lo, hi));
    return t;
}

}  // namespace

TEST_CASE("net config validation") {
    CHECK_NOTHROW(NetConfig::tiny_preset().validate());
    CHECK_NOTHROW(NetConfig::paper_preset().validate());

    NetConfig bad = NetConfig::tiny_preset();
    bad.block_counts = {1, 1};  // even length
    bad.channel_schedule = {8, 8};
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = NetConfig::tiny_preset();
    bad.channel_schedule = {8, 16, 12};  // asymmetric
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = NetConfig::tiny_preset();
    bad.channel_schedule = {16, 8, 16};  // does not rise to a peak
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = NetConfig::tiny_preset();
    bad.embed_dim = 32;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("wssb preserves shape and maps zero to zero at default init") {
    ParamStore<float> ps;
    Rng rng(301);
    Wssb<float> block(ps, "w", 4, 2, 2, rng);
    WeatherEmbedding<float> emb{rand_t({1, 48, 1, 1}, 302, -1, 1)};

    Tensor<float> x = rand_t({1, 4, 6, 6}, 303, -1, 1);
    CHECK(block(x, emb).shape() == x.shape());

    // Zero input: biases are zero-initialized and the refinement/merge convs
    // start at zero, so the block output is exactly zero.
    Tensor<float> y = block(Tensor<float>::zeros({1, 4, 6, 6}), emb);
    for (float v : y.data()) CHECK(std::abs(v) < 1e-6f);
}

TEST_CASE("tiny network: forward range, shape, and full gradient coverage") {
    ParamStore<float> ps;
    Rng rng(311);
    CawmNet<float> net(ps, NetConfig::tiny_preset(), rng);
    Tensor<float> vi = rand_t({1, 3, 16, 16}, 312);
    Tensor<float> ir = rand_t({1, 1, 16, 16}, 313);
    {
        // At the near-identity default init the output head stays well away
        // from sigmoid saturation.
        Tensor<float> probe = net.forward(vi, ir);
        CHECK(probe.shape() == Shape{1, 3, 16, 16});
        for (float v : probe.data()) {
            CHECK(v > 0.0f);
            CHECK(v < 1.0f);
        }
    }
    // The refinement/merge convs start at zero, which blocks gradients to
    // everything upstream of them; randomize them so coverage is meaningful.
    for (auto& [name, t] : ps)
        if (name.find(".refine.weight") != std::string::npos ||
            name.find(".merge.weight") != std::string::npos)
            uniform_(t, -0.1f, 0.1f, rng);
    Tensor<float> fused = net.forward(vi, ir);
    CHECK(fused.shape() == Shape{1, 3, 16, 16});

    ParamStore<float> alpha_store;
    Tensor<float>& alpha = alpha_store.add("alpha", Tensor<float>::scalar(0.5f));
    auto extractor = make_random_pyramid_extractor<float>();
    auto [total, rep] = total_loss(fused, vi, ir, alpha, extractor);
    CHECK(std::isfinite(rep.total));
    backward(total);

    int64_t with_grad = 0, with_nonzero = 0, n = 0;
    for (auto& [name, p] : ps) {
        ++n;
        if (p.grad().size() == p.data().size()) ++with_grad;
        for (float g : p.grad())
            if (g != 0.0f) {
                ++with_nonzero;
                break;
            }
    }
    CHECK(with_grad == n);  // every parameter reachable
    CHECK(static_cast<double>(with_nonzero) >= 0.99 * static_cast<double>(n));
}

TEST_CASE("network forward validates its inputs") {
    ParamStore<float> ps;
    Rng rng(321);
    CawmNet<float> net(ps, NetConfig::tiny_preset(), rng);
    CHECK_THROWS_AS(net.forward(rand_t({1, 1, 16, 16}, 1), rand_t({1, 1, 16, 16}, 2)),
                    ConfigError);
    CHECK_THROWS_AS(net.forward(rand_t({1, 3, 16, 16}, 1), rand_t({1, 3, 16, 16}, 2)),
                    ConfigError);
    CHECK_THROWS_AS(net.forward(rand_t({1, 3, 16, 16}, 1), rand_t({1, 1, 8, 8}, 2)),
                    ConfigError);
    CHECK_THROWS_AS(net.forward(Tensor<float>::zeros({1, 3, 0, 0}),
                                Tensor<float>::zeros({1, 1, 0, 0})),
                    DegenerateInputError);
}

TEST_CASE("non-multiple spatial sizes are padded and cropped back") {
    ParamStore<float> ps;
    Rng rng(331);
    CawmNet<float> net(ps, NetConfig::tiny_preset(), rng);
    Tensor<float> vi = rand_t({1, 3, 18, 22}, 332);
    Tensor<float> ir = rand_t({1, 1, 18, 22}, 333);
    CHECK(net.forward(vi, ir).shape() == Shape{1, 3, 18, 22});
}
