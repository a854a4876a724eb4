#include <doctest.h>

#include <cmath>

#include "cawm/losses.hpp"
#include "cawm/random.hpp"

using namespace cawm;

namespace {

Tensor<float> rand_t(Shape s, uint64_t seed, double lo = 0, double hi = 1) {
    Rng rng(seed);
    Tensor<float> t = Tensor<float>::zeros(s);
    for (auto& v : t.data()) v = static_cast<float>(rng.uniform(lo, hi));
    return t;
}

// 3-channel gray image and its single-channel plane with identical values.
std::pair<Tensor<float>, Tensor<float>> gray_pair(Shape s, uint64_t seed) {
    Tensor<float> one = rand_t({s.b, 1, s.h, s.w}, seed);
    Tensor<float> three = Tensor<float>::zeros({s.b, 3, s.h, s.w});
    for (int64_t b = 0; b < s.b; ++b)
        for (int64_t c = 0; c < 3; ++c)
            for (int64_t h = 0; h < s.h; ++h)
                for (int64_t w = 0; w < s.w; ++w)
                    three.at(b, c, h, w) = one.at(b, 0, h, w);
    return {three, one};
}

}  // namespace

TEST_CASE("wavelet loss: zero at equality, 2|c| for a constant offset") {
    Tensor<float> vis = rand_t({1, 3, 8, 8}, 401, 0.0, 0.5);
    CHECK(wavelet_loss(vis, vis).item() == doctest::Approx(0.0));
    const float c = 0.25f;
    Tensor<float> fused = add_scalar(vis, c);
    // high-band terms vanish; the orthonormal Haar LL band scales the
    // constant by 2, so the loss is exactly 2|c|
    CHECK(wavelet_loss(fused, vis).item() == doctest::Approx(2.0 * c).epsilon(1e-5));
    CHECK_THROWS_AS(wavelet_loss(fused, rand_t({1, 3, 6, 6}, 402)), UsageError);
}

TEST_CASE("intensity loss matches the elementwise-max target") {
    Tensor<float> vis = Tensor<float>::filled({1, 3, 4, 4}, 0.2f);
    Tensor<float> ir = Tensor<float>::filled({1, 1, 4, 4}, 0.8f);
    CHECK(intensity_loss(Tensor<float>::filled({1, 3, 4, 4}, 0.8f), vis, ir).item() ==
          doctest::Approx(0.0));
    CHECK(intensity_loss(Tensor<float>::filled({1, 3, 4, 4}, 0.5f), vis, ir).item() ==
          doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("color loss: zero at equality and for any pair of gray images") {
    Tensor<float> vis = rand_t({1, 3, 6, 6}, 411);
    CHECK(color_loss(vis, vis).item() == doctest::Approx(0.0));
    // gray images have neutral chroma (Cb = Cr = 0.5) at every gray level
    auto [g1, u1] = gray_pair({1, 3, 6, 6}, 412);
    auto [g2, u2] = gray_pair({1, 3, 6, 6}, 413);
    CHECK(color_loss(g1, g2).item() == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("perceptual loss: zero at equality, deterministic at a fixed seed") {
    Tensor<float> vis = rand_t({1, 3, 32, 32}, 421);
    auto ex1 = make_random_pyramid_extractor<float>(42);
    CHECK(perceptual_loss(vis, vis, ex1).item() == doctest::Approx(0.0));

    Tensor<float> shifted = add_scalar(vis, 0.1f);
    const float l1 = perceptual_loss(shifted, vis, ex1).item();
    auto ex2 = make_random_pyramid_extractor<float>(42);  // rebuilt, same seed
    const float l2 = perceptual_loss(shifted, vis, ex2).item();
    CHECK(l1 == l2);  // bit-identical
    CHECK(l1 > 0.0f);
}

TEST_CASE("gradient loss: zero when the fused edge map matches the target") {
    // A zero infrared plane has a zero edge map everywhere (including the
    // zero-padded border), so the joint target reduces to the visible edges
    // and fused == vis drives the loss to exactly zero.
    Tensor<float> zero_i = Tensor<float>::zeros({1, 1, 6, 6});
    Tensor<float> flat_v = Tensor<float>::filled({1, 3, 6, 6}, 0.4f);
    CHECK(gradient_loss(flat_v, flat_v, zero_i).item() == doctest::Approx(0.0));
    Tensor<float> vis = rand_t({1, 3, 6, 6}, 431);
    CHECK(gradient_loss(vis, vis, zero_i).item() == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(gradient_loss(flat_v, vis, zero_i).item() > 0.0f);
}

TEST_CASE("sobel responds with the hand-computed kernel sum on a ramp") {
    // x(h,w) = w on a 3x3 patch: |gx| at the center is (1+2+1)*2 = 8, gy = 0
    Tensor<float> x = Tensor<float>::from({1, 1, 3, 3}, {0, 1, 2, 0, 1, 2, 0, 1, 2});
    Tensor<float> g = detail::sobel_magnitude(x);
    CHECK(g.at(0, 0, 1, 1) == doctest::Approx(8.0));
}

TEST_CASE("ssim: identity, symmetry, noise robustness, anti-correlation") {
    Tensor<float> x = rand_t({1, 1, 16, 16}, 441);
    CHECK(ssim(x, x).item() == doctest::Approx(1.0).epsilon(1e-6));

    Tensor<float> y = rand_t({1, 1, 16, 16}, 442);
    CHECK(ssim(x, y).item() == doctest::Approx(ssim(y, x).item()).epsilon(1e-7));

    Tensor<float> noisy = x.detach();
    Rng rng(443);
    for (auto& v : noisy.data()) v += static_cast<float>(rng.uniform(-1e-4, 1e-4));
    CHECK(ssim(x, noisy).item() > 0.999f);

    Tensor<float> board = Tensor<float>::zeros({1, 1, 16, 16});
    for (int64_t h = 0; h < 16; ++h)
        for (int64_t w = 0; w < 16; ++w) board.at(0, 0, h, w) = ((h + w) % 2) ? 1.0f : 0.0f;
    Tensor<float> inverted = add_scalar(scale(board, -1.0f), 1.0f);
    CHECK(ssim(board, inverted).item() < 0.0f);

    CHECK_THROWS_AS(ssim(rand_t({1, 1, 8, 8}, 444), rand_t({1, 1, 8, 8}, 445)),
                    UsageError);
}

TEST_CASE("total loss: zero at joint equality, report bookkeeping, alpha grad") {
    auto [vis, ir] = gray_pair({1, 3, 16, 16}, 451);
    auto extractor = make_random_pyramid_extractor<float>();
    Tensor<float> alpha = Tensor<float>::scalar(0.7f, true);

    auto [total0, rep0] = total_loss(vis, vis, ir, alpha, extractor);
    CHECK(rep0.total == doctest::Approx(0.0).epsilon(1e-6));

    Tensor<float> fused = rand_t({1, 3, 16, 16}, 452);
    auto [total, rep] = total_loss(fused, vis, ir, alpha, extractor);
    const double recomposed = rep.alpha * rep.wavelet + rep.color + rep.perceptual +
                              rep.gradient + rep.intensity + rep.ssim;
    CHECK(rep.total == doctest::Approx(recomposed).epsilon(1e-6));

    backward(total);
    REQUIRE(alpha.grad().size() == 1);
    // d total / d alpha is exactly the wavelet term
    CHECK(alpha.grad()[0] == doctest::Approx(rep.wavelet).epsilon(1e-6));

    CHECK_THROWS_AS(total_loss(fused, vis, ir, rand_t({1, 1, 2, 2}, 453), extractor),
                    UsageError);
}

TEST_CASE("every loss is nonnegative on random inputs") {
    Tensor<float> fused = rand_t({1, 3, 16, 16}, 461);
    Tensor<float> vis = rand_t({1, 3, 16, 16}, 462);
    Tensor<float> ir = rand_t({1, 1, 16, 16}, 463);
    auto extractor = make_random_pyramid_extractor<float>();
    CHECK(wavelet_loss(fused, vis).item() >= 0.0f);
    CHECK(intensity_loss(fused, vis, ir).item() >= 0.0f);
    CHECK(color_loss(fused, vis).item() >= 0.0f);
    CHECK(perceptual_loss(fused, vis, extractor).item() >= 0.0f);
    CHECK(gradient_loss(fused, vis, ir).item() >= 0.0f);
    CHECK(ssim_loss(fused, vis, ir).item() >= 0.0f);
}
