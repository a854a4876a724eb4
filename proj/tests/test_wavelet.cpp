#include <doctest.h>

#include <cmath>

#include "cawm/random.hpp"
#include "cawm/wavelet.hpp"

using namespace cawm;

namespace {

Tensor<float> rand_t(Shape s, uint64_t seed, double lo = -1, double hi = 1) {
    Rng rng(seed);
    Tensor<float> t = Tensor<float>::zeros(s);
    for (auto& v : t.data()) v = static_cast<float>(rng.uniform(lo, hi));
    return t;
}

double sq_norm(const Tensor<float>& t) {
    double s = 0;
    for (float v : t.data()) s += static_cast<double>(v) * v;
    return s;
}

}  // namespace

TEST_CASE("dwt2 of a constant block kills the high-pass bands") {
    Tensor<float> x = Tensor<float>::filled({1, 1, 2, 2}, 1.0f);
    WaveletPack<float> p = dwt2(x);
    CHECK(p.ll.item() == doctest::Approx(2.0));
    CHECK(p.lh.item() == doctest::Approx(0.0));
    CHECK(p.hl.item() == doctest::Approx(0.0));
    CHECK(p.hh.item() == doctest::Approx(0.0));
}

TEST_CASE("dwt2 of an alternating-column block is pure HL") {
    Tensor<float> x = Tensor<float>::from({1, 1, 2, 2}, {1, -1, 1, -1});
    WaveletPack<float> p = dwt2(x);
    CHECK(p.hl.item() == doctest::Approx(2.0));
    CHECK(p.ll.item() == doctest::Approx(0.0));
    CHECK(p.lh.item() == doctest::Approx(0.0));
    CHECK(p.hh.item() == doctest::Approx(0.0));
}

TEST_CASE("orthonormality: energy is preserved on even dims") {
    Tensor<float> x = rand_t({1, 1, 8, 8}, 61);
    WaveletPack<float> p = dwt2(x);
    const double lhs = sq_norm(x);
    const double rhs = sq_norm(p.ll) + sq_norm(p.lh) + sq_norm(p.hl) + sq_norm(p.hh);
    CHECK(rhs == doctest::Approx(lhs).epsilon(1e-4));
}

TEST_CASE("round trip on even and odd shapes") {
    for (Shape s : {Shape{1, 3, 8, 8}, Shape{1, 1, 5, 5}, Shape{2, 2, 7, 10}}) {
        Tensor<float> x = rand_t(s, 62 + s.h);
        Tensor<float> r = idwt2(dwt2(x));
        REQUIRE(r.shape() == s);
        for (size_t i = 0; i < x.data().size(); ++i)
            CHECK(std::abs(r.data()[i] - x.data()[i]) < 1e-5f);
    }
}

TEST_CASE("dwt2 is linear") {
    Tensor<float> x = rand_t({1, 2, 6, 6}, 71);
    Tensor<float> y = rand_t({1, 2, 6, 6}, 72);
    const float a = 1.5f, b = -0.5f;
    WaveletPack<float> pc = dwt2(add(scale(x, a), scale(y, b)));
    WaveletPack<float> px = dwt2(x);
    WaveletPack<float> py = dwt2(y);
    auto check_band = [&](const Tensor<float>& c, const Tensor<float>& bx,
                          const Tensor<float>& by) {
        for (size_t i = 0; i < c.data().size(); ++i)
            CHECK(std::abs(c.data()[i] - (a * bx.data()[i] + b * by.data()[i])) < 1e-5f);
    };
    check_band(pc.ll, px.ll, py.ll);
    check_band(pc.lh, px.lh, py.lh);
    check_band(pc.hl, px.hl, py.hl);
    check_band(pc.hh, px.hh, py.hh);
}

TEST_CASE("idwt2 of a pure LL pack is a constant image") {
    WaveletPack<float> p;
    p.ll = Tensor<float>::filled({1, 1, 1, 1}, 2.0f);
    p.lh = Tensor<float>::zeros({1, 1, 1, 1});
    p.hl = Tensor<float>::zeros({1, 1, 1, 1});
    p.hh = Tensor<float>::zeros({1, 1, 1, 1});
    Tensor<float> x = idwt2(p);
    CHECK(x.shape() == Shape{1, 1, 2, 2});
    for (float v : x.data()) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("horizontal stripes land in LH, not HL") {
    Tensor<float> x = Tensor<float>::zeros({1, 1, 8, 8});
    for (int64_t h = 0; h < 8; ++h)
        for (int64_t w = 0; w < 8; ++w) x.at(0, 0, h, w) = (h % 2 == 0) ? 1.0f : -1.0f;
    WaveletPack<float> p = dwt2(x);
    const double lh = std::sqrt(sq_norm(p.lh));
    const double hl = std::sqrt(sq_norm(p.hl));
    CHECK(lh > 100.0 * (hl + 1e-12));
}

TEST_CASE("dwt2 rejects sub-2x2 inputs") {
    CHECK_THROWS_AS(dwt2(Tensor<float>::filled({1, 1, 1, 4}, 1.0f)),
                    DegenerateInputError);
}

TEST_CASE("idwt2 rejects inconsistent subband shapes") {
    WaveletPack<float> p;
    p.ll = Tensor<float>::zeros({1, 1, 2, 2});
    p.lh = Tensor<float>::zeros({1, 1, 2, 3});
    p.hl = Tensor<float>::zeros({1, 1, 2, 2});
    p.hh = Tensor<float>::zeros({1, 1, 2, 2});
    CHECK_THROWS_AS(idwt2(p), ConfigError);
}

TEST_CASE("dwt2/idwt2 gradients flow through the round trip") {
    Tensor<float> x = rand_t({1, 1, 5, 6}, 81);
    x.set_requires_grad(true);
    backward(sum(idwt2(dwt2(x))));
    REQUIRE(x.grad().size() == x.data().size());
    // round trip is the identity, so d sum / dx is all ones
    for (float g : x.grad()) CHECK(g == doctest::Approx(1.0).epsilon(1e-5));
}
