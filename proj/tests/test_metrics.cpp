#include <doctest.h>

#include <cmath>

#include "cawm/degrade.hpp"
#include "cawm/metrics.hpp"
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

TEST_CASE("q_mi hits its self-similarity ceiling when fused copies the sources") {
    Tensor<float> vis = synth_clean_image(32, 32, 901);
    // fused == vis and ir == luminance-identical vis: both pairs are
    // self-similar, so the score equals twice the per-pair ceiling value.
    const double self_pair = metric_q_mi(vis, vis, vis) / 2.0;
    CHECK(self_pair > 0.0);
    CHECK(self_pair <= 1.0 + 1e-9);
    CHECK(metric_q_mi(vis, vis, vis) == doctest::Approx(2.0 * self_pair));
}

TEST_CASE("q_mi of independent noise stays far below the ceiling") {
    // The 256-bin joint histogram has a strong small-sample bias, so this
    // invariant needs enough pixels per bin to be meaningful.
    Tensor<float> vis = synth_clean_image(256, 256, 902);
    Tensor<float> ir = synth_ir_image(vis, 903);
    Tensor<float> noise = rand_t({1, 3, 256, 256}, 904);
    const double scored = metric_q_mi(noise, vis, ir);
    CHECK(scored >= 0.0);
    CHECK(scored < 0.10 * metric_q_mi(vis, vis, vis));
}

TEST_CASE("q_mi of a constant image is zero") {
    Tensor<float> flat = Tensor<float>::filled({1, 3, 16, 16}, 0.5f);
    Tensor<float> vis = rand_t({1, 3, 16, 16}, 905);
    Tensor<float> ir = rand_t({1, 1, 16, 16}, 906);
    CHECK(metric_q_mi(flat, vis, ir) == doctest::Approx(0.0));
}

TEST_CASE("q_abf is near one for a perfect edge copy and stays in [0,1]") {
    Tensor<float> vis = synth_clean_image(32, 32, 911);
    // ir constant: all gradient mass comes from vis, which fused reproduces
    Tensor<float> ir = Tensor<float>::filled({1, 1, 32, 32}, 0.5f);
    const double q = metric_q_abf(vis, vis, ir);
    CHECK(q == doctest::Approx(1.0).epsilon(0.05));

    Tensor<float> noise = rand_t({1, 3, 32, 32}, 912);
    const double qn = metric_q_abf(noise, vis, synth_ir_image(vis, 913));
    CHECK(qn >= 0.0);
    CHECK(qn <= 1.0);
}

TEST_CASE("q_abf of all-constant inputs is zero (no edges to preserve)") {
    Tensor<float> flat = Tensor<float>::filled({1, 3, 16, 16}, 0.3f);
    Tensor<float> flat1 = Tensor<float>::filled({1, 1, 16, 16}, 0.6f);
    CHECK(metric_q_abf(flat, flat, flat1) == doctest::Approx(0.0));
}

TEST_CASE("metric_ssim is one when fused matches both sources") {
    Tensor<float> gray1 = rand_t({1, 1, 16, 16}, 921);
    Tensor<float> gray3 = detail::repeat_channels3(gray1);
    CHECK(metric_ssim(gray3, gray3, gray1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("compute_metrics aggregates the three scores") {
    Tensor<float> vis = synth_clean_image(24, 24, 931);
    Tensor<float> ir = synth_ir_image(vis, 932);
    Tensor<float> fused = rand_t({1, 3, 24, 24}, 933);
    MetricReport r = compute_metrics(fused, vis, ir);
    CHECK(r.ssim == doctest::Approx(metric_ssim(fused, vis, ir)));
    CHECK(r.q_mi == doctest::Approx(metric_q_mi(fused, vis, ir)));
    CHECK(r.q_abf == doctest::Approx(metric_q_abf(fused, vis, ir)));
}
