#include <doctest.h>

#include <cmath>

#include "cawm/degrade.hpp"
#include "cawm/wavelet.hpp"

using namespace cawm;

namespace {

double max_abs_diff(const Tensor<float>& a, const Tensor<float>& b) {
    double m = 0;
    for (size_t i = 0; i < a.data().size(); ++i)
        m = std::max(m, static_cast<double>(std::abs(a.data()[i] - b.data()[i])));
    return m;
}

double mean_val(const Tensor<float>& t) {
    double s = 0;
    for (float v : t.data()) s += v;
    return s / static_cast<double>(t.data().size());
}

}  // namespace

TEST_CASE("severity zero is the exact identity") {
    Tensor<float> img = synth_clean_image(24, 24, 501);
    CHECK(max_abs_diff(apply_rain(img, 0.0, 7), img) == 0.0);
    CHECK(max_abs_diff(apply_snow(img, 0.0, 7), img) == 0.0);
    DegradationSpec spec;
    spec.kinds = {WeatherKind::Haze, WeatherKind::Rain, WeatherKind::Snow};
    spec.severities = {0.0, 0.0, 0.0};
    spec.seed = 7;
    CHECK(max_abs_diff(apply_compound(img, spec), img) == 0.0);
}

TEST_CASE("haze with a zero depth field is the exact identity") {
    Tensor<float> img = synth_clean_image(16, 16, 502);
    std::vector<double> depth(16 * 16, 0.0);
    CHECK(max_abs_diff(apply_haze_with_depth(img, 0.8, depth), img) == 0.0);
    CHECK_THROWS_AS(apply_haze_with_depth(img, 0.5, std::vector<double>(5, 0.1)),
                    UsageError);
}

TEST_CASE("every generator is deterministic per seed") {
    Tensor<float> img = synth_clean_image(24, 24, 503);
    CHECK(max_abs_diff(apply_rain(img, 0.6, 11), apply_rain(img, 0.6, 11)) == 0.0);
    CHECK(max_abs_diff(apply_snow(img, 0.6, 11), apply_snow(img, 0.6, 11)) == 0.0);
    CHECK(max_abs_diff(apply_haze(img, 0.6), apply_haze(img, 0.6)) == 0.0);
    // different seeds do change the precipitation pattern
    CHECK(max_abs_diff(apply_rain(img, 0.6, 11), apply_rain(img, 0.6, 12)) > 0.0);
}

TEST_CASE("haze brightens a dark scene monotonically with severity") {
    Tensor<float> dark = Tensor<float>::filled({1, 3, 16, 16}, 0.1f);
    double prev = mean_val(dark);
    for (double sv : {0.2, 0.4, 0.6, 0.8, 1.0}) {
        const double cur = mean_val(apply_haze(dark, sv));
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("all outputs stay inside [0,1]") {
    Tensor<float> img = synth_clean_image(20, 20, 504);
    for (const Tensor<float>& out :
         {apply_haze(img, 1.0), apply_rain(img, 1.0, 3), apply_snow(img, 1.0, 3)})
        for (float v : out.data()) {
            CHECK(v >= 0.0f);
            CHECK(v <= 1.0f);
        }
}

TEST_CASE("compound with a single kind matches the standalone generator") {
    Tensor<float> img = synth_clean_image(24, 24, 505);
    DegradationSpec spec;
    spec.kinds = {WeatherKind::Rain};
    spec.severities = {0.7};
    spec.seed = 40;
    // the rain stage always draws from seed+1, present or not the others
    CHECK(max_abs_diff(apply_compound(img, spec), apply_rain(img, 0.7, 41)) == 0.0);
}

TEST_CASE("degradation spec validation") {
    DegradationSpec spec;
    CHECK_THROWS_AS(spec.validate(), UsageError);  // no kinds
    spec.kinds = {WeatherKind::Haze};
    spec.severities = {};
    CHECK_THROWS_AS(spec.validate(), UsageError);  // length mismatch
    spec.severities = {1.5};
    CHECK_THROWS_AS(spec.validate(), UsageError);  // out of range
    spec.severities = {0.5};
    CHECK_NOTHROW(spec.validate());
    CHECK_THROWS_AS(weather_kind_from_string("sleet"), UsageError);
    CHECK(weather_kind_from_string("haze") == WeatherKind::Haze);
}

TEST_CASE("synthetic scene and infrared generators: shape, range, determinism") {
    Tensor<float> a = synth_clean_image(32, 24, 506);
    CHECK(a.shape() == Shape{1, 3, 32, 24});
    CHECK(max_abs_diff(a, synth_clean_image(32, 24, 506)) == 0.0);
    for (float v : a.data()) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
    Tensor<float> ir = synth_ir_image(a, 507);
    CHECK(ir.shape() == Shape{1, 1, 32, 24});
    CHECK(max_abs_diff(ir, synth_ir_image(a, 507)) == 0.0);
    CHECK_THROWS_AS(synth_ir_image(ir, 508), UsageError);
}

TEST_CASE("precipitation residuals are band-limited to the high subbands") {
    Tensor<float> img = synth_clean_image(32, 32, 509);
    Tensor<float> rainy = apply_rain(img, 0.8, 21);
    Tensor<float> residual = sub(rainy, img);
    WaveletPack<float> p = dwt2(residual);
    auto energy = [](const Tensor<float>& t) {
        double s = 0;
        for (float v : t.data()) s += static_cast<double>(v) * v;
        return s;
    };
    const double high = energy(p.lh) + energy(p.hl) + energy(p.hh);
    const double total = high + energy(p.ll);
    REQUIRE(total > 0.0);
    CHECK(high / total > 0.5);
}
