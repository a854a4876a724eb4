#include <doctest.h>

#include <cmath>

#include "cawm/nn.hpp"
#include "cawm/optim.hpp"
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

TEST_CASE("conv2d: scaled identity kernel") {
    Tensor<float> x = Tensor<float>::filled({1, 1, 3, 3}, 1.0f);
    Tensor<float> w = Tensor<float>::filled({1, 1, 1, 1}, 2.0f);
    Tensor<float> y = conv2d(x, w, 1, 0);
    CHECK(y.shape() == Shape{1, 1, 3, 3});
    for (float v : y.data()) CHECK(v == 2.0f);
}

TEST_CASE("conv2d: full-support sum kernel") {
    Tensor<float> x = Tensor<float>::from({1, 1, 2, 2}, {1, 2, 3, 4});
    Tensor<float> w = Tensor<float>::filled({1, 1, 2, 2}, 1.0f);
    Tensor<float> y = conv2d(x, w, 1, 0);
    CHECK(y.shape() == Shape{1, 1, 1, 1});
    CHECK(y.item() == 10.0f);
}

TEST_CASE("conv2d linearity in the input") {
    Tensor<float> x = rand_t({1, 2, 5, 5}, 41);
    Tensor<float> y = rand_t({1, 2, 5, 5}, 42);
    Tensor<float> w = rand_t({3, 2, 3, 3}, 43);
    const float a = 0.7f, b = -1.3f;
    Tensor<float> lhs = conv2d(add(scale(x, a), scale(y, b)), w, 1, 1);
    Tensor<float> rhs = add(scale(conv2d(x, w, 1, 1), a), scale(conv2d(y, w, 1, 1), b));
    for (size_t i = 0; i < lhs.data().size(); ++i)
        CHECK(lhs.data()[i] == doctest::Approx(rhs.data()[i]).epsilon(1e-5));
}

TEST_CASE("conv2d strided output uses floor semantics") {
    Tensor<float> w = rand_t({4, 3, 3, 3}, 44);
    CHECK(conv2d(rand_t({1, 3, 16, 16}, 45), w, 2, 1).shape() == Shape{1, 4, 8, 8});
    CHECK(conv2d(rand_t({1, 3, 5, 5}, 46), w, 2, 1).shape() == Shape{1, 4, 3, 3});
}

TEST_CASE("conv2d rejects channel mismatch") {
    Tensor<float> x = rand_t({1, 2, 4, 4}, 47);
    Tensor<float> w = rand_t({1, 3, 3, 3}, 48);
    CHECK_THROWS_AS(conv2d(x, w, 1, 1), ConfigError);
}

TEST_CASE("conv_transpose2d doubles spatial size with k=2 s=2") {
    Tensor<float> x = rand_t({1, 2, 4, 4}, 51);
    Tensor<float> w = rand_t({2, 3, 2, 2}, 52);
    CHECK(conv_transpose2d(x, w, Tensor<float>{}, 2).shape() == Shape{1, 3, 8, 8});
}

TEST_CASE("pooling values") {
    Tensor<float> x = Tensor<float>::from({1, 1, 2, 2}, {1, 2, 3, 4});
    CHECK(global_avg_pool(x).item() == doctest::Approx(2.5));
    CHECK(global_max_pool(x).item() == 4.0f);
    Tensor<float> c = Tensor<float>::from({1, 3, 1, 1}, {1, 5, 3});
    CHECK(max_pool_channelwise(c).item() == 5.0f);
    CHECK(avg_pool_channelwise(c).item() == doctest::Approx(3.0));
}

TEST_CASE("global_max_pool routes its gradient to the argmax cell") {
    Tensor<float> x = Tensor<float>::from({1, 1, 2, 2}, {1, 9, 3, 4}, true);
    backward(sum(global_max_pool(x)));
    CHECK(x.grad() == std::vector<float>{0, 1, 0, 0});
}

TEST_CASE("layer_norm on constant channels is zero") {
    Tensor<float> x = Tensor<float>::filled({1, 3, 2, 2}, 5.0f);
    Tensor<float> gamma = Tensor<float>::filled({1, 3, 1, 1}, 1.0f);
    Tensor<float> beta = Tensor<float>::zeros({1, 3, 1, 1});
    Tensor<float> y = layer_norm(x, gamma, beta);
    for (float v : y.data())
        CHECK(v == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("layer_norm matches the closed form for channels (1,3)") {
    Tensor<float> x = Tensor<float>::from({1, 2, 1, 1}, {1, 3});
    Tensor<float> gamma = Tensor<float>::filled({1, 2, 1, 1}, 1.0f);
    Tensor<float> beta = Tensor<float>::zeros({1, 2, 1, 1});
    Tensor<float> y = layer_norm(x, gamma, beta);
    // mean 2, var 1: normalized values are +-1/sqrt(1 + 1e-5)
    CHECK(y.data()[0] == doctest::Approx(-1.0).epsilon(1e-4));
    CHECK(y.data()[1] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("reflect_pad_to mirrors without repeating the edge") {
    Tensor<float> x = Tensor<float>::from({1, 1, 1, 3}, {1, 2, 3});
    Tensor<float> p = reflect_pad_to(x, 1, 5);
    CHECK(p.data() == std::vector<float>{1, 2, 3, 2, 1});
    CHECK(crop_to(p, 1, 3).data() == x.data());
}

TEST_CASE("adam: first step moves a unit-gradient scalar by exactly -lr") {
    ParamStore<float> ps;
    Tensor<float>& p = ps.add("p", Tensor<float>::scalar(1.0f));
    p.grad().assign(1, 1.0f);
    AdamState<float> st;
    st.lr = 0.1f;
    adam_step(ps, st);
    // bias-corrected first step: mhat = vhat = g, update = lr * g/(|g|+eps)
    CHECK(p.item() == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(p.grad().empty());  // grads zeroed after the step
}

TEST_CASE("adam: zero gradient leaves the parameter unchanged") {
    ParamStore<float> ps;
    Tensor<float>& p = ps.add("p", Tensor<float>::scalar(2.5f));
    p.grad().assign(1, 0.0f);
    AdamState<float> st;
    adam_step(ps, st);
    CHECK(p.item() == 2.5f);
}

TEST_CASE("adam: 100 steps on p^2 from p=1 converge below 0.1") {
    ParamStore<float> ps;
    Tensor<float>& p = ps.add("p", Tensor<float>::scalar(1.0f));
    AdamState<float> st;
    st.lr = 0.1f;
    for (int i = 0; i < 100; ++i) {
        backward(mul(p, p));
        adam_step(ps, st);
    }
    CHECK(std::abs(p.item()) < 0.1f);
}

TEST_CASE("adam rejects parameters without gradients") {
    ParamStore<float> ps;
    ps.add("p", Tensor<float>::scalar(1.0f));
    AdamState<float> st;
    CHECK_THROWS_AS(adam_step(ps, st), UsageError);
}

TEST_CASE("param store preserves insertion order and rejects duplicates") {
    ParamStore<float> ps;
    ps.add("b.second", Tensor<float>::scalar(1.0f));
    ps.add("a.first", Tensor<float>::scalar(2.0f));
    auto it = ps.begin();
    CHECK(it->first == "b.second");
    CHECK((++it)->first == "a.first");
    CHECK_THROWS_AS(ps.add("a.first", Tensor<float>::scalar(0.0f)), ConfigError);
    CHECK_THROWS_AS(ps.get("missing"), UsageError);
    CHECK(ps.total_elements() == 2);
}
