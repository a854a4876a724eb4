#pragma once

// Named parameter container and Adam with bias correction.

#include <string>
#include <unordered_map>
#include <vector>

#include "cawm/tensor.hpp"

namespace cawm {

// Ordered name -> tensor map; iteration follows insertion order so that
// optimizer sweeps and checkpoints are deterministic.
template <typename T>
class ParamStore {
public:
    Tensor<T>& add(const std::string& name, Tensor<T> t) {
        if (index_.count(name)) throw ConfigError("duplicate parameter name: " + name);
        t.set_requires_grad(true);
        index_[name] = entries_.size();
        entries_.push_back({name, std::move(t)});
        return entries_.back().second;
    }

    Tensor<T>& get(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw UsageError("unknown parameter: " + name);
        return entries_[it->second].second;
    }
    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    size_t size() const { return entries_.size(); }
    int64_t total_elements() const {
        int64_t n = 0;
        for (const auto& [name, t] : entries_) n += t.numel();
        return n;
    }

    auto begin() { return entries_.begin(); }
    auto end() { return entries_.end(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    void zero_grads() {
        for (auto& [name, t] : entries_) t.zero_grad();
    }

private:
    std::vector<std::pair<std::string, Tensor<T>>> entries_;
    std::unordered_map<std::string, size_t> index_;
};

template <typename T>
struct AdamState {
    T lr = T(1e-4);
    T beta1 = T(0.9);
    T beta2 = T(0.999);
    T eps = T(1e-8);
    int64_t step = 0;
    // Moment buffers keyed like the ParamStore, created on first step.
    std::unordered_map<std::string, std::vector<T>> m, v;
};

// One Adam update over every parameter; grads are zeroed afterward.
template <typename T>
void adam_step(ParamStore<T>& params, AdamState<T>& state) {
    for (auto& [name, p] : params)
        if (p.grad().size() != p.data().size())
            throw UsageError("adam_step: parameter '" + name + "' has no gradient");
    state.step += 1;
    const T bc1 = T(1) - std::pow(state.beta1, static_cast<T>(state.step));
    const T bc2 = T(1) - std::pow(state.beta2, static_cast<T>(state.step));
    for (auto& [name, p] : params) {
        auto& m = state.m[name];
        auto& v = state.v[name];
        if (m.size() != p.data().size()) m.assign(p.data().size(), T(0));
        if (v.size() != p.data().size()) v.assign(p.data().size(), T(0));
        auto& d = p.data();
        const auto& g = p.grad();
        for (size_t i = 0; i < d.size(); ++i) {
            m[i] = state.beta1 * m[i] + (T(1) - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (T(1) - state.beta2) * g[i] * g[i];
            const T mhat = m[i] / bc1;
            const T vhat = v[i] / bc2;
            d[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
    params.zero_grads();
}

}  // namespace cawm
