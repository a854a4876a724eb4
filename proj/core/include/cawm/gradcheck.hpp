#pragma once

// Central finite-difference gradient verification. Probes run in double
// precision with h = 1e-3; an element passes when
//   |analytic - numeric| / max(|analytic|, |numeric|, 1) < tol.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cawm/random.hpp"
#include "cawm/tensor.hpp"

namespace cawm {

struct GradCheckResult {
    bool ok = true;
    double max_rel_err = 0.0;
    int64_t probes = 0;
    std::string worst;  // "tensor_name[flat_index]" of the largest error
};

// `forward` must rebuild the graph from the current contents of `params`
// and return a scalar loss. Each tensor is probed at up to
// `max_probes_per_tensor` seeded element positions.
inline GradCheckResult gradcheck(
    const std::function<Tensor<double>()>& forward,
    const std::vector<std::pair<std::string, Tensor<double>>>& params,
    double h = 1e-3, double tol = 1e-3, int64_t max_probes_per_tensor = 8,
    uint64_t seed = 1234) {
    for (const auto& [name, p] : params)
        if (!p.requires_grad())
            throw UsageError("gradcheck: parameter '" + name +
                             "' does not require grad");
    Tensor<double> loss = forward();
    if (loss.numel() != 1) throw UsageError("gradcheck: forward must return a scalar");
    backward(loss);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const auto& [name, p] : params) analytic.push_back(p.grad());

    GradCheckResult res;
    Rng rng(seed);
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Tensor<double> p = params[pi].second;
        const int64_t n = p.numel();
        std::vector<int64_t> idx;
        if (n <= max_probes_per_tensor) {
            for (int64_t i = 0; i < n; ++i) idx.push_back(i);
        } else {
            for (int64_t k = 0; k < max_probes_per_tensor; ++k)
                idx.push_back(rng.uniform_int(0, n - 1));
        }
        for (int64_t i : idx) {
            const double orig = p.data()[static_cast<size_t>(i)];
            p.data()[static_cast<size_t>(i)] = orig + h;
            const double fp = forward().item();
            p.data()[static_cast<size_t>(i)] = orig - h;
            const double fm = forward().item();
            p.data()[static_cast<size_t>(i)] = orig;
            const double numeric = (fp - fm) / (2.0 * h);
            const double a = analytic[pi][static_cast<size_t>(i)];
            const double denom = std::max({std::abs(a), std::abs(numeric), 1.0});
            const double rel = std::abs(a - numeric) / denom;
            ++res.probes;
            if (rel > res.max_rel_err) {
                res.max_rel_err = rel;
                res.worst = params[pi].first + "[" + std::to_string(i) + "]";
            }
            if (rel >= tol) res.ok = false;
        }
    }
    return res;
}

}  // namespace cawm
