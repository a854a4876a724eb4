#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "cawm/tensor.hpp"

namespace cawm {

// Seeded RNG shared by weight init and the synthetic data generators.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }
    double normal(double mean = 0.0, double stddev = 1.0) {
        return std::normal_distribution<double>(mean, stddev)(gen_);
    }
    int64_t uniform_int(int64_t lo, int64_t hi_inclusive) {
        return std::uniform_int_distribution<int64_t>(lo, hi_inclusive)(gen_);
    }
    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

// Kaiming-uniform, fan-in mode: U(-sqrt(6/fan_in), +sqrt(6/fan_in)).
template <typename T>
void kaiming_uniform_(Tensor<T>& t, int64_t fan_in, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (auto& v : t.data()) v = static_cast<T>(rng.uniform(-bound, bound));
}

template <typename T>
void uniform_(Tensor<T>& t, double lo, double hi, Rng& rng) {
    for (auto& v : t.data()) v = static_cast<T>(rng.uniform(lo, hi));
}

}  // namespace cawm
