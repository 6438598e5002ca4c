#pragma once

#include <algorithm>
#include <cstdint>
#include <string_view>
#include <vector>

#include "rbs/hash.hpp"

namespace rbs {

// Deterministic counter-mode PRF stream over the system hash. Every source of
// randomness in a scenario is one of these, forked from the scenario seed by a
// domain label, so adding a consumer never perturbs another's draws.
class PrfStream {
public:
    explicit PrfStream(uint64_t seed, std::string_view label = "root");
    explicit PrfStream(const Hash256& key) : key_(key) {}

    PrfStream fork(std::string_view label) const;

    uint64_t next_u64();
    // Uniform in [0, n). n must be > 0.
    uint64_t uniform(uint64_t n);
    // Uniform in [0, 1).
    double next_double();
    // Exponential with the given mean (for Poisson arrival gaps).
    double exponential(double mean);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    void refill();
    Hash256 key_{};
    uint64_t counter_ = 0;
    Hash256 block_{};
    unsigned used_ = 4;  // u64s consumed from block_
};

}  // namespace rbs
