#pragma once

// Deterministic random number generation: splitmix64 for seeding and stream
// derivation, xoshiro256** as the workhorse generator, and a Vose alias
// table for O(1) discrete sampling.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "polemb/common.hpp"

namespace polemb {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent substream seed from (seed, stream); used to give
// each walk / tree / fold its own generator so parallel order cannot change
// the result.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (stream + 0x9e3779b97f4a7c15ULL) * 0xff51afd7ed558ccdULL;
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b >> 1);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed = 1) {
        std::uint64_t sm = seed;
        for (auto& w : state_) w = splitmix64(sm);
    }

    std::uint64_t next() {
        auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n); rejection sampling keeps it unbiased.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % n;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_[4]{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Vose alias method. probabilities() exposes the exact normalized
// distribution the sampler realizes.
class AliasTable {
public:
    AliasTable() = default;

    explicit AliasTable(std::span<const double> weights) {
        const std::size_t n = weights.size();
        if (n == 0) throw ConfigError("alias table needs at least one weight");
        double sum = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw ConfigError("alias table weights must be non-negative");
            sum += w;
        }
        if (!(sum > 0.0)) throw ConfigError("alias table weights sum to zero");
        norm_.resize(n);
        for (std::size_t i = 0; i < n; ++i) norm_[i] = weights[i] / sum;

        prob_.assign(n, 0.0);
        alias_.assign(n, 0);
        std::vector<double> scaled(n);
        std::vector<std::uint32_t> small, large;
        small.reserve(n);
        large.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            scaled[i] = norm_[i] * static_cast<double>(n);
            if (scaled[i] < 1.0)
                small.push_back(static_cast<std::uint32_t>(i));
            else
                large.push_back(static_cast<std::uint32_t>(i));
        }
        while (!small.empty() && !large.empty()) {
            const std::uint32_t s = small.back();
            const std::uint32_t l = large.back();
            small.pop_back();
            large.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if (scaled[l] < 1.0)
                small.push_back(l);
            else
                large.push_back(l);
        }
        while (!large.empty()) {
            prob_[large.back()] = 1.0;
            large.pop_back();
        }
        while (!small.empty()) {
            prob_[small.back()] = 1.0;
            small.pop_back();
        }
    }

    std::uint32_t sample(Rng& rng) const {
        const auto i = static_cast<std::uint32_t>(rng.below(prob_.size()));
        return rng.uniform() < prob_[i] ? i : alias_[i];
    }

    const std::vector<double>& probabilities() const { return norm_; }
    std::size_t size() const { return prob_.size(); }
    bool empty() const { return prob_.empty(); }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
    std::vector<double> norm_;
};

}  // namespace polemb
