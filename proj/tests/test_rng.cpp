#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "polemb/rng.hpp"
#include "polemb/skipgram.hpp"

using namespace polemb;

TEST_CASE("splitmix64 matches the reference sequence", "[rng]") {
    // Reference outputs for state = 0 (Steele et al. test vector).
    std::uint64_t s = 0;
    CHECK(splitmix64(s) == 0xe220a8397b1dcdafULL);
    CHECK(splitmix64(s) == 0x6e789e6aa1b965f4ULL);
    CHECK(splitmix64(s) == 0x06c45d188009454fULL);
}

TEST_CASE("mix_seed separates streams", "[rng]") {
    const auto a = mix_seed(42, 0);
    const auto b = mix_seed(42, 1);
    const auto c = mix_seed(43, 0);
    CHECK(a != b);
    CHECK(a != c);
    CHECK(mix_seed(42, 0) == a);  // pure function
}

TEST_CASE("Rng is reproducible and seed-sensitive", "[rng]") {
    Rng r1(7), r2(7), r3(8);
    for (int i = 0; i < 100; ++i) {
        const auto v = r1.next();
        CHECK(v == r2.next());
        if (i == 0) CHECK(v != r3.next());
    }
}

TEST_CASE("uniform stays in [0,1) with a sane mean", "[rng]") {
    Rng rng(123);
    double sum = 0.0;
    constexpr int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    // sd of the mean is 1/sqrt(12 n) ~ 0.00065; allow 6 sigma.
    CHECK(std::abs(sum / n - 0.5) < 0.004);
}

TEST_CASE("uniform(lo,hi) respects its bounds", "[rng]") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform(-2.0, 3.0);
        REQUIRE(u >= -2.0);
        REQUIRE(u < 3.0);
    }
}

TEST_CASE("below(n) is unbiased across residues", "[rng]") {
    Rng rng(99);
    constexpr std::uint64_t n = 7;
    constexpr int draws = 140000;
    std::vector<int> counts(n, 0);
    for (int i = 0; i < draws; ++i) {
        const auto v = rng.below(n);
        REQUIRE(v < n);
        ++counts[v];
    }
    const double expect = static_cast<double>(draws) / n;
    for (auto c : counts)
        CHECK(std::abs(c - expect) < 6.0 * std::sqrt(expect));  // ~6 sigma Poisson band
    CHECK(rng.below(0) == 0);
    CHECK(rng.below(1) == 0);
}

TEST_CASE("normal has zero mean and unit variance", "[rng]") {
    Rng rng(2024);
    constexpr int n = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.015);
    CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("alias table realizes the exact normalized distribution", "[rng]") {
    const std::vector<double> w{1.0, 2.0, 3.0, 4.0};
    AliasTable t{std::span<const double>(w)};
    REQUIRE(t.size() == 4);
    const auto& p = t.probabilities();
    CHECK(p[0] == Catch::Approx(0.1).epsilon(1e-12));
    CHECK(p[1] == Catch::Approx(0.2).epsilon(1e-12));
    CHECK(p[2] == Catch::Approx(0.3).epsilon(1e-12));
    CHECK(p[3] == Catch::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("alias table sampling tracks its probabilities", "[rng]") {
    const std::vector<double> w{5.0, 1.0, 0.0, 4.0};
    AliasTable t{std::span<const double>(w)};
    Rng rng(31337);
    constexpr int draws = 200000;
    std::vector<int> counts(4, 0);
    for (int i = 0; i < draws; ++i) ++counts[t.sample(rng)];
    CHECK(counts[2] == 0);  // zero weight is never drawn
    for (std::size_t i = 0; i < 4; ++i) {
        const double expect = t.probabilities()[i] * draws;
        CHECK(std::abs(counts[i] - expect) <= 6.0 * std::sqrt(std::max(expect, 1.0)));
    }
}

TEST_CASE("alias table rejects bad weights", "[rng]") {
    const std::vector<double> none{};
    const std::vector<double> neg{1.0, -0.5};
    const std::vector<double> zero{0.0, 0.0};
    CHECK_THROWS_AS(AliasTable{std::span<const double>(none)}, ConfigError);
    CHECK_THROWS_AS(AliasTable{std::span<const double>(neg)}, ConfigError);
    CHECK_THROWS_AS(AliasTable{std::span<const double>(zero)}, ConfigError);
}

TEST_CASE("negative sampler applies the 3/4 power", "[rng]") {
    const std::vector<std::uint64_t> freq{3, 1};
    NegativeSampler s{std::span<const std::uint64_t>(freq)};
    const double w0 = std::pow(3.0, 0.75);
    const auto& p = s.table().probabilities();
    CHECK(p[0] == Catch::Approx(w0 / (w0 + 1.0)).epsilon(1e-12));
    CHECK(p[1] == Catch::Approx(1.0 / (w0 + 1.0)).epsilon(1e-12));
}

TEST_CASE("negative sampler avoids the positive index", "[rng]") {
    const std::vector<std::uint64_t> freq{10, 10, 10};
    NegativeSampler s{std::span<const std::uint64_t>(freq)};
    Rng rng(77);
    for (int i = 0; i < 2000; ++i) CHECK(s.sample(1, rng) != 1);
}
