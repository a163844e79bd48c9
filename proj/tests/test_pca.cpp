#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

#include "helpers.hpp"
#include "oracles.hpp"
#include "polemb/pca.hpp"
#include "polemb/rng.hpp"

using namespace polemb;

namespace {

// Anisotropic cloud with well-separated covariance spectrum: independent
// normals at very different scales pushed through a fixed dense mix.
std::vector<double> spread_cloud(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> mix(d * d);
    for (auto& v : mix) v = rng.uniform(-1.0, 1.0);
    std::vector<double> scales(d);
    for (std::size_t j = 0; j < d; ++j) scales[j] = std::pow(0.45, static_cast<double>(j)) * 5.0;
    std::vector<double> x(n * d, 0.0);
    std::vector<double> latent(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) latent[j] = rng.normal() * scales[j];
        for (std::size_t j = 0; j < d; ++j) {
            double s = 1.0 + 0.1 * static_cast<double>(j);  // nonzero mean
            for (std::size_t k = 0; k < d; ++k) s += mix[j * d + k] * latent[k];
            x[i * d + j] = s;
        }
    }
    return x;
}

// The fitted components fix their sign by making the largest-|loading|
// coordinate positive; align a reference vector the same way.
void apply_sign_convention(std::vector<double>& v) {
    std::size_t arg = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > best) {
            best = std::abs(v[i]);
            arg = i;
        }
    }
    if (v[arg] < 0.0)
        for (auto& c : v) c = -c;
}

double pair_dist(std::span<const double> x, std::size_t a, std::size_t b, std::size_t d) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double diff = x[a * d + j] - x[b * d + j];
        s += diff * diff;
    }
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("jacobi solves a known 2x2 system", "[pca]") {
    auto r = jacobi_eigensymmetric({2.0, 1.0, 1.0, 2.0}, 2);
    REQUIRE(r.values.size() == 2);
    CHECK(r.values[0] == Catch::Approx(3.0).epsilon(1e-12));
    CHECK(r.values[1] == Catch::Approx(1.0).epsilon(1e-12));
    const double inv = 1.0 / std::sqrt(2.0);
    // column 0 is (1,1)/sqrt(2) up to sign
    CHECK(std::abs(r.vectors[0 * 2 + 0]) == Catch::Approx(inv).epsilon(1e-10));
    CHECK(std::abs(r.vectors[1 * 2 + 0]) == Catch::Approx(inv).epsilon(1e-10));
    CHECK(r.vectors[0 * 2 + 0] * r.vectors[1 * 2 + 0] > 0.0);  // same sign
    CHECK(r.vectors[0 * 2 + 1] * r.vectors[1 * 2 + 1] < 0.0);  // opposite sign
}

TEST_CASE("jacobi eigenpairs satisfy A v = lambda v", "[pca]") {
    const std::size_t d = 5;
    Rng rng(17);
    std::vector<double> a(d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            const double v = rng.uniform(-2.0, 2.0);
            a[i * d + j] = v;
            a[j * d + i] = v;
        }
    auto r = jacobi_eigensymmetric(a, d);
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t i = 0; i < d; ++i) {
            double av = 0.0;
            for (std::size_t j = 0; j < d; ++j) av += a[i * d + j] * r.vectors[j * d + k];
            CHECK(av == Catch::Approx(r.values[k] * r.vectors[i * d + k]).margin(1e-9));
        }
        // unit norm
        double nrm = 0.0;
        for (std::size_t i = 0; i < d; ++i) nrm += r.vectors[i * d + k] * r.vectors[i * d + k];
        CHECK(nrm == Catch::Approx(1.0).epsilon(1e-10));
    }
    // descending order
    for (std::size_t k = 1; k < d; ++k) CHECK(r.values[k - 1] >= r.values[k]);
}

TEST_CASE("pca matches the reference decomposition", "[pca]") {
    const std::size_t n = 60, d = 6;
    const auto x = spread_cloud(n, d, 91);
    auto m = pca_fit(x, n, d, d);
    auto ref = oracle::pca_reference(x, n, d);

    // Guard: the comparison below needs a well-separated spectrum.
    for (std::size_t k = 1; k < d; ++k)
        REQUIRE(ref.eig.values[k - 1] - ref.eig.values[k] > 1e-3 * std::abs(ref.eig.values[0]));

    for (std::size_t j = 0; j < d; ++j)
        CHECK(m.mean[j] == Catch::Approx(ref.mean[j]).margin(1e-12));
    for (std::size_t k = 0; k < d; ++k) {
        CHECK(std::abs(m.explained_variance[k] - std::max(ref.eig.values[k], 0.0)) <
              1e-8 * std::max(1.0, std::abs(ref.eig.values[0])));
        auto want = ref.eig.vecs[k];
        apply_sign_convention(want);
        for (std::size_t i = 0; i < d; ++i)
            CHECK(std::abs(m.components[k * d + i] - want[i]) < 1e-8);
    }
}

TEST_CASE("explained variance ratios are a sane partition", "[pca]") {
    const std::size_t n = 50, d = 5;
    const auto x = spread_cloud(n, d, 7);
    auto m = pca_fit(x, n, d, d);
    double sum = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        CHECK(m.explained_variance_ratio[k] >= 0.0);
        CHECK(m.explained_variance_ratio[k] <= 1.0 + 1e-12);
        sum += m.explained_variance_ratio[k];
        if (k > 0) CHECK(m.explained_variance[k] <= m.explained_variance[k - 1] + 1e-12);
    }
    CHECK(sum == Catch::Approx(1.0).epsilon(1e-8));  // full-rank request
}

TEST_CASE("full-dimensional pca is a rigid rotation", "[pca]") {
    const std::size_t n = 30, d = 4;
    const auto x = spread_cloud(n, d, 23);
    auto m = pca_fit(x, n, d, d);
    auto t = pca_transform(m, x, n);
    for (std::size_t a = 0; a < n; a += 3)
        for (std::size_t b = a + 1; b < n; b += 5)
            CHECK(pair_dist(t, a, b, d) == Catch::Approx(pair_dist(x, a, b, d)).epsilon(1e-9));
}

TEST_CASE("rank-2 data survives projection to 2 components", "[pca]") {
    // Rows live on a 2-plane inside R^5.
    const std::size_t n = 40, d = 5;
    Rng rng(5);
    std::vector<double> x(n * d);
    const double b1[d] = {1.0, 0.5, -0.25, 0.0, 2.0};
    const double b2[d] = {0.0, 1.0, 1.0, -0.5, 0.25};
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.normal() * 3.0, v = rng.normal();
        for (std::size_t j = 0; j < d; ++j) x[i * d + j] = 4.0 + u * b1[j] + v * b2[j];
    }
    auto m = pca_fit(x, n, d, 2);
    CHECK(m.explained_variance_ratio[0] + m.explained_variance_ratio[1] ==
          Catch::Approx(1.0).epsilon(1e-9));
    auto t = pca_transform(m, x, n);
    for (std::size_t a = 0; a < n; a += 4)
        for (std::size_t b = a + 1; b < n; b += 7)
            CHECK(pair_dist(t, a, b, 2) == Catch::Approx(pair_dist(x, a, b, d)).epsilon(1e-7));
}

TEST_CASE("transforming the mean row gives the origin", "[pca]") {
    const std::size_t n = 25, d = 3;
    const auto x = spread_cloud(n, d, 3);
    auto m = pca_fit(x, n, d, 2);
    auto t = pca_transform(m, m.mean, 1);
    CHECK(std::abs(t[0]) < 1e-12);
    CHECK(std::abs(t[1]) < 1e-12);
}

TEST_CASE("rank deficiency is reported, not fatal", "[pca]") {
    // A constant coordinate forces a zero-variance direction.
    const std::size_t n = 12, d = 3;
    Rng rng(2);
    std::vector<double> x(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        x[i * d + 0] = rng.normal();
        x[i * d + 1] = 7.0;
        x[i * d + 2] = rng.normal() * 0.5;
    }
    auto m = pca_fit(x, n, d, 3);
    REQUIRE(m.warnings.size() == 1);
    CHECK(m.warnings[0].find("zero variance") != std::string::npos);
    CHECK(pca_fit(x, n, d, 2).warnings.empty());
}

TEST_CASE("pca rejects unusable shapes", "[pca]") {
    std::vector<double> one_row{1.0, 2.0};
    CHECK_THROWS_AS(pca_fit(one_row, 1, 2, 1), ConfigError);
    std::vector<double> x(10 * 3, 0.5);
    CHECK_THROWS_AS(pca_fit(x, 10, 3, 0), ConfigError);
    CHECK_THROWS_AS(pca_fit(x, 10, 3, 4), ConfigError);
}
