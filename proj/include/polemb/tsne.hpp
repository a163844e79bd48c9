#pragma once

// Exact t-SNE (no tree approximation — reduction inputs here are a few
// hundred points). Gaussian input affinities with a per-point bandwidth
// found by binary search on the entropy target, Student-t output kernel,
// gradient descent with momentum, per-coordinate gains, and an early
// exaggeration phase.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "polemb/common.hpp"
#include "polemb/rng.hpp"

namespace polemb {

struct TsneConfig {
    std::size_t out_dim = 2;
    double perplexity = 30.0;
    int iterations = 1000;
    double learning_rate = 200.0;
    double early_exaggeration = 12.0;
    int exaggeration_iters = 250;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    int momentum_switch = 250;
    double entropy_tol = 1e-6;  // on natural-log entropy
    std::uint64_t seed = 1;

    void validate() const {
        if (out_dim < 1) throw ConfigError("out_dim must be >= 1");
        if (!(perplexity > 0.0)) throw ConfigError("perplexity must be > 0");
        if (iterations < 1) throw ConfigError("iterations must be >= 1");
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    }
};

struct TsneResult {
    std::vector<double> y;  // n * out_dim row-major
    std::vector<double> kl_history;
    std::vector<std::string> warnings;
};

// Squared euclidean distances, n*n row-major.
inline std::vector<double> pairwise_sqdist(std::span<const double> x, std::size_t n,
                                           std::size_t d) {
    std::vector<double> d2(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = x[i * d + k] - x[j * d + k];
                s += diff * diff;
            }
            d2[i * n + j] = s;
            d2[j * n + i] = s;
        }
    return d2;
}

// Conditional distribution P(.|i) over the other points: binary-searches
// the precision beta so that the Shannon entropy (nats) hits
// log(perplexity) within tol. Writes the row into p (length n, p[i] = 0).
// Returns the beta it settled on.
inline double tsne_conditional(std::span<const double> row_d2, std::size_t i, double perplexity,
                               std::span<double> p, double tol = 1e-6) {
    const std::size_t n = row_d2.size();
    const double target = std::log(perplexity);
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
        if (j != i) dmin = std::min(dmin, row_d2[j]);

    for (int it = 0; it < 200; ++it) {
        // entropy and normalizer at this beta, shifted by the min distance
        double sum = 0.0, wsum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                p[j] = 0.0;
                continue;
            }
            const double w = std::exp(-beta * (row_d2[j] - dmin));
            p[j] = w;
            sum += w;
            wsum += w * (row_d2[j] - dmin);
        }
        // H = log(sum) + beta * E[d^2]
        const double h = std::log(sum) + beta * wsum / sum;
        const double diff = h - target;
        if (std::abs(diff) < tol) break;
        if (diff > 0.0) {  // entropy too high: sharpen
            lo = beta;
            beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (lo + hi);
        } else {
            hi = beta;
            beta = 0.5 * (lo + hi);
        }
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += p[j];
    for (std::size_t j = 0; j < n; ++j) p[j] /= sum;
    return beta;
}

// Symmetrized joint distribution p_ij = (p_{j|i} + p_{i|j}) / 2n, floored
// to keep the KL finite.
inline std::vector<double> tsne_joint_p(std::span<const double> x, std::size_t n, std::size_t d,
                                        double perplexity, double tol = 1e-6) {
    auto d2 = pairwise_sqdist(x, n, d);
    std::vector<double> cond(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        tsne_conditional(std::span<const double>(d2.data() + i * n, n), i, perplexity,
                         std::span<double>(cond.data() + i * n, n), tol);
    std::vector<double> p(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            p[i * n + j] =
                std::max((cond[i * n + j] + cond[j * n + i]) / (2.0 * static_cast<double>(n)),
                         1e-12);
        }
    return p;
}

// Student-t output weights w_ij = 1/(1+|y_i-y_j|^2) and their sum.
inline double tsne_output_weights(std::span<const double> y, std::size_t n, std::size_t d,
                                  std::vector<double>& w) {
    w.assign(n * n, 0.0);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = y[i * d + k] - y[j * d + k];
                s += diff * diff;
            }
            const double wij = 1.0 / (1.0 + s);
            w[i * n + j] = wij;
            w[j * n + i] = wij;
            z += 2.0 * wij;
        }
    return z;
}

inline double tsne_kl(std::span<const double> p, std::span<const double> w, double z,
                      std::size_t n) {
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double pij = p[i * n + j];
            const double qij = std::max(w[i * n + j] / z, 1e-12);
            kl += pij * std::log(pij / qij);
        }
    return kl;
}

// dC/dY, 4 * sum_j (p_ij - q_ij) w_ij (y_i - y_j).
inline std::vector<double> tsne_gradient(std::span<const double> p, std::span<const double> w,
                                         double z, std::span<const double> y, std::size_t n,
                                         std::size_t d) {
    std::vector<double> g(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double wij = w[i * n + j];
            const double mult = 4.0 * (p[i * n + j] - wij / z) * wij;
            for (std::size_t k = 0; k < d; ++k)
                g[i * d + k] += mult * (y[i * d + k] - y[j * d + k]);
        }
    return g;
}

inline TsneResult tsne(std::span<const double> x, std::size_t n, std::size_t d,
                       const TsneConfig& cfg) {
    cfg.validate();
    if (n < 4) throw ConfigError("need at least 4 points");
    if (cfg.perplexity >= static_cast<double>(n - 1))
        throw ConfigError("perplexity must be below n-1");

    TsneResult res;
    if (3.0 * cfg.perplexity > static_cast<double>(n - 1))
        res.warnings.push_back("perplexity is large for this point count; neighborhoods overlap");

    std::vector<double> p = tsne_joint_p(x, n, d, cfg.perplexity, cfg.entropy_tol);

    const std::size_t od = cfg.out_dim;
    res.y.resize(n * od);
    Rng rng(mix_seed(cfg.seed, 0x75e));
    for (auto& v : res.y) v = rng.normal() * 1e-2;

    std::vector<double> vel(n * od, 0.0), gains(n * od, 1.0), w;
    std::vector<double> pwork = p;

    // exaggeration phase: multiply P up so clusters separate early
    for (auto& v : pwork) v *= cfg.early_exaggeration;

    for (int it = 0; it < cfg.iterations; ++it) {
        if (it == cfg.exaggeration_iters) pwork = p;
        const std::vector<double>& pcur = it < cfg.exaggeration_iters ? pwork : p;
        const double z = tsne_output_weights(res.y, n, od, w);
        auto grad = tsne_gradient(pcur, w, z, res.y, n, od);
        const double momentum =
            it < cfg.momentum_switch ? cfg.initial_momentum : cfg.final_momentum;
        for (std::size_t c = 0; c < n * od; ++c) {
            const bool same_sign = (grad[c] > 0.0) == (vel[c] > 0.0);
            gains[c] = same_sign ? gains[c] * 0.8 : gains[c] + 0.2;
            if (gains[c] < 0.01) gains[c] = 0.01;
            vel[c] = momentum * vel[c] - cfg.learning_rate * gains[c] * grad[c];
            res.y[c] += vel[c];
        }
        // keep the solution centered
        for (std::size_t k = 0; k < od; ++k) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += res.y[i * od + k];
            mean /= static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) res.y[i * od + k] -= mean;
        }
        res.kl_history.push_back(tsne_kl(p, w, z, n));
    }
    for (double v : res.y)
        if (!std::isfinite(v)) throw NumericError("embedding diverged to non-finite values");
    return res;
}

}  // namespace polemb
