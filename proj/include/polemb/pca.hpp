#pragma once

// Principal components via the sample covariance matrix and a cyclic
// Jacobi eigensolver. Dimensions here are small (tens), so Jacobi's
// robustness beats anything fancier.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "polemb/common.hpp"

namespace polemb {

// Symmetric eigendecomposition, eigenpairs sorted by descending eigenvalue.
// a is row-major n*n and is consumed. Eigenvectors come back column-major:
// vec[i*n + j] is component i of eigenvector j.
struct EigenResult {
    std::vector<double> values;
    std::vector<double> vectors;
    int sweeps = 0;
};

inline EigenResult jacobi_eigensymmetric(std::vector<double> a, std::size_t n,
                                         double tol = 1e-12, int max_sweeps = 64) {
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += a[i * n + j] * a[i * n + j];
        return std::sqrt(2.0 * s);
    };
    double scale = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) scale = std::max(scale, std::abs(a[i]));
    if (scale == 0.0) scale = 1.0;

    int sweeps = 0;
    while (off_norm() > tol * scale && sweeps < max_sweeps) {
        ++sweeps;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) <= 1e-300) continue;
                const double app = a[p * n + p], aqq = a[q * n + q];
                const double tau = (aqq - app) / (2.0 * apq);
                // smaller-magnitude root keeps rotations  <= 45 degrees
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k * n + p], vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t x, std::size_t y) { return a[x * n + x] > a[y * n + y]; });

    EigenResult r;
    r.sweeps = sweeps;
    r.values.resize(n);
    r.vectors.resize(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        r.values[j] = a[idx[j] * n + idx[j]];
        for (std::size_t i = 0; i < n; ++i) r.vectors[i * n + j] = v[i * n + idx[j]];
    }
    return r;
}

struct PcaModel {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::vector<double> mean;        // in_dim
    std::vector<double> components;  // out_dim rows of in_dim loadings
    std::vector<double> explained_variance;
    std::vector<double> explained_variance_ratio;
    std::vector<std::string> warnings;

    std::span<const double> component(std::size_t k) const {
        return {components.data() + k * in_dim, in_dim};
    }
};

// rows: n*d row-major. Components are unit loadings with the convention
// that each component's largest-|loading| coordinate is positive, which
// pins the otherwise arbitrary sign.
inline PcaModel pca_fit(std::span<const double> rows, std::size_t n, std::size_t d,
                        std::size_t out_dim) {
    if (n < 2) throw ConfigError("need at least 2 rows to fit principal components");
    if (out_dim < 1 || out_dim > d)
        throw ConfigError("component count must be in [1, input dim]");

    PcaModel m;
    m.in_dim = d;
    m.out_dim = out_dim;
    m.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m.mean[j] += rows[i * d + j];
    for (double& v : m.mean) v /= static_cast<double>(n);

    std::vector<double> cov(d * d, 0.0);
    std::vector<double> c(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) c[j] = rows[i * d + j] - m.mean[j];
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) cov[a * d + b] += c[a] * c[b];
    }
    const double denom = static_cast<double>(n - 1);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            cov[a * d + b] /= denom;
            cov[b * d + a] = cov[a * d + b];
        }

    double total_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) total_var += cov[j * d + j];

    EigenResult eig = jacobi_eigensymmetric(std::move(cov), d);

    m.components.assign(out_dim * d, 0.0);
    m.explained_variance.resize(out_dim);
    m.explained_variance_ratio.resize(out_dim);
    std::size_t degenerate = 0;
    for (std::size_t k = 0; k < out_dim; ++k) {
        double ev = std::max(eig.values[k], 0.0);
        m.explained_variance[k] = ev;
        m.explained_variance_ratio[k] = total_var > 0.0 ? ev / total_var : 0.0;
        if (ev <= 1e-12 * std::max(total_var, 1.0)) ++degenerate;
        // column k of the eigenvector matrix
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double val = eig.vectors[i * d + k];
            m.components[k * d + i] = val;
            if (std::abs(val) > best) {
                best = std::abs(val);
                arg = i;
            }
        }
        if (m.components[k * d + arg] < 0.0)
            for (std::size_t i = 0; i < d; ++i) m.components[k * d + i] = -m.components[k * d + i];
    }
    if (degenerate > 0)
        m.warnings.push_back(std::to_string(degenerate) +
                             " component(s) have (near-)zero variance; input rank is lower "
                             "than the requested dimension");
    return m;
}

inline std::vector<double> pca_transform(const PcaModel& m, std::span<const double> rows,
                                         std::size_t n) {
    std::vector<double> out(n * m.out_dim, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < m.out_dim; ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < m.in_dim; ++j)
                s += (rows[i * m.in_dim + j] - m.mean[j]) * m.components[k * m.in_dim + j];
            out[i * m.out_dim + k] = s;
        }
    return out;
}

}  // namespace polemb
