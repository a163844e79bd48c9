#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "polemb/common.hpp"

namespace polemb {

class Confusion {
public:
    explicit Confusion(int num_classes)
        : k_(num_classes),
          m_(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_classes), 0) {
        if (num_classes < 1) throw ConfigError("num_classes must be >= 1");
    }

    void add(int truth, int pred, std::size_t count = 1) {
        if (truth < 0 || truth >= k_ || pred < 0 || pred >= k_)
            throw DataError("class index out of range in confusion update");
        m_[static_cast<std::size_t>(truth) * k_ + static_cast<std::size_t>(pred)] += count;
    }

    void merge(const Confusion& other) {
        if (other.k_ != k_) throw ConfigError("confusion size mismatch");
        for (std::size_t i = 0; i < m_.size(); ++i) m_[i] += other.m_[i];
    }

    std::size_t count(int truth, int pred) const {
        return m_[static_cast<std::size_t>(truth) * k_ + static_cast<std::size_t>(pred)];
    }

    int num_classes() const { return k_; }

    std::size_t total() const {
        std::size_t s = 0;
        for (auto v : m_) s += v;
        return s;
    }

    std::size_t correct() const {
        std::size_t s = 0;
        for (int c = 0; c < k_; ++c) s += count(c, c);
        return s;
    }

    double accuracy() const {
        const std::size_t t = total();
        return t == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(t);
    }

    std::size_t row_total(int truth) const {
        std::size_t s = 0;
        for (int p = 0; p < k_; ++p) s += count(truth, p);
        return s;
    }

    std::size_t col_total(int pred) const {
        std::size_t s = 0;
        for (int t = 0; t < k_; ++t) s += count(t, pred);
        return s;
    }

private:
    int k_;
    std::vector<std::size_t> m_;
};

// Per-class F1 with the 0/0 -> 0 convention (a class with no true samples
// and no predictions scores 0, it is not skipped).
inline std::vector<double> per_class_f1(const Confusion& c) {
    std::vector<double> f1(static_cast<std::size_t>(c.num_classes()), 0.0);
    for (int k = 0; k < c.num_classes(); ++k) {
        const double tp = static_cast<double>(c.count(k, k));
        const double denom =
            static_cast<double>(c.row_total(k)) + static_cast<double>(c.col_total(k));
        f1[static_cast<std::size_t>(k)] = denom > 0.0 ? 2.0 * tp / denom : 0.0;
    }
    return f1;
}

// Unweighted mean over every class in the catalog, absent classes included.
inline double macro_f1(const Confusion& c) {
    auto f1 = per_class_f1(c);
    double s = 0.0;
    for (double v : f1) s += v;
    return s / static_cast<double>(f1.size());
}

inline double accuracy_of(std::span<const int> truth, std::span<const int> pred) {
    if (truth.size() != pred.size() || truth.empty())
        throw ConfigError("prediction/truth length mismatch");
    std::size_t ok = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) ok += truth[i] == pred[i] ? 1 : 0;
    return static_cast<double>(ok) / static_cast<double>(truth.size());
}

// Mean silhouette over all points: s(i) = (b-a)/max(a,b) with a = mean
// intra-cluster distance and b = best neighboring cluster's mean distance.
// Singleton clusters contribute 0. Euclidean, exact O(n^2).
inline double silhouette_score(std::span<const double> x, std::size_t n, std::size_t d,
                               std::span<const int> labels, int num_classes) {
    if (labels.size() != n) throw ConfigError("label count does not match point count");
    if (n < 2) throw ConfigError("need at least 2 points");
    std::vector<std::size_t> cluster_size(static_cast<std::size_t>(num_classes), 0);
    for (int l : labels) {
        if (l < 0 || l >= num_classes) throw DataError("cluster label out of range");
        ++cluster_size[static_cast<std::size_t>(l)];
    }
    int nonempty = 0;
    for (std::size_t s : cluster_size) nonempty += s > 0 ? 1 : 0;
    if (nonempty < 2) throw ConfigError("silhouette needs at least 2 non-empty clusters");

    std::vector<double> sums(static_cast<std::size_t>(num_classes));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double s = 0.0;
            for (std::size_t f = 0; f < d; ++f) {
                const double diff = x[i * d + f] - x[j * d + f];
                s += diff * diff;
            }
            sums[static_cast<std::size_t>(labels[j])] += std::sqrt(s);
        }
        const auto li = static_cast<std::size_t>(labels[i]);
        if (cluster_size[li] <= 1) continue;  // contributes 0
        const double a = sums[li] / static_cast<double>(cluster_size[li] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < sums.size(); ++c) {
            if (c == li || cluster_size[c] == 0) continue;
            b = std::min(b, sums[c] / static_cast<double>(cluster_size[c]));
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

}  // namespace polemb
