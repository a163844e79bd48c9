#pragma once

// Per-user classifiers over embedding vectors. All models score every
// class in the catalog, including classes absent from the training fold
// (those end up unreachable: -inf GNB prior, strongly negative OVR score).
// Ties in argmax resolve to the lowest class index so predictions are
// deterministic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "polemb/common.hpp"
#include "polemb/rng.hpp"

namespace polemb {

struct Dataset {
    std::vector<double> x;  // n*d row-major
    std::vector<int> y;     // class indices in [0, num_classes)
    std::size_t n = 0;
    std::size_t d = 0;
    int num_classes = 0;
    std::vector<std::string> class_names;  // optional, for messages/reports

    std::span<const double> row(std::size_t i) const { return {x.data() + i * d, d}; }

    std::string class_label(int c) const {
        if (c >= 0 && static_cast<std::size_t>(c) < class_names.size()) return class_names[static_cast<std::size_t>(c)];
        return std::to_string(c);
    }

    void add(std::span<const double> features, int label) {
        if (d == 0) d = features.size();
        if (features.size() != d) throw ConfigError("inconsistent feature width");
        x.insert(x.end(), features.begin(), features.end());
        y.push_back(label);
        ++n;
    }

    void validate() const {
        if (n == 0) throw DataError("empty training set");
        if (num_classes < 1) throw ConfigError("num_classes must be >= 1");
        for (int label : y)
            if (label < 0 || label >= num_classes)
                throw DataError("label out of range: " + std::to_string(label));
    }

    int distinct_labels() const {
        std::vector<bool> seen(static_cast<std::size_t>(num_classes), false);
        for (int label : y) seen[static_cast<std::size_t>(label)] = true;
        int k = 0;
        for (bool b : seen) k += b ? 1 : 0;
        return k;
    }
};

// Feature standardizer. Constant features keep scale 1 so they map to 0.
struct Scaler {
    std::vector<double> mean, scale;

    void fit(std::span<const double> x, std::size_t n, std::size_t d) {
        mean.assign(d, 0.0);
        scale.assign(d, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) mean[j] += x[i * d + j];
        for (double& v : mean) v /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                const double c = x[i * d + j] - mean[j];
                scale[j] += c * c;
            }
        for (double& v : scale) {
            v = std::sqrt(v / static_cast<double>(n));
            if (v < 1e-12) v = 1.0;
        }
    }

    void identity(std::size_t d) {
        mean.assign(d, 0.0);
        scale.assign(d, 1.0);
    }

    std::vector<double> apply(std::span<const double> row) const {
        std::vector<double> out(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / scale[j];
        return out;
    }

    std::vector<double> apply_all(std::span<const double> x, std::size_t n,
                                  std::size_t d) const {
        std::vector<double> out(n * d);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j)
                out[i * d + j] = (x[i * d + j] - mean[j]) / scale[j];
        return out;
    }
};

class Classifier {
public:
    virtual ~Classifier() = default;
    virtual std::string kind() const = 0;
    virtual int num_classes() const = 0;
    virtual std::size_t dim() const = 0;
    // one score per class; argmax is the prediction
    virtual std::vector<double> scores(std::span<const double> row) const = 0;
    virtual void save(std::ostream& os) const = 0;
    virtual const std::vector<std::string>& warnings() const { return no_warnings_; }

    int predict(std::span<const double> row) const {
        auto s = scores(row);
        int best = 0;
        for (int k = 1; k < static_cast<int>(s.size()); ++k)
            if (s[static_cast<std::size_t>(k)] > s[static_cast<std::size_t>(best)]) best = k;
        return best;
    }

private:
    std::vector<std::string> no_warnings_;
};

inline std::vector<int> predict_all(const Classifier& model, std::span<const double> x,
                                    std::size_t n, std::size_t d) {
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = model.predict({x.data() + i * d, d});
    return out;
}

namespace detail {

inline void write_vec(std::ostream& os, const char* tag, std::span<const double> v) {
    os << tag;
    for (double x : v) os << ' ' << format_double(x);
    os << '\n';
}

inline std::vector<double> read_vec(std::istream& is, const std::string& tag,
                                    std::size_t expect) {
    std::string line;
    if (!std::getline(is, line)) throw DataError("model file truncated before " + tag);
    auto tok = split_ws(line);
    if (tok.empty() || std::string(tok[0]) != tag)
        throw DataError("model file: expected '" + tag + "' line");
    if (tok.size() != expect + 1)
        throw DataError("model file: '" + tag + "' has wrong arity");
    std::vector<double> v(expect);
    for (std::size_t i = 0; i < expect; ++i) v[i] = parse_double(tok[i + 1]);
    return v;
}

inline std::string read_kv(std::istream& is, const std::string& tag) {
    std::string line;
    if (!std::getline(is, line)) throw DataError("model file truncated before " + tag);
    auto tok = split_ws(line);
    if (tok.size() != 2 || std::string(tok[0]) != tag)
        throw DataError("model file: expected '" + tag + " <value>' line");
    return std::string(tok[1]);
}

}  // namespace detail

// ---------------------------------------------------------------- majority

class MajorityClassifier final : public Classifier {
public:
    MajorityClassifier(int majority_class, int num_classes)
        : class_(majority_class), k_(num_classes) {}

    std::string kind() const override { return "majority"; }
    int num_classes() const override { return k_; }
    std::size_t dim() const override { return 0; }

    std::vector<double> scores(std::span<const double>) const override {
        std::vector<double> s(static_cast<std::size_t>(k_), 0.0);
        s[static_cast<std::size_t>(class_)] = 1.0;
        return s;
    }

    void save(std::ostream& os) const override {
        os << "model majority 1\n"
           << "classes " << k_ << '\n'
           << "class " << class_ << '\n';
    }

    static std::unique_ptr<MajorityClassifier> load(std::istream& is) {
        const int k = static_cast<int>(parse_i64(detail::read_kv(is, "classes")));
        const int c = static_cast<int>(parse_i64(detail::read_kv(is, "class")));
        return std::make_unique<MajorityClassifier>(c, k);
    }

private:
    int class_;
    int k_;
};

inline std::unique_ptr<Classifier> train_majority(const Dataset& ds) {
    ds.validate();
    std::vector<std::size_t> counts(static_cast<std::size_t>(ds.num_classes), 0);
    for (int label : ds.y) ++counts[static_cast<std::size_t>(label)];
    int best = 0;  // ties keep the lowest class index
    for (int k = 1; k < ds.num_classes; ++k)
        if (counts[static_cast<std::size_t>(k)] > counts[static_cast<std::size_t>(best)])
            best = k;
    return std::make_unique<MajorityClassifier>(best, ds.num_classes);
}

// ------------------------------------------------- multinomial logistic

struct LogregConfig {
    double l2 = 1.0;       // penalty weight on ||W||^2 (biases exempt)
    int max_iter = 200;
    double tol = 1e-6;     // relative gradient-norm stop
    bool standardize = true;
};

class LogregClassifier final : public Classifier {
public:
    LogregClassifier(std::size_t d, int k) : d_(d), k_(k) {
        w_.assign(static_cast<std::size_t>(k) * d, 0.0);
        b_.assign(static_cast<std::size_t>(k), 0.0);
        scaler_.identity(d);
    }

    std::string kind() const override { return "logreg"; }
    int num_classes() const override { return k_; }
    std::size_t dim() const override { return d_; }

    std::vector<double> scores(std::span<const double> row) const override {
        auto z = scaler_.apply(row);
        std::vector<double> s(static_cast<std::size_t>(k_));
        for (int c = 0; c < k_; ++c) {
            double acc = b_[static_cast<std::size_t>(c)];
            const double* wr = w_.data() + static_cast<std::size_t>(c) * d_;
            for (std::size_t j = 0; j < d_; ++j) acc += wr[j] * z[j];
            s[static_cast<std::size_t>(c)] = acc;
        }
        return s;
    }

    std::vector<double> predict_proba(std::span<const double> row) const {
        auto s = scores(row);
        double mx = s[0];
        for (double v : s) mx = std::max(mx, v);
        double sum = 0.0;
        for (double& v : s) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (double& v : s) v /= sum;
        return s;
    }

    void save(std::ostream& os) const override {
        os << "model logreg 1\n"
           << "classes " << k_ << '\n'
           << "dim " << d_ << '\n';
        detail::write_vec(os, "mean", scaler_.mean);
        detail::write_vec(os, "scale", scaler_.scale);
        for (int c = 0; c < k_; ++c)
            detail::write_vec(os, "w",
                              {w_.data() + static_cast<std::size_t>(c) * d_, d_});
        detail::write_vec(os, "b", b_);
    }

    static std::unique_ptr<LogregClassifier> load(std::istream& is) {
        const int k = static_cast<int>(parse_i64(detail::read_kv(is, "classes")));
        const auto d = static_cast<std::size_t>(parse_u64(detail::read_kv(is, "dim")));
        auto m = std::make_unique<LogregClassifier>(d, k);
        m->scaler_.mean = detail::read_vec(is, "mean", d);
        m->scaler_.scale = detail::read_vec(is, "scale", d);
        for (int c = 0; c < k; ++c) {
            auto row = detail::read_vec(is, "w", d);
            std::copy(row.begin(), row.end(),
                      m->w_.begin() + static_cast<std::size_t>(c) * d);
        }
        m->b_ = detail::read_vec(is, "b", static_cast<std::size_t>(k));
        return m;
    }

    friend std::unique_ptr<Classifier> train_logreg(const Dataset&, const LogregConfig&);

private:
    std::size_t d_;
    int k_;
    std::vector<double> w_, b_;
    Scaler scaler_;
    std::vector<std::string> warnings_;

public:
    const std::vector<std::string>& warnings() const override { return warnings_; }
};

// Regularized softmax objective over pre-scaled features:
//   mean cross-entropy + l2/(2n) * ||W||^2   (biases exempt)
// Optionally writes per-sample class probabilities and the gradient.
inline double softmax_objective(std::span<const double> xs, std::span<const int> y,
                                std::size_t n, std::size_t d, int k, double l2,
                                std::span<const double> w, std::span<const double> b,
                                std::vector<double>* probs = nullptr,
                                std::vector<double>* gw = nullptr,
                                std::vector<double>* gb = nullptr) {
    const std::size_t wk = static_cast<std::size_t>(k);
    double nll = 0.0;
    if (probs) probs->assign(n * wk, 0.0);
    if (gw) gw->assign(wk * d, 0.0);
    if (gb) gb->assign(wk, 0.0);
    std::vector<double> z(wk);
    for (std::size_t i = 0; i < n; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < wk; ++c) {
            double acc = b[c];
            const double* wr = w.data() + c * d;
            for (std::size_t j = 0; j < d; ++j) acc += wr[j] * xs[i * d + j];
            z[c] = acc;
            mx = std::max(mx, acc);
        }
        double sum = 0.0;
        for (std::size_t c = 0; c < wk; ++c) {
            z[c] = std::exp(z[c] - mx);
            sum += z[c];
        }
        nll -= std::log(z[static_cast<std::size_t>(y[i])] / sum);
        for (std::size_t c = 0; c < wk; ++c) {
            const double p = z[c] / sum;
            if (probs) (*probs)[i * wk + c] = p;
            if (gw || gb) {
                const double r = p - (static_cast<int>(c) == y[i] ? 1.0 : 0.0);
                if (gb) (*gb)[c] += r;
                if (gw)
                    for (std::size_t j = 0; j < d; ++j) (*gw)[c * d + j] += r * xs[i * d + j];
            }
        }
    }
    if (gb)
        for (double& v : *gb) v /= static_cast<double>(n);
    if (gw)
        for (std::size_t t = 0; t < wk * d; ++t)
            (*gw)[t] = (*gw)[t] / static_cast<double>(n) + l2 * w[t] / static_cast<double>(n);
    double reg = 0.0;
    for (double v : w) reg += v * v;
    return nll / static_cast<double>(n) + 0.5 * l2 * reg / static_cast<double>(n);
}

// Full-batch softmax regression minimized with gradient descent and a
// backtracking (Armijo) line search.
inline std::unique_ptr<Classifier> train_logreg(const Dataset& ds, const LogregConfig& cfg) {
    ds.validate();
    const std::size_t n = ds.n, d = ds.d;
    const int k = ds.num_classes;
    auto model = std::make_unique<LogregClassifier>(d, k);
    if (cfg.standardize)
        model->scaler_.fit(ds.x, n, d);
    std::vector<double> xs = model->scaler_.apply_all(ds.x, n, d);
    if (ds.distinct_labels() < 2)
        model->warnings_.push_back("training labels contain a single class");

    const std::size_t wk = static_cast<std::size_t>(k);
    std::vector<double>&w = model->w_, &b = model->b_;

    std::vector<double> gw(wk * d), gb(wk);
    double step = 1.0;
    double g0 = -1.0;
    for (int it = 0; it < cfg.max_iter; ++it) {
        const double j0 = softmax_objective(xs, ds.y, n, d, k, cfg.l2, w, b, nullptr, &gw, &gb);
        double gnorm2 = 0.0;
        for (double v : gb) gnorm2 += v * v;
        for (double v : gw) gnorm2 += v * v;
        const double gnorm = std::sqrt(gnorm2);
        if (g0 < 0.0) g0 = gnorm;
        if (gnorm <= cfg.tol * std::max(1.0, g0)) break;

        // Armijo backtracking on the descent direction -g
        step = std::min(step * 2.0, 64.0);
        std::vector<double> w2(wk * d), b2(wk);
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t t = 0; t < wk * d; ++t) w2[t] = w[t] - step * gw[t];
            for (std::size_t c = 0; c < wk; ++c) b2[c] = b[c] - step * gb[c];
            const double j1 = softmax_objective(xs, ds.y, n, d, k, cfg.l2, w2, b2);
            if (j1 <= j0 - 1e-4 * step * gnorm2) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            throw NumericError("logistic regression line search failed to descend");
        w.swap(w2);
        b.swap(b2);
    }
    return model;
}

// ------------------------------------------------------ gaussian naive bayes

struct GnbConfig {
    double var_smoothing = 1e-9;  // fraction of the largest feature variance
};

class GnbClassifier final : public Classifier {
public:
    GnbClassifier(std::size_t d, int k) : d_(d), k_(k) {
        log_prior_.assign(static_cast<std::size_t>(k), kNegInf);
        mean_.assign(static_cast<std::size_t>(k) * d, 0.0);
        var_.assign(static_cast<std::size_t>(k) * d, 1.0);
    }

    std::string kind() const override { return "gnb"; }
    int num_classes() const override { return k_; }
    std::size_t dim() const override { return d_; }

    std::vector<double> scores(std::span<const double> row) const override {
        std::vector<double> s(static_cast<std::size_t>(k_));
        for (int c = 0; c < k_; ++c) {
            const std::size_t base = static_cast<std::size_t>(c) * d_;
            double acc = log_prior_[static_cast<std::size_t>(c)];
            if (acc > kNegInf) {
                for (std::size_t j = 0; j < d_; ++j) {
                    const double diff = row[j] - mean_[base + j];
                    acc += -0.5 * std::log(2.0 * kPi * var_[base + j]) -
                           diff * diff / (2.0 * var_[base + j]);
                }
            }
            s[static_cast<std::size_t>(c)] = acc;
        }
        return s;
    }

    void save(std::ostream& os) const override {
        os << "model gnb 1\n"
           << "classes " << k_ << '\n'
           << "dim " << d_ << '\n';
        detail::write_vec(os, "log_prior", log_prior_);
        for (int c = 0; c < k_; ++c)
            detail::write_vec(os, "mean",
                              {mean_.data() + static_cast<std::size_t>(c) * d_, d_});
        for (int c = 0; c < k_; ++c)
            detail::write_vec(os, "var",
                              {var_.data() + static_cast<std::size_t>(c) * d_, d_});
    }

    static std::unique_ptr<GnbClassifier> load(std::istream& is) {
        const int k = static_cast<int>(parse_i64(detail::read_kv(is, "classes")));
        const auto d = static_cast<std::size_t>(parse_u64(detail::read_kv(is, "dim")));
        auto m = std::make_unique<GnbClassifier>(d, k);
        m->log_prior_ = detail::read_vec(is, "log_prior", static_cast<std::size_t>(k));
        for (int c = 0; c < k; ++c) {
            auto row = detail::read_vec(is, "mean", d);
            std::copy(row.begin(), row.end(),
                      m->mean_.begin() + static_cast<std::size_t>(c) * d);
        }
        for (int c = 0; c < k; ++c) {
            auto row = detail::read_vec(is, "var", d);
            std::copy(row.begin(), row.end(),
                      m->var_.begin() + static_cast<std::size_t>(c) * d);
        }
        return m;
    }

    friend std::unique_ptr<Classifier> train_gnb(const Dataset&, const GnbConfig&);

    static constexpr double kNegInf = -1e300;  // file-safe stand-in for -infinity
    static constexpr double kPi = 3.14159265358979323846;

private:
    std::size_t d_;
    int k_;
    std::vector<double> log_prior_, mean_, var_;
};

inline std::unique_ptr<Classifier> train_gnb(const Dataset& ds, const GnbConfig& cfg = {}) {
    ds.validate();
    const std::size_t n = ds.n, d = ds.d;
    const int k = ds.num_classes;
    auto model = std::make_unique<GnbClassifier>(d, k);

    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (int label : ds.y) ++counts[static_cast<std::size_t>(label)];

    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(ds.y[i]);
        for (std::size_t j = 0; j < d; ++j) model->mean_[c * d + j] += ds.x[i * d + j];
    }
    for (int c = 0; c < k; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        if (counts[cc] == 0) continue;
        for (std::size_t j = 0; j < d; ++j)
            model->mean_[cc * d + j] /= static_cast<double>(counts[cc]);
    }
    std::fill(model->var_.begin(), model->var_.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(ds.y[i]);
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = ds.x[i * d + j] - model->mean_[c * d + j];
            model->var_[c * d + j] += diff * diff;
        }
    }

    // smoothing scaled by the widest overall feature variance
    double max_total_var = 0.0;
    {
        std::vector<double> tm(d, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) tm[j] += ds.x[i * d + j];
        for (double& v : tm) v /= static_cast<double>(n);
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double c = ds.x[i * d + j] - tm[j];
                s += c * c;
            }
            max_total_var = std::max(max_total_var, s / static_cast<double>(n));
        }
    }
    const double eps = cfg.var_smoothing * max_total_var + 1e-12;

    for (int c = 0; c < k; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        if (counts[cc] == 0) {
            model->log_prior_[cc] = GnbClassifier::kNegInf;
            std::fill(model->var_.begin() + cc * d, model->var_.begin() + (cc + 1) * d, 1.0);
            continue;
        }
        model->log_prior_[cc] =
            std::log(static_cast<double>(counts[cc]) / static_cast<double>(n));
        for (std::size_t j = 0; j < d; ++j) {
            model->var_[cc * d + j] =
                model->var_[cc * d + j] / static_cast<double>(counts[cc]) + eps;
        }
    }
    return model;
}

// ------------------------------------------------------------- linear svm

struct LinSvmConfig {
    double c = 1.0;  // soft-margin constant; lambda = 1/(c*n)
    int epochs = 50;
    bool standardize = true;
    std::uint64_t seed = 1;
};

class LinSvmClassifier final : public Classifier {
public:
    LinSvmClassifier(std::size_t d, int k) : d_(d), k_(k) {
        w_.assign(static_cast<std::size_t>(k) * d, 0.0);
        b_.assign(static_cast<std::size_t>(k), 0.0);
        scaler_.identity(d);
    }

    std::string kind() const override { return "svm-linear"; }
    int num_classes() const override { return k_; }
    std::size_t dim() const override { return d_; }

    std::vector<double> scores(std::span<const double> row) const override {
        auto z = scaler_.apply(row);
        std::vector<double> s(static_cast<std::size_t>(k_));
        for (int c = 0; c < k_; ++c) {
            double acc = b_[static_cast<std::size_t>(c)];
            const double* wr = w_.data() + static_cast<std::size_t>(c) * d_;
            for (std::size_t j = 0; j < d_; ++j) acc += wr[j] * z[j];
            s[static_cast<std::size_t>(c)] = acc;
        }
        return s;
    }

    void save(std::ostream& os) const override {
        os << "model svm-linear 1\n"
           << "classes " << k_ << '\n'
           << "dim " << d_ << '\n';
        detail::write_vec(os, "mean", scaler_.mean);
        detail::write_vec(os, "scale", scaler_.scale);
        for (int c = 0; c < k_; ++c)
            detail::write_vec(os, "w",
                              {w_.data() + static_cast<std::size_t>(c) * d_, d_});
        detail::write_vec(os, "b", b_);
    }

    static std::unique_ptr<LinSvmClassifier> load(std::istream& is) {
        const int k = static_cast<int>(parse_i64(detail::read_kv(is, "classes")));
        const auto d = static_cast<std::size_t>(parse_u64(detail::read_kv(is, "dim")));
        auto m = std::make_unique<LinSvmClassifier>(d, k);
        m->scaler_.mean = detail::read_vec(is, "mean", d);
        m->scaler_.scale = detail::read_vec(is, "scale", d);
        for (int c = 0; c < k; ++c) {
            auto row = detail::read_vec(is, "w", d);
            std::copy(row.begin(), row.end(),
                      m->w_.begin() + static_cast<std::size_t>(c) * d);
        }
        m->b_ = detail::read_vec(is, "b", static_cast<std::size_t>(k));
        return m;
    }

    friend std::unique_ptr<Classifier> train_linsvm(const Dataset&, const LinSvmConfig&);

private:
    std::size_t d_;
    int k_;
    std::vector<double> w_, b_;
    Scaler scaler_;
};

// One-vs-rest hinge loss trained with the classic 1/(lambda*t) schedule and
// iterate averaging; the averaged weights are what the model keeps. The
// bias rides along unregularized.
inline std::unique_ptr<Classifier> train_linsvm(const Dataset& ds, const LinSvmConfig& cfg) {
    ds.validate();
    const std::size_t n = ds.n, d = ds.d;
    const int k = ds.num_classes;
    auto model = std::make_unique<LinSvmClassifier>(d, k);
    if (cfg.standardize)
        model->scaler_.fit(ds.x, n, d);
    std::vector<double> xs = model->scaler_.apply_all(ds.x, n, d);

    const double lambda = 1.0 / (cfg.c * static_cast<double>(n));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    for (int cls = 0; cls < k; ++cls) {
        Rng rng(mix_seed(cfg.seed, 0x57a + static_cast<std::uint64_t>(cls)));
        std::vector<double> w(d, 0.0), wavg(d, 0.0);
        double b = 0.0, bavg = 0.0;
        std::uint64_t t = 0, steps = 0;
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            for (std::size_t i = n; i > 1; --i) {
                std::size_t j = rng.below(i);
                std::swap(order[i - 1], order[j]);
            }
            for (std::size_t idx : order) {
                ++t;
                const double eta = 1.0 / (lambda * static_cast<double>(t));
                const double yi = ds.y[idx] == cls ? 1.0 : -1.0;
                const double* xi = xs.data() + idx * d;
                double margin = b;
                for (std::size_t j = 0; j < d; ++j) margin += w[j] * xi[j];
                margin *= yi;
                const double shrink = 1.0 - eta * lambda;
                for (std::size_t j = 0; j < d; ++j) w[j] *= shrink;
                if (margin < 1.0) {
                    for (std::size_t j = 0; j < d; ++j) w[j] += eta * yi * xi[j];
                    b += eta * yi;
                }
                ++steps;
                for (std::size_t j = 0; j < d; ++j) wavg[j] += w[j];
                bavg += b;
            }
        }
        double* wr = model->w_.data() + static_cast<std::size_t>(cls) * d;
        for (std::size_t j = 0; j < d; ++j) wr[j] = wavg[j] / static_cast<double>(steps);
        model->b_[static_cast<std::size_t>(cls)] = bavg / static_cast<double>(steps);
    }
    return model;
}

}  // namespace polemb
