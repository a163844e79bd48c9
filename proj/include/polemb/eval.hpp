#pragma once

// Evaluation protocols over (embedding, labels) pairs:
//   leave-one-out  — retrain for every held-out user, pool the confusion
//   k-shot         — k training users per class, repeated with fresh draws
//   cross-tier     — fit on one tier (members), score another
// plus the paired bootstrap used to compare two prediction columns.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polemb/common.hpp"
#include "polemb/embedding.hpp"
#include "polemb/labels.hpp"
#include "polemb/metrics.hpp"
#include "polemb/model_io.hpp"
#include "polemb/rng.hpp"

namespace polemb {

// Rows for every labeled user of the region (optionally one tier) that has
// an embedding vector. Class indices follow the catalog party order, and
// num_classes covers the whole catalog even if a tier lacks some party.
inline Dataset make_dataset(const EmbeddingMatrix& emb, const LabelSet& labels,
                            const std::string& region, std::optional<Tier> tier,
                            std::vector<UserId>* users_out = nullptr,
                            std::vector<UserId>* missing_out = nullptr) {
    Dataset ds;
    for (const auto& p : labels.parties(region)) ds.class_names.push_back(p.name);
    ds.num_classes = static_cast<int>(ds.class_names.size());
    if (ds.num_classes == 0) throw DataError("no parties registered for region " + region);
    for (UserId u : labels.users_in(region, tier)) {
        auto row = emb.find(u);
        if (!row) {
            if (missing_out) missing_out->push_back(u);
            continue;
        }
        const auto& lbl = *labels.label(u);
        ds.add(emb.row(*row), static_cast<int>(lbl.party));
        if (users_out) users_out->push_back(u);
    }
    if (ds.n == 0) throw DataError("no labeled users with embeddings in region " + region);
    return ds;
}

struct LooResult {
    Confusion confusion{1};
    std::vector<int> predictions;  // aligned with dataset row order
    double accuracy = 0.0;
    double macro_f1 = 0.0;
};

inline LooResult run_loo(const Dataset& ds, const ClassifierParams& params) {
    ds.validate();
    if (ds.n < 2) throw DataError("leave-one-out needs at least 2 samples");
    LooResult res;
    res.confusion = Confusion(ds.num_classes);
    res.predictions.resize(ds.n);

    Dataset fold;
    fold.num_classes = ds.num_classes;
    for (std::size_t held = 0; held < ds.n; ++held) {
        fold.x.clear();
        fold.y.clear();
        fold.n = 0;
        fold.d = 0;
        for (std::size_t i = 0; i < ds.n; ++i) {
            if (i == held) continue;
            fold.add(ds.row(i), ds.y[i]);
        }
        ClassifierParams p = params;
        p.seed = mix_seed(params.seed, held);
        auto model = train_classifier(fold, p);
        const int pred = model->predict(ds.row(held));
        res.predictions[held] = pred;
        res.confusion.add(ds.y[held], pred);
    }
    res.accuracy = res.confusion.accuracy();
    res.macro_f1 = polemb::macro_f1(res.confusion);
    return res;
}

struct KshotResult {
    int k = 0;
    int reps = 0;
    double mean_accuracy = 0.0, sd_accuracy = 0.0;
    double mean_macro_f1 = 0.0, sd_macro_f1 = 0.0;
    std::vector<double> rep_accuracy;
    std::vector<double> rep_macro_f1;
    Confusion pooled{1};  // all reps' test predictions merged
};

namespace detail {

inline std::pair<double, double> mean_sd(std::span<const double> xs) {
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, 0.0};
    double s = 0.0;
    for (double v : xs) s += (v - mean) * (v - mean);
    return {mean, std::sqrt(s / static_cast<double>(xs.size() - 1))};
}

}  // namespace detail

// Each repetition draws k training users per class (classes present in the
// data only), tests on the rest, then accuracy/macro-F1 are averaged over
// repetitions. The spread reported is the sample standard deviation.
inline KshotResult run_kshot(const Dataset& ds, const ClassifierParams& params, int k,
                             int reps, std::uint64_t seed) {
    ds.validate();
    if (k < 1) throw ConfigError("k must be >= 1");
    if (reps < 1) throw ConfigError("reps must be >= 1");

    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.num_classes));
    for (std::size_t i = 0; i < ds.n; ++i)
        by_class[static_cast<std::size_t>(ds.y[i])].push_back(i);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        const auto sz = by_class[c].size();
        if (sz > 0 && sz < static_cast<std::size_t>(k))
            throw DataError("class " + ds.class_label(static_cast<int>(c)) + " has " +
                            std::to_string(sz) + " samples, fewer than k=" +
                            std::to_string(k));
    }

    KshotResult res;
    res.k = k;
    res.reps = reps;
    res.pooled = Confusion(ds.num_classes);
    for (int rep = 0; rep < reps; ++rep) {
        Rng rng(mix_seed(seed, 0x5407 + static_cast<std::uint64_t>(rep)));
        std::vector<bool> is_train(ds.n, false);
        for (auto& members : by_class) {
            if (members.empty()) continue;
            // partial Fisher-Yates: first k entries become the train draw
            for (int j = 0; j < k; ++j) {
                const std::size_t pick =
                    static_cast<std::size_t>(j) + rng.below(members.size() - static_cast<std::size_t>(j));
                std::swap(members[static_cast<std::size_t>(j)], members[pick]);
                is_train[members[static_cast<std::size_t>(j)]] = true;
            }
        }
        Dataset train, test;
        train.num_classes = test.num_classes = ds.num_classes;
        for (std::size_t i = 0; i < ds.n; ++i)
            (is_train[i] ? train : test).add(ds.row(i), ds.y[i]);

        ClassifierParams p = params;
        p.seed = mix_seed(seed, 0x7ea1 + static_cast<std::uint64_t>(rep));
        auto model = train_classifier(train, p);
        Confusion conf(ds.num_classes);
        for (std::size_t i = 0; i < test.n; ++i)
            conf.add(test.y[i], model->predict(test.row(i)));
        res.rep_accuracy.push_back(conf.accuracy());
        res.rep_macro_f1.push_back(polemb::macro_f1(conf));
        res.pooled.merge(conf);
    }
    auto [ma, sa] = detail::mean_sd(res.rep_accuracy);
    auto [mf, sf] = detail::mean_sd(res.rep_macro_f1);
    res.mean_accuracy = ma;
    res.sd_accuracy = sa;
    res.mean_macro_f1 = mf;
    res.sd_macro_f1 = sf;
    return res;
}

struct CrossTierResult {
    Confusion confusion{1};
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::vector<int> predictions;
};

inline CrossTierResult run_crosstier(const Dataset& train, const Dataset& test,
                                     const ClassifierParams& params) {
    train.validate();
    test.validate();
    if (train.num_classes != test.num_classes)
        throw ConfigError("train/test class catalogs differ");
    if (train.d != test.d) throw ConfigError("train/test feature widths differ");
    CrossTierResult res;
    res.confusion = Confusion(train.num_classes);
    auto model = train_classifier(train, params);
    res.predictions.resize(test.n);
    for (std::size_t i = 0; i < test.n; ++i) {
        const int pred = model->predict(test.row(i));
        res.predictions[i] = pred;
        res.confusion.add(test.y[i], pred);
    }
    res.accuracy = res.confusion.accuracy();
    res.macro_f1 = polemb::macro_f1(res.confusion);
    return res;
}

struct BootstrapResult {
    double stat_a = 0.0;
    double stat_b = 0.0;
    double delta = 0.0;    // a - b on the full sample
    double p_value = 1.0;  // two-sided
    int resamples = 0;
};

// Paired bootstrap over examples: resample indices with replacement,
// recompute the statistic difference, and report the two-sided tail
// p = 2 * min(P(d* <= 0), P(d* >= 0)) with add-one smoothing.
inline BootstrapResult paired_bootstrap(std::span<const int> truth, std::span<const int> pred_a,
                                        std::span<const int> pred_b, int num_classes,
                                        const std::string& metric = "macro_f1",
                                        int resamples = 10000, std::uint64_t seed = 1) {
    const std::size_t n = truth.size();
    if (pred_a.size() != n || pred_b.size() != n)
        throw ConfigError("prediction columns must align with the truth column");
    if (n == 0) throw DataError("no paired predictions to compare");
    if (resamples < 1) throw ConfigError("resamples must be >= 1");
    const bool use_f1 = metric == "macro_f1";
    if (!use_f1 && metric != "accuracy")
        throw ConfigError("unknown metric '" + metric + "'; use accuracy or macro_f1");

    auto stat = [&](std::span<const std::size_t> idx,
                    std::span<const int> pred) -> double {
        if (!use_f1) {
            std::size_t ok = 0;
            for (std::size_t i : idx) ok += truth[i] == pred[i] ? 1 : 0;
            return static_cast<double>(ok) / static_cast<double>(idx.size());
        }
        Confusion c(num_classes);
        for (std::size_t i : idx) c.add(truth[i], pred[i]);
        return macro_f1(c);
    };

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    BootstrapResult res;
    res.resamples = resamples;
    res.stat_a = stat(idx, pred_a);
    res.stat_b = stat(idx, pred_b);
    res.delta = res.stat_a - res.stat_b;

    Rng rng(mix_seed(seed, 0xb007));
    std::size_t le = 0, ge = 0;
    std::vector<std::size_t> sample(n);
    for (int b = 0; b < resamples; ++b) {
        for (std::size_t i = 0; i < n; ++i) sample[i] = rng.below(n);
        const double d = stat(sample, pred_a) - stat(sample, pred_b);
        if (d <= 0.0) ++le;
        if (d >= 0.0) ++ge;
    }
    const double denom = static_cast<double>(resamples) + 1.0;
    const double p_le = (static_cast<double>(le) + 1.0) / denom;
    const double p_ge = (static_cast<double>(ge) + 1.0) / denom;
    res.p_value = std::min(1.0, 2.0 * std::min(p_le, p_ge));
    return res;
}

}  // namespace polemb
