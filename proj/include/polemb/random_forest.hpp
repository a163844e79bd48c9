#pragma once

// Bagged CART forest with Gini splits. Nodes split on the best of a
// random feature subset; zero-gain splits are still taken when they
// separate samples, so parity-style structure (no single informative
// feature) is resolved deeper in the tree instead of collapsing to a
// majority leaf. trees=1 with bagging off and mtry=d degrades to a plain
// decision tree.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polemb/classify.hpp"
#include "polemb/common.hpp"
#include "polemb/rng.hpp"

namespace polemb {

struct RfConfig {
    int trees = 100;
    int max_depth = -1;        // < 0: unlimited
    int min_samples_split = 2;
    int mtry = 0;              // 0: floor(sqrt(d)), at least 1
    bool bagging = true;
    std::uint64_t seed = 1;

    void validate() const {
        if (trees < 1) throw ConfigError("trees must be >= 1");
        if (min_samples_split < 2) throw ConfigError("min_samples_split must be >= 2");
    }
};

struct TreeNode {
    int feature = -1;     // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    int leaf_class = -1;
};

class RandomForestClassifier final : public Classifier {
public:
    RandomForestClassifier(std::size_t d, int k) : d_(d), k_(k) {}

    std::string kind() const override { return "rf"; }
    int num_classes() const override { return k_; }
    std::size_t dim() const override { return d_; }

    std::vector<double> scores(std::span<const double> row) const override {
        std::vector<double> votes(static_cast<std::size_t>(k_), 0.0);
        for (const auto& tree : trees_)
            votes[static_cast<std::size_t>(tree_predict(tree, row))] += 1.0;
        for (double& v : votes) v /= static_cast<double>(trees_.size());
        return votes;
    }

    std::optional<double> oob_accuracy() const { return oob_accuracy_; }
    std::size_t tree_count() const { return trees_.size(); }

    void save(std::ostream& os) const override {
        os << "model rf 1\n"
           << "classes " << k_ << '\n'
           << "dim " << d_ << '\n'
           << "trees " << trees_.size() << '\n';
        for (const auto& tree : trees_) {
            os << "tree " << tree.size() << '\n';
            for (const auto& nd : tree)
                os << nd.feature << ' ' << format_double(nd.threshold) << ' ' << nd.left << ' '
                   << nd.right << ' ' << nd.leaf_class << '\n';
        }
    }

    static std::unique_ptr<RandomForestClassifier> load(std::istream& is) {
        const int k = static_cast<int>(parse_i64(detail::read_kv(is, "classes")));
        const auto d = static_cast<std::size_t>(parse_u64(detail::read_kv(is, "dim")));
        const auto ntrees = parse_u64(detail::read_kv(is, "trees"));
        auto m = std::make_unique<RandomForestClassifier>(d, k);
        std::string line;
        for (std::uint64_t t = 0; t < ntrees; ++t) {
            const auto nnodes = parse_u64(detail::read_kv(is, "tree"));
            std::vector<TreeNode> tree(nnodes);
            for (std::uint64_t i = 0; i < nnodes; ++i) {
                if (!std::getline(is, line)) throw DataError("model file: truncated tree");
                auto tok = split_ws(line);
                if (tok.size() != 5) throw DataError("model file: malformed tree node");
                tree[i].feature = static_cast<int>(parse_i64(tok[0]));
                tree[i].threshold = parse_double(tok[1]);
                tree[i].left = static_cast<int>(parse_i64(tok[2]));
                tree[i].right = static_cast<int>(parse_i64(tok[3]));
                tree[i].leaf_class = static_cast<int>(parse_i64(tok[4]));
            }
            m->trees_.push_back(std::move(tree));
        }
        return m;
    }

    friend std::unique_ptr<RandomForestClassifier> train_random_forest(const Dataset&,
                                                                       const RfConfig&);

private:
    static int tree_predict(const std::vector<TreeNode>& tree, std::span<const double> row) {
        int node = 0;
        while (tree[static_cast<std::size_t>(node)].feature >= 0) {
            const auto& nd = tree[static_cast<std::size_t>(node)];
            node = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left
                                                                             : nd.right;
        }
        return tree[static_cast<std::size_t>(node)].leaf_class;
    }

    std::size_t d_;
    int k_;
    std::vector<std::vector<TreeNode>> trees_;
    std::optional<double> oob_accuracy_;
};

namespace detail {

struct TreeBuilder {
    const Dataset& ds;
    const RfConfig& cfg;
    int mtry;
    Rng rng;
    std::vector<TreeNode> nodes;
    std::vector<int> feat_pool;

    TreeBuilder(const Dataset& d, const RfConfig& c, int m, std::uint64_t seed)
        : ds(d), cfg(c), mtry(m), rng(seed) {
        feat_pool.resize(ds.d);
        for (std::size_t j = 0; j < ds.d; ++j) feat_pool[j] = static_cast<int>(j);
    }

    static double gini(std::span<const std::size_t> counts, std::size_t total) {
        double g = 1.0;
        for (std::size_t c : counts) {
            const double p = static_cast<double>(c) / static_cast<double>(total);
            g -= p * p;
        }
        return g;
    }

    int majority(std::span<const std::size_t> counts) {
        int best = 0;
        for (std::size_t k = 1; k < counts.size(); ++k)
            if (counts[k] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
        return best;
    }

    // Builds the subtree over samples[lo, hi); returns the node index.
    int build(std::vector<std::size_t>& samples, std::size_t lo, std::size_t hi, int depth) {
        const std::size_t m = hi - lo;
        std::vector<std::size_t> counts(static_cast<std::size_t>(ds.num_classes), 0);
        for (std::size_t i = lo; i < hi; ++i) ++counts[static_cast<std::size_t>(ds.y[samples[i]])];
        const bool pure = *std::max_element(counts.begin(), counts.end()) == m;
        const bool depth_stop = cfg.max_depth >= 0 && depth >= cfg.max_depth;

        if (pure || depth_stop || m < static_cast<std::size_t>(cfg.min_samples_split))
            return make_leaf(majority(counts));

        // candidate features: mtry draws without replacement
        for (int j = 0; j < mtry; ++j) {
            const std::size_t pick =
                static_cast<std::size_t>(j) + rng.below(ds.d - static_cast<std::size_t>(j));
            std::swap(feat_pool[static_cast<std::size_t>(j)], feat_pool[pick]);
        }

        const double parent_gini = gini(counts, m);
        double best_gain = -1.0;
        int best_feature = -1;
        double best_thr = 0.0;

        std::vector<std::pair<double, int>> vals(m);
        std::vector<std::size_t> left_counts(static_cast<std::size_t>(ds.num_classes));
        for (int j = 0; j < mtry; ++j) {
            const int f = feat_pool[static_cast<std::size_t>(j)];
            for (std::size_t i = 0; i < m; ++i) {
                const std::size_t s = samples[lo + i];
                vals[i] = {ds.x[s * ds.d + static_cast<std::size_t>(f)], ds.y[s]};
            }
            std::sort(vals.begin(), vals.end());
            std::fill(left_counts.begin(), left_counts.end(), 0);
            for (std::size_t i = 0; i + 1 < m; ++i) {
                ++left_counts[static_cast<std::size_t>(vals[i].second)];
                if (vals[i].first == vals[i + 1].first) continue;
                const std::size_t nl = i + 1, nr = m - nl;
                double gl = 1.0, gr = 1.0;
                for (std::size_t c = 0; c < left_counts.size(); ++c) {
                    const double pl =
                        static_cast<double>(left_counts[c]) / static_cast<double>(nl);
                    const double pr = static_cast<double>(counts[c] - left_counts[c]) /
                                      static_cast<double>(nr);
                    gl -= pl * pl;
                    gr -= pr * pr;
                }
                const double gain =
                    parent_gini - (static_cast<double>(nl) * gl + static_cast<double>(nr) * gr) /
                                      static_cast<double>(m);
                if (gain > best_gain + 1e-15) {
                    best_gain = gain;
                    best_feature = f;
                    double thr = vals[i].first + 0.5 * (vals[i + 1].first - vals[i].first);
                    if (!(thr < vals[i + 1].first)) thr = vals[i].first;
                    best_thr = thr;
                }
            }
        }

        // no feature separates the samples (all candidates constant): leaf
        if (best_feature < 0) return make_leaf(majority(counts));

        // partition in place; stable enough since order within sides is
        // irrelevant to the split search
        std::size_t mid = lo;
        for (std::size_t i = lo; i < hi; ++i) {
            if (ds.x[samples[i] * ds.d + static_cast<std::size_t>(best_feature)] <= best_thr) {
                std::swap(samples[mid], samples[i]);
                ++mid;
            }
        }
        if (mid == lo || mid == hi) return make_leaf(majority(counts));  // degenerate guard

        const int node = static_cast<int>(nodes.size());
        nodes.push_back(TreeNode{best_feature, best_thr, -1, -1, -1});
        const int left = build(samples, lo, mid, depth + 1);
        const int right = build(samples, mid, hi, depth + 1);
        nodes[static_cast<std::size_t>(node)].left = left;
        nodes[static_cast<std::size_t>(node)].right = right;
        return node;
    }

    int make_leaf(int cls) {
        const int node = static_cast<int>(nodes.size());
        nodes.push_back(TreeNode{-1, 0.0, -1, -1, cls});
        return node;
    }
};

}  // namespace detail

inline std::unique_ptr<RandomForestClassifier> train_random_forest(const Dataset& ds,
                                                                   const RfConfig& cfg) {
    ds.validate();
    cfg.validate();
    const std::size_t n = ds.n;
    const int k = ds.num_classes;
    int mtry = cfg.mtry;
    if (mtry <= 0) mtry = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(ds.d))));
    mtry = std::min(mtry, static_cast<int>(ds.d));

    auto model = std::make_unique<RandomForestClassifier>(ds.d, k);
    std::vector<std::vector<std::size_t>> oob_votes(
        n, std::vector<std::size_t>(static_cast<std::size_t>(k), 0));
    bool any_oob = false;

    for (int t = 0; t < cfg.trees; ++t) {
        detail::TreeBuilder builder(ds, cfg, mtry,
                                    mix_seed(cfg.seed, 0xf0e + static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> samples;
        std::vector<bool> in_bag(n, false);
        samples.reserve(n);
        if (cfg.bagging) {
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t pick = builder.rng.below(n);
                samples.push_back(pick);
                in_bag[pick] = true;
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) samples.push_back(i);
            std::fill(in_bag.begin(), in_bag.end(), true);
        }
        builder.build(samples, 0, samples.size(), 0);
        model->trees_.push_back(std::move(builder.nodes));

        if (cfg.bagging) {
            const auto& tree = model->trees_.back();
            for (std::size_t i = 0; i < n; ++i) {
                if (in_bag[i]) continue;
                any_oob = true;
                int node = 0;
                while (tree[static_cast<std::size_t>(node)].feature >= 0) {
                    const auto& nd = tree[static_cast<std::size_t>(node)];
                    node = ds.x[i * ds.d + static_cast<std::size_t>(nd.feature)] <= nd.threshold
                               ? nd.left
                               : nd.right;
                }
                ++oob_votes[i][static_cast<std::size_t>(
                    tree[static_cast<std::size_t>(node)].leaf_class)];
            }
        }
    }

    if (any_oob) {
        std::size_t voted = 0, correct = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t total = 0;
            for (std::size_t c : oob_votes[i]) total += c;
            if (total == 0) continue;
            ++voted;
            int best = 0;
            for (int c = 1; c < k; ++c)
                if (oob_votes[i][static_cast<std::size_t>(c)] >
                    oob_votes[i][static_cast<std::size_t>(best)])
                    best = c;
            if (best == ds.y[i]) ++correct;
        }
        if (voted > 0)
            model->oob_accuracy_ = static_cast<double>(correct) / static_cast<double>(voted);
    }
    return model;
}

}  // namespace polemb
