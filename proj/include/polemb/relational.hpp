#pragma once

// Relational embeddings: trains directly on observed (source, target)
// retweet pairs instead of on random-walk windows. Same sigmoid objective
// as skip-gram — the positive pair's dot product is pushed up, dots with
// sampled fake targets are pushed down — but the only positives are edges
// that actually occurred, each seen count times per epoch unless deduped.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "polemb/common.hpp"
#include "polemb/graph.hpp"
#include "polemb/rng.hpp"
#include "polemb/skipgram.hpp"

namespace polemb {

struct RelationalConfig {
    int dim = 20;
    int negatives = 5;
    int epochs = 5;
    double lr = 0.025;
    double min_lr = 1e-4;
    double ns_power = 0.75;     // exponent on target frequency for negatives
    bool share_tables = false;  // one table plays both roles
    bool concat = false;        // emit [source ; target] vectors, 2*dim wide
    bool dedup = false;         // collapse repeated pairs to multiplicity one
    bool skip_self_loops = true;
    std::uint64_t seed = 1;

    void validate() const {
        if (dim < 1) throw ConfigError("dim must be >= 1");
        if (negatives < 1) throw ConfigError("negatives must be >= 1");
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
        if (ns_power < 0.0 || ns_power > 1.0)
            throw ConfigError("ns_power must be in [0, 1]");
        if (share_tables && concat)
            throw ConfigError("share_tables and concat are mutually exclusive");
    }
};

// Loss of one positive pair with a batch of negative targets, given the
// already-computed dot products. Matches the skip-gram pair objective.
inline double relational_pair_loss(double pos_dot, std::span<const double> neg_dots) {
    return sgns_pair_loss(pos_dot, neg_dots);
}

struct RelationalModel {
    std::vector<double> w_src;  // source-role table, node-major
    std::vector<double> w_dst;  // target-role table; aliases w_src when shared
    int dim = 0;
    bool shared = false;

    std::span<const double> src_row(NodeIndex u) const {
        return {w_src.data() + static_cast<std::size_t>(u) * dim, static_cast<std::size_t>(dim)};
    }
    std::span<const double> dst_row(NodeIndex u) const {
        const auto& t = shared ? w_src : w_dst;
        return {t.data() + static_cast<std::size_t>(u) * dim, static_cast<std::size_t>(dim)};
    }
};

// Called after each epoch with (epoch, mean pair loss); tests hook in here.
using RelationalObserver = std::function<void(int, double)>;

inline RelationalModel train_relational(const InteractionGraph& g, const RelationalConfig& cfg,
                                        const RelationalObserver& observer = {}) {
    cfg.validate();
    const std::size_t n = g.node_count();
    if (n == 0) throw ConfigError("cannot train on an empty graph");

    // Expanded pair list: one entry per retweet event (or per distinct pair
    // when deduped). Also the target-frequency table for negatives.
    std::vector<std::pair<NodeIndex, NodeIndex>> pairs;
    std::vector<std::uint64_t> target_freq(n, 0);
    for (const auto& e : g.edges()) {
        if (cfg.skip_self_loops && e.src == e.dst) continue;
        const std::uint64_t reps = cfg.dedup ? 1 : e.count;
        for (std::uint64_t r = 0; r < reps; ++r) pairs.emplace_back(e.src, e.dst);
        target_freq[e.dst] += reps;
    }
    if (pairs.empty()) throw DataError("graph has no usable retweet pairs");

    NegativeSampler sampler(target_freq, cfg.ns_power);

    RelationalModel model;
    model.dim = cfg.dim;
    model.shared = cfg.share_tables;
    const std::size_t cells = n * static_cast<std::size_t>(cfg.dim);
    model.w_src.resize(cells);
    {
        Rng init_rng(mix_seed(cfg.seed, 0x2e1));
        const double half = 0.5 / cfg.dim;
        for (auto& v : model.w_src) v = init_rng.uniform(-half, half);
    }
    if (!cfg.share_tables) {
        model.w_dst.assign(cells, 0.0);
        // Zero target table stalls when it is also the source table, so the
        // shared case keeps the uniform init for both roles. Split tables
        // mirror the skip-gram convention: contexts start at zero.
    }
    std::vector<double>& dst_table = cfg.share_tables ? model.w_src : model.w_dst;

    const double total_updates =
        static_cast<double>(pairs.size()) * static_cast<double>(cfg.epochs);
    std::size_t done = 0;

    std::vector<std::size_t> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<double*> negs(static_cast<std::size_t>(cfg.negatives));
    std::vector<double> src_grad(static_cast<std::size_t>(cfg.dim));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng rng(mix_seed(cfg.seed, 0xbead + static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::size_t j = rng.below(i);
            std::swap(order[i - 1], order[j]);
        }
        double epoch_loss = 0.0;
        for (std::size_t idx : order) {
            const auto [s, t] = pairs[idx];
            double lr = cfg.lr * (1.0 - static_cast<double>(done) / total_updates);
            if (lr < cfg.min_lr) lr = cfg.min_lr;
            ++done;
            for (int k = 0; k < cfg.negatives; ++k) {
                NodeIndex nv = sampler.sample(t, rng);
                negs[static_cast<std::size_t>(k)] =
                    dst_table.data() + static_cast<std::size_t>(nv) * cfg.dim;
            }
            epoch_loss += detail::sgns_update(
                model.w_src.data() + static_cast<std::size_t>(s) * cfg.dim,
                dst_table.data() + static_cast<std::size_t>(t) * cfg.dim, cfg.dim,
                std::span<double* const>(negs.data(), negs.size()), lr);
        }
        if (observer) observer(epoch, epoch_loss / static_cast<double>(pairs.size()));
    }
    return model;
}

// Final per-user vector. Users that never retweet anyone live only in the
// target table, so they fall back to their target-role row; concat mode
// always stacks both roles.
inline std::vector<double> relational_user_vector(const RelationalModel& model,
                                                  const InteractionGraph& g, NodeIndex u) {
    const bool has_out = !g.out_neighbors(u).empty();
    if (model.shared) {
        auto r = model.src_row(u);
        return {r.begin(), r.end()};
    }
    auto s = model.src_row(u);
    auto d = model.dst_row(u);
    std::vector<double> v;
    v.reserve(s.size() * 2);
    if (has_out) {
        v.assign(s.begin(), s.end());
    } else {
        v.assign(d.begin(), d.end());
    }
    return v;
}

inline std::vector<double> relational_user_vector_concat(const RelationalModel& model,
                                                         NodeIndex u) {
    auto s = model.src_row(u);
    auto d = model.dst_row(u);
    std::vector<double> v;
    v.reserve(s.size() + d.size());
    v.insert(v.end(), s.begin(), s.end());
    v.insert(v.end(), d.begin(), d.end());
    return v;
}

}  // namespace polemb
