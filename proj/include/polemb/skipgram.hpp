#pragma once

// Skip-gram with negative sampling over a walk corpus. Two tables: W_in
// (center words, the vectors we keep) and W_out (contexts). Noise
// distribution is the unigram frequency raised to 3/4, drawn through an
// alias table. Learning rate decays linearly over all processed centers
// down to min_lr.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "polemb/common.hpp"
#include "polemb/rng.hpp"
#include "polemb/walks.hpp"

namespace polemb {

// Clamped at |x| = 30 where sigma saturates well past double precision of
// the loss; keeps exp() out of overflow territory.
inline double clamped_sigmoid(double x) {
    if (x > 30.0) return 1.0;
    if (x < -30.0) return 0.0;
    return 1.0 / (1.0 + std::exp(-x));
}

// log(1 + e^x) without overflow.
inline double softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return 0.0;
    return std::log1p(std::exp(x));
}

// SGNS loss for one (center,context) pair given the dot products:
//   -log sigma(pos) - sum_k log sigma(-neg_k)
inline double sgns_pair_loss(double pos_dot, std::span<const double> neg_dots) {
    double loss = softplus(-pos_dot);
    for (double nd : neg_dots) loss += softplus(nd);
    return loss;
}

struct SkipgramConfig {
    int dim = 20;
    int window = 10;  // symmetric context radius within a sequence
    int negatives = 5;
    int epochs = 1;
    double lr = 0.025;
    double min_lr = 1e-4;
    double ns_power = 0.75;  // exponent on target frequency for negatives
    std::uint64_t seed = 1;
    int threads = 1;

    void validate() const {
        if (dim < 1) throw ConfigError("dim must be >= 1");
        if (window < 1) throw ConfigError("window must be >= 1");
        if (negatives < 1) throw ConfigError("negatives must be >= 1");
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
        if (ns_power < 0.0 || ns_power > 1.0)
            throw ConfigError("ns_power must be in [0, 1]");
    }
};

class NegativeSampler {
public:
    NegativeSampler(std::span<const std::uint64_t> freq, double power = 0.75) {
        std::vector<double> w(freq.size());
        for (std::size_t i = 0; i < freq.size(); ++i)
            w[i] = freq[i] > 0 ? std::pow(static_cast<double>(freq[i]), power) : 0.0;
        table_.emplace(std::span<const double>(w));
    }

    // Rejects the positive target; falls back to it only if 16 draws all
    // collide (possible on near-degenerate corpora, harmless).
    NodeIndex sample(NodeIndex positive, Rng& rng) const {
        for (int attempt = 0; attempt < 16; ++attempt) {
            auto v = static_cast<NodeIndex>(table_->sample(rng));
            if (v != positive) return v;
        }
        return positive;
    }

    const AliasTable& table() const { return *table_; }

private:
    std::optional<AliasTable> table_;
};

struct SkipgramModel {
    std::vector<double> w_in;   // node-major, dim columns
    std::vector<double> w_out;
    int dim = 0;

    std::span<const double> in_row(NodeIndex u) const {
        return {w_in.data() + static_cast<std::size_t>(u) * dim, static_cast<std::size_t>(dim)};
    }
    std::span<const double> out_row(NodeIndex u) const {
        return {w_out.data() + static_cast<std::size_t>(u) * dim, static_cast<std::size_t>(dim)};
    }
};

namespace detail {

// One center/context update; returns the loss before the step.
// grad wrt dot: sigma(dot) - label.
inline double sgns_update(double* center, double* context_pos, int dim,
                          std::span<double* const> contexts_neg, double lr) {
    thread_local std::vector<double> center_grad;
    center_grad.assign(static_cast<std::size_t>(dim), 0.0);

    double pos_dot = 0.0;
    for (int k = 0; k < dim; ++k) pos_dot += center[k] * context_pos[k];
    double loss = softplus(-pos_dot);
    double g = clamped_sigmoid(pos_dot) - 1.0;
    for (int k = 0; k < dim; ++k) {
        center_grad[k] += g * context_pos[k];
        context_pos[k] -= lr * g * center[k];
    }
    for (double* neg : contexts_neg) {
        double nd = 0.0;
        for (int k = 0; k < dim; ++k) nd += center[k] * neg[k];
        loss += softplus(nd);
        double gn = clamped_sigmoid(nd);
        for (int k = 0; k < dim; ++k) {
            center_grad[k] += gn * neg[k];
            neg[k] -= lr * gn * center[k];
        }
    }
    for (int k = 0; k < dim; ++k) center[k] -= lr * center_grad[k];
    return loss;
}

}  // namespace detail

// Trains SGNS over the corpus. node_count rows even for nodes absent from
// the corpus (their vectors stay at the init). Deterministic for a fixed
// seed when threads == 1; multi-threaded training uses lock-free shared
// updates and is only run-to-run stable in expectation.
inline SkipgramModel train_skipgram(const WalkCorpus& corpus, std::size_t node_count,
                                    const SkipgramConfig& cfg) {
    cfg.validate();
    if (corpus.tokens.empty()) throw ConfigError("walk corpus is empty");
    if (corpus.node_freq.size() != node_count)
        throw ConfigError("corpus frequency table does not match node count");

    SkipgramModel model;
    model.dim = cfg.dim;
    const std::size_t cells = node_count * static_cast<std::size_t>(cfg.dim);
    model.w_in.resize(cells);
    model.w_out.assign(cells, 0.0);
    {
        Rng init_rng(mix_seed(cfg.seed, 0x1a17));
        const double half = 0.5 / cfg.dim;
        for (auto& v : model.w_in) v = init_rng.uniform(-half, half);
    }

    NegativeSampler sampler(corpus.node_freq, cfg.ns_power);

    // Total centers across all epochs, for the linear lr schedule.
    const std::size_t centers_per_epoch = corpus.tokens.size();
    const double total_centers =
        static_cast<double>(centers_per_epoch) * static_cast<double>(cfg.epochs);
    std::atomic<std::size_t> processed{0};

    auto train_sequences = [&](std::span<const std::size_t> seq_ids, std::uint64_t stream) {
        Rng rng(mix_seed(cfg.seed, stream));
        std::vector<double*> negs(static_cast<std::size_t>(cfg.negatives));
        for (std::size_t sid : seq_ids) {
            auto seq = corpus.sequence(sid);
            const std::size_t done =
                processed.fetch_add(seq.size(), std::memory_order_relaxed);
            double lr = cfg.lr * (1.0 - static_cast<double>(done) / total_centers);
            if (lr < cfg.min_lr) lr = cfg.min_lr;
            for (std::size_t c = 0; c < seq.size(); ++c) {
                const NodeIndex center = seq[c];
                const std::size_t lo = c >= static_cast<std::size_t>(cfg.window)
                                           ? c - static_cast<std::size_t>(cfg.window)
                                           : 0;
                const std::size_t hi =
                    std::min(seq.size(), c + static_cast<std::size_t>(cfg.window) + 1);
                for (std::size_t j = lo; j < hi; ++j) {
                    if (j == c) continue;
                    const NodeIndex ctx = seq[j];
                    for (int k = 0; k < cfg.negatives; ++k) {
                        NodeIndex nv = sampler.sample(ctx, rng);
                        negs[static_cast<std::size_t>(k)] =
                            model.w_out.data() + static_cast<std::size_t>(nv) * cfg.dim;
                    }
                    detail::sgns_update(
                        model.w_in.data() + static_cast<std::size_t>(center) * cfg.dim,
                        model.w_out.data() + static_cast<std::size_t>(ctx) * cfg.dim, cfg.dim,
                        std::span<double* const>(negs.data(), negs.size()), lr);
                }
            }
        }
    };

    const std::size_t nseq = corpus.sequence_count();
    std::vector<std::size_t> order(nseq);
    for (std::size_t i = 0; i < nseq; ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(mix_seed(cfg.seed, 0x5f0 + static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = nseq; i > 1; --i) {
            std::size_t j = shuffle_rng.below(i);
            std::swap(order[i - 1], order[j]);
        }
        const int nthreads = std::max(1, cfg.threads);
        if (nthreads == 1 || nseq < 64) {
            train_sequences(order, 0x900d + static_cast<std::uint64_t>(epoch));
        } else {
            std::vector<std::thread> pool;
            const std::size_t chunk = (nseq + nthreads - 1) / nthreads;
            for (int t = 0; t < nthreads; ++t) {
                const std::size_t lo = std::min(nseq, chunk * static_cast<std::size_t>(t));
                const std::size_t hi = std::min(nseq, lo + chunk);
                if (lo >= hi) continue;
                pool.emplace_back(train_sequences,
                                  std::span<const std::size_t>(order.data() + lo, hi - lo),
                                  0x900d + static_cast<std::uint64_t>(epoch) * 131 +
                                      static_cast<std::uint64_t>(t));
            }
            for (auto& th : pool) th.join();
        }
    }
    return model;
}

}  // namespace polemb
