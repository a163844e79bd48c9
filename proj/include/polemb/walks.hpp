#pragma once

// Random-walk corpus generation. Walks run on an undirected view of the
// retweet graph (edge weight = summed multiplicity in both directions).
// The second-order bias follows the return/in-out scheme: stepping from
// `cur` with predecessor `prev`, neighbor x gets edge_weight(cur,x) times
//   1/p  if x == prev
//   1    if x is adjacent to prev
//   1/q  otherwise.
// p = q = 1 degenerates to plain weighted first-order walks (DeepWalk).

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "polemb/common.hpp"
#include "polemb/graph.hpp"
#include "polemb/rng.hpp"

namespace polemb {

struct WalkConfig {
    int walks_per_node = 10;
    int walk_length = 80;
    int window = 10;
    double p = 1.0;  // return parameter
    double q = 1.0;  // in-out parameter
    bool weighted = true;          // use retweet counts as edge weights
    bool include_self_loops = false;
    std::uint64_t seed = 1;
    int threads = 1;

    void validate() const {
        if (walks_per_node < 1) throw ConfigError("walks_per_node must be >= 1");
        if (walk_length < 2) throw ConfigError("walk_length must be >= 2");
        if (window < 1) throw ConfigError("window must be >= 1");
        if (!(p > 0.0)) throw ConfigError("p must be > 0");
        if (!(q > 0.0)) throw ConfigError("q must be > 0");
    }
};

// Undirected adjacency with merged weights, neighbors sorted by index,
// cumulative sums for weighted sampling.
class UndirectedView {
public:
    UndirectedView(const InteractionGraph& g, bool weighted = true,
                   bool include_self_loops = false) {
        const std::size_t n = g.node_count();
        std::vector<std::vector<std::pair<NodeIndex, double>>> adj(n);
        for (const auto& e : g.edges()) {
            if (e.src == e.dst) {
                if (!include_self_loops) continue;
                adj[e.src].emplace_back(e.dst, static_cast<double>(e.count));
                continue;
            }
            adj[e.src].emplace_back(e.dst, static_cast<double>(e.count));
            adj[e.dst].emplace_back(e.src, static_cast<double>(e.count));
        }
        offsets_.assign(n + 1, 0);
        for (std::size_t u = 0; u < n; ++u) {
            auto& a = adj[u];
            std::sort(a.begin(), a.end());
            // merge parallel edges (u->v and v->u both contribute)
            std::size_t w = 0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (w > 0 && a[w - 1].first == a[i].first) {
                    a[w - 1].second += a[i].second;
                } else {
                    a[w++] = a[i];
                }
            }
            a.resize(w);
            offsets_[u + 1] = offsets_[u] + w;
        }
        entries_.resize(offsets_[n]);
        for (std::size_t u = 0; u < n; ++u) {
            double cum = 0.0;
            std::size_t base = offsets_[u];
            for (std::size_t i = 0; i < adj[u].size(); ++i) {
                double weight = weighted ? adj[u][i].second : 1.0;
                cum += weight;
                entries_[base + i] = {adj[u][i].first, weight, cum};
            }
        }
    }

    std::size_t node_count() const { return offsets_.size() - 1; }

    std::span<const AdjacencyEntry> neighbors(NodeIndex u) const {
        return {entries_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
    }

    std::size_t degree(NodeIndex u) const { return offsets_[u + 1] - offsets_[u]; }

    double total_weight(NodeIndex u) const {
        auto nb = neighbors(u);
        return nb.empty() ? 0.0 : nb.back().cum;
    }

    bool adjacent(NodeIndex a, NodeIndex b) const {
        auto nb = neighbors(a);
        auto it = std::lower_bound(nb.begin(), nb.end(), b,
                                   [](const AdjacencyEntry& e, NodeIndex v) { return e.neighbor < v; });
        return it != nb.end() && it->neighbor == b;
    }

    // Weighted first-order neighbor draw via the cumulative sums.
    NodeIndex sample_neighbor(NodeIndex u, Rng& rng) const {
        auto nb = neighbors(u);
        const double r = rng.uniform() * nb.back().cum;
        auto it = std::upper_bound(nb.begin(), nb.end(), r,
                                   [](double v, const AdjacencyEntry& e) { return v < e.cum; });
        if (it == nb.end()) --it;
        return it->neighbor;
    }

private:
    std::vector<std::size_t> offsets_;
    std::vector<AdjacencyEntry> entries_;
};

// Unnormalized transition weights out of `cur`, aligned with
// view.neighbors(cur). prev == nullopt is the first step: bias 1 everywhere.
inline std::vector<double> transition_weights(const UndirectedView& view,
                                              std::optional<NodeIndex> prev, NodeIndex cur,
                                              const WalkConfig& cfg) {
    auto nb = view.neighbors(cur);
    std::vector<double> w(nb.size());
    for (std::size_t i = 0; i < nb.size(); ++i) {
        double bias = 1.0;
        if (prev) {
            if (nb[i].neighbor == *prev)
                bias = 1.0 / cfg.p;
            else if (view.adjacent(*prev, nb[i].neighbor))
                bias = 1.0;
            else
                bias = 1.0 / cfg.q;
        }
        w[i] = nb[i].weight * bias;
    }
    return w;
}

inline NodeIndex sample_transition(const UndirectedView& view, std::optional<NodeIndex> prev,
                                   NodeIndex cur, const WalkConfig& cfg, Rng& rng) {
    if (!prev || (cfg.p == 1.0 && cfg.q == 1.0)) return view.sample_neighbor(cur, rng);
    auto nb = view.neighbors(cur);
    auto w = transition_weights(view, prev, cur, cfg);
    double total = 0.0;
    for (double v : w) total += v;
    double r = rng.uniform() * total;
    for (std::size_t i = 0; i < w.size(); ++i) {
        r -= w[i];
        if (r < 0.0) return nb[i].neighbor;
    }
    return nb.back().neighbor;
}

// Flat token storage; sequences[s] spans tokens[offsets[s] .. offsets[s+1]).
struct WalkCorpus {
    std::vector<NodeIndex> tokens;
    std::vector<std::size_t> offsets{0};
    std::vector<std::uint64_t> node_freq;  // occurrences per node over the corpus

    std::size_t sequence_count() const { return offsets.size() - 1; }
    std::span<const NodeIndex> sequence(std::size_t s) const {
        return {tokens.data() + offsets[s], offsets[s + 1] - offsets[s]};
    }
};

// walks_per_node sequences from every non-isolated node. Each walk has its
// own RNG stream derived from (seed, node, walk), so the corpus does not
// depend on scheduling.
inline WalkCorpus generate_walks(const InteractionGraph& g, const WalkConfig& cfg) {
    cfg.validate();
    if (g.node_count() == 0) throw ConfigError("cannot generate walks on an empty graph");
    UndirectedView view(g, cfg.weighted, cfg.include_self_loops);
    const std::size_t n = view.node_count();

    std::vector<NodeIndex> starts;
    starts.reserve(n);
    for (NodeIndex u = 0; u < n; ++u) {
        if (view.degree(u) > 0) starts.push_back(u);
    }

    const std::size_t total_walks = starts.size() * static_cast<std::size_t>(cfg.walks_per_node);
    std::vector<std::vector<NodeIndex>> walks(total_walks);

    auto run_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t w = lo; w < hi; ++w) {
            const NodeIndex start = starts[w / static_cast<std::size_t>(cfg.walks_per_node)];
            const std::uint64_t stream =
                static_cast<std::uint64_t>(start) * static_cast<std::uint64_t>(cfg.walks_per_node) +
                w % static_cast<std::size_t>(cfg.walks_per_node);
            Rng rng(mix_seed(cfg.seed, stream));
            auto& walk = walks[w];
            walk.reserve(static_cast<std::size_t>(cfg.walk_length));
            walk.push_back(start);
            std::optional<NodeIndex> prev;
            NodeIndex cur = start;
            while (walk.size() < static_cast<std::size_t>(cfg.walk_length)) {
                if (view.degree(cur) == 0) break;
                NodeIndex nxt = sample_transition(view, prev, cur, cfg, rng);
                walk.push_back(nxt);
                prev = cur;
                cur = nxt;
            }
        }
    };

    const int nthreads = std::max(1, cfg.threads);
    if (nthreads == 1 || total_walks < 256) {
        run_range(0, total_walks);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (total_walks + nthreads - 1) / nthreads;
        for (int t = 0; t < nthreads; ++t) {
            const std::size_t lo = std::min(total_walks, chunk * static_cast<std::size_t>(t));
            const std::size_t hi = std::min(total_walks, lo + chunk);
            if (lo < hi) pool.emplace_back(run_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    WalkCorpus corpus;
    corpus.node_freq.assign(n, 0);
    std::size_t total_tokens = 0;
    for (const auto& w : walks) total_tokens += w.size();
    corpus.tokens.reserve(total_tokens);
    corpus.offsets.reserve(total_walks + 1);
    for (const auto& w : walks) {
        for (NodeIndex v : w) {
            corpus.tokens.push_back(v);
            ++corpus.node_freq[v];
        }
        corpus.offsets.push_back(corpus.tokens.size());
    }
    return corpus;
}

}  // namespace polemb
