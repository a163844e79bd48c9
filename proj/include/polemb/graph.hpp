#pragma once

// Directed retweet interaction multigraph. Edge records (source retweeted
// target) aggregate into weighted directed edges; users are remapped to
// dense indices 0..N-1 (sorted by external id) for array-indexed kernels.
// Adjacency lists carry cumulative weights so weighted neighbor sampling
// is a binary search.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "polemb/common.hpp"

namespace polemb {

using UserId = std::uint64_t;
using NodeIndex = std::uint32_t;

struct RetweetEdge {
    UserId source = 0;  // author of the retweet
    UserId target = 0;  // user being retweeted
    std::uint64_t count = 1;
};

struct InternalEdge {
    NodeIndex src = 0;
    NodeIndex dst = 0;
    std::uint64_t count = 1;
};

struct AdjacencyEntry {
    NodeIndex neighbor = 0;
    double weight = 0.0;
    double cum = 0.0;  // cumulative weight up to and including this entry
};

class InteractionGraph {
public:
    InteractionGraph() = default;

    static InteractionGraph from_edges(std::vector<RetweetEdge> records) {
        InteractionGraph g;
        g.users_.reserve(records.size() * 2);
        for (const auto& r : records) {
            g.users_.push_back(r.source);
            g.users_.push_back(r.target);
        }
        std::sort(g.users_.begin(), g.users_.end());
        g.users_.erase(std::unique(g.users_.begin(), g.users_.end()), g.users_.end());
        g.index_.reserve(g.users_.size());
        for (NodeIndex i = 0; i < g.users_.size(); ++i) g.index_[g.users_[i]] = i;

        g.edges_.reserve(records.size());
        for (const auto& r : records) {
            if (r.count == 0) throw DataError("edge multiplicity must be positive");
            g.edges_.push_back({g.index_.at(r.source), g.index_.at(r.target), r.count});
        }
        std::sort(g.edges_.begin(), g.edges_.end(), [](const InternalEdge& a, const InternalEdge& b) {
            return a.src != b.src ? a.src < b.src : a.dst < b.dst;
        });
        // aggregate duplicate (src,dst) records
        std::size_t w = 0;
        for (std::size_t i = 0; i < g.edges_.size(); ++i) {
            if (w > 0 && g.edges_[w - 1].src == g.edges_[i].src && g.edges_[w - 1].dst == g.edges_[i].dst) {
                g.edges_[w - 1].count += g.edges_[i].count;
            } else {
                g.edges_[w++] = g.edges_[i];
            }
        }
        g.edges_.resize(w);

        for (const auto& e : g.edges_) {
            g.total_retweets_ += e.count;
            if (e.src == e.dst) ++g.self_loops_;
        }
        g.build_adjacency();
        return g;
    }

    std::size_t node_count() const { return users_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    std::uint64_t total_retweets() const { return total_retweets_; }
    std::size_t self_loop_count() const { return self_loops_; }

    const std::vector<UserId>& users() const { return users_; }
    UserId user_at(NodeIndex i) const { return users_[i]; }

    std::optional<NodeIndex> index_of(UserId id) const {
        auto it = index_.find(id);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::vector<InternalEdge>& edges() const { return edges_; }

    std::span<const AdjacencyEntry> out_neighbors(NodeIndex u) const {
        return {out_entries_.data() + out_offsets_[u], out_offsets_[u + 1] - out_offsets_[u]};
    }
    std::span<const AdjacencyEntry> in_neighbors(NodeIndex u) const {
        return {in_entries_.data() + in_offsets_[u], in_offsets_[u + 1] - in_offsets_[u]};
    }

    double out_weight(NodeIndex u) const {
        auto nb = out_neighbors(u);
        return nb.empty() ? 0.0 : nb.back().cum;
    }
    double in_weight(NodeIndex u) const {
        auto nb = in_neighbors(u);
        return nb.empty() ? 0.0 : nb.back().cum;
    }

    // Emits every (source, target) pair `count` times, in edge order.
    template <class F>
    void for_each_pair(F&& f, bool skip_self = false) const {
        for (const auto& e : edges_) {
            if (skip_self && e.src == e.dst) continue;
            for (std::uint64_t c = 0; c < e.count; ++c) f(e.src, e.dst);
        }
    }

    // Materialized pair stream with external ids; intended for small graphs
    // and tests. Large runs should use for_each_pair.
    std::vector<std::pair<UserId, UserId>> edge_pairs(bool skip_self = false) const {
        std::vector<std::pair<UserId, UserId>> out;
        for_each_pair([&](NodeIndex s, NodeIndex t) { out.emplace_back(users_[s], users_[t]); },
                      skip_self);
        return out;
    }

private:
    void build_adjacency() {
        const std::size_t n = users_.size();
        out_offsets_.assign(n + 1, 0);
        in_offsets_.assign(n + 1, 0);
        for (const auto& e : edges_) {
            ++out_offsets_[e.src + 1];
            ++in_offsets_[e.dst + 1];
        }
        for (std::size_t i = 0; i < n; ++i) {
            out_offsets_[i + 1] += out_offsets_[i];
            in_offsets_[i + 1] += in_offsets_[i];
        }
        out_entries_.resize(edges_.size());
        in_entries_.resize(edges_.size());
        std::vector<std::size_t> ocur(out_offsets_.begin(), out_offsets_.end() - 1);
        std::vector<std::size_t> icur(in_offsets_.begin(), in_offsets_.end() - 1);
        for (const auto& e : edges_) {
            out_entries_[ocur[e.src]++] = {e.dst, static_cast<double>(e.count), 0.0};
            in_entries_[icur[e.dst]++] = {e.src, static_cast<double>(e.count), 0.0};
        }
        auto fill_cum = [](std::vector<AdjacencyEntry>& entries, const std::vector<std::size_t>& off,
                           std::size_t n_nodes) {
            for (std::size_t u = 0; u < n_nodes; ++u) {
                double cum = 0.0;
                for (std::size_t k = off[u]; k < off[u + 1]; ++k) {
                    cum += entries[k].weight;
                    entries[k].cum = cum;
                }
            }
        };
        fill_cum(out_entries_, out_offsets_, n);
        fill_cum(in_entries_, in_offsets_, n);
    }

    std::vector<UserId> users_;
    std::unordered_map<UserId, NodeIndex> index_;
    std::vector<InternalEdge> edges_;
    std::vector<std::size_t> out_offsets_, in_offsets_;
    std::vector<AdjacencyEntry> out_entries_, in_entries_;
    std::uint64_t total_retweets_ = 0;
    std::size_t self_loops_ = 0;
};

// Edge list files: UTF-8, whitespace separated, "source target [count]",
// '#' comment lines and blank lines skipped. Duplicate (source,target)
// records sum their multiplicities.
inline InteractionGraph ingest_edges(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open edge file: " + path);
    std::vector<RetweetEdge> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        auto cols = split_ws(sv);
        if (cols.size() != 2 && cols.size() != 3) {
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": expected 2 or 3 columns, got " + std::to_string(cols.size()));
        }
        RetweetEdge e;
        if (!parse_u64(cols[0], e.source) || !parse_u64(cols[1], e.target)) {
            throw DataError(path + ":" + std::to_string(lineno) + ": malformed user id");
        }
        if (cols.size() == 3) {
            if (!parse_u64(cols[2], e.count) || e.count == 0) {
                throw DataError(path + ":" + std::to_string(lineno) +
                                ": count must be a positive integer");
            }
        }
        records.push_back(e);
    }
    return InteractionGraph::from_edges(std::move(records));
}

// Canonical form: aggregated, sorted by (source, target), three columns.
inline std::string export_edges(const InteractionGraph& g) {
    std::string out;
    for (const auto& e : g.edges()) {
        out += std::to_string(g.user_at(e.src));
        out += '\t';
        out += std::to_string(g.user_at(e.dst));
        out += '\t';
        out += std::to_string(e.count);
        out += '\n';
    }
    return out;
}

inline void export_edges_file(const InteractionGraph& g, const std::string& path) {
    write_file(path, export_edges(g));
}

// internal_index <TAB> external_id, one row per user.
inline void write_user_map(const InteractionGraph& g, const std::string& path) {
    std::string out;
    for (NodeIndex i = 0; i < g.node_count(); ++i) {
        out += std::to_string(i);
        out += '\t';
        out += std::to_string(g.user_at(i));
        out += '\n';
    }
    write_file(path, out);
}

}  // namespace polemb
