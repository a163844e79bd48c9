#pragma once

// Dense user representations and their on-disk format:
//   header:  dim=<d>\tmethod=<name>\tseed=<s>[\tkey=value ...]
//   rows:    external_id \t v1 \t ... \t vd
// Floats are written in shortest round-trip form, so identical matrices
// serialize to identical bytes.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "polemb/common.hpp"
#include "polemb/graph.hpp"

namespace polemb {

class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    EmbeddingMatrix(int dim, std::string method, std::uint64_t seed)
        : dim_(dim), method_(std::move(method)), seed_(seed) {
        if (dim_ < 1) throw ConfigError("embedding dim must be >= 1");
    }

    void reserve(std::size_t n) {
        ids_.reserve(n);
        data_.reserve(n * static_cast<std::size_t>(dim_));
        index_.reserve(n);
    }

    void add_row(UserId id, std::span<const double> values) {
        if (static_cast<int>(values.size()) != dim_) {
            throw DataError("embedding row has wrong dimension");
        }
        if (index_.count(id)) throw DataError("duplicate embedding row for user " + std::to_string(id));
        index_[id] = ids_.size();
        ids_.push_back(id);
        data_.insert(data_.end(), values.begin(), values.end());
    }

    std::size_t size() const { return ids_.size(); }
    int dim() const { return dim_; }
    const std::string& method() const { return method_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<UserId>& ids() const { return ids_; }
    const std::vector<double>& data() const { return data_; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    std::span<double> row(std::size_t i) {
        return {data_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }

    std::optional<std::size_t> find(UserId id) const {
        auto it = index_.find(id);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    void set_extra(const std::string& key, const std::string& value) {
        for (auto& kv : extra_) {
            if (kv.first == key) {
                kv.second = value;
                return;
            }
        }
        extra_.emplace_back(key, value);
    }
    const std::vector<std::pair<std::string, std::string>>& extra() const { return extra_; }
    std::optional<std::string> extra_value(const std::string& key) const {
        for (const auto& kv : extra_) {
            if (kv.first == key) return kv.second;
        }
        return std::nullopt;
    }

    bool all_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

private:
    int dim_ = 0;
    std::string method_;
    std::uint64_t seed_ = 0;
    std::vector<UserId> ids_;
    std::vector<double> data_;
    std::vector<std::pair<std::string, std::string>> extra_;
    std::unordered_map<UserId, std::size_t> index_;
};

inline std::string serialize_embedding(const EmbeddingMatrix& m) {
    std::string out = "dim=" + std::to_string(m.dim()) + "\tmethod=" + m.method() +
                      "\tseed=" + std::to_string(m.seed());
    for (const auto& [k, v] : m.extra()) out += "\t" + k + "=" + v;
    out += '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        out += std::to_string(m.ids()[i]);
        for (double v : m.row(i)) {
            out += '\t';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

inline void save_embedding(const EmbeddingMatrix& m, const std::string& path) {
    write_file(path, serialize_embedding(m));
}

inline EmbeddingMatrix load_embedding(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open embedding file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty embedding file: " + path);
    int dim = 0;
    std::string method = "unknown";
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> extra;
    for (auto tok : split_ws(line)) {
        auto eq = tok.find('=');
        if (eq == std::string_view::npos) {
            throw DataError(path + ": malformed header token '" + std::string(tok) + "'");
        }
        std::string key(tok.substr(0, eq));
        std::string value(tok.substr(eq + 1));
        if (key == "dim") {
            std::int64_t d;
            if (!parse_i64(value, d) || d < 1) throw DataError(path + ": bad dim in header");
            dim = static_cast<int>(d);
        } else if (key == "method") {
            method = value;
        } else if (key == "seed") {
            if (!parse_u64(value, seed)) throw DataError(path + ": bad seed in header");
        } else {
            extra.emplace_back(key, value);
        }
    }
    if (dim == 0) throw DataError(path + ": header is missing dim=");
    EmbeddingMatrix m(dim, method, seed);
    for (const auto& [k, v] : extra) m.set_extra(k, v);
    std::vector<double> buf(static_cast<std::size_t>(dim));
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        auto cols = split_ws(sv);
        if (cols.size() != static_cast<std::size_t>(dim) + 1) {
            throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(dim + 1) + " columns");
        }
        UserId id;
        if (!parse_u64(cols[0], id)) {
            throw DataError(path + ":" + std::to_string(lineno) + ": malformed user id");
        }
        for (int j = 0; j < dim; ++j) {
            if (!parse_double(cols[static_cast<std::size_t>(j) + 1], buf[static_cast<std::size_t>(j)])) {
                throw DataError(path + ":" + std::to_string(lineno) + ": malformed float");
            }
        }
        m.add_row(id, buf);
    }
    return m;
}

// Rows for the requested ids, in the given order. Missing ids are skipped
// and reported through `missing` when provided.
inline EmbeddingMatrix subset_embedding(const EmbeddingMatrix& m, std::span<const UserId> ids,
                                        std::vector<UserId>* missing = nullptr) {
    EmbeddingMatrix out(m.dim(), m.method(), m.seed());
    for (const auto& kv : m.extra()) out.set_extra(kv.first, kv.second);
    out.reserve(ids.size());
    for (UserId id : ids) {
        if (auto idx = m.find(id)) {
            out.add_row(id, m.row(*idx));
        } else if (missing) {
            missing->push_back(id);
        }
    }
    return out;
}

}  // namespace polemb
