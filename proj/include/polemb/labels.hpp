#pragma once

// Labeled users: user -> (region, party, tier) plus per-region ordered party
// catalogs. Tier thresholds (supporters follow >= 5 members, sympathizers
// <= 2) are collection-time semantics carried as metadata; nothing here
// recomputes follower counts.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "polemb/common.hpp"
#include "polemb/graph.hpp"

namespace polemb {

enum class Tier { Member, Supporter, Sympathizer };

inline std::optional<Tier> parse_tier(std::string_view s) {
    std::string t(s);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "member") return Tier::Member;
    if (t == "supporter") return Tier::Supporter;
    if (t == "sympathizer") return Tier::Sympathizer;
    return std::nullopt;
}

inline const char* tier_name(Tier t) {
    switch (t) {
        case Tier::Member: return "member";
        case Tier::Supporter: return "supporter";
        case Tier::Sympathizer: return "sympathizer";
    }
    return "?";
}

struct PartyInfo {
    std::string name;
    std::string color;  // hex, e.g. "#e41a1c"
};

struct UserLabel {
    std::string region;
    std::uint32_t party = 0;  // index into the region's catalog
    Tier tier = Tier::Member;
};

inline const std::vector<std::string>& default_palette() {
    static const std::vector<std::string> palette = {
        "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00",
        "#a65628", "#f781bf", "#17becf", "#999999", "#66c2a5",
    };
    return palette;
}

class LabelSet {
public:
    // Registers a party (no-op if already present). Order of first
    // registration defines the class index within the region.
    std::uint32_t add_party(const std::string& region, const std::string& party,
                            std::string color = "") {
        auto& cat = catalog_[region];
        for (std::uint32_t i = 0; i < cat.size(); ++i) {
            if (cat[i].name == party) return i;
        }
        if (std::find(region_order_.begin(), region_order_.end(), region) == region_order_.end()) {
            region_order_.push_back(region);
        }
        if (color.empty()) color = default_palette()[cat.size() % default_palette().size()];
        cat.push_back({party, std::move(color)});
        return static_cast<std::uint32_t>(cat.size() - 1);
    }

    void add(UserId user, const std::string& region, const std::string& party, Tier tier,
             bool party_must_exist = false) {
        if (assignments_.count(user)) {
            throw DataError("duplicate label for user " + std::to_string(user));
        }
        auto it = catalog_.find(region);
        std::uint32_t party_idx;
        if (party_must_exist) {
            if (it == catalog_.end()) throw DataError("region not in catalog: " + region);
            const auto& cat = it->second;
            auto p = std::find_if(cat.begin(), cat.end(),
                                  [&](const PartyInfo& pi) { return pi.name == party; });
            if (p == cat.end()) {
                throw DataError("party '" + party + "' not in catalog for region " + region);
            }
            party_idx = static_cast<std::uint32_t>(p - cat.begin());
        } else {
            party_idx = add_party(region, party);
        }
        assignments_[user] = UserLabel{region, party_idx, tier};
        region_users_[region].push_back(user);
    }

    std::optional<UserLabel> label(UserId user) const {
        auto it = assignments_.find(user);
        if (it == assignments_.end()) return std::nullopt;
        return it->second;
    }

    const std::vector<std::string>& regions() const { return region_order_; }

    const std::vector<PartyInfo>& parties(const std::string& region) const {
        auto it = catalog_.find(region);
        if (it == catalog_.end()) throw DataError("unknown region: " + region);
        return it->second;
    }

    // Users of a region (optionally one tier), sorted by id.
    std::vector<UserId> users_in(const std::string& region,
                                 std::optional<Tier> tier = std::nullopt) const {
        std::vector<UserId> out;
        auto it = region_users_.find(region);
        if (it == region_users_.end()) return out;
        for (UserId u : it->second) {
            const auto& lab = assignments_.at(u);
            if (!tier || lab.tier == *tier) out.push_back(u);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    std::vector<std::size_t> class_counts(const std::string& region, Tier tier) const {
        std::vector<std::size_t> counts(parties(region).size(), 0);
        for (UserId u : users_in(region, tier)) ++counts[assignments_.at(u).party];
        return counts;
    }

    std::size_t size() const { return assignments_.size(); }

private:
    std::unordered_map<UserId, UserLabel> assignments_;
    std::map<std::string, std::vector<PartyInfo>> catalog_;
    std::map<std::string, std::vector<UserId>> region_users_;
    std::vector<std::string> region_order_;
};

// Catalog file: region <TAB> party <TAB> color, order defines class indices.
inline LabelSet load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open catalog file: " + path);
    LabelSet ls;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        auto cols = split_ws(sv);
        if (cols.size() != 3) {
            throw DataError(path + ":" + std::to_string(lineno) + ": expected 3 columns");
        }
        ls.add_party(std::string(cols[0]), std::string(cols[1]), std::string(cols[2]));
    }
    return ls;
}

// Label file: user_id region party tier. With a catalog file the parties
// must already exist; otherwise the catalog is inferred in first-appearance
// order with palette colors.
inline LabelSet ingest_labels(const std::string& path, const std::string& catalog_path = "") {
    LabelSet ls;
    bool has_catalog = !catalog_path.empty();
    if (has_catalog) ls = load_catalog(catalog_path);
    std::ifstream in(path);
    if (!in) throw DataError("cannot open label file: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        auto cols = split_ws(sv);
        if (cols.size() != 4) {
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": expected 4 columns (user region party tier)");
        }
        UserId id;
        if (!parse_u64(cols[0], id)) {
            throw DataError(path + ":" + std::to_string(lineno) + ": malformed user id");
        }
        auto tier = parse_tier(cols[3]);
        if (!tier) {
            throw DataError(path + ":" + std::to_string(lineno) + ": unknown tier '" +
                            std::string(cols[3]) + "'");
        }
        ls.add(id, std::string(cols[1]), std::string(cols[2]), *tier, has_catalog);
    }
    return ls;
}

inline std::string export_labels(const LabelSet& ls) {
    std::string out;
    for (const auto& region : ls.regions()) {
        const auto& parties = ls.parties(region);
        for (UserId u : ls.users_in(region)) {
            const auto lab = *ls.label(u);
            out += std::to_string(u);
            out += '\t';
            out += region;
            out += '\t';
            out += parties[lab.party].name;
            out += '\t';
            out += tier_name(lab.tier);
            out += '\n';
        }
    }
    return out;
}

inline std::string export_catalog(const LabelSet& ls) {
    std::string out;
    for (const auto& region : ls.regions()) {
        for (const auto& p : ls.parties(region)) {
            out += region;
            out += '\t';
            out += p.name;
            out += '\t';
            out += p.color;
            out += '\n';
        }
    }
    return out;
}

}  // namespace polemb
