#pragma once

// Synthetic retweet graphs with planted party structure. Every retweet
// lands on a member: with probability 1-mu the source picks a member of
// its own party (preferentially, weight 1 + hub_bias * current in-degree),
// otherwise a uniform member of a different party. The cross-party event
// fraction per tier is therefore mu itself, binomially distributed.
// Interacting users carry a hidden party preference and behave like
// sympathizers but are left out of the label file.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "polemb/common.hpp"
#include "polemb/graph.hpp"
#include "polemb/labels.hpp"
#include "polemb/rng.hpp"

namespace polemb {

struct TierSpec {
    int per_party = 0;
    double mu = 0.0;  // out-of-party mixing probability
};

struct RegionSpec {
    std::string name;
    int parties = 2;
    TierSpec members{40, 0.05};
    TierSpec supporters{90, 0.15};
    TierSpec sympathizers{85, 0.35};
    int interacting = 5000;
    double interacting_mu = 0.35;
    double mean_retweets = 33.0;   // per user, log-normal across users
    double activity_sigma = 1.0;
    double hub_bias = 1.0;

    void validate() const {
        if (name.empty()) throw ConfigError("region needs a name");
        if (parties < 2) throw ConfigError("parties must be >= 2");
        if (members.per_party < 1)
            throw ConfigError("each party needs at least one member");
        if (supporters.per_party < 0 || sympathizers.per_party < 0 || interacting < 0)
            throw ConfigError("negative user count");
        for (double mu : {members.mu, supporters.mu, sympathizers.mu, interacting_mu})
            if (mu < 0.0 || mu > 1.0) throw ConfigError("mu must be in [0, 1]");
        if (!(mean_retweets > 0.0)) throw ConfigError("mean_retweets must be > 0");
        if (!(activity_sigma >= 0.0)) throw ConfigError("activity_sigma must be >= 0");
        if (hub_bias < 0.0) throw ConfigError("hub_bias must be >= 0");
    }
};

struct SynthConfig {
    std::vector<RegionSpec> regions;
    std::uint64_t seed = 42;

    void validate() const {
        if (regions.empty()) throw ConfigError("no regions configured");
        for (const auto& r : regions) r.validate();
    }
};

// Three regions shaped like a small multi-party country: two five-party
// systems and a four-party one, each with its own independent graph.
inline SynthConfig uk_like_preset(std::uint64_t seed = 42) {
    SynthConfig cfg;
    cfg.seed = seed;
    const int ks[3] = {5, 4, 5};
    for (int i = 0; i < 3; ++i) {
        RegionSpec r;
        r.name = "R" + std::to_string(i + 1);
        r.parties = ks[i];
        cfg.regions.push_back(std::move(r));
    }
    return cfg;
}

struct SynthRegion {
    std::string name;
    std::vector<RetweetEdge> edges;  // one entry per retweet event
};

struct SynthResult {
    std::vector<SynthRegion> regions;
    LabelSet labels;
};

namespace detail {

// Log-normal with the requested mean: ln-scale location is shifted down by
// sigma^2/2. Rounded up to at least one event per user.
inline std::uint64_t draw_activity(Rng& rng, double mean, double sigma) {
    const double mu_ln = std::log(mean) - 0.5 * sigma * sigma;
    const double v = std::exp(mu_ln + sigma * rng.normal());
    const double r = std::llround(v);
    return r < 1.0 ? 1 : static_cast<std::uint64_t>(r);
}

}  // namespace detail

inline SynthResult generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    SynthResult out;

    for (std::size_t ridx = 0; ridx < cfg.regions.size(); ++ridx) {
        const RegionSpec& spec = cfg.regions[ridx];
        Rng rng(mix_seed(cfg.seed, 0x9e0 + ridx));
        const UserId base = static_cast<UserId>(ridx + 1) * 10'000'000ull;
        const int k = spec.parties;

        SynthRegion region;
        region.name = spec.name;

        struct Source {
            UserId id;
            int party;       // latent for interacting users
            double mu;
            bool is_member;  // members may not retweet themselves
        };
        std::vector<Source> sources;
        std::vector<std::vector<UserId>> party_members(static_cast<std::size_t>(k));
        std::vector<UserId> all_members;

        UserId next_id = base;
        for (int p = 0; p < k; ++p) {
            const std::string party = "P" + std::to_string(p + 1);
            out.labels.add_party(spec.name, party);
            for (int i = 0; i < spec.members.per_party; ++i) {
                const UserId id = next_id++;
                out.labels.add(id, spec.name, party, Tier::Member);
                party_members[static_cast<std::size_t>(p)].push_back(id);
                all_members.push_back(id);
                sources.push_back({id, p, spec.members.mu, true});
            }
        }
        for (int p = 0; p < k; ++p) {
            const std::string party = "P" + std::to_string(p + 1);
            for (int i = 0; i < spec.supporters.per_party; ++i) {
                const UserId id = next_id++;
                out.labels.add(id, spec.name, party, Tier::Supporter);
                sources.push_back({id, p, spec.supporters.mu, false});
            }
        }
        for (int p = 0; p < k; ++p) {
            const std::string party = "P" + std::to_string(p + 1);
            for (int i = 0; i < spec.sympathizers.per_party; ++i) {
                const UserId id = next_id++;
                out.labels.add(id, spec.name, party, Tier::Sympathizer);
                sources.push_back({id, p, spec.sympathizers.mu, false});
            }
        }
        for (int i = 0; i < spec.interacting; ++i) {
            const UserId id = next_id++;
            const int latent = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
            sources.push_back({id, latent, spec.interacting_mu, false});
        }

        // dynamic preferential state: per-member in-degree plus per-party
        // totals so a draw is one scan over the party roster
        std::vector<std::uint64_t> indeg(all_members.size(), 0);
        std::vector<double> party_weight(static_cast<std::size_t>(k));
        for (int p = 0; p < k; ++p)
            party_weight[static_cast<std::size_t>(p)] =
                static_cast<double>(party_members[static_cast<std::size_t>(p)].size());
        // member ids are allocated first and contiguously from base
        auto slot_of = [&](UserId id) { return static_cast<std::size_t>(id - base); };

        auto draw_preferential = [&](int party, UserId self) -> UserId {
            const auto& roster = party_members[static_cast<std::size_t>(party)];
            for (int attempt = 0; attempt < 64; ++attempt) {
                double r = rng.uniform() * party_weight[static_cast<std::size_t>(party)];
                UserId picked = roster.back();
                for (UserId m : roster) {
                    const double w =
                        1.0 + spec.hub_bias * static_cast<double>(indeg[slot_of(m)]);
                    r -= w;
                    if (r < 0.0) {
                        picked = m;
                        break;
                    }
                }
                if (picked != self) return picked;
            }
            return roster.back() != self ? roster.back() : roster.front();
        };
        // uniform over members of every party except the source's own;
        // rejection is cheap because at least half the roster qualifies
        // for K >= 2 with equal party sizes
        auto draw_cross = [&](int own_party) -> UserId {
            for (;;) {
                const UserId m = all_members[rng.below(all_members.size())];
                if ((*out.labels.label(m)).party != static_cast<std::uint32_t>(own_party))
                    return m;
            }
        };

        region.edges.reserve(static_cast<std::size_t>(
            static_cast<double>(sources.size()) * spec.mean_retweets * 1.2));
        const bool own_party_targetable = spec.members.per_party > 1;
        for (const Source& s : sources) {
            const std::uint64_t events =
                detail::draw_activity(rng, spec.mean_retweets, spec.activity_sigma);
            const UserId self = s.is_member ? s.id : 0;  // 0 never collides with real ids
            for (std::uint64_t e = 0; e < events; ++e) {
                UserId target;
                // a lone member cannot retweet inside its own party
                const bool in_party =
                    rng.uniform() < 1.0 - s.mu && (!s.is_member || own_party_targetable);
                if (in_party) {
                    target = draw_preferential(s.party, self);
                } else {
                    target = draw_cross(s.party);
                }
                region.edges.push_back(RetweetEdge{s.id, target, 1});
                ++indeg[slot_of(target)];
                const auto tp = static_cast<std::size_t>(
                    (*out.labels.label(target)).party);
                party_weight[tp] += spec.hub_bias;
            }
        }
        out.regions.push_back(std::move(region));
    }
    return out;
}

// Fraction of events whose source holds the given tier label and whose
// target member belongs to a different party; approaches mu_tier.
inline double cross_party_fraction(const SynthResult& data, const std::string& region,
                                   Tier tier) {
    const SynthRegion* reg = nullptr;
    for (const auto& r : data.regions)
        if (r.name == region) reg = &r;
    if (!reg) throw ConfigError("unknown region: " + region);
    std::uint64_t total = 0, cross = 0;
    for (const auto& e : reg->edges) {
        const auto src = data.labels.label(e.source);
        if (!src || src->tier != tier || src->region != region) continue;
        const auto dst = data.labels.label(e.target);
        total += e.count;
        if (dst && dst->party != src->party) cross += e.count;
    }
    if (total == 0) throw DataError("no events from that tier in region " + region);
    return static_cast<double>(cross) / static_cast<double>(total);
}

}  // namespace polemb
