#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "polemb/graph.hpp"
#include "polemb/relational.hpp"

using namespace polemb;

TEST_CASE("relational config validation", "[relational]") {
    auto g = testutil::triangle_graph();
    RelationalConfig cfg;
    cfg.dim = 0;
    CHECK_THROWS_AS(train_relational(g, cfg), ConfigError);
    cfg = {};
    cfg.negatives = 0;
    CHECK_THROWS_AS(train_relational(g, cfg), ConfigError);
    cfg = {};
    cfg.epochs = 0;
    CHECK_THROWS_AS(train_relational(g, cfg), ConfigError);
    cfg = {};
    cfg.lr = -1.0;
    CHECK_THROWS_AS(train_relational(g, cfg), ConfigError);
    cfg = {};
    cfg.share_tables = true;
    cfg.concat = true;
    CHECK_THROWS_AS(train_relational(g, cfg), ConfigError);
    CHECK_THROWS_AS(train_relational(InteractionGraph{}, RelationalConfig{}), ConfigError);
}

TEST_CASE("self-loop-only graphs have no usable pairs", "[relational]") {
    auto g = InteractionGraph::from_edges({{4, 4, 3}});
    CHECK_THROWS_AS(train_relational(g, RelationalConfig{}), DataError);
}

TEST_CASE("mean pair loss decreases over epochs", "[relational]") {
    auto g = testutil::two_cliques(5);
    RelationalConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 8;
    cfg.seed = 13;
    std::vector<double> losses;
    train_relational(g, cfg, [&](int epoch, double loss) {
        CHECK(epoch == static_cast<int>(losses.size()));
        losses.push_back(loss);
    });
    REQUIRE(losses.size() == 8);
    CHECK(losses.back() < losses.front());
    for (double l : losses) CHECK(std::isfinite(l));
}

TEST_CASE("training is deterministic in the seed", "[relational]") {
    auto g = testutil::two_cliques(4);
    RelationalConfig cfg;
    cfg.dim = 6;
    cfg.epochs = 3;
    cfg.seed = 77;
    const auto a = train_relational(g, cfg);
    const auto b = train_relational(g, cfg);
    CHECK(a.w_src == b.w_src);
    CHECK(a.w_dst == b.w_dst);
    cfg.seed = 78;
    const auto c = train_relational(g, cfg);
    CHECK(a.w_src != c.w_src);
}

TEST_CASE("shared tables alias one matrix", "[relational]") {
    auto g = testutil::triangle_graph();
    RelationalConfig cfg;
    cfg.dim = 4;
    cfg.share_tables = true;
    const auto m = train_relational(g, cfg);
    CHECK(m.shared);
    CHECK(m.w_dst.empty());
    const auto u0src = m.src_row(0);
    const auto u0dst = m.dst_row(0);
    for (int k = 0; k < 4; ++k) CHECK(u0src[static_cast<std::size_t>(k)] == u0dst[static_cast<std::size_t>(k)]);
}

TEST_CASE("pure targets fall back to their target-role row", "[relational]") {
    // User 9 only gets retweeted; its source row never trains.
    auto g = InteractionGraph::from_edges({{1, 9, 5}, {2, 9, 5}, {1, 2, 1}, {2, 1, 1}});
    RelationalConfig cfg;
    cfg.dim = 4;
    cfg.epochs = 4;
    const auto m = train_relational(g, cfg);
    const auto u9 = *g.index_of(9);
    const auto v = relational_user_vector(m, g, u9);
    const auto d = m.dst_row(u9);
    REQUIRE(v.size() == 4);
    for (int k = 0; k < 4; ++k) CHECK(v[static_cast<std::size_t>(k)] == d[static_cast<std::size_t>(k)]);

    // An active retweeter keeps its source row.
    const auto u1 = *g.index_of(1);
    const auto v1 = relational_user_vector(m, g, u1);
    const auto s1 = m.src_row(u1);
    for (int k = 0; k < 4; ++k) CHECK(v1[static_cast<std::size_t>(k)] == s1[static_cast<std::size_t>(k)]);
}

TEST_CASE("concat stacks source and target roles", "[relational]") {
    auto g = testutil::triangle_graph();
    RelationalConfig cfg;
    cfg.dim = 3;
    cfg.concat = true;
    const auto m = train_relational(g, cfg);
    const auto v = relational_user_vector_concat(m, 1);
    REQUIRE(v.size() == 6);
    const auto s = m.src_row(1);
    const auto d = m.dst_row(1);
    for (int k = 0; k < 3; ++k) {
        CHECK(v[static_cast<std::size_t>(k)] == s[static_cast<std::size_t>(k)]);
        CHECK(v[static_cast<std::size_t>(k) + 3] == d[static_cast<std::size_t>(k)]);
    }
}

TEST_CASE("dedup collapses multiplicities", "[relational]") {
    // Heavy parallel edge: with dedup the epoch has 2 pairs, without it 11.
    auto g = InteractionGraph::from_edges({{1, 2, 10}, {2, 1, 1}});
    RelationalConfig cfg;
    cfg.dim = 4;
    cfg.epochs = 1;
    const auto plain = train_relational(g, cfg);
    cfg.dedup = true;
    const auto dedup = train_relational(g, cfg);
    // Different pair streams must land on different parameters.
    CHECK(plain.w_src != dedup.w_src);
}

TEST_CASE("pair loss mirrors the skip-gram objective", "[relational]") {
    const std::vector<double> negs{0.5, -0.25};
    CHECK(relational_pair_loss(1.2, negs) == sgns_pair_loss(1.2, negs));
}

TEST_CASE("two cliques separate in source space", "[relational]") {
    const std::size_t half = 6;
    auto g = testutil::two_cliques(half);
    RelationalConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 10;
    cfg.seed = 5;
    const auto m = train_relational(g, cfg);
    auto cos = [&](NodeIndex a, NodeIndex b) {
        const auto ra = m.src_row(a), rb = m.src_row(b);
        double num = 0, na = 0, nb = 0;
        for (std::size_t k = 0; k < ra.size(); ++k) {
            num += ra[k] * rb[k];
            na += ra[k] * ra[k];
            nb += rb[k] * rb[k];
        }
        return num / std::sqrt(na * nb);
    };
    double intra = 0, inter = 0;
    int ni = 0, nx = 0;
    for (NodeIndex a = 0; a < g.node_count(); ++a)
        for (NodeIndex b = a + 1; b < g.node_count(); ++b) {
            if ((a < half) == (b < half)) {
                intra += cos(a, b);
                ++ni;
            } else {
                inter += cos(a, b);
                ++nx;
            }
        }
    CHECK(intra / ni > inter / nx);
}
