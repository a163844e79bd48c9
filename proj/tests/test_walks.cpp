#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "helpers.hpp"
#include "polemb/graph.hpp"
#include "polemb/rng.hpp"
#include "polemb/walks.hpp"

using namespace polemb;

TEST_CASE("undirected view merges both directions", "[walks]") {
    auto g = InteractionGraph::from_edges({{1, 2, 3}, {2, 1, 2}, {2, 3, 1}});
    UndirectedView view(g);
    const auto a = *g.index_of(1), b = *g.index_of(2), c = *g.index_of(3);
    REQUIRE(view.degree(b) == 2);
    const auto nb = view.neighbors(b);
    CHECK(nb[0].neighbor == a);
    CHECK(nb[0].weight == 5.0);  // 3 + 2 merged
    CHECK(nb[1].neighbor == c);
    CHECK(nb[1].weight == 1.0);
    CHECK(view.total_weight(b) == 6.0);
    CHECK(view.adjacent(a, b));
    CHECK(view.adjacent(b, a));
    CHECK_FALSE(view.adjacent(a, c));
}

TEST_CASE("unweighted view flattens multiplicities", "[walks]") {
    auto g = InteractionGraph::from_edges({{1, 2, 9}});
    UndirectedView view(g, /*weighted=*/false);
    CHECK(view.neighbors(0)[0].weight == 1.0);
}

TEST_CASE("self loops are dropped unless requested", "[walks]") {
    auto g = InteractionGraph::from_edges({{1, 1, 4}, {1, 2, 1}});
    UndirectedView plain(g);
    CHECK(plain.degree(*g.index_of(1)) == 1);
    UndirectedView loops(g, true, /*include_self_loops=*/true);
    CHECK(loops.degree(*g.index_of(1)) == 2);
    CHECK(loops.adjacent(*g.index_of(1), *g.index_of(1)));
}

TEST_CASE("first step has no second-order bias", "[walks]") {
    auto g = InteractionGraph::from_edges({{1, 2, 3}, {1, 3, 7}});
    UndirectedView view(g);
    WalkConfig cfg;
    cfg.p = 9.0;
    cfg.q = 0.01;
    const auto w = transition_weights(view, std::nullopt, *g.index_of(1), cfg);
    REQUIRE(w.size() == 2);
    CHECK(w[0] == 3.0);
    CHECK(w[1] == 7.0);
}

TEST_CASE("triangle transition weights: return and common-neighbor cases", "[walks]") {
    // Single-direction edges keep every undirected weight at exactly 1.
    auto g = InteractionGraph::from_edges({{1, 2, 1}, {2, 3, 1}, {3, 1, 1}});
    UndirectedView view(g);
    WalkConfig cfg;
    cfg.p = 1.0;
    cfg.q = 0.5;
    const auto n1 = *g.index_of(1), n2 = *g.index_of(2), n3 = *g.index_of(3);
    // Standing at 2 having come from 1: neighbor 1 is the return (1/p = 1),
    // neighbor 3 is adjacent to 1 (bias 1). q never fires on a triangle.
    const auto w = transition_weights(view, n1, n2, cfg);
    REQUIRE(w.size() == 2);
    CHECK(view.neighbors(n2)[0].neighbor == n1);
    CHECK(view.neighbors(n2)[1].neighbor == n3);
    CHECK(w[0] == 1.0);
    CHECK(w[1] == 1.0);

    cfg.p = 4.0;  // return branch alone changes
    const auto w2 = transition_weights(view, n1, n2, cfg);
    CHECK(w2[0] == 0.25);
    CHECK(w2[1] == 1.0);
}

TEST_CASE("path transition weights: return and far cases", "[walks]") {
    auto g = InteractionGraph::from_edges({{1, 2, 1}, {2, 3, 1}});
    UndirectedView view(g);
    WalkConfig cfg;
    cfg.p = 2.0;
    cfg.q = 0.5;
    const auto n1 = *g.index_of(1), n2 = *g.index_of(2);
    // From 2 with predecessor 1: node 1 is the return (1/2), node 3 is not
    // adjacent to 1 so it takes 1/q = 2.
    const auto w = transition_weights(view, n1, n2, cfg);
    REQUIRE(w.size() == 2);
    CHECK(w[0] == 0.5);
    CHECK(w[1] == 2.0);
}

TEST_CASE("sample_transition tracks the biased distribution", "[walks]") {
    auto g = InteractionGraph::from_edges({{1, 2, 1}, {2, 3, 1}});
    UndirectedView view(g);
    WalkConfig cfg;
    cfg.p = 2.0;
    cfg.q = 0.5;
    const auto n1 = *g.index_of(1), n2 = *g.index_of(2), n3 = *g.index_of(3);
    Rng rng(404);
    constexpr int draws = 50000;
    int back = 0, fwd = 0;
    for (int i = 0; i < draws; ++i) {
        const auto nxt = sample_transition(view, n1, n2, cfg, rng);
        if (nxt == n1)
            ++back;
        else if (nxt == n3)
            ++fwd;
        else
            FAIL("impossible transition");
    }
    // P(back) = 0.5/2.5 = 0.2; 6 sigma ~ 0.0107
    CHECK(std::abs(back / double(draws) - 0.2) < 0.012);
    CHECK(std::abs(fwd / double(draws) - 0.8) < 0.012);
}

TEST_CASE("walk corpus has the advertised shape", "[walks]") {
    auto g = testutil::triangle_graph();
    WalkConfig cfg;
    cfg.walks_per_node = 4;
    cfg.walk_length = 12;
    cfg.seed = 7;
    auto corpus = generate_walks(g, cfg);
    CHECK(corpus.sequence_count() == 3 * 4);
    for (std::size_t s = 0; s < corpus.sequence_count(); ++s)
        CHECK(corpus.sequence(s).size() == 12);  // every node has neighbors
    // starts: walks_per_node consecutive sequences per node
    for (std::size_t s = 0; s < corpus.sequence_count(); ++s)
        CHECK(corpus.sequence(s)[0] == NodeIndex(s / 4));
    const auto total = std::accumulate(corpus.node_freq.begin(), corpus.node_freq.end(),
                                       std::uint64_t{0});
    CHECK(total == corpus.tokens.size());
}

TEST_CASE("walks are deterministic in the seed", "[walks]") {
    auto g = testutil::two_cliques(6);
    WalkConfig cfg;
    cfg.walks_per_node = 3;
    cfg.walk_length = 10;
    cfg.seed = 99;
    const auto a = generate_walks(g, cfg);
    const auto b = generate_walks(g, cfg);
    CHECK(a.tokens == b.tokens);
    CHECK(a.offsets == b.offsets);
    cfg.seed = 100;
    const auto c = generate_walks(g, cfg);
    CHECK(a.tokens != c.tokens);
}

TEST_CASE("thread count does not change the corpus", "[walks]") {
    auto g = testutil::two_cliques(8);
    WalkConfig cfg;
    cfg.walks_per_node = 40;  // enough walks to cross the threading threshold
    cfg.walk_length = 8;
    cfg.seed = 5;
    cfg.threads = 1;
    const auto a = generate_walks(g, cfg);
    cfg.threads = 4;
    const auto b = generate_walks(g, cfg);
    CHECK(a.tokens == b.tokens);
}

TEST_CASE("isolated nodes start no walks", "[walks]") {
    // Node 9's only contact is a self loop, which the default view drops.
    auto g = InteractionGraph::from_edges({{1, 2, 1}, {2, 1, 1}, {9, 9, 5}});
    WalkConfig cfg;
    cfg.walks_per_node = 2;
    cfg.walk_length = 5;
    auto corpus = generate_walks(g, cfg);
    CHECK(corpus.sequence_count() == 4);  // only nodes 1 and 2
    CHECK(corpus.node_freq[*g.index_of(9)] == 0);
}

TEST_CASE("walk config validation", "[walks]") {
    auto g = testutil::triangle_graph();
    WalkConfig cfg;
    cfg.walks_per_node = 0;
    CHECK_THROWS_AS(generate_walks(g, cfg), ConfigError);
    cfg = {};
    cfg.walk_length = 1;
    CHECK_THROWS_AS(generate_walks(g, cfg), ConfigError);
    cfg = {};
    cfg.window = 0;
    CHECK_THROWS_AS(generate_walks(g, cfg), ConfigError);
    cfg = {};
    cfg.p = 0.0;
    CHECK_THROWS_AS(generate_walks(g, cfg), ConfigError);
    cfg = {};
    cfg.q = -1.0;
    CHECK_THROWS_AS(generate_walks(g, cfg), ConfigError);
    CHECK_THROWS_AS(generate_walks(InteractionGraph{}, WalkConfig{}), ConfigError);
}
