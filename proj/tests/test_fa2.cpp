#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "helpers.hpp"
#include "polemb/forceatlas2.hpp"
#include "polemb/graph.hpp"
#include "polemb/rng.hpp"

using namespace polemb;

TEST_CASE("fa2 config validation", "[fa2]") {
    auto g = testutil::triangle_graph();
    Fa2Config cfg;
    cfg.iterations = -1;
    CHECK_THROWS_AS(Fa2Layout(g, cfg), ConfigError);
    cfg = {};
    cfg.scaling = 0.0;
    CHECK_THROWS_AS(Fa2Layout(g, cfg), ConfigError);
    cfg = {};
    cfg.gravity = -0.5;
    CHECK_THROWS_AS(Fa2Layout(g, cfg), ConfigError);
    cfg = {};
    cfg.theta = 0.0;
    CHECK_THROWS_AS(Fa2Layout(g, cfg), ConfigError);
    cfg = {};
    cfg.jitter_tolerance = 0.0;
    CHECK_THROWS_AS(Fa2Layout(g, cfg), ConfigError);
    CHECK_THROWS_AS(Fa2Layout(InteractionGraph{}, Fa2Config{}), ConfigError);
}

TEST_CASE("quadtree repulsion matches brute force when fully opened", "[fa2]") {
    Rng rng(31);
    const std::size_t n = 48;
    std::vector<double> xs(n), ys(n), mass(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = rng.uniform(-5.0, 5.0);
        ys[i] = rng.uniform(-5.0, 5.0);
        mass[i] = 1.0 + rng.uniform();
    }
    detail::QuadTree tree;
    tree.build(xs, ys, mass);
    const double kr = 2.0;
    for (std::uint32_t i = 0; i < n; ++i) {
        double fx = 0.0, fy = 0.0;
        tree.repulsion(i, 1e-9, kr, fx, fy);  // theta ~ 0 opens every cell
        double bx = 0.0, by = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dx = xs[i] - xs[j], dy = ys[i] - ys[j];
            const double d2 = dx * dx + dy * dy;
            const double f = kr * mass[i] * mass[j] / d2;
            bx += f * dx;
            by += f * dy;
        }
        CHECK(testutil::rel_err(fx, bx) < 1e-9);
        CHECK(testutil::rel_err(fy, by) < 1e-9);
    }
}

TEST_CASE("quadtree approximation stays close at practical theta", "[fa2]") {
    Rng rng(77);
    const std::size_t n = 300;
    std::vector<double> xs(n), ys(n), mass(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = rng.uniform(-10.0, 10.0);
        ys[i] = rng.uniform(-10.0, 10.0);
    }
    detail::QuadTree tree;
    tree.build(xs, ys, mass);
    for (std::uint32_t i = 0; i < n; i += 17) {
        double fx = 0.0, fy = 0.0;
        tree.repulsion(i, 0.5, 1.0, fx, fy);
        double bx = 0.0, by = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dx = xs[i] - xs[j], dy = ys[i] - ys[j];
            const double d2 = dx * dx + dy * dy;
            bx += dx / d2;
            by += dy / d2;
        }
        const double mag = std::sqrt(bx * bx + by * by);
        const double err = std::sqrt((fx - bx) * (fx - bx) + (fy - by) * (fy - by));
        CHECK(err < 0.05 * mag + 1e-9);
    }
}

namespace {

// Trailing-window mean distance between the two nodes of a pair layout.
double settled_pair_distance(Fa2Layout& layout, int steps, int window) {
    double acc = 0.0;
    for (int it = 0; it < steps; ++it) {
        layout.step();
        if (it >= steps - window) {
            const double dx = layout.xs()[0] - layout.xs()[1];
            const double dy = layout.ys()[0] - layout.ys()[1];
            acc += std::sqrt(dx * dx + dy * dy);
        }
    }
    return acc / window;
}

}  // namespace

TEST_CASE("two-node layout settles at the force balance", "[fa2]") {
    // Single edge of weight 1, masses (degree+1) = 2. Repulsion kr*m^2/d
    // against attraction w*d and constant gravity g*m per node.
    auto g = InteractionGraph::from_edges({{1, 2, 1}});

    SECTION("no gravity: d* = sqrt(kr*m^2/w) = 2*sqrt(2)") {
        Fa2Config cfg;
        cfg.gravity = 0.0;
        cfg.scaling = 2.0;
        cfg.seed = 3;
        Fa2Layout layout(g, cfg);
        const double d = settled_pair_distance(layout, 600, 100);
        CHECK(d == Catch::Approx(2.0 * std::sqrt(2.0)).margin(0.25));
    }

    SECTION("default gravity: root of d^2 + 2d - 8 = 0 at d* = 2") {
        Fa2Config cfg;
        cfg.scaling = 2.0;
        cfg.gravity = 1.0;
        cfg.seed = 3;
        Fa2Layout layout(g, cfg);
        const double d = settled_pair_distance(layout, 600, 100);
        CHECK(d == Catch::Approx(2.0).margin(0.25));
    }
}

TEST_CASE("layout separates two cliques", "[fa2]") {
    const std::size_t half = 8;
    auto g = testutil::two_cliques(half);
    Fa2Config cfg;
    cfg.iterations = 500;
    cfg.seed = 9;
    auto emb = fa2_layout(g, cfg);
    REQUIRE(emb.dim() == 2);
    REQUIRE(emb.size() == g.node_count());

    double intra = 0.0, inter = 0.0;
    int ni = 0, nx = 0;
    for (std::size_t a = 0; a < emb.size(); ++a)
        for (std::size_t b = a + 1; b < emb.size(); ++b) {
            const double dx = emb.row(a)[0] - emb.row(b)[0];
            const double dy = emb.row(a)[1] - emb.row(b)[1];
            const double d = std::sqrt(dx * dx + dy * dy);
            const auto ua = emb.ids()[a], ub = emb.ids()[b];
            if ((ua < half) == (ub < half)) {
                intra += d;
                ++ni;
            } else {
                inter += d;
                ++nx;
            }
        }
    CHECK(inter / nx > 2.0 * (intra / ni));
}

TEST_CASE("barnes-hut switches by size unless forced", "[fa2]") {
    auto g = testutil::triangle_graph();
    Fa2Config cfg;
    cfg.iterations = 2;
    CHECK_FALSE(Fa2Layout(g, cfg).barnes_hut_active());  // 3 nodes, auto off
    cfg.barnes_hut = true;
    CHECK(Fa2Layout(g, cfg).barnes_hut_active());
    cfg.barnes_hut = std::nullopt;
    cfg.bh_min_nodes = 2;
    CHECK(Fa2Layout(g, cfg).barnes_hut_active());
    cfg.barnes_hut = false;
    CHECK_FALSE(Fa2Layout(g, cfg).barnes_hut_active());
}

TEST_CASE("barnes-hut and brute force land on similar layouts", "[fa2]") {
    auto g = testutil::two_cliques(6);
    Fa2Config cfg;
    cfg.iterations = 300;
    cfg.seed = 4;
    cfg.barnes_hut = false;
    auto brute = fa2_layout(g, cfg);
    cfg.barnes_hut = true;
    cfg.theta = 0.3;
    auto bh = fa2_layout(g, cfg);
    // Same seed, same init; tight theta keeps trajectories close enough to
    // preserve the clique split even if coordinates drift.
    auto split_ok = [&](const EmbeddingMatrix& e) {
        double intra = 0, inter = 0;
        int ni = 0, nx = 0;
        for (std::size_t a = 0; a < e.size(); ++a)
            for (std::size_t b = a + 1; b < e.size(); ++b) {
                const double dx = e.row(a)[0] - e.row(b)[0];
                const double dy = e.row(a)[1] - e.row(b)[1];
                const double d = std::sqrt(dx * dx + dy * dy);
                if ((e.ids()[a] < 6) == (e.ids()[b] < 6)) {
                    intra += d;
                    ++ni;
                } else {
                    inter += d;
                    ++nx;
                }
            }
        return inter / nx > intra / ni;
    };
    CHECK(split_ok(brute));
    CHECK(split_ok(bh));
}

TEST_CASE("layouts are deterministic in the seed", "[fa2]") {
    auto g = testutil::two_cliques(4);
    Fa2Config cfg;
    cfg.iterations = 50;
    cfg.seed = 21;
    auto a = fa2_layout(g, cfg);
    auto b = fa2_layout(g, cfg);
    CHECK(serialize_embedding(a) == serialize_embedding(b));
    cfg.seed = 22;
    auto c = fa2_layout(g, cfg);
    CHECK(serialize_embedding(a) != serialize_embedding(c));
}

TEST_CASE("zero iterations keeps the seeded scatter", "[fa2]") {
    auto g = testutil::triangle_graph();
    Fa2Config cfg;
    cfg.iterations = 0;
    auto emb = fa2_layout(g, cfg);
    CHECK(emb.size() == 3);
    CHECK(emb.all_finite());
}

TEST_CASE("linlog and strong gravity variants stay finite", "[fa2]") {
    auto g = testutil::two_cliques(4);
    Fa2Config cfg;
    cfg.iterations = 60;
    cfg.linlog = true;
    cfg.strong_gravity = true;
    auto emb = fa2_layout(g, cfg);
    CHECK(emb.all_finite());
}

TEST_CASE("prevent_overlap surfaces a warning", "[fa2]") {
    auto g = testutil::triangle_graph();
    Fa2Config cfg;
    cfg.iterations = 1;
    cfg.prevent_overlap = true;
    std::vector<std::string> warns;
    fa2_layout(g, cfg, nullptr, &warns);
    REQUIRE(warns.size() == 1);
    CHECK(warns[0].find("prevent_overlap") != std::string::npos);
}

TEST_CASE("embedding rows align with external user ids", "[fa2]") {
    auto g = InteractionGraph::from_edges({{100, 7, 1}, {7, 100, 2}});
    Fa2Config cfg;
    cfg.iterations = 5;
    auto emb = fa2_layout(g, cfg);
    CHECK(emb.ids() == std::vector<UserId>{7, 100});
    CHECK(emb.method() == "fa2");
}
