#pragma once

// ForceAtlas2 layout. Degree-weighted repulsion, linear (or log) edge
// attraction, gravity well, and the adaptive speed controller driven by
// per-node swing vs traction. Positions are the embedding: two coordinates
// per user.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "polemb/common.hpp"
#include "polemb/embedding.hpp"
#include "polemb/graph.hpp"
#include "polemb/rng.hpp"
#include "polemb/walks.hpp"

namespace polemb {

struct Fa2Config {
    int iterations = 1000;
    double scaling = 2.0;          // repulsion constant k_r
    double gravity = 1.0;
    bool linlog = false;           // attraction w*log(1+d) instead of w*d
    bool strong_gravity = false;   // gravity proportional to distance
    bool prevent_overlap = false;  // accepted for compatibility; no-op
    double jitter_tolerance = 1.0;
    double theta = 1.2;            // Barnes-Hut accuracy
    std::optional<bool> barnes_hut;       // unset: auto by node count
    std::size_t bh_min_nodes = 10000;     // auto threshold
    std::uint64_t seed = 1;
    int threads = 1;

    void validate() const {
        if (iterations < 0) throw ConfigError("iterations must be >= 0");
        if (!(scaling > 0.0)) throw ConfigError("scaling must be > 0");
        if (gravity < 0.0) throw ConfigError("gravity must be >= 0");
        if (!(jitter_tolerance > 0.0)) throw ConfigError("jitter_tolerance must be > 0");
        if (!(theta > 0.0)) throw ConfigError("theta must be > 0");
    }
};

struct Fa2Stats {
    double speed = 0.0;
    double swing = 0.0;
    double traction = 0.0;
    double max_move = 0.0;
};

namespace detail {

// Array quadtree over the current positions. Leaves hold single points
// except past max depth, where coincident points pile up.
class QuadTree {
public:
    void build(std::span<const double> xs, std::span<const double> ys,
               std::span<const double> mass) {
        cells_.clear();
        xs_ = xs;
        ys_ = ys;
        mass_ = mass;
        const std::size_t n = xs.size();
        if (n == 0) return;
        double lo_x = xs[0], hi_x = xs[0], lo_y = ys[0], hi_y = ys[0];
        for (std::size_t i = 1; i < n; ++i) {
            lo_x = std::min(lo_x, xs[i]);
            hi_x = std::max(hi_x, xs[i]);
            lo_y = std::min(lo_y, ys[i]);
            hi_y = std::max(hi_y, ys[i]);
        }
        const double cx = 0.5 * (lo_x + hi_x);
        const double cy = 0.5 * (lo_y + hi_y);
        double half = 0.5 * std::max(hi_x - lo_x, hi_y - lo_y);
        half = std::max(half, 1e-9) * 1.0000001;
        cells_.push_back(Cell{cx, cy, half});
        for (std::uint32_t i = 0; i < n; ++i)
            insert(0, i, xs[i], ys[i], mass[i], 0);
        for (auto& c : cells_) {
            if (c.mass > 0.0) {
                c.mx /= c.mass;
                c.my /= c.mass;
            }
        }
    }

    // Repulsive force on point i; kr * m_i * m_j / d along the separation.
    void repulsion(std::uint32_t i, double theta, double kr, double& fx, double& fy) const {
        if (cells_.empty()) return;
        const double xi = xs_[i], yi = ys_[i], mi = mass_[i];
        stack_.clear();
        stack_.push_back(0);
        while (!stack_.empty()) {
            const Cell& c = cells_[stack_.back()];
            stack_.pop_back();
            if (c.leaf()) {
                for (std::uint32_t p : c.pts) {
                    if (p == i) continue;
                    accumulate(xi, yi, mi, xs_[p], ys_[p], mass_[p], kr, fx, fy);
                }
                continue;
            }
            const double dx = xi - c.mx, dy = yi - c.my;
            const double d2 = dx * dx + dy * dy;
            const double width = 2.0 * c.half;
            if (width * width < theta * theta * d2) {
                // far enough: treat the whole cell as one body
                const double f = kr * mi * c.mass / d2;
                fx += f * dx;
                fy += f * dy;
                continue;
            }
            for (int k = 0; k < 4; ++k)
                if (c.child[k] >= 0) stack_.push_back(static_cast<std::uint32_t>(c.child[k]));
        }
    }

private:
    struct Cell {
        double cx, cy, half;
        double mx = 0.0, my = 0.0, mass = 0.0;
        int child[4] = {-1, -1, -1, -1};
        std::vector<std::uint32_t> pts;
        bool leaf() const { return child[0] < 0 && child[1] < 0 && child[2] < 0 && child[3] < 0; }
    };

    static void accumulate(double xi, double yi, double mi, double xj, double yj, double mj,
                           double kr, double& fx, double& fy) {
        const double dx = xi - xj, dy = yi - yj;
        const double d2 = dx * dx + dy * dy;
        if (d2 < 1e-18) return;  // coincident; jitter resolves next step
        const double f = kr * mi * mj / d2;
        fx += f * dx;
        fy += f * dy;
    }

    void insert(std::size_t cell, std::uint32_t p, double x, double y, double m, int depth) {
        constexpr int kMaxDepth = 48;
        Cell& c0 = cells_[cell];
        c0.mx += m * x;
        c0.my += m * y;
        c0.mass += m;
        if (c0.leaf()) {
            if (c0.pts.empty() || depth >= kMaxDepth) {
                c0.pts.push_back(p);
                return;
            }
            // split: push the resident point down, then retry
            std::uint32_t q = c0.pts[0];
            c0.pts.clear();
            descend(cell, q, xs_[q], ys_[q], mass_[q], depth);
        }
        descend(cell, p, x, y, m, depth);
    }

    void descend(std::size_t cell, std::uint32_t p, double x, double y, double m, int depth) {
        Cell& c = cells_[cell];
        const int qx = x >= c.cx ? 1 : 0;
        const int qy = y >= c.cy ? 1 : 0;
        const int k = qy * 2 + qx;
        if (c.child[k] < 0) {
            const double h = c.half * 0.5;
            Cell nc{c.cx + (qx ? h : -h), c.cy + (qy ? h : -h), h};
            c.child[k] = static_cast<int>(cells_.size());
            cells_.push_back(nc);
        }
        const int ck = cells_[cell].child[k];
        insert(static_cast<std::size_t>(ck), p, x, y, m, depth + 1);
    }

    std::vector<Cell> cells_;
    std::span<const double> xs_, ys_, mass_;
    mutable std::vector<std::uint32_t> stack_;
};

}  // namespace detail

class Fa2Layout {
public:
    Fa2Layout(const InteractionGraph& g, const Fa2Config& cfg)
        : graph_(&g), cfg_(cfg), view_(g, true, false), rng_(mix_seed(cfg.seed, 0xfa2)) {
        cfg_.validate();
        const std::size_t n = view_.node_count();
        if (n == 0) throw ConfigError("cannot lay out an empty graph");
        x_.resize(n);
        y_.resize(n);
        fx_.assign(n, 0.0);
        fy_.assign(n, 0.0);
        pfx_.assign(n, 0.0);
        pfy_.assign(n, 0.0);
        mass_.resize(n);
        for (NodeIndex u = 0; u < n; ++u)
            mass_[u] = static_cast<double>(view_.degree(u)) + 1.0;
        // seeded scatter over a square that grows with the graph
        const double r = std::sqrt(static_cast<double>(n));
        for (std::size_t i = 0; i < n; ++i) {
            x_[i] = rng_.uniform(-r, r);
            y_[i] = rng_.uniform(-r, r);
        }
        use_bh_ = cfg_.barnes_hut ? *cfg_.barnes_hut : n >= cfg_.bh_min_nodes;
        if (cfg_.prevent_overlap)
            warnings_.push_back("prevent_overlap requested but not implemented; ignored");
    }

    Fa2Stats step() {
        const std::size_t n = x_.size();
        jitter_coincident();
        std::swap(fx_, pfx_);
        std::swap(fy_, pfy_);
        std::fill(fx_.begin(), fx_.end(), 0.0);
        std::fill(fy_.begin(), fy_.end(), 0.0);

        if (use_bh_) tree_.build(x_, y_, mass_);

        auto node_forces = [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                double fx = 0.0, fy = 0.0;
                if (use_bh_) {
                    tree_.repulsion(static_cast<std::uint32_t>(i), cfg_.theta, cfg_.scaling, fx,
                                    fy);
                } else {
                    for (std::size_t j = 0; j < n; ++j) {
                        if (j == i) continue;
                        const double dx = x_[i] - x_[j], dy = y_[i] - y_[j];
                        const double d2 = dx * dx + dy * dy;
                        if (d2 < 1e-18) continue;
                        const double f = cfg_.scaling * mass_[i] * mass_[j] / d2;
                        fx += f * dx;
                        fy += f * dy;
                    }
                }
                // attraction accumulated from this endpoint's adjacency so
                // the loop parallelizes without write contention
                for (const auto& e : view_.neighbors(static_cast<NodeIndex>(i))) {
                    const double dx = x_[e.neighbor] - x_[i];
                    const double dy = y_[e.neighbor] - y_[i];
                    const double d = std::sqrt(dx * dx + dy * dy);
                    if (d < 1e-12) continue;
                    const double f =
                        cfg_.linlog ? e.weight * std::log1p(d) / d : e.weight;
                    fx += f * dx;
                    fy += f * dy;
                }
                // gravity toward the origin
                const double dg = std::sqrt(x_[i] * x_[i] + y_[i] * y_[i]);
                if (dg > 1e-12 && cfg_.gravity > 0.0) {
                    const double fg = cfg_.strong_gravity
                                          ? cfg_.gravity * mass_[i]
                                          : cfg_.gravity * mass_[i] / dg;
                    fx -= fg * x_[i];
                    fy -= fg * y_[i];
                }
                fx_[i] = fx;
                fy_[i] = fy;
            }
        };

        const int nthreads = std::max(1, cfg_.threads);
        if (nthreads == 1 || n < 512) {
            node_forces(0, n);
        } else {
            std::vector<std::thread> pool;
            const std::size_t chunk = (n + nthreads - 1) / nthreads;
            for (int t = 0; t < nthreads; ++t) {
                const std::size_t lo = std::min(n, chunk * static_cast<std::size_t>(t));
                const std::size_t hi = std::min(n, lo + chunk);
                if (lo < hi) pool.emplace_back(node_forces, lo, hi);
            }
            for (auto& th : pool) th.join();
        }

        // adaptive speed: nodes that oscillate (high swing) slow down,
        // steady drift (traction) speeds the whole layout up
        double swing_sum = 0.0, traction_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sx = fx_[i] - pfx_[i], sy = fy_[i] - pfy_[i];
            const double tx = fx_[i] + pfx_[i], ty = fy_[i] + pfy_[i];
            swing_[i] = std::sqrt(sx * sx + sy * sy);
            swing_sum += mass_[i] * swing_[i];
            traction_sum += mass_[i] * 0.5 * std::sqrt(tx * tx + ty * ty);
        }
        double target = cfg_.jitter_tolerance * traction_sum / std::max(swing_sum, 1e-12);
        if (first_step_) {
            speed_ = std::min(target, 1.0);
            first_step_ = false;
        } else {
            speed_ = std::min(target, 1.5 * speed_);
        }

        constexpr double k_s = 0.1;
        constexpr double k_s_max = 10.0;
        double max_move = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = k_s * speed_ / (1.0 + speed_ * std::sqrt(swing_[i]));
            const double fmag = std::sqrt(fx_[i] * fx_[i] + fy_[i] * fy_[i]);
            if (fmag * s > k_s_max) s = k_s_max / fmag;
            const double mx = fx_[i] * s, my = fy_[i] * s;
            x_[i] += mx;
            y_[i] += my;
            max_move = std::max(max_move, std::sqrt(mx * mx + my * my));
        }
        return Fa2Stats{speed_, swing_sum, traction_sum, max_move};
    }

    Fa2Stats run() {
        Fa2Stats last;
        for (int it = 0; it < cfg_.iterations; ++it) last = step();
        if (!all_finite())
            throw NumericError("layout diverged to non-finite coordinates");
        return last;
    }

    std::span<const double> xs() const { return x_; }
    std::span<const double> ys() const { return y_; }
    bool barnes_hut_active() const { return use_bh_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    bool all_finite() const {
        for (std::size_t i = 0; i < x_.size(); ++i)
            if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) return false;
        return true;
    }

    EmbeddingMatrix to_embedding() const {
        EmbeddingMatrix m(2, "fa2", cfg_.seed);
        m.reserve(x_.size());
        for (std::size_t i = 0; i < x_.size(); ++i) {
            const double row[2] = {x_[i], y_[i]};
            m.add_row(graph_->user_at(static_cast<NodeIndex>(i)), row);
        }
        return m;
    }

private:
    // Coincident nodes feel no repulsion; nudge them apart with seeded noise.
    void jitter_coincident() {
        if (x_.size() < 2) return;
        std::vector<std::pair<std::pair<double, double>, std::size_t>> keyed(x_.size());
        for (std::size_t i = 0; i < x_.size(); ++i) keyed[i] = {{x_[i], y_[i]}, i};
        std::sort(keyed.begin(), keyed.end());
        for (std::size_t i = 1; i < keyed.size(); ++i) {
            if (keyed[i].first == keyed[i - 1].first) {
                const std::size_t idx = keyed[i].second;
                x_[idx] += rng_.uniform(-1e-4, 1e-4);
                y_[idx] += rng_.uniform(-1e-4, 1e-4);
            }
        }
        if (swing_.size() != x_.size()) swing_.assign(x_.size(), 0.0);
    }

    const InteractionGraph* graph_;
    Fa2Config cfg_;
    UndirectedView view_;
    Rng rng_;
    std::vector<double> x_, y_, fx_, fy_, pfx_, pfy_, mass_, swing_;
    detail::QuadTree tree_;
    std::vector<std::string> warnings_;
    double speed_ = 1.0;
    bool first_step_ = true;
    bool use_bh_ = false;
};

inline EmbeddingMatrix fa2_layout(const InteractionGraph& g, const Fa2Config& cfg,
                                  Fa2Stats* stats = nullptr,
                                  std::vector<std::string>* warnings = nullptr) {
    Fa2Layout layout(g, cfg);
    Fa2Stats s = layout.run();
    if (stats) *stats = s;
    if (warnings) *warnings = layout.warnings();
    return layout.to_embedding();
}

}  // namespace polemb
