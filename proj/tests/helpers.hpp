#pragma once

// Shared test scaffolding: throwaway directories, tiny graphs, numeric
// comparators.

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "polemb/graph.hpp"

namespace testutil {

// Self-cleaning unique directory under the system temp root.
class TempDir {
  public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        static std::atomic<unsigned> counter{0};
        for (int attempt = 0; attempt < 100; ++attempt) {
            auto candidate =
                base / ("polemb_test_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter.fetch_add(1)));
            std::error_code ec;
            if (std::filesystem::create_directories(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
        throw std::runtime_error("could not create temp dir");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

  private:
    std::filesystem::path path_;
};

// Directed triangle a<->b<->c<->a with unit weights, ids 1,2,3.
inline polemb::InteractionGraph triangle_graph() {
    std::vector<polemb::RetweetEdge> edges = {
        {1, 2, 1}, {2, 1, 1}, {2, 3, 1}, {3, 2, 1}, {3, 1, 1}, {1, 3, 1},
    };
    return polemb::InteractionGraph::from_edges(edges);
}

// Path 1 - 2 - 3 (both directions), unit weights.
inline polemb::InteractionGraph path_graph() {
    std::vector<polemb::RetweetEdge> edges = {{1, 2, 1}, {2, 1, 1}, {2, 3, 1}, {3, 2, 1}};
    return polemb::InteractionGraph::from_edges(edges);
}

// Two dense directed cliques of `size` nodes joined by a single bridge edge.
// Community of node i is i / size.
inline polemb::InteractionGraph two_cliques(int size) {
    std::vector<polemb::RetweetEdge> edges;
    auto add_clique = [&](int base) {
        for (int i = 0; i < size; ++i)
            for (int j = 0; j < size; ++j)
                if (i != j)
                    edges.push_back({static_cast<polemb::UserId>(base + i),
                                     static_cast<polemb::UserId>(base + j), 1});
    };
    add_clique(0);
    add_clique(size);
    edges.push_back({0, static_cast<polemb::UserId>(size), 1});
    edges.push_back({static_cast<polemb::UserId>(size), 0, 1});
    return polemb::InteractionGraph::from_edges(edges);
}

// Central finite difference of a scalar function of one coordinate.
template <typename F>
double finite_diff(F f, double x, double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double rel_err(double got, double want) {
    double denom = std::max(std::abs(want), 1e-12);
    return std::abs(got - want) / denom;
}

}  // namespace testutil
