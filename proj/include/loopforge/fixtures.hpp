#pragma once

#include <cmath>
#include <vector>

#include "loopforge/chain.hpp"
#include "loopforge/rng.hpp"
#include "loopforge/spanning.hpp"

namespace loopforge::fixtures {

// Two-point chain A={x,y} with symmetric weight q on the edge (the classic
// worked example: a = q^2, G(x,x)=1/(1-a)).  Ids 0,1; no boundary.
inline WeightedChain two_point(double q) {
    return WeightedChain({0, 1}, {}, {{0, 1, {q, 0.0}}, {1, 0, {q, 0.0}}}, Symmetry::symmetric);
}

// One-dimensional SRW on {1..n} with absorbing boundary {0, n+1}.
inline WeightedChain path_srw(int n) {
    std::vector<VertexId> interior;
    for (int i = 1; i <= n; ++i) interior.push_back(i);
    std::vector<EdgeWeight> edges;
    for (int i = 1; i <= n; ++i) {
        edges.push_back({i, i - 1, {0.5, 0.0}});
        edges.push_back({i, i + 1, {0.5, 0.0}});
    }
    return WeightedChain(std::move(interior), {0, n + 1}, edges, Symmetry::symmetric);
}

// SRW on a w x h block of Z^2 with absorbing boundary ring; ids pack the
// coordinates.
inline WeightedChain grid_srw(int w, int h) {
    auto id = [](int x, int y) { return static_cast<VertexId>((x + 100) * 1000 + (y + 100)); };
    std::vector<VertexId> interior, boundary;
    for (int x = 1; x <= w; ++x)
        for (int y = 1; y <= h; ++y) interior.push_back(id(x, y));
    for (int x = 1; x <= w; ++x) {
        boundary.push_back(id(x, 0));
        boundary.push_back(id(x, h + 1));
    }
    for (int y = 1; y <= h; ++y) {
        boundary.push_back(id(0, y));
        boundary.push_back(id(w + 1, y));
    }
    std::vector<EdgeWeight> edges;
    auto inside = [&](int x, int y) { return x >= 1 && x <= w && y >= 1 && y <= h; };
    auto on_bd = [&](int x, int y) {
        return (x == 0 && y >= 1 && y <= h) || (x == w + 1 && y >= 1 && y <= h) ||
               (y == 0 && x >= 1 && x <= w) || (y == h + 1 && x >= 1 && x <= w);
    };
    for (int x = 1; x <= w; ++x)
        for (int y = 1; y <= h; ++y)
            for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
                int nx = x + dx, ny = y + dy;
                if (inside(nx, ny) || on_bd(nx, ny))
                    edges.push_back({id(x, y), id(nx, ny), {0.25, 0.0}});
            }
    return WeightedChain(std::move(interior), std::move(boundary), edges, Symmetry::symmetric);
}

// Triangle A={0,1,2} with a single absorbing vertex 3 attached to all
// three; uniform step probability 1/3.
inline WeightedChain triangle() {
    std::vector<EdgeWeight> edges;
    const double p = 1.0 / 3.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j)
            if (i != j) edges.push_back({i, j, {p, 0.0}});
        edges.push_back({i, 3, {p, 0.0}});
    }
    return WeightedChain({0, 1, 2}, {3}, edges, Symmetry::general);
}

// Cycle on n vertices with weight w per directed edge, no boundary.
inline WeightedChain cycle(int n, double w) {
    std::vector<VertexId> interior;
    for (int i = 0; i < n; ++i) interior.push_back(i);
    std::vector<EdgeWeight> edges;
    for (int i = 0; i < n; ++i) {
        edges.push_back({i, (i + 1) % n, {w, 0.0}});
        edges.push_back({(i + 1) % n, i, {w, 0.0}});
    }
    return WeightedChain(std::move(interior), {}, edges, Symmetry::symmetric);
}

inline Multigraph complete_graph(int n) {
    Multigraph g(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) g.add_edge(i, j);
    return g;
}

// Random chain scaled so the spectral radius of |Q| is about `target_rho`;
// optionally complex entries; tiny boundary so the weight is proper.
inline WeightedChain random_integrable(Rng& rng, int max_interior, bool complex_weights,
                                       double target_rho = 0.6) {
    int n = 1 + static_cast<int>(rng.uniform() * max_interior);
    std::vector<VertexId> interior;
    for (int i = 0; i < n; ++i) interior.push_back(i);
    std::vector<EdgeWeight> edges;
    double rowcap = 0.0;
    std::vector<std::vector<Complex>> w(static_cast<std::size_t>(n),
                                        std::vector<Complex>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) {
            if (rng.uniform() < 0.4) continue;
            double re = 2.0 * rng.uniform() - 1.0;
            double im = complex_weights ? 2.0 * rng.uniform() - 1.0 : 0.0;
            w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = Complex(re, im);
            row += std::abs(Complex(re, im));
        }
        rowcap = std::max(rowcap, row);
    }
    double scale = rowcap > 0.0 ? target_rho / rowcap : 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Complex c = w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * scale;
            if (c != Complex(0.0)) edges.push_back({i, j, c});
        }
    return WeightedChain(std::move(interior), {}, edges, Symmetry::general);
}

} // namespace loopforge::fixtures
