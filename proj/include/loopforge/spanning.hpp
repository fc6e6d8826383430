#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "loopforge/chain.hpp"
#include "loopforge/rng.hpp"

namespace loopforge {

// Undirected multigraph on vertices 0..n-1; adj(u,v) is the edge
// multiplicity, diagonal entries count self-edges.
struct Multigraph {
    int n = 0;
    std::vector<std::vector<int>> adj;

    explicit Multigraph(int vertices)
        : n(vertices), adj(static_cast<std::size_t>(vertices),
                           std::vector<int>(static_cast<std::size_t>(vertices), 0)) {}
    void add_edge(int u, int v, int mult = 1) {
        adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] += mult;
        if (u != v) adj[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] += mult;
    }
    int degree(int u) const {
        int d = 0;
        for (int v = 0; v < n; ++v) d += adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] * (u == v ? 2 : 1);
        return d;
    }
    bool connected() const;
};

// Markov chains from a graph with a chosen root (which becomes dA).
// Type I: p(x,y) = mult/deg(x).  Type II: p(x,y) = mult/m with
// m >= max degree and holding probability making rows sum to one.
WeightedChain chain_from_graph_type1(const Multigraph& g, int root);
WeightedChain chain_from_graph_type2(const Multigraph& g, int root, int m = 0);

// Directed spanning tree oriented toward the root.  parent is indexed by the
// chain's combined index; the root has parent -1.
struct SpanningTree {
    int root = -1;
    std::vector<int> parent;
};

void check_tree_invariants(const WeightedChain& chain, const SpanningTree& tree);

// Wilson's algorithm on a markov chain whose boundary is a single (possibly
// wired) root vertex.  `ordering` lists the interior vertices in the order
// they are attached (default: index order).
SpanningTree wilson(const WeightedChain& chain, Rng& rng, const std::vector<int>& ordering = {});

// Canonical key of a tree (sorted directed edges) for frequency counting.
std::vector<std::pair<int, int>> tree_edges(const SpanningTree& tree);

struct MatrixTreeResult {
    std::int64_t count = 0;
    double rounding_gap = 0.0;
};

// Kirchhoff count: determinant of the root-deleted graph Laplacian
// (degrees minus adjacency), rounded with a certified < 0.5 gap.
MatrixTreeResult matrix_tree_count(const Multigraph& g);

// Brute-force spanning tree count by enumerating (n-1)-edge subsets.
std::int64_t count_spanning_trees_brute(const Multigraph& g);

struct SpanningForest {
    std::vector<std::pair<int, int>> edges; // interior-interior edges
    int vertices = 0;
};

// Z^d box {0..side-1}^d with wired boundary; simple random walk.  Returns
// the forest of tree edges interior to the box.
SpanningForest wired_uniform_forest(int d, int side, Rng& rng);

// chain for the wired box: interior = box vertices, boundary = one wired
// vertex; multi-edges to the wired vertex are kept as weights
WeightedChain wired_box_chain(int d, int side);

struct ComponentStats {
    int components = 0;
    std::map<int, int> size_histogram; // size -> number of components
};

ComponentStats forest_component_stats(const SpanningForest& forest);

} // namespace loopforge
