#include "loopforge/spanning.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <Eigen/LU>

#include "loopforge/lerw.hpp"
#include "loopforge/paths.hpp"

namespace loopforge {

bool Multigraph::connected() const {
    if (n == 0) return false;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int cnt = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v = 0; v < n; ++v) {
            if (u != v && adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] > 0 &&
                !seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                ++cnt;
                stack.push_back(v);
            }
        }
    }
    return cnt == n;
}

namespace {

WeightedChain chain_from_graph(const Multigraph& g, int root, bool type2, int m) {
    if (root < 0 || root >= g.n) throw invalid_input("chain_from_graph: bad root");
    std::vector<VertexId> interior, boundary{root};
    for (int v = 0; v < g.n; ++v)
        if (v != root) interior.push_back(v);
    std::vector<EdgeWeight> edges;
    for (int u = 0; u < g.n; ++u) {
        if (u == root) continue;
        double denom;
        if (type2) {
            denom = m;
        } else {
            denom = g.degree(u);
            if (denom == 0) throw invalid_input("chain_from_graph: isolated vertex");
        }
        double rowsum = 0.0;
        for (int v = 0; v < g.n; ++v) {
            int mult = g.adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
            if (mult == 0) continue;
            double p = (u == v ? 2.0 * mult : 1.0 * mult) / denom;
            edges.push_back({u, v, Complex(p, 0.0)});
            rowsum += p;
        }
        if (type2 && rowsum < 1.0 - 1e-12) {
            // holding mass keeps the row stochastic
            edges.push_back({u, u, Complex(1.0 - rowsum, 0.0)});
        }
    }
    return WeightedChain(std::move(interior), std::move(boundary), edges, Symmetry::general);
}

} // namespace

WeightedChain chain_from_graph_type1(const Multigraph& g, int root) {
    return chain_from_graph(g, root, /*type2=*/false, 0);
}

WeightedChain chain_from_graph_type2(const Multigraph& g, int root, int m) {
    int maxdeg = 0;
    for (int v = 0; v < g.n; ++v) maxdeg = std::max(maxdeg, g.degree(v));
    if (m <= 0) m = maxdeg;
    if (m < maxdeg) throw invalid_input("chain_from_graph_type2: m below max degree");
    return chain_from_graph(g, root, /*type2=*/true, m);
}

void check_tree_invariants(const WeightedChain& chain, const SpanningTree& tree) {
    const int n = chain.interior_size();
    if (static_cast<int>(tree.parent.size()) != chain.total_size())
        throw invalid_input("tree invariant: parent array size mismatch");
    int edge_count = 0;
    for (int v = 0; v < n; ++v) {
        int p = tree.parent[static_cast<std::size_t>(v)];
        if (p < 0) throw invalid_input("tree invariant: interior vertex without outgoing edge");
        if (chain.weight(v, p) == Complex(0.0))
            throw invalid_input("tree invariant: tree edge is not a chain edge");
        ++edge_count;
        // walk to the root, watching for cycles
        int steps = 0, cur = v;
        while (chain.is_interior(cur)) {
            cur = tree.parent[static_cast<std::size_t>(cur)];
            if (++steps > n + 1) throw invalid_input("tree invariant: directed cycle");
        }
        if (cur != tree.root) throw invalid_input("tree invariant: path does not reach root");
    }
    if (edge_count != n) throw invalid_input("tree invariant: wrong edge count");
}

SpanningTree wilson(const WeightedChain& chain, Rng& rng, const std::vector<int>& ordering) {
    if (chain.boundary_size() != 1)
        throw invalid_input("wilson: chain must have a single (wired) root in dA");
    if (classify_weight(chain).kind != WeightClass::markov)
        throw invalid_input("wilson: requires markov weights");
    const int n = chain.interior_size(), t = chain.total_size();
    std::vector<int> order = ordering;
    if (order.empty()) {
        order.resize(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
    }
    if (static_cast<int>(order.size()) != n)
        throw invalid_input("wilson: ordering must cover the interior");

    SpanningTree tree;
    tree.root = n; // single boundary vertex
    tree.parent.assign(static_cast<std::size_t>(t), -1);
    std::vector<char> attached(static_cast<std::size_t>(t), 0);
    attached[static_cast<std::size_t>(tree.root)] = 1;

    std::vector<double> probs(static_cast<std::size_t>(t));
    std::vector<int> walk;
    for (int start : order) {
        if (attached[static_cast<std::size_t>(start)]) continue;
        walk.assign(1, start);
        int cur = start;
        for (;;) {
            probs.assign(static_cast<std::size_t>(t), 0.0);
            for (int v : chain.out_neighbors()[static_cast<std::size_t>(cur)])
                probs[static_cast<std::size_t>(v)] = chain.weight(cur, v).real();
            cur = rng.categorical(probs);
            walk.push_back(cur);
            if (attached[static_cast<std::size_t>(cur)]) break;
        }
        Saw eta = loop_erase(Path{walk});
        for (std::size_t i = 0; i + 1 < eta.v.size(); ++i) {
            tree.parent[static_cast<std::size_t>(eta.v[i])] = eta.v[i + 1];
            attached[static_cast<std::size_t>(eta.v[i])] = 1;
        }
    }
    return tree;
}

std::vector<std::pair<int, int>> tree_edges(const SpanningTree& tree) {
    std::vector<std::pair<int, int>> e;
    for (int v = 0; v < static_cast<int>(tree.parent.size()); ++v)
        if (tree.parent[static_cast<std::size_t>(v)] >= 0)
            e.emplace_back(v, tree.parent[static_cast<std::size_t>(v)]);
    std::sort(e.begin(), e.end());
    return e;
}

MatrixTreeResult matrix_tree_count(const Multigraph& g) {
    if (!g.connected()) throw invalid_input("matrix_tree_count: graph must be connected");
    const int n = g.n;
    if (n == 1) return {1, 0.0};
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n - 1, n - 1);
    // delete the row/column of vertex 0; self-edges do not enter the Laplacian
    for (int u = 1; u < n; ++u) {
        double deg = 0.0;
        for (int v = 0; v < n; ++v)
            if (v != u) deg += g.adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
        lap(u - 1, u - 1) = deg;
        for (int v = 1; v < n; ++v)
            if (v != u) lap(u - 1, v - 1) = -g.adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
    }
    double det = lap.lu().determinant();
    double rounded = std::round(det);
    MatrixTreeResult r;
    r.rounding_gap = std::abs(det - rounded);
    if (r.rounding_gap >= 0.5 - 1e-9)
        throw precision_error("matrix_tree_count: rounding gap >= 0.5");
    r.count = static_cast<std::int64_t>(rounded);
    return r;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    bool unite(int a, int b) {
        int ra = find(a), rb = find(b);
        if (ra == rb) return false;
        parent[static_cast<std::size_t>(ra)] = rb;
        return true;
    }
};

} // namespace

std::int64_t count_spanning_trees_brute(const Multigraph& g) {
    const int n = g.n;
    if (n == 1) return 1;
    // distinct undirected non-self edges with multiplicities expanded
    std::vector<std::pair<int, int>> edges;
    std::vector<std::int64_t> mult;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (g.adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] > 0) {
                edges.emplace_back(u, v);
                mult.push_back(g.adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]);
            }
    const int m = static_cast<int>(edges.size());
    if (m < n - 1) return 0;
    std::vector<int> choose(static_cast<std::size_t>(n - 1));
    std::int64_t total = 0;
    // iterate over (n-1)-subsets of distinct edges
    std::function<void(int, int, std::int64_t)> rec = [&](int next, int depth, std::int64_t ways) {
        if (depth == n - 1) {
            UnionFind uf(n);
            for (int i = 0; i < n - 1; ++i) {
                auto [u, v] = edges[static_cast<std::size_t>(choose[static_cast<std::size_t>(i)])];
                if (!uf.unite(u, v)) return;
            }
            total += ways;
            return;
        }
        for (int e = next; e < m; ++e) {
            choose[static_cast<std::size_t>(depth)] = e;
            rec(e + 1, depth + 1, ways * mult[static_cast<std::size_t>(e)]);
        }
    };
    rec(0, 0, 1);
    return total;
}

WeightedChain wired_box_chain(int d, int side) {
    if (d < 1 || d > 6 || side < 1) throw invalid_input("wired_box_chain: bad dimensions");
    std::int64_t count = 1;
    for (int i = 0; i < d; ++i) count *= side;
    if (count > 4096) throw invalid_input("wired_box_chain: box too large for the dense chain");
    const int n = static_cast<int>(count);
    auto coords = [&](int idx) {
        std::vector<int> c(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) {
            c[static_cast<std::size_t>(i)] = idx % side;
            idx /= side;
        }
        return c;
    };
    auto index = [&](const std::vector<int>& c) {
        int idx = 0;
        for (int i = d - 1; i >= 0; --i) idx = idx * side + c[static_cast<std::size_t>(i)];
        return idx;
    };
    std::vector<VertexId> interior(static_cast<std::size_t>(n));
    std::iota(interior.begin(), interior.end(), 0);
    std::vector<VertexId> boundary{static_cast<VertexId>(n)}; // the wired vertex
    std::vector<EdgeWeight> edges;
    const double p = 1.0 / (2.0 * d);
    for (int u = 0; u < n; ++u) {
        auto c = coords(u);
        int wired_mult = 0;
        for (int i = 0; i < d; ++i) {
            for (int s : {-1, 1}) {
                auto c2 = c;
                c2[static_cast<std::size_t>(i)] += s;
                if (c2[static_cast<std::size_t>(i)] < 0 || c2[static_cast<std::size_t>(i)] >= side) {
                    ++wired_mult; // multi-edge to the wired boundary, kept as multiplicity
                } else {
                    edges.push_back({u, index(c2), Complex(p, 0.0)});
                }
            }
        }
        if (wired_mult > 0) edges.push_back({u, static_cast<VertexId>(n), Complex(p * wired_mult, 0.0)});
    }
    return WeightedChain(std::move(interior), std::move(boundary), edges, Symmetry::general);
}

SpanningForest wired_uniform_forest(int d, int side, Rng& rng) {
    if (d < 1 || d > 6 || side < 1) throw invalid_input("wired_uniform_forest: bad dimensions");
    std::int64_t count = 1;
    for (int i = 0; i < d; ++i) count *= side;
    if (count > 4000000) throw invalid_input("wired_uniform_forest: box too large");
    const int n = static_cast<int>(count);
    const int wired = n;

    // SRW step on the box; leaving the box goes to the wired vertex (the
    // multi-edges to it are exactly the out-of-box moves)
    std::vector<int> stride(static_cast<std::size_t>(d));
    stride[0] = 1;
    for (int i = 1; i < d; ++i)
        stride[static_cast<std::size_t>(i)] = stride[static_cast<std::size_t>(i - 1)] * side;
    auto step = [&](int v, Rng& r) {
        int dir = static_cast<int>(r.uniform() * (2 * d));
        int axis = dir / 2, sign = (dir % 2) ? 1 : -1;
        int coord = (v / stride[static_cast<std::size_t>(axis)]) % side;
        int nc = coord + sign;
        if (nc < 0 || nc >= side) return wired;
        return v + sign * stride[static_cast<std::size_t>(axis)];
    };

    // Wilson with successor overwriting: later visits replace the stored
    // next pointer, which performs the chronological loop erasure.
    std::vector<int> next(static_cast<std::size_t>(n), -1);
    std::vector<char> in_tree(static_cast<std::size_t>(n + 1), 0);
    in_tree[static_cast<std::size_t>(wired)] = 1;
    for (int start = 0; start < n; ++start) {
        if (in_tree[static_cast<std::size_t>(start)]) continue;
        int v = start;
        while (!in_tree[static_cast<std::size_t>(v)]) {
            int u = step(v, rng);
            next[static_cast<std::size_t>(v)] = u;
            v = u;
        }
        v = start;
        while (!in_tree[static_cast<std::size_t>(v)]) {
            in_tree[static_cast<std::size_t>(v)] = 1;
            v = next[static_cast<std::size_t>(v)];
        }
    }

    SpanningForest f;
    f.vertices = n;
    for (int v = 0; v < n; ++v)
        if (next[static_cast<std::size_t>(v)] != wired && next[static_cast<std::size_t>(v)] >= 0)
            f.edges.emplace_back(v, next[static_cast<std::size_t>(v)]);
    return f;
}

ComponentStats forest_component_stats(const SpanningForest& forest) {
    UnionFind uf(forest.vertices);
    for (auto [u, v] : forest.edges) uf.unite(u, v);
    std::map<int, int> size_of;
    for (int v = 0; v < forest.vertices; ++v) ++size_of[uf.find(v)];
    ComponentStats s;
    s.components = static_cast<int>(size_of.size());
    for (auto& [root, sz] : size_of) ++s.size_histogram[sz];
    return s;
}

} // namespace loopforge
