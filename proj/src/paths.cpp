#include "loopforge/paths.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace loopforge {

Saw::Saw(std::vector<int> vertices) : v(std::move(vertices)) {
    std::set<int> s(v.begin(), v.end());
    if (s.size() != v.size()) throw invalid_input("Saw: vertices must be distinct");
}

RootedLoop::RootedLoop(std::vector<int> vertices) : v(std::move(vertices)) {
    if (v.empty() || v.front() != v.back())
        throw invalid_input("RootedLoop: first vertex must equal last");
}

int RootedLoop::local_time(int x) const {
    int c = 0;
    for (std::size_t j = 1; j < v.size(); ++j)
        if (v[j] == x) ++c;
    return c;
}

UnrootedLoop::UnrootedLoop(const RootedLoop& l) {
    if (l.length() < 1) throw invalid_input("UnrootedLoop: loop must have positive length");
    const int n = l.length();
    std::vector<int> visits(l.v.begin(), l.v.end() - 1);
    std::vector<int> best = visits;
    int distinct = 1;
    std::vector<int> rot = visits;
    for (int r = 1; r < n; ++r) {
        std::rotate(rot.begin(), rot.begin() + 1, rot.end());
        if (rot == visits) break; // period found; further rotations repeat
        ++distinct;
        if (rot < best) best = rot;
    }
    canonical = std::move(best);
    multiplicity = distinct;
}

RootedLoop UnrootedLoop::representative() const {
    std::vector<int> v = canonical;
    v.push_back(canonical.front());
    return RootedLoop(std::move(v));
}

std::string UnrootedLoop::key() const {
    std::ostringstream os;
    for (int x : canonical) os << x << ',';
    return os.str();
}

Path reverse(const Path& p) {
    Path r;
    r.v.assign(p.v.rbegin(), p.v.rend());
    return r;
}

Path concat(const Path& a, const Path& b) {
    if (a.v.empty()) return b;
    if (b.v.empty()) return a;
    if (a.v.back() != b.v.front()) throw invalid_input("concat: paths do not chain");
    Path r = a;
    r.v.insert(r.v.end(), b.v.begin() + 1, b.v.end());
    return r;
}

Complex path_weight(const WeightedChain& chain, const std::vector<int>& vertices) {
    Complex w = 1.0;
    for (std::size_t j = 1; j < vertices.size(); ++j)
        w *= chain.weight(vertices[j - 1], vertices[j]);
    return w;
}

Saw loop_erase(const Path& p) {
    if (p.v.empty()) throw invalid_input("loop_erase: empty path");
    const auto& w = p.v;
    const std::size_t n = w.size() - 1;
    std::vector<int> eta;
    std::size_t j = 0;
    for (;;) {
        int cur = w[j];
        std::size_t last = j;
        for (std::size_t k = j; k <= n; ++k)
            if (w[k] == cur) last = k;
        eta.push_back(cur);
        if (last == n) break;
        j = last + 1;
    }
    return Saw(std::move(eta));
}

std::vector<RootedLoop> decompose_by_saw(const Path& p, const Saw& eta) {
    Saw check = loop_erase(p);
    if (check.v != eta.v) throw invalid_input("decompose_by_saw: LE(p) != eta");
    const auto& w = p.v;
    const std::size_t n = w.size() - 1;
    std::vector<RootedLoop> loops;
    std::size_t j = 0;
    for (std::size_t i = 0; i < eta.v.size(); ++i) {
        int cur = eta.v[i];
        std::size_t last = j;
        for (std::size_t k = j; k <= n; ++k)
            if (w[k] == cur) last = k;
        loops.emplace_back(std::vector<int>(w.begin() + static_cast<std::ptrdiff_t>(j),
                                            w.begin() + static_cast<std::ptrdiff_t>(last) + 1));
        j = last + 1;
        if (j > n) break;
    }
    return loops;
}

Complex rooted_loop_mass(const WeightedChain& chain, const RootedLoop& l) {
    if (l.length() < 1) throw invalid_input("rooted_loop_mass: measure lives on nontrivial loops");
    return path_weight(chain, l.v) / static_cast<double>(l.length());
}

Complex unrooted_mass(const WeightedChain& chain, const UnrootedLoop& l) {
    RootedLoop rep = l.representative();
    return static_cast<double>(l.multiplicity) * path_weight(chain, rep.v) /
           static_cast<double>(l.length());
}

namespace {

void dfs_loops(const WeightedChain& chain, int root, int max_len, const std::vector<char>& alive,
               bool elementary, std::vector<int>& stack, Complex w,
               const std::function<void(const std::vector<int>&, Complex)>& fn) {
    int cur = stack.back();
    for (int nxt : chain.out_neighbors()[static_cast<std::size_t>(cur)]) {
        if (!chain.is_interior(nxt) || !alive[static_cast<std::size_t>(nxt)]) continue;
        Complex w2 = w * chain.weight(cur, nxt);
        if (std::abs(w2) < kEnumPruneWeight) continue;
        stack.push_back(nxt);
        if (nxt == root) {
            fn(stack, w2);
            if (!elementary && static_cast<int>(stack.size()) - 1 < max_len)
                dfs_loops(chain, root, max_len, alive, elementary, stack, w2, fn);
        } else if (static_cast<int>(stack.size()) - 1 < max_len) {
            dfs_loops(chain, root, max_len, alive, elementary, stack, w2, fn);
        }
        stack.pop_back();
    }
}

} // namespace

void enumerate_rooted_loops(const WeightedChain& chain, int root, int max_len,
                            const std::vector<char>& alive,
                            const std::function<void(const std::vector<int>&, Complex)>& fn) {
    if (!chain.is_interior(root) || !alive[static_cast<std::size_t>(root)])
        throw invalid_input("enumerate_rooted_loops: root not in the alive interior");
    std::vector<int> stack{root};
    dfs_loops(chain, root, max_len, alive, /*elementary=*/false, stack, Complex(1.0), fn);
}

void enumerate_elementary_loops(const WeightedChain& chain, int root, int max_len,
                                const std::vector<char>& alive,
                                const std::function<void(const std::vector<int>&, Complex)>& fn) {
    if (!chain.is_interior(root) || !alive[static_cast<std::size_t>(root)])
        throw invalid_input("enumerate_elementary_loops: root not in the alive interior");
    std::vector<int> stack{root};
    dfs_loops(chain, root, max_len, alive, /*elementary=*/true, stack, Complex(1.0), fn);
}

namespace {

void dfs_paths(const WeightedChain& chain, int max_len, std::vector<int>& stack, Complex w,
               const std::function<void(const std::vector<int>&, Complex)>& fn) {
    int cur = stack.back();
    for (int nxt : chain.out_neighbors()[static_cast<std::size_t>(cur)]) {
        Complex w2 = w * chain.weight(cur, nxt);
        if (std::abs(w2) < kEnumPruneWeight) continue;
        stack.push_back(nxt);
        if (chain.is_boundary(nxt)) {
            fn(stack, w2);
        } else if (static_cast<int>(stack.size()) - 1 < max_len) {
            dfs_paths(chain, max_len, stack, w2, fn);
        }
        stack.pop_back();
    }
}

void dfs_saws(const WeightedChain& chain, int target, bool to_any_boundary,
              const std::vector<char>& alive, std::vector<char>& used, std::vector<int>& stack,
              Complex w, const std::function<void(const std::vector<int>&, Complex)>& fn) {
    int cur = stack.back();
    for (int nxt : chain.out_neighbors()[static_cast<std::size_t>(cur)]) {
        Complex w2 = w * chain.weight(cur, nxt);
        if (w2 == Complex(0.0)) continue;
        bool terminal = to_any_boundary ? chain.is_boundary(nxt) : (nxt == target);
        if (terminal) {
            stack.push_back(nxt);
            fn(stack, w2);
            stack.pop_back();
            continue;
        }
        if (!chain.is_interior(nxt) || !alive[static_cast<std::size_t>(nxt)] ||
            used[static_cast<std::size_t>(nxt)])
            continue;
        used[static_cast<std::size_t>(nxt)] = 1;
        stack.push_back(nxt);
        dfs_saws(chain, target, to_any_boundary, alive, used, stack, w2, fn);
        stack.pop_back();
        used[static_cast<std::size_t>(nxt)] = 0;
    }
}

} // namespace

void enumerate_paths_to_boundary(const WeightedChain& chain, int x, int max_len,
                                 const std::function<void(const std::vector<int>&, Complex)>& fn) {
    if (!chain.is_interior(x)) throw invalid_input("enumerate_paths_to_boundary: x must be interior");
    std::vector<int> stack{x};
    dfs_paths(chain, max_len, stack, Complex(1.0), fn);
}

void enumerate_saws_to_boundary(const WeightedChain& chain, int x, const std::vector<char>& alive,
                                const std::function<void(const std::vector<int>&, Complex)>& fn) {
    if (!chain.is_interior(x)) throw invalid_input("enumerate_saws_to_boundary: x must be interior");
    std::vector<char> used(static_cast<std::size_t>(chain.total_size()), 0);
    used[static_cast<std::size_t>(x)] = 1;
    std::vector<int> stack{x};
    dfs_saws(chain, -1, /*to_any_boundary=*/true, alive, used, stack, Complex(1.0), fn);
}

void enumerate_saws_between(const WeightedChain& chain, int u, int w, const std::vector<char>& alive,
                            const std::function<void(const std::vector<int>&, Complex)>& fn) {
    if (u == w) throw invalid_input("enumerate_saws_between: endpoints must differ");
    std::vector<char> used(static_cast<std::size_t>(chain.total_size()), 0);
    used[static_cast<std::size_t>(u)] = 1;
    std::vector<int> stack{u};
    const bool both_boundary = chain.is_boundary(u) && chain.is_boundary(w);
    auto wrapped = [&](const std::vector<int>& path, Complex wt) {
        // boundary-to-boundary walks must pass through at least one interior vertex
        if (both_boundary && path.size() == 2) return;
        fn(path, wt);
    };
    dfs_saws(chain, w, /*to_any_boundary=*/false, alive, used, stack, Complex(1.0), wrapped);
}

LoopMassReport loop_mass_at_vertex(const WeightedChain& chain, int x, int max_len) {
    Classification c = classify_weight(chain);
    if (c.kind != WeightClass::markov && c.kind != WeightClass::integrable)
        throw not_green_error("loop_mass_at_vertex: requires an integrable weight");
    LoopMassReport r;
    Complex f = first_return_mass(chain, x).f;
    Complex term = 1.0, sum = 0.0;
    for (int k = 1; k <= 2000; ++k) {
        term *= f;
        sum += term / static_cast<double>(k);
        if (std::abs(term) < 1e-18) break;
    }
    r.series_value = sum;
    Complex direct = 0.0;
    std::vector<char> alive(static_cast<std::size_t>(chain.interior_size()), 1);
    enumerate_rooted_loops(chain, x, max_len, alive,
                           [&](const std::vector<int>& loop, Complex w) {
                               // measure m' from the rooted description: weight / local time at x
                               int lt = 0;
                               for (std::size_t j = 1; j < loop.size(); ++j)
                                   if (loop[j] == x) ++lt;
                               direct += w / static_cast<double>(lt);
                           });
    r.enumerated_value = direct;
    r.tail_bound = abs_tail_bound(chain, x, max_len);
    return r;
}

} // namespace loopforge
