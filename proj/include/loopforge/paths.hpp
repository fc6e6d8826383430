#pragma once

#include <functional>
#include <string>
#include <vector>

#include "loopforge/chain.hpp"

namespace loopforge {

// Walk objects hold combined dense indices of some chain.  Length-0 paths
// are allowed.
struct Path {
    std::vector<int> v;
    int length() const { return static_cast<int>(v.size()) - 1; }
};

// all vertices distinct
struct Saw {
    std::vector<int> v;
    explicit Saw(std::vector<int> vertices);
    Saw() = default;
    int length() const { return static_cast<int>(v.size()) - 1; }
};

// first vertex equals last; the trivial loop [x] has length 0
struct RootedLoop {
    std::vector<int> v;
    explicit RootedLoop(std::vector<int> vertices);
    RootedLoop() = default;
    int length() const { return static_cast<int>(v.size()) - 1; }
    int root() const { return v.front(); }
    // visits to x among steps 1..n
    int local_time(int x) const;
};

// Equivalence class of positive-length rooted loops under rotation.  The
// canonical form is the lexicographically minimal rotation of the visit
// sequence [l_0..l_{n-1}]; multiplicity counts distinct rotations.
struct UnrootedLoop {
    std::vector<int> canonical;
    int multiplicity = 0;

    explicit UnrootedLoop(const RootedLoop& l);
    int length() const { return static_cast<int>(canonical.size()); }
    RootedLoop representative() const;
    bool operator==(const UnrootedLoop& o) const { return canonical == o.canonical; }
    std::string key() const;
};

Path reverse(const Path& p);
Path concat(const Path& a, const Path& b);

Complex path_weight(const WeightedChain& chain, const std::vector<int>& vertices);

// chronological loop erasure
Saw loop_erase(const Path& p);

// Unique decomposition w = l0 + [eta0,eta1] + l1 + ... + lm with l_j a
// rooted loop at eta_j avoiding {eta_0..eta_{j-1}}; requires LE(p) = eta.
// For boundary-terminated paths the final loop is the trivial [eta_m].
std::vector<RootedLoop> decompose_by_saw(const Path& p, const Saw& eta);

Complex rooted_loop_mass(const WeightedChain& chain, const RootedLoop& l);
Complex unrooted_mass(const WeightedChain& chain, const UnrootedLoop& l);

struct LoopMassReport {
    Complex series_value;      // truncated sum_k f^k / k
    Complex enumerated_value;  // direct loop enumeration up to max_len
    double tail_bound;         // certified geometric tail past max_len
};

// m[L(A;x)] with both routes plus a certified tail (integrable chains only).
LoopMassReport loop_mass_at_vertex(const WeightedChain& chain, int x, int max_len);

// --- enumeration helpers (weight-pruned DFS) ---------------------------------

inline constexpr double kEnumPruneWeight = 1e-15;

// Rooted loops at root of length in [1, max_len] staying inside the alive
// interior vertices; callback gets the visit sequence and its weight.
void enumerate_rooted_loops(const WeightedChain& chain, int root, int max_len,
                            const std::vector<char>& alive,
                            const std::function<void(const std::vector<int>&, Complex)>& fn);

// Same restricted to elementary loops (root is visited only at the ends).
void enumerate_elementary_loops(const WeightedChain& chain, int root, int max_len,
                                const std::vector<char>& alive,
                                const std::function<void(const std::vector<int>&, Complex)>& fn);

// All paths from x of length <= max_len whose interior vertices stay alive
// and which terminate on first boundary hit; callback sees boundary-ending
// paths only.
void enumerate_paths_to_boundary(const WeightedChain& chain, int x, int max_len,
                                 const std::function<void(const std::vector<int>&, Complex)>& fn);

// Self-avoiding walks from x (interior) ending at the boundary, interior
// vertices restricted to alive.
void enumerate_saws_to_boundary(const WeightedChain& chain, int x,
                                const std::vector<char>& alive,
                                const std::function<void(const std::vector<int>&, Complex)>& fn);

// Self-avoiding walks from u to w (either may be boundary); interior
// vertices restricted to alive.
void enumerate_saws_between(const WeightedChain& chain, int u, int w,
                            const std::vector<char>& alive,
                            const std::function<void(const std::vector<int>&, Complex)>& fn);

} // namespace loopforge
