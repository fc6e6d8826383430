#pragma once

#include <map>
#include <vector>

#include "loopforge/chain.hpp"
#include "loopforge/paths.hpp"
#include "loopforge/rng.hpp"

namespace loopforge {

// phi solves phi=0 on eta, (Q-I)phi=0 on A\eta, phi=1 on dA; es is the
// escape function: (Q-I)phi on eta and phi elsewhere.  Both are indexed by
// the chain's combined index.
struct HarmonicSolution {
    std::vector<double> phi;
    std::vector<double> escape;
};

HarmonicSolution solve_harmonic(const WeightedChain& chain, const std::vector<int>& eta);

struct LerwSample {
    Saw erased;
    Path trajectory;
};

// Runs the chain from x until the first boundary hit and erases loops.
// Requires markov weights.
LerwSample sample_lerw(const WeightedChain& chain, int x, Rng& rng);

// q-hat(eta) = q(eta) F_eta(A); eta is interior except possibly its final
// vertex, which may be a boundary vertex (contributing factor 1).
Complex lerw_law(const WeightedChain& chain, const Saw& eta);

// Transition law of the Laplacian walk given the partial SAW eta: the
// probability of moving from eta's tip to z is p(tip,z) phi_eta(z)
// normalized over neighbours.  Indexed by combined vertex index; boundary
// entries are absorbing moves.
std::vector<double> laplacian_step(const WeightedChain& chain, const Saw& eta);

// One full Laplacian-walk trajectory from x to the boundary.
Saw sample_laplacian_walk(const WeightedChain& chain, int x, Rng& rng);

// Law of the loop erased at eta_j: sampler (run-to-exit, cut at the last
// visit) and exact pmf on small chains via enumeration.
RootedLoop sample_erased_loop(const WeightedChain& chain, const std::vector<char>& alive, int x,
                              Rng& rng);

// pmf of loops of length <= max_len in the alive set, keyed by the visit
// sequence; reports the uncovered mass bound alongside
struct ErasedLoopPmf {
    std::map<std::vector<int>, double> pmf;
    double covered = 0.0;
    double coverage_gap_bound = 0.0; // certified bound on mass above max_len
    bool coverage_warning = false;
};

ErasedLoopPmf erased_loop_pmf(const WeightedChain& chain, const std::vector<char>& alive, int x,
                              int max_len, double target_coverage = 1e-6);

// Exact LERW law over all SAWs from x to the boundary; refuses interiors
// larger than kExactLawCap.
inline constexpr int kExactLawCap = 12;
std::map<std::vector<int>, double> lerw_exact_law(const WeightedChain& chain, int x);

} // namespace loopforge
