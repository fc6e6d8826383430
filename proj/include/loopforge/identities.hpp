#pragma once

#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "loopforge/errors.hpp"

namespace loopforge {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

// Gamma(n+1/2) / sqrt(pi) = (2n)! / (4^n n!), exact.
BigRational half_gamma_rational(int n);

// Multigraph instance for the combinatorial identity: vertices 0..n-1 and a
// list of undirected edges (u,v), u==v meaning a self-edge.  Parallel edges
// are distinct entries.
struct IdentityGraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;
};

// Both sides of the current identity in exact form: value = rational *
// pi^{n/2}.  LHS enumerates all ordered loop tuples projecting to k; RHS is
// the closed product.  Throws size_error past the enumeration budget.
struct IdentitySides {
    BigRational lhs;
    BigRational rhs;
    int sqrt_pi_power = 0;
};

IdentitySides graph_identity_sides(const IdentityGraph& g, const std::vector<int>& k,
                                   long enumeration_budget = 50000000);

// checks that k is a current for g (all vertex local times integral)
bool is_current(const IdentityGraph& g, const std::vector<int>& k);
std::vector<int> vertex_local_times(const IdentityGraph& g, const std::vector<int>& k);

// Pairing identity: sum over (a,b) with k_j = 2 a_j + sum_i b_ij of
// 2^B K! / (prod a_j! prod b_ij!) against (2K)!/prod k_j!.
struct PairingSides {
    BigInt lhs;
    BigInt rhs;
};

PairingSides pairing_identity_sides(int big_k, const std::vector<int>& k);

} // namespace loopforge
