#pragma once

#include <vector>

#include "loopforge/chain.hpp"
#include "loopforge/paths.hpp"

namespace loopforge {

inline constexpr int kMultipathCap = 12;

// Total mass sum over mutually-avoiding SAW k-tuples of q(eta) F_{union}(A).
// Endpoints may be interior or boundary; all 2k points distinct.  F values
// are memoized per vertex-subset bitmask.
Complex hat_h(const WeightedChain& chain, const std::vector<int>& xs, const std::vector<int>& ys);

// H_A(x,y): boundary Poisson kernel when both endpoints are boundary,
// Poisson kernel / Green entry otherwise.
Complex walk_mass(const WeightedChain& chain, int x, int y);

struct FominTwoPath {
    Complex lhs; // hat H(x,y) - hat H(x,y^sigma), by enumeration
    Complex rhs; // H(x,y) - H(x,y^sigma), by Green products
};

FominTwoPath fomin_two_path_check(const WeightedChain& chain, int x1, int x2, int y1, int y2);

struct FominDet {
    Complex signed_sum;  // sum over permutations of sgn * hat H
    Complex determinant; // det [H(x_i, y_j)]
    Complex hat_direct;  // hat H(x, y) for the identity pairing
};

FominDet fomin_det_check(const WeightedChain& chain, const std::vector<int>& xs,
                         const std::vector<int>& ys);

struct EdgeTraversal {
    Complex closed_form;   // q_e F_e(A) [H(x,z)H(y,w) - H(x,w)H(y,z)] on A'
    Complex saw_sum;       // sum over SAWs of q-hat (I_e - I_{e^R})
    Complex path_sum;      // truncated sum q(w)(Y_e - Y_e^-) by length DP
    double path_tail;      // certified bound on the dropped path mass
};

// <Y_e - Y_e^-> three ways for symmetric integrable weights, x,y boundary,
// edge z->w interior.
EdgeTraversal edge_traversal_expectation(const WeightedChain& chain, int x, int y, int z, int w,
                                         int path_len = 60);

} // namespace loopforge
