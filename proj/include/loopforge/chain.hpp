#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "loopforge/errors.hpp"

namespace loopforge {

using Complex = std::complex<double>;
using VertexId = std::int64_t;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

enum class Symmetry { general, symmetric, hermitian };
enum class WeightClass { markov, integrable, green, divergent };

const char* to_string(WeightClass c);
const char* to_string(Symmetry s);

struct EdgeWeight {
    VertexId from = 0;
    VertexId to = 0;
    Complex w;
};

// Finite chain A with boundary dA and complex weights on directed edges of
// A-bar having at least one endpoint in A.  Vertices are exposed through a
// combined dense index: 0..n-1 interior, n..n+b-1 boundary.
class WeightedChain {
  public:
    WeightedChain(std::vector<VertexId> interior, std::vector<VertexId> boundary,
                  const std::vector<EdgeWeight>& edges, Symmetry symmetry);

    int interior_size() const { return n_; }
    int boundary_size() const { return b_; }
    int total_size() const { return n_ + b_; }
    bool is_interior(int v) const { return v >= 0 && v < n_; }
    bool is_boundary(int v) const { return v >= n_ && v < n_ + b_; }
    Symmetry symmetry() const { return symmetry_; }

    VertexId id_of(int v) const { return ids_.at(static_cast<std::size_t>(v)); }
    // dense index of a vertex id, -1 when absent
    int index_of(VertexId id) const;

    // full (n+b) x (n+b) weight matrix; boundary-to-boundary block is zero
    const Matrix& weights() const { return w_; }
    Complex weight(int from, int to) const { return w_(from, to); }
    // interior block Q
    Eigen::Block<const Matrix> q() const { return w_.topLeftCorner(n_, n_); }

    // chain with interior vertices in `removed` deleted outright (they are
    // not moved to the boundary); boundary kept as is
    WeightedChain without(const std::vector<int>& removed) const;

    // chain with the given interior vertices moved to the boundary;
    // boundary-to-boundary edges this creates are dropped
    WeightedChain demoted(const std::vector<int>& verts) const;

    // out-neighbours with nonzero weight, per combined index (boundary rows
    // empty beyond interior targets)
    const std::vector<std::vector<int>>& out_neighbors() const { return out_; }

  private:
    int n_ = 0, b_ = 0;
    Symmetry symmetry_;
    std::vector<VertexId> ids_;
    Matrix w_;
    std::vector<std::vector<int>> out_;
};

struct Classification {
    WeightClass kind = WeightClass::divergent;
    double rho_abs = 0.0;   // spectral radius of |Q|
    double rho_plain = 0.0; // spectral radius of Q
};

struct GreenData {
    Matrix green;       // G = (I-Q)^{-1} on A x A
    Complex det_iq;     // D = det(I-Q)
    Classification classification;
};

// Spectral-radius threshold: a radius below 1 - kRadiusMargin counts as
// strictly less than one; the margin is surfaced via Classification.
inline constexpr double kRadiusMargin = 1e-9;

Classification classify_weight(const WeightedChain& chain);

// Solves (I-Q)G = I; refuses divergent weights and singular I-Q.
GreenData green_function(const WeightedChain& chain);

// Product of Green diagonals on shrinking sets for the ordered list B of
// interior indices (entries outside A are ignored per the F convention).
// The empty list gives 1.
Complex f_ordered(const WeightedChain& chain, const std::vector<int>& b_ordered);

// F_B(A) computed as det(I - Q_{A\B}) / det(I - Q_A); order-free route.
Complex f_of_set(const WeightedChain& chain, const std::vector<int>& b_set);

// H_A(x,z) = sum_y G(x,y) q(y,z) for interior x and boundary z.
Complex poisson_kernel(const WeightedChain& chain, int x, int z);
// all of H as an n x b matrix
Matrix poisson_kernel_matrix(const WeightedChain& chain);

// H_dA(z,w): mass of paths from boundary z to boundary w through >=1
// interior vertex.
Complex boundary_poisson_kernel(const WeightedChain& chain, int z, int w);

struct FirstReturn {
    Complex f;             // 1 - 1/G(x,x)
    bool zero_diagonal;    // flagged when G(x,x)=0 for general weights
};

FirstReturn first_return_mass(const WeightedChain& chain, int x);

// Green diagonal of the sub-chain A \ removed at vertex x (combined index);
// helper shared by the path and multi-walk modules.
Complex green_diag_without(const WeightedChain& chain, const std::vector<int>& removed, int x);

// certified bound on sum_{k>len} [ |Q|^k (I-|Q|)^{-1}-free tail ] at (x,x):
// exactly [ |Q|^{len+1} (I-|Q|)^{-1} ]_{xx}, monotone in the loop-measure tails
double abs_tail_bound(const WeightedChain& chain, int x, int len);
// trace version, bounds sum over all roots
double abs_tail_bound_trace(const WeightedChain& chain, int len);

} // namespace loopforge
