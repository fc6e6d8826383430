#pragma once

#include <unordered_map>
#include <utility>
#include <vector>

#include "loopforge/chain.hpp"

namespace loopforge {

// Finite Z^2 domain; interior points first, then the boundary points
// (lattice neighbours at distance one), matching the WeightedChain index
// convention.
struct LatticeDomain {
    enum class Kind { disc, rectangle, lattice_approx };

    Kind kind = Kind::disc;
    double radius = 0.0; // disc radius or approximation scale
    std::vector<std::pair<int, int>> interior;
    std::vector<std::pair<int, int>> boundary;
    std::unordered_map<long long, int> index; // packed (x,y) -> combined index
    bool simply_connected = false;

    int n() const { return static_cast<int>(interior.size()); }
    int b() const { return static_cast<int>(boundary.size()); }
    int find(int x, int y) const;
    std::pair<int, int> point(int idx) const;

    static long long pack(int x, int y) {
        return (static_cast<long long>(x) << 32) ^ (static_cast<long long>(y) & 0xffffffffLL);
    }
};

// lattice disc {z : |z| < r}; must contain 0 and 1
LatticeDomain build_disc(double r);
// A_{N,r} = {x+iy : 0 < x < rN, 0 < y < pi N}
LatticeDomain build_rectangle(int big_n, int r);
// component of the origin of lattice squares inside n * (unit disc)
LatticeDomain build_lattice_approx_disc(int n);

// arbitrary connected point set (testing and custom experiments)
LatticeDomain domain_from_points(std::vector<std::pair<int, int>> pts);

// Horizontal rungs (0,-j)--(1,-j), 0<j<k, crossed by the downward zipper at
// w0 = 1/2 - i/4; k is the first j with (0,-j) or (1,-j) outside A.
std::vector<std::pair<int, int>> zipper_rungs(const LatticeDomain& d); // the j values' points (0,-j)

// dense chain over the domain with SRW weight 1/4 per directed edge; with
// `zipper`, edges crossing the zipper get weight -1/4; only for small
// domains (enumeration work)
WeightedChain domain_chain(const LatticeDomain& d, bool zipper);

// log det(I - Q) over the interior with SRW (+ optional zipper signs) via
// sparse factorization
double lattice_logdet(const LatticeDomain& d, bool zipper);

// m_p(odd loops) = (1/2)[log det(I-Q_q) - log det(I-Q_p)]
double odd_loop_mass(const LatticeDomain& d);

struct OddLoopTruncation {
    double dfs_value = 0.0;   // DFS enumeration of odd loops up to max_len
    double trace_value = 0.0; // (1/2) sum_{n<=L} (tr P^n - tr Q^n)/n
    double tail_bound = 0.0;  // certified bound past max_len
};

// small-domain oracle for odd_loop_mass
OddLoopTruncation odd_loop_mass_truncated(const LatticeDomain& d, int max_len, bool run_dfs);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
};

SlopeFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys);

struct OddLoopSlopeRow {
    double radius = 0.0;
    int vertices = 0;
    double mass = 0.0;
};

struct OddLoopSlopeResult {
    std::vector<OddLoopSlopeRow> rows;
    double slope = 0.0; // fitted d mass / d log r
};

OddLoopSlopeResult odd_loop_slope(const std::vector<double>& radii);

struct EdgeProbability {
    double closed_form = 0.0;  // zipper determinant route, normalized
    double enumerated = -1.0;  // SAW enumeration route (small domains), else -1
    bool swapped_order = false; // (a,b) were reordered to the positive order
};

// P(LERW from a to b uses undirected edge {0,1}); a,b boundary points given
// as lattice coordinates.
EdgeProbability lerw_edge_probability(const LatticeDomain& d, std::pair<int, int> a,
                                      std::pair<int, int> b);

struct GreenStabilizationRow {
    double radius = 0.0;
    double g00_q = 0.0; // G_A(0,0;q)
    double g11_q = 0.0; // G_{A\0}(1,1;q)
    double g00_p = 0.0; // SRW Green at the origin (grows ~ log r)
};

std::vector<GreenStabilizationRow> green_stabilization(const std::vector<double>& radii);

// --- conformal observables ----------------------------------------------------

struct ConformalObservables {
    double r_a = 0.0;   // conformal radius about the marked center
    double theta = 0.0; // f(b) = e^{2 i theta} after f(a)=1
    double s = 0.0;     // sin theta
    double dist_center = 0.0;
    bool koebe_ok = false; // r_a/4 <= dist <= r_a
};

// disc of radius r centered at 0 with boundary marks a, b (angles in
// radians)
ConformalObservables disc_observables(double r, double angle_a, double angle_b);

// rectangle (0,w)x(0,h) about its center; a,b are boundary points
ConformalObservables rectangle_observables(double w, double h, std::pair<double, double> a,
                                           std::pair<double, double> b);

// observables for a lattice domain built by build_disc / build_rectangle,
// with exact dist(center, boundary of the union-of-squares region)
ConformalObservables domain_observables(const LatticeDomain& d, std::pair<int, int> a,
                                        std::pair<int, int> b);

// --- crossing exponent ---------------------------------------------------------

// boundary Poisson kernel of the rectangle (0,r)x(0,pi) between side points
// iy and r+iy', exact separation-of-variables series
double strip_kernel(double y, double ytilde, double r, int terms);

struct CrossingResult {
    std::vector<double> r_grid;
    std::vector<double> logdet;
    double slope = 0.0;          // minus the fitted slope of log det vs r
    double ratio_constant = 0.0; // n=2: det/(h11 h22) e^r sin^2 y1 sin^2 y2 at r_max
    double c_formula = 0.0;      // displayed c(y1,y2)
};

CrossingResult crossing_exponent(int n, const std::vector<double>& r_grid,
                                 const std::vector<double>& ys, int terms);

} // namespace loopforge
