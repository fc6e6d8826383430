#include "loopforge/multipath.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include <Eigen/LU>

#include "loopforge/lerw.hpp"

namespace loopforge {

namespace {

// F_{B}(A) memoized over the bitmask of interior vertices in B
struct FMemo {
    const WeightedChain& chain;
    std::map<std::uint64_t, Complex> cache;

    explicit FMemo(const WeightedChain& c) : chain(c) {
        if (c.interior_size() > 62) throw size_error("multipath: interior too large for bitmask F");
    }

    Complex get(std::uint64_t mask) {
        auto it = cache.find(mask);
        if (it != cache.end()) return it->second;
        std::vector<int> verts;
        for (int v = 0; v < chain.interior_size(); ++v)
            if (mask & (1ULL << v)) verts.push_back(v);
        Complex f = f_of_set(chain, verts);
        cache.emplace(mask, f);
        return f;
    }
};

void check_distinct(const std::vector<int>& xs, const std::vector<int>& ys) {
    std::vector<int> all = xs;
    all.insert(all.end(), ys.begin(), ys.end());
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
        throw invalid_input("multipath: endpoints must be distinct");
}

// enumerate mutually-avoiding SAW tuples; occupied vertices are blocked as
// intermediates (interior endpoints of all walks are pre-marked)
void tuples(const WeightedChain& chain, const std::vector<int>& xs, const std::vector<int>& ys,
            std::size_t j, std::vector<char>& occupied, std::uint64_t used_mask, Complex weight,
            FMemo& memo, Complex& total) {
    if (j == xs.size()) {
        total += weight * memo.get(used_mask);
        return;
    }
    std::vector<char> alive(static_cast<std::size_t>(chain.interior_size()), 1);
    for (int v = 0; v < chain.interior_size(); ++v)
        if (occupied[static_cast<std::size_t>(v)]) alive[static_cast<std::size_t>(v)] = 0;
    enumerate_saws_between(chain, xs[j], ys[j], alive, [&](const std::vector<int>& path, Complex w) {
        std::uint64_t mask2 = used_mask;
        std::vector<int> marked;
        for (int v : path) {
            if (chain.is_interior(v)) mask2 |= 1ULL << v;
            if (!occupied[static_cast<std::size_t>(v)]) {
                occupied[static_cast<std::size_t>(v)] = 1;
                marked.push_back(v);
            }
        }
        tuples(chain, xs, ys, j + 1, occupied, mask2, weight * w, memo, total);
        for (int v : marked) occupied[static_cast<std::size_t>(v)] = 0;
    });
}

} // namespace

Complex hat_h(const WeightedChain& chain, const std::vector<int>& xs, const std::vector<int>& ys) {
    if (xs.size() != ys.size() || xs.empty()) throw invalid_input("hat_h: endpoint vectors mismatch");
    if (chain.interior_size() > kMultipathCap)
        throw size_error("hat_h: interior exceeds the enumeration cap");
    check_distinct(xs, ys);
    FMemo memo(chain);
    Complex total = 0.0;
    std::vector<char> occupied(static_cast<std::size_t>(chain.total_size()), 0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        occupied[static_cast<std::size_t>(xs[i])] = 1;
        occupied[static_cast<std::size_t>(ys[i])] = 1;
    }
    tuples(chain, xs, ys, 0, occupied, 0, Complex(1.0), memo, total);
    return total;
}

Complex walk_mass(const WeightedChain& chain, int x, int y) {
    if (chain.is_boundary(x) && chain.is_boundary(y)) return boundary_poisson_kernel(chain, x, y);
    if (chain.is_interior(x) && chain.is_boundary(y)) return poisson_kernel(chain, x, y);
    if (chain.is_boundary(x) && chain.is_interior(y)) {
        GreenData g = green_function(chain);
        Complex h = 0.0;
        for (int v = 0; v < chain.interior_size(); ++v) h += chain.weight(x, v) * g.green(v, y);
        return h;
    }
    GreenData g = green_function(chain);
    return g.green(x, y);
}

FominTwoPath fomin_two_path_check(const WeightedChain& chain, int x1, int x2, int y1, int y2) {
    FominTwoPath r;
    r.lhs = hat_h(chain, {x1, x2}, {y1, y2}) - hat_h(chain, {x1, x2}, {y2, y1});
    r.rhs = walk_mass(chain, x1, y1) * walk_mass(chain, x2, y2) -
            walk_mass(chain, x1, y2) * walk_mass(chain, x2, y1);
    return r;
}

FominDet fomin_det_check(const WeightedChain& chain, const std::vector<int>& xs,
                         const std::vector<int>& ys) {
    const std::size_t k = xs.size();
    if (k != ys.size() || k == 0 || k > 3)
        throw invalid_input("fomin_det_check: k must be between 1 and 3");
    for (int v : xs)
        if (!chain.is_boundary(v)) throw invalid_input("fomin_det_check: points must be boundary");
    for (int v : ys)
        if (!chain.is_boundary(v)) throw invalid_input("fomin_det_check: points must be boundary");

    FominDet r;
    r.hat_direct = hat_h(chain, xs, ys);

    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    Complex sum = 0.0;
    do {
        int inversions = 0;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j)
                if (perm[i] > perm[j]) ++inversions;
        std::vector<int> ys_perm(k);
        for (std::size_t i = 0; i < k; ++i) ys_perm[i] = ys[static_cast<std::size_t>(perm[i])];
        Complex h = hat_h(chain, xs, ys_perm);
        sum += (inversions % 2 == 0 ? 1.0 : -1.0) * h;
    } while (std::next_permutation(perm.begin(), perm.end()));
    r.signed_sum = sum;

    const int ki = static_cast<int>(k);
    Matrix m(ki, ki);
    for (int i = 0; i < ki; ++i)
        for (int j = 0; j < ki; ++j)
            m(i, j) = walk_mass(chain, xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)]);
    r.determinant = m.determinant();
    return r;
}

namespace {

// mass of paths from `from` to `to` whose intermediate vertices lie in
// A \ removed; from/to may be boundary or removed vertices (direct step
// included)
Complex kernel_through(const WeightedChain& chain, const WeightedChain& sub,
                       const GreenData& gsub, int from_full, int to_full) {
    Complex total = chain.weight(from_full, to_full);
    for (int u = 0; u < sub.interior_size(); ++u) {
        int uf = chain.index_of(sub.id_of(u));
        Complex first = chain.weight(from_full, uf);
        if (first == Complex(0.0)) continue;
        for (int v = 0; v < sub.interior_size(); ++v) {
            int vf = chain.index_of(sub.id_of(v));
            total += first * gsub.green(u, v) * chain.weight(vf, to_full);
        }
    }
    return total;
}

} // namespace

EdgeTraversal edge_traversal_expectation(const WeightedChain& chain, int x, int y, int z, int w,
                                         int path_len) {
    if (chain.symmetry() == Symmetry::general)
        throw invalid_input("edge_traversal_expectation: requires a symmetric weight");
    Classification cls = classify_weight(chain);
    if (cls.kind != WeightClass::markov && cls.kind != WeightClass::integrable)
        throw invalid_input("edge_traversal_expectation: requires an integrable weight");
    if (!chain.is_boundary(x) || !chain.is_boundary(y) || x == y)
        throw invalid_input("edge_traversal_expectation: x,y must be distinct boundary points");
    if (!chain.is_interior(z) || !chain.is_interior(w) || z == w)
        throw invalid_input("edge_traversal_expectation: edge endpoints must be interior");

    EdgeTraversal r;

    // (a) closed form on A' = A \ {z,w}
    WeightedChain sub = chain.without({z, w});
    GreenData gsub = green_function(sub);
    Complex hxz = kernel_through(chain, sub, gsub, x, z);
    Complex hyw = kernel_through(chain, sub, gsub, y, w);
    Complex hxw = kernel_through(chain, sub, gsub, x, w);
    Complex hyz = kernel_through(chain, sub, gsub, y, z);
    Complex fe = f_of_set(chain, {z, w});
    r.closed_form = chain.weight(z, w) * fe * (hxz * hyw - hxw * hyz);

    // (b) SAW sum of q-hat (I_e - I_{e^R})
    std::vector<char> alive(static_cast<std::size_t>(chain.interior_size()), 1);
    Complex saw_total = 0.0;
    enumerate_saws_between(chain, x, y, alive, [&](const std::vector<int>& path, Complex) {
        int indicator = 0;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            if (path[i] == z && path[i + 1] == w) indicator += 1;
            if (path[i] == w && path[i + 1] == z) indicator -= 1;
        }
        if (indicator != 0) saw_total += static_cast<double>(indicator) * lerw_law(chain, Saw(path));
    });
    r.saw_sum = saw_total;

    // (c) truncated path sum: length DP for sum q(omega) (Y_e - Y_e^-)
    const int t = chain.total_size();
    Vector u = Vector::Zero(t), uw = Vector::Zero(t);
    u(x) = 1.0;
    Complex acc = 0.0;
    for (int step = 1; step <= path_len; ++step) {
        Vector nu = Vector::Zero(t), nw = Vector::Zero(t);
        for (int a = 0; a < t; ++a) {
            if (u(a) == Complex(0.0) && uw(a) == Complex(0.0)) continue;
            if (chain.is_boundary(a) && step > 1) continue; // absorbed at dA
            for (int bvx : chain.out_neighbors()[static_cast<std::size_t>(a)]) {
                Complex qq = chain.weight(a, bvx);
                nu(bvx) += u(a) * qq;
                nw(bvx) += uw(a) * qq;
                if (a == z && bvx == w) nw(bvx) += u(a) * qq;
                if (a == w && bvx == z) nw(bvx) -= u(a) * qq;
            }
        }
        u = nu;
        uw = nw;
        acc += uw(y);
    }
    r.path_sum = acc;

    // certified tail: sum_{n>L} n * (abs path mass of length n from x to y)
    // = alpha^T M^{L-1} [ (L+1) N + M N^2 ] beta with M=|Q|, N=(I-M)^{-1}
    {
        const int n = chain.interior_size();
        Eigen::MatrixXd m = chain.q().cwiseAbs();
        Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n), beta = Eigen::VectorXd::Zero(n);
        for (int v = 0; v < n; ++v) {
            alpha(v) = std::abs(chain.weight(x, v));
            beta(v) = std::abs(chain.weight(v, y));
        }
        Eigen::MatrixXd nn = (Eigen::MatrixXd::Identity(n, n) - m)
                                 .lu()
                                 .solve(Eigen::MatrixXd::Identity(n, n));
        Eigen::VectorXd lhs = alpha;
        for (int i = 0; i < path_len - 1; ++i) lhs = m.transpose() * lhs;
        Eigen::MatrixXd core = (path_len + 1.0) * nn + m * nn * nn;
        r.path_tail = lhs.dot(core * beta);
    }
    return r;
}

} // namespace loopforge
