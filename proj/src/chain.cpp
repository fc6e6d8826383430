#include "loopforge/chain.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace loopforge {

const char* to_string(WeightClass c) {
    switch (c) {
        case WeightClass::markov: return "markov";
        case WeightClass::integrable: return "integrable";
        case WeightClass::green: return "green";
        case WeightClass::divergent: return "divergent";
    }
    return "?";
}

const char* to_string(Symmetry s) {
    switch (s) {
        case Symmetry::general: return "general";
        case Symmetry::symmetric: return "symmetric";
        case Symmetry::hermitian: return "hermitian";
    }
    return "?";
}

WeightedChain::WeightedChain(std::vector<VertexId> interior, std::vector<VertexId> boundary,
                             const std::vector<EdgeWeight>& edges, Symmetry symmetry)
    : n_(static_cast<int>(interior.size())),
      b_(static_cast<int>(boundary.size())),
      symmetry_(symmetry) {
    ids_ = std::move(interior);
    ids_.insert(ids_.end(), boundary.begin(), boundary.end());
    std::unordered_set<VertexId> seen(ids_.begin(), ids_.end());
    if (seen.size() != ids_.size())
        throw invalid_input("WeightedChain: vertex ids must be unique across A and dA");

    std::unordered_map<VertexId, int> index;
    for (int i = 0; i < static_cast<int>(ids_.size()); ++i) index[ids_[static_cast<std::size_t>(i)]] = i;

    w_ = Matrix::Zero(n_ + b_, n_ + b_);
    auto put = [&](int u, int v, Complex c) {
        if (u >= n_ && v >= n_)
            throw invalid_input("WeightedChain: edge with both endpoints in dA");
        w_(u, v) = c;
    };
    for (const auto& e : edges) {
        auto iu = index.find(e.from), iv = index.find(e.to);
        if (iu == index.end() || iv == index.end())
            throw invalid_input("WeightedChain: edge references unknown vertex id");
        int u = iu->second, v = iv->second;
        put(u, v, e.w);
        if (symmetry_ == Symmetry::symmetric && w_(v, u) == Complex(0.0) && u != v)
            put(v, u, e.w);
        if (symmetry_ == Symmetry::hermitian && w_(v, u) == Complex(0.0) && u != v)
            put(v, u, std::conj(e.w));
    }
    if (symmetry_ == Symmetry::symmetric) {
        if (!w_.isApprox(w_.transpose(), 1e-12))
            throw invalid_input("WeightedChain: weights violate declared symmetry");
    } else if (symmetry_ == Symmetry::hermitian) {
        if (!w_.isApprox(w_.adjoint(), 1e-12))
            throw invalid_input("WeightedChain: weights violate declared hermitian symmetry");
    }

    out_.assign(static_cast<std::size_t>(n_ + b_), {});
    for (int u = 0; u < n_ + b_; ++u)
        for (int v = 0; v < n_ + b_; ++v)
            if (w_(u, v) != Complex(0.0)) out_[static_cast<std::size_t>(u)].push_back(v);
}

int WeightedChain::index_of(VertexId id) const {
    for (int i = 0; i < static_cast<int>(ids_.size()); ++i)
        if (ids_[static_cast<std::size_t>(i)] == id) return i;
    return -1;
}

WeightedChain WeightedChain::without(const std::vector<int>& removed) const {
    std::vector<char> drop(static_cast<std::size_t>(n_ + b_), 0);
    for (int v : removed) {
        if (!is_interior(v)) throw invalid_input("without: only interior vertices can be removed");
        drop[static_cast<std::size_t>(v)] = 1;
    }
    std::vector<VertexId> in, bd;
    for (int v = 0; v < n_; ++v)
        if (!drop[static_cast<std::size_t>(v)]) in.push_back(ids_[static_cast<std::size_t>(v)]);
    for (int v = n_; v < n_ + b_; ++v) bd.push_back(ids_[static_cast<std::size_t>(v)]);
    std::vector<EdgeWeight> edges;
    for (int u = 0; u < n_ + b_; ++u) {
        if (drop[static_cast<std::size_t>(u)]) continue;
        for (int v : out_[static_cast<std::size_t>(u)]) {
            if (drop[static_cast<std::size_t>(v)]) continue;
            if (u >= n_ && v >= n_) continue;
            edges.push_back({ids_[static_cast<std::size_t>(u)], ids_[static_cast<std::size_t>(v)], w_(u, v)});
        }
    }
    return WeightedChain(std::move(in), std::move(bd), edges, Symmetry::general);
}

WeightedChain WeightedChain::demoted(const std::vector<int>& verts) const {
    std::vector<char> demote(static_cast<std::size_t>(n_ + b_), 0);
    for (int v : verts) {
        if (!is_interior(v)) throw invalid_input("demoted: only interior vertices can be demoted");
        demote[static_cast<std::size_t>(v)] = 1;
    }
    std::vector<VertexId> in, bd;
    for (int v = 0; v < n_; ++v)
        (demote[static_cast<std::size_t>(v)] ? bd : in).push_back(ids_[static_cast<std::size_t>(v)]);
    for (int v = n_; v < n_ + b_; ++v) bd.push_back(ids_[static_cast<std::size_t>(v)]);
    std::vector<EdgeWeight> edges;
    auto stays_interior = [&](int v) { return is_interior(v) && !demote[static_cast<std::size_t>(v)]; };
    for (int u = 0; u < n_ + b_; ++u)
        for (int v : out_[static_cast<std::size_t>(u)]) {
            if (!stays_interior(u) && !stays_interior(v)) continue;
            edges.push_back({ids_[static_cast<std::size_t>(u)], ids_[static_cast<std::size_t>(v)], w_(u, v)});
        }
    return WeightedChain(std::move(in), std::move(bd), edges, Symmetry::general);
}

namespace {

double spectral_radius(const Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    if (n == 0) return 0.0;
    if (n <= 2000) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    // power iteration on m with 1e-10 convergence
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 100000; ++it) {
        Eigen::VectorXd w = m * v;
        double nw = w.norm();
        if (nw == 0.0) return 0.0;
        w /= nw;
        double nl = std::abs(w.dot(m * w));
        if (std::abs(nl - lambda) < 1e-10) return nl;
        lambda = nl;
        v = w;
    }
    return lambda;
}

double spectral_radius_complex(const Matrix& m) {
    const int n = static_cast<int>(m.rows());
    if (n == 0) return 0.0;
    if (n <= 2000) {
        Eigen::ComplexEigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    Vector v = Vector::Ones(n);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 100000; ++it) {
        Vector w = m * v;
        double nw = w.norm();
        if (nw == 0.0) return 0.0;
        w /= nw;
        double nl = std::abs(w.dot(m * w));
        if (std::abs(nl - lambda) < 1e-10) return nl;
        lambda = nl;
        v = w;
    }
    return lambda;
}

bool boundary_reachable_from_all(const WeightedChain& chain) {
    // reverse reachability from dA along positive edges
    const int n = chain.interior_size(), t = chain.total_size();
    std::vector<char> reached(static_cast<std::size_t>(t), 0);
    std::vector<int> stack;
    for (int v = n; v < t; ++v) {
        reached[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
    }
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int u = 0; u < n; ++u) {
            if (!reached[static_cast<std::size_t>(u)] && chain.weight(u, v) != Complex(0.0)) {
                reached[static_cast<std::size_t>(u)] = 1;
                stack.push_back(u);
            }
        }
    }
    for (int u = 0; u < n; ++u)
        if (!reached[static_cast<std::size_t>(u)]) return false;
    return true;
}

bool is_markov(const WeightedChain& chain) {
    if (chain.boundary_size() == 0) return false;
    const int n = chain.interior_size(), t = chain.total_size();
    for (int u = 0; u < n; ++u) {
        double row = 0.0;
        for (int v = 0; v < t; ++v) {
            Complex c = chain.weight(u, v);
            if (c.imag() != 0.0 || c.real() < 0.0) return false;
            row += c.real();
        }
        if (std::abs(row - 1.0) > 1e-12) return false;
    }
    return boundary_reachable_from_all(chain);
}

} // namespace

Classification classify_weight(const WeightedChain& chain) {
    if (chain.interior_size() == 0) throw invalid_input("classify_weight: empty interior");
    Classification c;
    Matrix q = chain.q();
    c.rho_abs = spectral_radius(q.cwiseAbs());
    c.rho_plain = spectral_radius_complex(q);
    if (is_markov(chain)) {
        c.kind = WeightClass::markov;
    } else if (c.rho_abs < 1.0 - kRadiusMargin) {
        c.kind = WeightClass::integrable;
    } else if (c.rho_plain < 1.0 - kRadiusMargin) {
        c.kind = WeightClass::green;
    } else {
        c.kind = WeightClass::divergent;
    }
    return c;
}

GreenData green_function(const WeightedChain& chain) {
    GreenData g;
    g.classification = classify_weight(chain);
    if (g.classification.kind == WeightClass::divergent)
        throw not_green_error("green_function: weight is divergent");
    const int n = chain.interior_size();
    Matrix iq = Matrix::Identity(n, n) - chain.q();
    Eigen::PartialPivLU<Matrix> lu(iq);
    g.det_iq = lu.determinant();
    if (std::abs(g.det_iq) < 1e-300)
        throw not_green_error("green_function: I-Q is singular");
    g.green = lu.solve(Matrix::Identity(n, n));
    if (!g.green.allFinite()) throw not_green_error("green_function: non-finite Green entries");
    return g;
}

namespace {

// Green diagonal at x of the interior submatrix with `alive` rows/cols.
Complex green_diag_masked(const WeightedChain& chain, const std::vector<char>& alive, int x) {
    std::vector<int> keep;
    keep.reserve(alive.size());
    int xi = -1;
    for (int v = 0; v < chain.interior_size(); ++v) {
        if (alive[static_cast<std::size_t>(v)]) {
            if (v == x) xi = static_cast<int>(keep.size());
            keep.push_back(v);
        }
    }
    if (xi < 0) throw invalid_input("green diagonal requested at removed vertex");
    const int m = static_cast<int>(keep.size());
    Matrix iq(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            iq(i, j) = (i == j ? Complex(1.0) : Complex(0.0)) - chain.weight(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
    Eigen::PartialPivLU<Matrix> lu(iq);
    if (std::abs(Complex(lu.determinant())) < 1e-300)
        throw not_green_error("sub-chain is not green (singular I-Q)");
    Vector e = Vector::Zero(m);
    e(xi) = 1.0;
    Vector col = lu.solve(e);
    if (!col.allFinite()) throw not_green_error("sub-chain Green solve produced non-finite values");
    return col(xi);
}

} // namespace

Complex green_diag_without(const WeightedChain& chain, const std::vector<int>& removed, int x) {
    std::vector<char> alive(static_cast<std::size_t>(chain.interior_size()), 1);
    for (int v : removed)
        if (chain.is_interior(v)) alive[static_cast<std::size_t>(v)] = 0;
    return green_diag_masked(chain, alive, x);
}

Complex f_ordered(const WeightedChain& chain, const std::vector<int>& b_ordered) {
    std::vector<char> alive(static_cast<std::size_t>(chain.interior_size()), 1);
    Complex f = 1.0;
    for (int x : b_ordered) {
        if (!chain.is_interior(x)) continue; // F convention: intersect with A
        if (!alive[static_cast<std::size_t>(x)])
            throw invalid_input("f_ordered: vertices of B must be pairwise distinct");
        f *= green_diag_masked(chain, alive, x);
        alive[static_cast<std::size_t>(x)] = 0;
    }
    return f;
}

Complex f_of_set(const WeightedChain& chain, const std::vector<int>& b_set) {
    const int n = chain.interior_size();
    std::vector<char> drop(static_cast<std::size_t>(n), 0);
    for (int v : b_set)
        if (chain.is_interior(v)) drop[static_cast<std::size_t>(v)] = 1;
    Matrix iq_full = Matrix::Identity(n, n) - chain.q();
    std::vector<int> keep;
    for (int v = 0; v < n; ++v)
        if (!drop[static_cast<std::size_t>(v)]) keep.push_back(v);
    const int m = static_cast<int>(keep.size());
    Matrix iq_sub(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) iq_sub(i, j) = iq_full(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
    Complex d_full = Eigen::PartialPivLU<Matrix>(iq_full).determinant();
    Complex d_sub = m > 0 ? Complex(Eigen::PartialPivLU<Matrix>(iq_sub).determinant()) : Complex(1.0);
    if (std::abs(d_full) < 1e-300) throw not_green_error("f_of_set: I-Q singular");
    return d_sub / d_full;
}

Complex poisson_kernel(const WeightedChain& chain, int x, int z) {
    if (!chain.is_interior(x)) throw invalid_input("poisson_kernel: x must be interior");
    if (!chain.is_boundary(z)) throw invalid_input("poisson_kernel: z must be a boundary vertex");
    GreenData g = green_function(chain);
    Complex h = 0.0;
    for (int y = 0; y < chain.interior_size(); ++y) h += g.green(x, y) * chain.weight(y, z);
    return h;
}

Matrix poisson_kernel_matrix(const WeightedChain& chain) {
    GreenData g = green_function(chain);
    const int n = chain.interior_size(), b = chain.boundary_size();
    Matrix to_bd(n, b);
    for (int y = 0; y < n; ++y)
        for (int z = 0; z < b; ++z) to_bd(y, z) = chain.weight(y, n + z);
    return g.green * to_bd;
}

Complex boundary_poisson_kernel(const WeightedChain& chain, int z, int w) {
    if (!chain.is_boundary(z) || !chain.is_boundary(w))
        throw invalid_input("boundary_poisson_kernel: z,w must be boundary vertices");
    GreenData g = green_function(chain);
    const int n = chain.interior_size();
    // paths must contain at least one interior vertex, so there is no direct
    // z->w term
    Complex h = 0.0;
    for (int x = 0; x < n; ++x) {
        Complex zin = chain.weight(z, x);
        if (zin == Complex(0.0)) continue;
        for (int y = 0; y < n; ++y) h += zin * g.green(x, y) * chain.weight(y, w);
    }
    return h;
}

FirstReturn first_return_mass(const WeightedChain& chain, int x) {
    if (!chain.is_interior(x)) throw invalid_input("first_return_mass: x must be interior");
    Classification c = classify_weight(chain);
    if (c.kind != WeightClass::markov && c.kind != WeightClass::integrable)
        throw not_green_error("first_return_mass: requires an integrable weight");
    GreenData g = green_function(chain);
    FirstReturn r;
    Complex gxx = g.green(x, x);
    r.zero_diagonal = std::abs(gxx) < 1e-14;
    r.f = r.zero_diagonal ? Complex(0.0) : Complex(1.0) - Complex(1.0) / gxx;
    return r;
}

double abs_tail_bound(const WeightedChain& chain, int x, int len) {
    const int n = chain.interior_size();
    Eigen::MatrixXd aq = chain.q().cwiseAbs();
    Eigen::MatrixXd iq = Eigen::MatrixXd::Identity(n, n) - aq;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(iq);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(x) = 1.0;
    Eigen::VectorXd row = e;
    for (int k = 0; k <= len; ++k) row = aq.transpose() * row; // row of |Q|^{len+1}
    Eigen::VectorXd gcol = lu.solve(e);
    return row.dot(gcol);
}

double abs_tail_bound_trace(const WeightedChain& chain, int len) {
    const int n = chain.interior_size();
    Eigen::MatrixXd aq = chain.q().cwiseAbs();
    Eigen::MatrixXd iq = Eigen::MatrixXd::Identity(n, n) - aq;
    Eigen::MatrixXd g = iq.lu().solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
    for (int k = 0; k <= len; ++k) p = p * aq;
    return (p * g).trace();
}

} // namespace loopforge
