#include "loopforge/isomorphism.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace loopforge {

WeightedChain EdgeWeightTheta::to_chain() const {
    std::vector<VertexId> interior(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) interior[static_cast<std::size_t>(i)] = i;
    std::vector<EdgeWeight> edges;
    for (auto [u, v, th] : entries) {
        if (u == v) {
            edges.push_back({u, u, Complex(th, 0.0)});
        } else {
            edges.push_back({u, v, Complex(th / 2.0, 0.0)});
            edges.push_back({v, u, Complex(th / 2.0, 0.0)});
        }
    }
    return WeightedChain(std::move(interior), {}, edges, Symmetry::symmetric);
}

EdgeWeightTheta EdgeWeightTheta::from_chain(const WeightedChain& chain) {
    if (chain.symmetry() == Symmetry::general)
        throw invalid_input("EdgeWeightTheta: chain must be symmetric");
    EdgeWeightTheta t;
    t.n = chain.interior_size();
    for (int u = 0; u < t.n; ++u)
        for (int v = u; v < t.n; ++v) {
            Complex w = chain.weight(u, v);
            if (w == Complex(0.0)) continue;
            if (w.imag() != 0.0) throw invalid_input("EdgeWeightTheta: weights must be real");
            t.entries.emplace_back(u, v, u == v ? w.real() : 2.0 * w.real());
        }
    return t;
}

FieldSample field_from_values(std::vector<double> z) {
    FieldSample f;
    f.z = std::move(z);
    f.t.resize(f.z.size());
    f.j.resize(f.z.size());
    for (std::size_t i = 0; i < f.z.size(); ++i) {
        f.t[i] = 0.5 * f.z[i] * f.z[i];
        f.j[i] = f.z[i] >= 0.0 ? 1 : -1;
    }
    return f;
}

FieldSample sample_gff(const Matrix& green, Rng& rng) {
    const int n = static_cast<int>(green.rows());
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (std::abs(green(i, j).imag()) > 1e-12)
                throw invalid_input("sample_gff: covariance must be real");
            g(i, j) = green(i, j).real();
        }
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw numerical_error("sample_gff: covariance is not positive definite");
    Eigen::VectorXd xi(n);
    for (int i = 0; i < n; ++i) xi(i) = rng.normal();
    Eigen::VectorXd z = llt.matrixL() * xi;
    return field_from_values(std::vector<double>(z.data(), z.data() + n));
}

double gff_density(const WeightedChain& chain, const std::vector<double>& z) {
    const int n = chain.interior_size();
    if (static_cast<int>(z.size()) != n) throw invalid_input("gff_density: size mismatch");
    GreenData g = green_function(chain);
    if (std::abs(g.det_iq.imag()) > 1e-12 || g.det_iq.real() <= 0.0)
        throw invalid_input("gff_density: det(I-Q) must be positive real");
    double phi = 1.0;
    for (double v : z) phi *= std::exp(-0.5 * v * v) / std::sqrt(2.0 * M_PI);
    double s = 0.0;
    for (int u = 0; u < n; ++u)
        for (int v = u; v < n; ++v) {
            Complex w = chain.weight(u, v);
            if (w == Complex(0.0)) continue;
            double theta = (u == v) ? w.real() : 2.0 * w.real();
            s += theta * z[static_cast<std::size_t>(u)] * z[static_cast<std::size_t>(v)];
        }
    return phi * std::sqrt(g.det_iq.real()) * std::exp(0.5 * s);
}

double mvn_density(const Matrix& green, const std::vector<double>& z) {
    const int n = static_cast<int>(green.rows());
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = green(i, j).real();
    Eigen::VectorXd zv(n);
    for (int i = 0; i < n; ++i) zv(i) = z[static_cast<std::size_t>(i)];
    Eigen::MatrixXd gi = g.lu().solve(Eigen::MatrixXd::Identity(n, n));
    double quad = zv.dot(gi * zv);
    double det = g.lu().determinant();
    return std::exp(-0.5 * quad) / std::pow(2.0 * M_PI, 0.5 * n) / std::sqrt(det);
}

SoupSquaredSample sample_T_from_soup(const BubbleSampler& sampler, const EdgeIndex& ei, Rng& rng) {
    SoupSquaredSample s;
    s.current = sampler.sample_current(0.5, rng, ei);
    const std::size_t n = s.current.n.size();
    s.t.resize(n);
    for (std::size_t x = 0; x < n; ++x) {
        double t = rng.gamma(0.5);
        int nx = s.current.n[x];
        for (int i = 0; i < nx; ++i) t += rng.exponential();
        s.t[x] = t;
    }
    return s;
}

LeJanReport le_jan_marginal_check(const std::vector<std::vector<double>>& soup_t,
                                  const std::vector<std::vector<double>>& gff_t) {
    if (soup_t.size() != gff_t.size() || soup_t.empty())
        throw invalid_input("le_jan_marginal_check: vertex counts differ");
    const std::size_t n = soup_t.size();
    for (std::size_t x = 0; x < n; ++x)
        if (soup_t[x].size() < 10000 || gff_t[x].size() < 10000)
            throw invalid_input("le_jan_marginal_check: need at least 1e4 samples per set");
    LeJanReport rep;
    for (std::size_t x = 0; x < n; ++x) {
        const std::vector<double>& a = soup_t[x];
        const std::vector<double>& b = gff_t[x];
        rep.per_vertex_ks.push_back(stats::ks_two_sample(a, b));

        stats::Moments ma, mb, ma2, mb2;
        for (double v : a) {
            ma.add(v);
            ma2.add(v * v);
        }
        for (double v : b) {
            mb.add(v);
            mb2.add(v * v);
        }
        double se1 = std::sqrt(ma.stderr_mean() * ma.stderr_mean() + mb.stderr_mean() * mb.stderr_mean());
        double se2 = std::sqrt(ma2.stderr_mean() * ma2.stderr_mean() + mb2.stderr_mean() * mb2.stderr_mean());
        rep.mean_diff_sigmas.push_back(std::abs(ma.mean - mb.mean) / se1);
        rep.second_moment_sigmas.push_back(std::abs(ma2.mean - mb2.mean) / se2);
    }
    rep.min_ks_pvalue = 1.0;
    for (const auto& k : rep.per_vertex_ks) rep.min_ks_pvalue = std::min(rep.min_ks_pvalue, k.pvalue);
    return rep;
}

std::vector<double> sign_conditional_law(const EdgeWeightTheta& theta, const std::vector<double>& t) {
    const int n = theta.n;
    if (n > kSignLawCap) throw size_error("sign_conditional_law: interior exceeds the 2^n cap");
    if (static_cast<int>(t.size()) != n) throw invalid_input("sign_conditional_law: size mismatch");
    std::vector<double> w(static_cast<std::size_t>(1) << n, 0.0);
    double total = 0.0;
    for (std::size_t mask = 0; mask < w.size(); ++mask) {
        double s = 0.0;
        for (auto [u, v, th] : theta.entries) {
            int ju = (mask >> u) & 1 ? 1 : -1;
            int jv = (mask >> v) & 1 ? 1 : -1;
            s += th * ju * jv *
                 std::sqrt(t[static_cast<std::size_t>(u)] * t[static_cast<std::size_t>(v)]);
        }
        w[mask] = std::exp(s);
        total += w[mask];
    }
    for (double& x : w) x /= total;
    return w;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
        for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

} // namespace

FieldSample lupu_sample(const BubbleSampler& sampler, const EdgeIndex& ei,
                        const std::vector<Complex>& theta, Rng& rng) {
    const int n = ei.n_vertices;
    SoupSquaredSample s = sample_T_from_soup(sampler, ei, rng);

    UnionFind uf(n);
    for (int e = 0; e < ei.size(); ++e) {
        auto [u, v] = ei.edges[static_cast<std::size_t>(e)];
        if (u == v) continue;
        double th = theta[static_cast<std::size_t>(e)].real();
        if (th < 0.0) throw invalid_input("lupu_sample: requires positive theta");
        bool open = s.current.k[static_cast<std::size_t>(e)] >= 1;
        if (!open) {
            double rho = th * std::sqrt(s.t[static_cast<std::size_t>(u)] * s.t[static_cast<std::size_t>(v)]);
            if (rng.uniform() < 1.0 - std::exp(-rho)) open = true;
        }
        if (open) uf.unite(u, v);
    }

    // cluster signs drawn in ascending order of the cluster's minimal vertex
    std::vector<int> sign(static_cast<std::size_t>(n), 0);
    std::vector<int> cluster_sign(static_cast<std::size_t>(n), 0);
    for (int x = 0; x < n; ++x) {
        int root = uf.find(x);
        if (cluster_sign[static_cast<std::size_t>(root)] == 0)
            cluster_sign[static_cast<std::size_t>(root)] = rng.uniform() < 0.5 ? 1 : -1;
        sign[static_cast<std::size_t>(x)] = cluster_sign[static_cast<std::size_t>(root)];
    }

    FieldSample f;
    f.t = s.t;
    f.j = sign;
    f.z.resize(static_cast<std::size_t>(n));
    for (int x = 0; x < n; ++x)
        f.z[static_cast<std::size_t>(x)] =
            sign[static_cast<std::size_t>(x)] * std::sqrt(2.0 * s.t[static_cast<std::size_t>(x)]);
    return f;
}

JjSumSides jj_current_sum(const EdgeIndex& ei, int n_vertices, const std::vector<double>& rho,
                          int cutoff) {
    if (n_vertices > kSignLawCap) throw size_error("jj_current_sum: interior exceeds the 2^n cap");
    JjSumSides out;

    // LHS: 2^{-n} sum over sign vectors of exp{sum J_e rho_e}
    const std::size_t count = static_cast<std::size_t>(1) << n_vertices;
    double lhs = 0.0;
    for (std::size_t mask = 0; mask < count; ++mask) {
        double s = 0.0;
        for (int e = 0; e < ei.size(); ++e) {
            auto [u, v] = ei.edges[static_cast<std::size_t>(e)];
            int ju = (mask >> u) & 1 ? 1 : -1;
            int jv = (mask >> v) & 1 ? 1 : -1;
            s += rho[static_cast<std::size_t>(e)] * ju * jv;
        }
        lhs += std::exp(s);
    }
    out.lhs = lhs / static_cast<double>(count);

    // RHS: sum over currents with k_e <= cutoff of prod rho^k / k!
    std::vector<int> k(static_cast<std::size_t>(ei.size()), 0);
    double rhs = 0.0;
    std::function<void(int, double)> rec = [&](int e, double w) {
        if (e == ei.size()) {
            std::vector<int> twice(static_cast<std::size_t>(n_vertices), 0);
            for (int i = 0; i < ei.size(); ++i) {
                auto [u, v] = ei.edges[static_cast<std::size_t>(i)];
                if (u == v) continue;
                twice[static_cast<std::size_t>(u)] += k[static_cast<std::size_t>(i)];
                twice[static_cast<std::size_t>(v)] += k[static_cast<std::size_t>(i)];
            }
            for (int x = 0; x < n_vertices; ++x)
                if (twice[static_cast<std::size_t>(x)] % 2 != 0) return;
            rhs += w;
            return;
        }
        double term = 1.0;
        for (int v = 0; v <= cutoff; ++v) {
            k[static_cast<std::size_t>(e)] = v;
            rec(e + 1, w * term);
            term *= rho[static_cast<std::size_t>(e)] / (v + 1.0);
        }
        k[static_cast<std::size_t>(e)] = 0;
    };
    rec(0, 1.0);
    out.rhs = rhs;

    // tail: any edge above the cutoff, bounded by exp-moment remainders
    double tail = 0.0;
    for (int e = 0; e < ei.size(); ++e) {
        double r = std::abs(rho[static_cast<std::size_t>(e)]);
        double rem = std::pow(r, cutoff + 1) / std::tgamma(cutoff + 2.0) * std::exp(r);
        double others = 1.0;
        for (int e2 = 0; e2 < ei.size(); ++e2)
            if (e2 != e) others *= std::exp(std::abs(rho[static_cast<std::size_t>(e2)]));
        tail += rem * others;
    }
    out.tail_bound = tail;
    return out;
}

} // namespace loopforge
