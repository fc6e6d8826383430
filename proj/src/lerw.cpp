#include "loopforge/lerw.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

namespace loopforge {

namespace {

void require_markov(const WeightedChain& chain, const char* who) {
    if (classify_weight(chain).kind != WeightClass::markov)
        throw invalid_input(std::string(who) + ": sampling requires markov weights");
}

} // namespace

HarmonicSolution solve_harmonic(const WeightedChain& chain, const std::vector<int>& eta) {
    const int n = chain.interior_size(), t = chain.total_size();
    std::vector<char> on_eta(static_cast<std::size_t>(t), 0);
    for (int v : eta) on_eta[static_cast<std::size_t>(v)] = 1;

    std::vector<int> free; // interior vertices off eta
    std::vector<int> pos(static_cast<std::size_t>(t), -1);
    for (int v = 0; v < n; ++v)
        if (!on_eta[static_cast<std::size_t>(v)]) {
            pos[static_cast<std::size_t>(v)] = static_cast<int>(free.size());
            free.push_back(v);
        }

    HarmonicSolution sol;
    sol.phi.assign(static_cast<std::size_t>(t), 0.0);
    for (int v = n; v < t; ++v) sol.phi[static_cast<std::size_t>(v)] = 1.0;

    const int m = static_cast<int>(free.size());
    if (m > 0) {
        // (I-Q) phi = Q * boundary-part on the free block
        Eigen::MatrixXd a(m, m);
        Eigen::VectorXd rhs(m);
        for (int i = 0; i < m; ++i) {
            int u = free[static_cast<std::size_t>(i)];
            double r = 0.0;
            for (int v = n; v < t; ++v) r += chain.weight(u, v).real();
            rhs(i) = r;
            for (int jj = 0; jj < m; ++jj) {
                int v = free[static_cast<std::size_t>(jj)];
                a(i, jj) = (i == jj ? 1.0 : 0.0) - chain.weight(u, v).real();
            }
        }
        Eigen::VectorXd x = a.lu().solve(rhs);
        for (int i = 0; i < m; ++i) sol.phi[static_cast<std::size_t>(free[static_cast<std::size_t>(i)])] = x(i);
    }

    sol.escape.assign(static_cast<std::size_t>(t), 0.0);
    for (int v = 0; v < t; ++v) {
        if (on_eta[static_cast<std::size_t>(v)] && chain.is_interior(v)) {
            double lap = -sol.phi[static_cast<std::size_t>(v)];
            for (int w = 0; w < t; ++w)
                lap += chain.weight(v, w).real() * sol.phi[static_cast<std::size_t>(w)];
            sol.escape[static_cast<std::size_t>(v)] = lap;
        } else {
            sol.escape[static_cast<std::size_t>(v)] = sol.phi[static_cast<std::size_t>(v)];
        }
    }
    return sol;
}

LerwSample sample_lerw(const WeightedChain& chain, int x, Rng& rng) {
    require_markov(chain, "sample_lerw");
    if (!chain.is_interior(x)) throw invalid_input("sample_lerw: start must be interior");
    const int t = chain.total_size();
    LerwSample s;
    s.trajectory.v.push_back(x);
    int cur = x;
    std::vector<double> probs(static_cast<std::size_t>(t));
    for (long step = 0; step < 2000000000L; ++step) {
        probs.assign(static_cast<std::size_t>(t), 0.0);
        for (int vtx : chain.out_neighbors()[static_cast<std::size_t>(cur)])
            probs[static_cast<std::size_t>(vtx)] = chain.weight(cur, vtx).real();
        cur = rng.categorical(probs);
        s.trajectory.v.push_back(cur);
        if (chain.is_boundary(cur)) break;
    }
    if (!chain.is_boundary(cur)) throw numerical_error("sample_lerw: walk failed to reach dA");
    s.erased = loop_erase(s.trajectory);
    return s;
}

Complex lerw_law(const WeightedChain& chain, const Saw& eta) {
    if (eta.v.empty()) throw invalid_input("lerw_law: empty SAW");
    // boundary vertices may appear only as endpoints; they contribute a
    // Green factor of one via the F convention
    for (std::size_t i = 1; i + 1 < eta.v.size(); ++i)
        if (!chain.is_interior(eta.v[i]))
            throw invalid_input("lerw_law: eta must be interior except its endpoints");
    Complex q = path_weight(chain, eta.v);
    return q * f_ordered(chain, eta.v);
}

std::vector<double> laplacian_step(const WeightedChain& chain, const Saw& eta) {
    if (eta.v.empty()) throw invalid_input("laplacian_step: empty SAW");
    HarmonicSolution h = solve_harmonic(chain, eta.v);
    const int t = chain.total_size();
    int tip = eta.v.back();
    std::vector<double> probs(static_cast<std::size_t>(t), 0.0);
    double total = 0.0;
    for (int z : chain.out_neighbors()[static_cast<std::size_t>(tip)]) {
        double w = chain.weight(tip, z).real() * h.phi[static_cast<std::size_t>(z)];
        probs[static_cast<std::size_t>(z)] = w;
        total += w;
    }
    if (total <= 0.0) throw trapped_state_error("laplacian_step: all continuations have zero escape");
    for (double& p : probs) p /= total;
    return probs;
}

Saw sample_laplacian_walk(const WeightedChain& chain, int x, Rng& rng) {
    require_markov(chain, "sample_laplacian_walk");
    Saw eta(std::vector<int>{x});
    for (;;) {
        std::vector<double> probs = laplacian_step(chain, eta);
        int nxt = rng.categorical(probs);
        std::vector<int> v = eta.v;
        v.push_back(nxt);
        eta = Saw(std::move(v));
        if (chain.is_boundary(nxt)) return eta;
    }
}

RootedLoop sample_erased_loop(const WeightedChain& chain, const std::vector<char>& alive, int x,
                              Rng& rng) {
    require_markov(chain, "sample_erased_loop");
    const int t = chain.total_size();
    std::vector<int> walk{x};
    int cur = x;
    std::vector<double> probs(static_cast<std::size_t>(t));
    for (;;) {
        probs.assign(static_cast<std::size_t>(t), 0.0);
        for (int vtx : chain.out_neighbors()[static_cast<std::size_t>(cur)])
            probs[static_cast<std::size_t>(vtx)] = chain.weight(cur, vtx).real();
        cur = rng.categorical(probs);
        bool exits = chain.is_boundary(cur) ||
                     (chain.is_interior(cur) && !alive[static_cast<std::size_t>(cur)]);
        walk.push_back(cur);
        if (exits) break;
    }
    // cut at the last visit to x before the exit
    std::size_t sigma = 0;
    for (std::size_t k = 0; k + 1 < walk.size(); ++k)
        if (walk[k] == x) sigma = k;
    return RootedLoop(std::vector<int>(walk.begin(), walk.begin() + static_cast<std::ptrdiff_t>(sigma) + 1));
}

ErasedLoopPmf erased_loop_pmf(const WeightedChain& chain, const std::vector<char>& alive, int x,
                              int max_len, double target_coverage) {
    std::vector<int> removed;
    for (int v = 0; v < chain.interior_size(); ++v)
        if (!alive[static_cast<std::size_t>(v)]) removed.push_back(v);
    double gxx = green_diag_without(chain, removed, x).real();

    ErasedLoopPmf out;
    out.pmf[{x}] = 1.0 / gxx; // trivial loop
    out.covered = 1.0 / gxx;
    enumerate_rooted_loops(chain, x, max_len, alive,
                           [&](const std::vector<int>& loop, Complex w) {
                               double p = w.real() / gxx;
                               out.pmf[loop] = p;
                               out.covered += p;
                           });
    // tail of loop mass above max_len on the restricted chain
    WeightedChain sub = chain.without(removed);
    int xs = sub.index_of(chain.id_of(x));
    out.coverage_gap_bound = abs_tail_bound(sub, xs, max_len) / gxx;
    out.coverage_warning = (1.0 - out.covered) > target_coverage;
    return out;
}

std::map<std::vector<int>, double> lerw_exact_law(const WeightedChain& chain, int x) {
    if (chain.interior_size() > kExactLawCap)
        throw size_error("lerw_exact_law: interior larger than the enumeration cap");
    std::map<std::vector<int>, double> law;
    std::vector<char> alive(static_cast<std::size_t>(chain.interior_size()), 1);
    enumerate_saws_to_boundary(chain, x, alive, [&](const std::vector<int>& path, Complex) {
        Saw eta(path);
        law[path] = lerw_law(chain, eta).real();
    });
    return law;
}

} // namespace loopforge
