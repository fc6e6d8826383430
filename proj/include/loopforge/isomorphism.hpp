#pragma once

#include <vector>

#include "loopforge/chain.hpp"
#include "loopforge/rng.hpp"
#include "loopforge/soup.hpp"
#include "loopforge/stats.hpp"

namespace loopforge {

// Real weight on undirected edges (self-edges allowed); q(x,y)=theta/2 off
// the diagonal and q(x,x)=theta_xx.  Vertices 0..n-1, no explicit boundary
// (the missing row mass acts as killing).
struct EdgeWeightTheta {
    int n = 0;
    std::vector<std::tuple<int, int, double>> entries; // (u,v,theta), u<=v

    WeightedChain to_chain() const;
    static EdgeWeightTheta from_chain(const WeightedChain& chain);
};

struct FieldSample {
    std::vector<double> z;
    std::vector<double> t; // z^2/2
    std::vector<int> j;    // signs
};

FieldSample field_from_values(std::vector<double> z);

// z = L xi with L the Cholesky factor of G; requires symmetric positive
// definite G.
FieldSample sample_gff(const Matrix& green, Rng& rng);

// density of the theta-weighted field at zbar: phi(z) sqrt(D)
// exp{ (1/2) sum theta_e z_e }.
double gff_density(const WeightedChain& chain, const std::vector<double>& z);
// reference multivariate normal density with covariance G
double mvn_density(const Matrix& green, const std::vector<double>& z);

// Soup route to the squared field: sample the t=1/2 current, then
// t_x = Gamma(1/2,1) + Gamma(n_x,1).
struct SoupSquaredSample {
    Current current;
    std::vector<double> t;
};

SoupSquaredSample sample_T_from_soup(const BubbleSampler& sampler, const EdgeIndex& ei, Rng& rng);

struct LeJanReport {
    std::vector<stats::KsResult> per_vertex_ks;
    std::vector<double> mean_diff_sigmas;   // |mean_a-mean_b| in combined SEs
    std::vector<double> second_moment_sigmas;
    double min_ks_pvalue = 1.0;
};

// Compares the soup-constructed squared-field samples against direct Z^2/2
// samples.  Each sample set is indexed [vertex][sample]; at least 1e4
// samples per vertex are required.
LeJanReport le_jan_marginal_check(const std::vector<std::vector<double>>& soup_t,
                                  const std::vector<std::vector<double>>& gff_t);

inline constexpr int kSignLawCap = 20;

// Exact conditional sign law given tbar: probability per sign vector
// (bitmask: bit x set means J_x=+1), proportional to exp{sum theta_e J_e
// sqrt(t_e)}.
std::vector<double> sign_conditional_law(const EdgeWeightTheta& theta, const std::vector<double>& t);

// Lupu's algorithm: soup -> (kbar, tbar) -> open edges -> cluster signs.
FieldSample lupu_sample(const BubbleSampler& sampler, const EdgeIndex& ei,
                        const std::vector<Complex>& theta, Rng& rng);

struct JjSumSides {
    double lhs = 0.0; // E[exp sum J_e rho_e] by 2^n enumeration
    double rhs = 0.0; // sum over currents of Psi(k, rho)
    double tail_bound = 0.0;
};

// Lemma-level identity between the sign expectation and the current sum;
// rho given per edge of ei; per-edge cutoff for the current enumeration.
JjSumSides jj_current_sum(const EdgeIndex& ei, int n_vertices, const std::vector<double>& rho,
                          int cutoff);

} // namespace loopforge
