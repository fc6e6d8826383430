#pragma once

#include <map>
#include <string>
#include <vector>

#include "loopforge/chain.hpp"
#include "loopforge/paths.hpp"
#include "loopforge/rng.hpp"

namespace loopforge {

// Negative binomial mass Gamma(k+t)/(k! Gamma(t)) f^k (1-f)^t; complex f
// with |f|<1 gives the complex measure value.
Complex negbin_pmf(Complex f, double t, int k);

inline constexpr long kElementaryAttemptBudget = 1000000;

// Excursion sampler for the elementary-loop law p/f_x: run the chain from x
// inside the alive set, keep the excursion if it returns to x before
// leaving.  Throws starvation_error past the attempt budget.
RootedLoop sample_elementary_loop(const WeightedChain& chain, const std::vector<char>& alive,
                                  int x, Rng& rng);

int sample_negbin(double f, double t, Rng& rng);

struct GrowingLoop {
    RootedLoop loop;
    int elementary_count = 0;
};

// K ~ negbin(f_x, t) elementary loops concatenated in arrival order.
GrowingLoop sample_growing_loop(const WeightedChain& chain, const std::vector<char>& alive,
                                int x, double t, Rng& rng);

// mu_t(l) = G(x,x)^{-t} Gamma(k+t)/(k! Gamma(t)) q(l) for l rooted at x with
// k elementary loops; valid for complex integrable weights.
Complex growing_loop_pmf(const WeightedChain& chain, const std::vector<char>& alive, int x,
                         double t, const RootedLoop& l);

// Bubble soup at time t for the given interior ordering: independent
// growing loops at x_j within A_j.
std::vector<GrowingLoop> sample_bubble_soup(const WeightedChain& chain,
                                            const std::vector<int>& ordering, double t, Rng& rng);

struct SoupArrival {
    double time = 0.0;
    RootedLoop loop;
    int site = -1;
};

// Time-ordered realization of the rooted soup at x (measure m'_{A,x}) up to
// time t_max: Poisson arrivals, each a concatenation of a log-series number
// of elementary loops.
std::vector<SoupArrival> sample_soup_arrivals(const WeightedChain& chain,
                                              const std::vector<char>& alive, int x,
                                              double t_max, Rng& rng);

// Bubble-soup arrivals across an ordering, merged in time order.
std::vector<SoupArrival> sample_bubble_arrivals(const WeightedChain& chain,
                                                const std::vector<int>& ordering, double t_max,
                                                Rng& rng);

// --- currents ----------------------------------------------------------------

// Undirected edge index over the support of a symmetric chain.
struct EdgeIndex {
    int n_vertices = 0;
    std::vector<std::pair<int, int>> edges; // (u,v) with u<=v, interior only
    std::vector<int> dense;                 // n*n lookup, -1 when absent

    static EdgeIndex from_chain(const WeightedChain& chain);
    int find(int u, int v) const {
        return dense[static_cast<std::size_t>(u) * static_cast<std::size_t>(n_vertices) +
                     static_cast<std::size_t>(v)];
    }
    int size() const { return static_cast<int>(edges.size()); }
};

struct Current {
    std::vector<int> k;  // per undirected edge
    std::vector<int> n;  // vertex local times, derived
    int s = 0;           // total non-self-edge traversals

    std::string key() const;
};

// Traversal counts of a collection of loops; asserts integrality of every
// vertex local time.
Current project_current(const std::vector<RootedLoop>& loops, const EdgeIndex& ei, int n_vertices);

// Builds the Current from edge counts, validating the parity condition.
Current current_from_counts(const std::vector<int>& k, const EdgeIndex& ei, int n_vertices);

// theta weight on undirected edges read off a symmetric chain
std::vector<Complex> theta_from_chain(const WeightedChain& chain, const EdgeIndex& ei);

// Closed-form pmf of the t=1/2 soup on currents:
// sqrt(D) prod_x Gamma(n_x+1/2)/sqrt(pi) prod_e theta^k/k!.
Complex current_pmf_half(const WeightedChain& chain, const EdgeIndex& ei, const Current& cur);

// Exhaustive bubble-soup-induced current distribution at time t via
// convolution over elementary-loop tuples; exact up to the per-edge caps.
// Returns measure per current key plus the certified uncovered-mass bound.
struct CurrentDistribution {
    std::map<std::string, Complex> pmf;
    std::vector<Current> support;
    double coverage_gap = 0.0;
};

CurrentDistribution bubble_current_distribution(const WeightedChain& chain, const EdgeIndex& ei,
                                                double t, const std::vector<int>& caps);

// Complex-intensity soup measure of a finite multiset N over items with
// complex intensities mu, at time t.
Complex complex_soup_measure(const std::vector<Complex>& mu, double t,
                             const std::vector<int>& counts);

// Precomputed bubble-soup sampler for tight Monte Carlo loops: per-site
// first-return masses and transition tables are cached at construction.
class BubbleSampler {
  public:
    BubbleSampler(const WeightedChain& chain, std::vector<int> ordering);

    const std::vector<int>& ordering() const { return ordering_; }
    double site_f(int stage) const { return f_[static_cast<std::size_t>(stage)]; }

    std::vector<GrowingLoop> sample_loops(double t, Rng& rng) const;
    // edge-traversal shadow only (Current over the supplied index)
    Current sample_current(double t, Rng& rng, const EdgeIndex& ei) const;
    // elementary count at a single stage
    int sample_site_count(int stage, double t, Rng& rng) const;

  private:
    struct Row {
        std::vector<int> nbr;
        std::vector<double> cum; // cumulative probabilities
        double total = 0.0;
    };

    int step(int cur, Rng& rng) const; // -1 when the walk is killed
    // excursion from x staying in alive; true on return to x, false on exit
    bool excursion(int x, const std::vector<char>& alive, Rng& rng,
                   std::vector<int>* visits) const;

    const WeightedChain* chain_;
    std::vector<int> ordering_;
    std::vector<Row> rows_;
    std::vector<double> f_;
    std::vector<std::vector<char>> alive_;
};

} // namespace loopforge
