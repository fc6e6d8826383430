#include "loopforge/soup.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace loopforge {

Complex negbin_pmf(Complex f, double t, int k) {
    if (t <= 0.0) throw invalid_input("negbin_pmf: t must be positive");
    if (k < 0) throw invalid_input("negbin_pmf: k must be nonnegative");
    if (std::abs(f) >= 1.0) throw invalid_input("negbin_pmf: |f| >= 1 diverges");
    double logratio = std::lgamma(k + t) - std::lgamma(t) - std::lgamma(k + 1.0);
    Complex fk = std::pow(f, k);
    Complex one_minus = std::pow(Complex(1.0) - f, Complex(t));
    return std::exp(logratio) * fk * one_minus;
}

namespace {

double restricted_f(const WeightedChain& chain, const std::vector<char>& alive, int x) {
    std::vector<int> removed;
    for (int v = 0; v < chain.interior_size(); ++v)
        if (!alive[static_cast<std::size_t>(v)]) removed.push_back(v);
    Complex g = green_diag_without(chain, removed, x);
    return (Complex(1.0) - Complex(1.0) / g).real();
}

void require_positive(const WeightedChain& chain, const char* who) {
    for (int u = 0; u < chain.total_size(); ++u) {
        double row = 0.0;
        for (int v : chain.out_neighbors()[static_cast<std::size_t>(u)]) {
            Complex w = chain.weight(u, v);
            if (w.imag() != 0.0 || w.real() < 0.0)
                throw invalid_input(std::string(who) + ": sampling needs positive weights");
            row += w.real();
        }
        if (chain.is_interior(u) && row > 1.0 + 1e-9)
            throw invalid_input(std::string(who) + ": rows must be (sub)stochastic for sampling");
    }
}

} // namespace

RootedLoop sample_elementary_loop(const WeightedChain& chain, const std::vector<char>& alive,
                                  int x, Rng& rng) {
    require_positive(chain, "sample_elementary_loop");
    const int t = chain.total_size();
    std::vector<double> probs(static_cast<std::size_t>(t));
    std::vector<int> walk;
    for (long attempt = 0; attempt < kElementaryAttemptBudget; ++attempt) {
        walk.assign(1, x);
        int cur = x;
        for (;;) {
            probs.assign(static_cast<std::size_t>(t), 0.0);
            for (int v : chain.out_neighbors()[static_cast<std::size_t>(cur)])
                probs[static_cast<std::size_t>(v)] = chain.weight(cur, v).real();
            double total = 0.0;
            for (double p : probs) total += p;
            // sub-markov rows kill the walk with the missing mass
            double u = rng.uniform();
            if (u >= total) {
                cur = -1;
            } else {
                double acc = 0.0;
                cur = -1;
                for (int v = 0; v < t; ++v) {
                    acc += probs[static_cast<std::size_t>(v)];
                    if (u < acc) {
                        cur = v;
                        break;
                    }
                }
            }
            if (cur < 0 || chain.is_boundary(cur) ||
                (chain.is_interior(cur) && !alive[static_cast<std::size_t>(cur)]))
                break; // excursion left A_sub: reject
            walk.push_back(cur);
            if (cur == x) return RootedLoop(std::move(walk));
        }
    }
    throw starvation_error("sample_elementary_loop: attempt budget exhausted");
}

int sample_negbin(double f, double t, Rng& rng) {
    if (f < 0.0 || f >= 1.0) throw invalid_input("sample_negbin: f must lie in [0,1)");
    if (f == 0.0) return 0;
    double u = rng.uniform();
    double p = std::pow(1.0 - f, t);
    double cdf = p;
    int k = 0;
    while (u >= cdf && k < 100000000) {
        p *= f * (k + t) / (k + 1.0);
        cdf += p;
        ++k;
    }
    return k;
}

GrowingLoop sample_growing_loop(const WeightedChain& chain, const std::vector<char>& alive,
                                int x, double t, Rng& rng) {
    require_positive(chain, "sample_growing_loop");
    if (!chain.is_interior(x) || !alive[static_cast<std::size_t>(x)])
        throw invalid_input("sample_growing_loop: x must lie in the alive interior");
    double f = restricted_f(chain, alive, x);
    GrowingLoop g;
    g.elementary_count = sample_negbin(f, t, rng);
    std::vector<int> v{x};
    for (int i = 0; i < g.elementary_count; ++i) {
        RootedLoop el = sample_elementary_loop(chain, alive, x, rng);
        v.insert(v.end(), el.v.begin() + 1, el.v.end());
    }
    g.loop = RootedLoop(std::move(v));
    return g;
}

Complex growing_loop_pmf(const WeightedChain& chain, const std::vector<char>& alive, int x,
                         double t, const RootedLoop& l) {
    if (l.root() != x) throw invalid_input("growing_loop_pmf: loop must be rooted at x");
    std::vector<int> removed;
    for (int v = 0; v < chain.interior_size(); ++v)
        if (!alive[static_cast<std::size_t>(v)]) removed.push_back(v);
    for (std::size_t j = 0; j + 1 < l.v.size(); ++j)
        if (!alive[static_cast<std::size_t>(l.v[j])])
            throw invalid_input("growing_loop_pmf: loop leaves the alive set");
    Complex g = green_diag_without(chain, removed, x);
    int k = l.local_time(x);
    double logratio = std::lgamma(k + t) - std::lgamma(t) - std::lgamma(k + 1.0);
    return std::pow(g, Complex(-t)) * std::exp(logratio) * path_weight(chain, l.v);
}

std::vector<GrowingLoop> sample_bubble_soup(const WeightedChain& chain,
                                            const std::vector<int>& ordering, double t, Rng& rng) {
    std::vector<char> alive(static_cast<std::size_t>(chain.interior_size()), 1);
    std::vector<GrowingLoop> out;
    out.reserve(ordering.size());
    for (int x : ordering) {
        out.push_back(sample_growing_loop(chain, alive, x, t, rng));
        alive[static_cast<std::size_t>(x)] = 0;
    }
    return out;
}

std::vector<SoupArrival> sample_soup_arrivals(const WeightedChain& chain,
                                              const std::vector<char>& alive, int x,
                                              double t_max, Rng& rng) {
    require_positive(chain, "sample_soup_arrivals");
    double f = restricted_f(chain, alive, x);
    std::vector<SoupArrival> out;
    if (f <= 0.0) return out;
    double lambda = -std::log(1.0 - f);
    int events = rng.poisson(lambda * t_max);
    std::vector<double> times(static_cast<std::size_t>(events));
    for (auto& tm : times) tm = rng.uniform() * t_max;
    std::sort(times.begin(), times.end());
    for (double tm : times) {
        // batch size from the logarithmic series f^k / (k lambda)
        double u = rng.uniform() * lambda;
        double acc = 0.0, term = f;
        int k = 1;
        while (acc + term / k < u && k < 100000000) {
            acc += term / k;
            term *= f;
            ++k;
        }
        std::vector<int> v{x};
        for (int i = 0; i < k; ++i) {
            RootedLoop el = sample_elementary_loop(chain, alive, x, rng);
            v.insert(v.end(), el.v.begin() + 1, el.v.end());
        }
        out.push_back({tm, RootedLoop(std::move(v)), x});
    }
    return out;
}

std::vector<SoupArrival> sample_bubble_arrivals(const WeightedChain& chain,
                                                const std::vector<int>& ordering, double t_max,
                                                Rng& rng) {
    std::vector<char> alive(static_cast<std::size_t>(chain.interior_size()), 1);
    std::vector<SoupArrival> all;
    for (int x : ordering) {
        auto part = sample_soup_arrivals(chain, alive, x, t_max, rng);
        all.insert(all.end(), part.begin(), part.end());
        alive[static_cast<std::size_t>(x)] = 0;
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const SoupArrival& a, const SoupArrival& b) { return a.time < b.time; });
    return all;
}

EdgeIndex EdgeIndex::from_chain(const WeightedChain& chain) {
    EdgeIndex ei;
    const int n = chain.interior_size();
    ei.n_vertices = n;
    ei.dense.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), -1);
    for (int u = 0; u < n; ++u)
        for (int v = u; v < n; ++v)
            if (chain.weight(u, v) != Complex(0.0) || chain.weight(v, u) != Complex(0.0)) {
                int id = static_cast<int>(ei.edges.size());
                ei.edges.emplace_back(u, v);
                ei.dense[static_cast<std::size_t>(u) * static_cast<std::size_t>(n) + static_cast<std::size_t>(v)] = id;
                ei.dense[static_cast<std::size_t>(v) * static_cast<std::size_t>(n) + static_cast<std::size_t>(u)] = id;
            }
    return ei;
}

std::string Current::key() const {
    std::ostringstream os;
    for (int x : k) os << x << ',';
    return os.str();
}

Current current_from_counts(const std::vector<int>& k, const EdgeIndex& ei, int n_vertices) {
    Current c;
    c.k = k;
    c.n.assign(static_cast<std::size_t>(n_vertices), 0);
    std::vector<int> twice(static_cast<std::size_t>(n_vertices), 0);
    for (int e = 0; e < ei.size(); ++e) {
        auto [u, v] = ei.edges[static_cast<std::size_t>(e)];
        int ke = k[static_cast<std::size_t>(e)];
        if (ke < 0) throw invalid_input("current: negative edge count");
        if (u == v) {
            twice[static_cast<std::size_t>(u)] += 2 * ke;
        } else {
            twice[static_cast<std::size_t>(u)] += ke;
            twice[static_cast<std::size_t>(v)] += ke;
            c.s += ke;
        }
    }
    for (int x = 0; x < n_vertices; ++x) {
        if (twice[static_cast<std::size_t>(x)] % 2 != 0)
            throw invalid_input("current: vertex local time is not an integer");
        c.n[static_cast<std::size_t>(x)] = twice[static_cast<std::size_t>(x)] / 2;
    }
    return c;
}

Current project_current(const std::vector<RootedLoop>& loops, const EdgeIndex& ei, int n_vertices) {
    std::vector<int> k(static_cast<std::size_t>(ei.size()), 0);
    for (const auto& l : loops) {
        for (std::size_t j = 1; j < l.v.size(); ++j) {
            int e = ei.find(l.v[j - 1], l.v[j]);
            if (e < 0) throw invalid_input("project_current: loop uses an unknown edge");
            ++k[static_cast<std::size_t>(e)];
        }
    }
    return current_from_counts(k, ei, n_vertices);
}

std::vector<Complex> theta_from_chain(const WeightedChain& chain, const EdgeIndex& ei) {
    if (chain.symmetry() == Symmetry::general)
        throw invalid_input("theta_from_chain: chain must be symmetric or hermitian");
    std::vector<Complex> theta(static_cast<std::size_t>(ei.size()));
    for (int e = 0; e < ei.size(); ++e) {
        auto [u, v] = ei.edges[static_cast<std::size_t>(e)];
        // the undirected weight needs equal values both ways; a hermitian
        // chain qualifies only when these entries are real
        if (u != v && chain.weight(u, v) != chain.weight(v, u))
            throw invalid_input("theta_from_chain: directed weights are not symmetric in value");
        theta[static_cast<std::size_t>(e)] = (u == v) ? chain.weight(u, u) : 2.0 * chain.weight(u, v);
    }
    return theta;
}

Complex current_pmf_half(const WeightedChain& chain, const EdgeIndex& ei, const Current& cur) {
    if (static_cast<int>(cur.k.size()) != ei.size())
        throw invalid_input("current_pmf_half: current does not match the edge index");
    Classification cls = classify_weight(chain);
    if (cls.kind != WeightClass::markov && cls.kind != WeightClass::integrable)
        throw invalid_input("current_pmf_half: requires an integrable theta weight");
    GreenData g = green_function(chain);
    std::vector<Complex> theta = theta_from_chain(chain, ei);
    Complex val = std::sqrt(g.det_iq);
    for (int x = 0; x < chain.interior_size(); ++x) {
        int n = cur.n[static_cast<std::size_t>(x)];
        // Gamma(n+1/2)/sqrt(pi) = (2n)! / (4^n n!)
        val *= std::exp(std::lgamma(n + 0.5)) / std::sqrt(M_PI);
    }
    for (int e = 0; e < ei.size(); ++e) {
        int ke = cur.k[static_cast<std::size_t>(e)];
        val *= std::pow(theta[static_cast<std::size_t>(e)], ke) / std::tgamma(ke + 1.0);
    }
    return val;
}

namespace {

using CurrentMap = std::map<std::vector<int>, Complex>;

// all elementary loops at x within alive, as per-edge traversal counts with
// the given caps
CurrentMap elementary_current_weights(const WeightedChain& chain, const EdgeIndex& ei,
                                      const std::vector<char>& alive, int x,
                                      const std::vector<int>& caps) {
    CurrentMap out;
    std::vector<int> counts(static_cast<std::size_t>(ei.size()), 0);
    std::function<void(int, Complex)> dfs = [&](int cur, Complex w) {
        for (int nxt : chain.out_neighbors()[static_cast<std::size_t>(cur)]) {
            if (!chain.is_interior(nxt) || !alive[static_cast<std::size_t>(nxt)]) continue;
            int e = ei.find(cur, nxt);
            if (e < 0) continue;
            if (counts[static_cast<std::size_t>(e)] >= caps[static_cast<std::size_t>(e)]) continue;
            Complex w2 = w * chain.weight(cur, nxt);
            if (std::abs(w2) < 1e-300) continue;
            ++counts[static_cast<std::size_t>(e)];
            if (nxt == x)
                out[counts] += w2;
            else
                dfs(nxt, w2);
            --counts[static_cast<std::size_t>(e)];
        }
    };
    dfs(x, Complex(1.0));
    return out;
}

} // namespace

CurrentDistribution bubble_current_distribution(const WeightedChain& chain, const EdgeIndex& ei,
                                                double t, const std::vector<int>& caps) {
    if (static_cast<int>(caps.size()) != ei.size())
        throw invalid_input("bubble_current_distribution: caps must match the edge index");
    const int n = chain.interior_size();
    std::vector<char> alive(static_cast<std::size_t>(n), 1);

    CurrentMap total;
    total[std::vector<int>(static_cast<std::size_t>(ei.size()), 0)] = Complex(1.0);

    for (int x = 0; x < n; ++x) {
        std::vector<int> removed;
        for (int v = 0; v < n; ++v)
            if (!alive[static_cast<std::size_t>(v)]) removed.push_back(v);
        Complex g = green_diag_without(chain, removed, x);
        CurrentMap elem = elementary_current_weights(chain, ei, alive, x, caps);

        // site distribution: G^{-t} sum_k Gamma(k+t)/(k! Gamma(t)) W1^{*k}
        CurrentMap site;
        CurrentMap convo;
        convo[std::vector<int>(static_cast<std::size_t>(ei.size()), 0)] = Complex(1.0);
        Complex gpow = std::pow(g, Complex(-t));
        double mass_scale = 1.0;
        for (int k = 0; k <= 200; ++k) {
            double comb = std::exp(std::lgamma(k + t) - std::lgamma(t) - std::lgamma(k + 1.0));
            double added = 0.0;
            for (auto& [vec, w] : convo) {
                Complex contrib = gpow * comb * w;
                site[vec] += contrib;
                added += std::abs(contrib);
            }
            mass_scale = added;
            if (k > 0 && mass_scale < 1e-18) break;
            // next convolution power, capped per edge
            CurrentMap next;
            for (auto& [vec, w] : convo)
                for (auto& [evec, ew] : elem) {
                    std::vector<int> sum = vec;
                    bool ok = true;
                    for (std::size_t e = 0; e < sum.size(); ++e) {
                        sum[e] += evec[e];
                        if (sum[e] > caps[e]) {
                            ok = false;
                            break;
                        }
                    }
                    if (ok) next[sum] += w * ew;
                }
            convo = std::move(next);
            if (convo.empty()) break;
        }

        CurrentMap merged;
        for (auto& [vec, w] : total)
            for (auto& [svec, sw] : site) {
                std::vector<int> sum = vec;
                bool ok = true;
                for (std::size_t e = 0; e < sum.size(); ++e) {
                    sum[e] += svec[e];
                    if (sum[e] > caps[e]) {
                        ok = false;
                        break;
                    }
                }
                if (ok) merged[sum] += w * sw;
            }
        total = std::move(merged);
        alive[static_cast<std::size_t>(x)] = 0;
    }

    CurrentDistribution dist;
    Complex covered = 0.0;
    for (auto& [vec, w] : total) {
        Current c = current_from_counts(vec, ei, n);
        dist.pmf[c.key()] = w;
        dist.support.push_back(std::move(c));
        covered += w;
    }
    dist.coverage_gap = std::abs(Complex(1.0) - covered);
    return dist;
}

Complex complex_soup_measure(const std::vector<Complex>& mu, double t,
                             const std::vector<int>& counts) {
    if (mu.size() != counts.size()) throw invalid_input("complex_soup_measure: size mismatch");
    Complex total = 0.0;
    for (Complex m : mu) total += m;
    Complex val = std::exp(-t * total);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        int c = counts[i];
        if (c < 0) throw invalid_input("complex_soup_measure: negative count");
        val *= std::pow(t * mu[i], c) / std::tgamma(c + 1.0);
    }
    return val;
}

BubbleSampler::BubbleSampler(const WeightedChain& chain, std::vector<int> ordering)
    : chain_(&chain), ordering_(std::move(ordering)) {
    require_positive(chain, "BubbleSampler");
    const int t = chain.total_size();
    rows_.resize(static_cast<std::size_t>(t));
    for (int u = 0; u < t; ++u) {
        Row& r = rows_[static_cast<std::size_t>(u)];
        double acc = 0.0;
        for (int v : chain.out_neighbors()[static_cast<std::size_t>(u)]) {
            acc += chain.weight(u, v).real();
            r.nbr.push_back(v);
            r.cum.push_back(acc);
        }
        r.total = acc;
        if (chain.is_interior(u) && acc > 1.0 + 1e-9)
            throw invalid_input("BubbleSampler: weights must be (sub)stochastic rows");
    }
    std::vector<char> alive(static_cast<std::size_t>(chain.interior_size()), 1);
    for (int x : ordering_) {
        if (!chain.is_interior(x) || !alive[static_cast<std::size_t>(x)])
            throw invalid_input("BubbleSampler: ordering must list distinct interior vertices");
        alive_.push_back(alive);
        f_.push_back(restricted_f(chain, alive, x));
        alive[static_cast<std::size_t>(x)] = 0;
    }
}

int BubbleSampler::step(int cur, Rng& rng) const {
    const Row& r = rows_[static_cast<std::size_t>(cur)];
    double u = rng.uniform();
    if (u >= r.total) return -1;
    // binary search in the cumulative table
    std::size_t lo = 0, hi = r.cum.size() - 1;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (u < r.cum[mid]) hi = mid;
        else lo = mid + 1;
    }
    return r.nbr[lo];
}

bool BubbleSampler::excursion(int x, const std::vector<char>& alive, Rng& rng,
                              std::vector<int>* visits) const {
    int cur = x;
    std::size_t mark = visits ? visits->size() : 0;
    for (;;) {
        cur = step(cur, rng);
        if (cur < 0 || chain_->is_boundary(cur) || !alive[static_cast<std::size_t>(cur)]) {
            if (visits) visits->resize(mark);
            return false;
        }
        if (visits) visits->push_back(cur);
        if (cur == x) return true;
    }
}

std::vector<GrowingLoop> BubbleSampler::sample_loops(double t, Rng& rng) const {
    std::vector<GrowingLoop> out;
    out.reserve(ordering_.size());
    for (std::size_t j = 0; j < ordering_.size(); ++j) {
        int x = ordering_[j];
        int k = sample_negbin(f_[j], t, rng);
        std::vector<int> v{x};
        for (int i = 0; i < k; ++i) {
            long attempts = 0;
            while (!excursion(x, alive_[j], rng, &v)) {
                if (++attempts >= kElementaryAttemptBudget)
                    throw starvation_error("BubbleSampler: excursion attempt budget exhausted");
            }
        }
        GrowingLoop g;
        g.elementary_count = k;
        g.loop = RootedLoop(std::move(v));
        out.push_back(std::move(g));
    }
    return out;
}

Current BubbleSampler::sample_current(double t, Rng& rng, const EdgeIndex& ei) const {
    std::vector<int> counts(static_cast<std::size_t>(ei.size()), 0);
    std::vector<int> v;
    for (std::size_t j = 0; j < ordering_.size(); ++j) {
        int x = ordering_[j];
        int k = sample_negbin(f_[j], t, rng);
        for (int i = 0; i < k; ++i) {
            v.assign(1, x);
            long attempts = 0;
            while (!excursion(x, alive_[j], rng, &v)) {
                v.assign(1, x);
                if (++attempts >= kElementaryAttemptBudget)
                    throw starvation_error("BubbleSampler: excursion attempt budget exhausted");
            }
            for (std::size_t s = 1; s < v.size(); ++s)
                ++counts[static_cast<std::size_t>(ei.find(v[s - 1], v[s]))];
        }
    }
    return current_from_counts(counts, ei, chain_->interior_size());
}

int BubbleSampler::sample_site_count(int stage, double t, Rng& rng) const {
    return sample_negbin(f_[static_cast<std::size_t>(stage)], t, rng);
}

} // namespace loopforge
