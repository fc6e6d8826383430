#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "loopforge/fixtures.hpp"
#include "loopforge/identities.hpp"
#include "loopforge/paths.hpp"
#include "loopforge/rng.hpp"
#include "loopforge/soup.hpp"
#include "loopforge/stats.hpp"

using namespace loopforge;

namespace {

double digamma(double x) {
    double acc = 0.0;
    while (x < 8.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    double inv = 1.0 / x, inv2 = inv * inv;
    return acc + std::log(x) - 0.5 * inv - inv2 / 12.0 + inv2 * inv2 / 120.0 -
           inv2 * inv2 * inv2 / 252.0;
}

} // namespace

TEST_CASE("negative binomial pmf") {
    CHECK(std::abs(negbin_pmf(Complex(0.3), 0.7, 0) - std::pow(Complex(0.7), 0.7)) < 1e-14);
    // direct substitution at f=1/4, t=1/2, k=1
    Complex v = negbin_pmf(Complex(0.25), 0.5, 1);
    CHECK(std::abs(v - Complex(0.5 * 0.25 * std::sqrt(0.75))) < 1e-14);
    // t=1 is geometric
    for (int k = 0; k < 12; ++k)
        CHECK(std::abs(negbin_pmf(Complex(0.3), 1.0, k) - Complex(std::pow(0.3, k) * 0.7)) < 1e-14);
    // normalization, complex f included
    for (Complex f : {Complex(0.25), Complex(0.4, 0.2), Complex(-0.5, 0.1)}) {
        Complex total = 0.0;
        for (int k = 0; k < 400; ++k) total += negbin_pmf(f, 0.5, k);
        CHECK(std::abs(total - Complex(1.0)) < 1e-12);
    }
    CHECK_THROWS_AS(negbin_pmf(Complex(1.0), 0.5, 0), invalid_input);
    CHECK_THROWS_AS(negbin_pmf(Complex(0.5), 0.5, -1), invalid_input);
}

TEST_CASE("negbin pmf solves the growing-loop ode") {
    // d/dt q(t,r) = log(1-z) q(t,r) + sum_{k<=r} q(t,r-k) z^k / k
    for (Complex z : {Complex(0.25), Complex(0.4, 0.2)}) {
        for (double t : {0.3, 0.5, 1.0, 1.7}) {
            for (int r = 0; r <= 12; ++r) {
                Complex q = negbin_pmf(z, t, r);
                // d/dt via digamma: q * (psi(r+t) - psi(t) + log(1-z))
                Complex dq = q * Complex(digamma(r + t) - digamma(t)) + q * std::log(Complex(1.0) - z);
                Complex rhs = std::log(Complex(1.0) - z) * q;
                for (int k = 1; k <= r; ++k)
                    rhs += negbin_pmf(z, t, r - k) * std::pow(z, k) / static_cast<double>(k);
                CHECK(std::abs(dq - rhs) < 1e-8);
            }
        }
    }
}

TEST_CASE("growing loop sampler and pmf") {
    Rng rng(21);
    // f_x = 0: always the trivial loop
    WeightedChain lonely({5}, {6}, {{5, 6, {1.0, 0.0}}}, Symmetry::general);
    std::vector<char> alive1(1, 1);
    for (int i = 0; i < 20; ++i) {
        GrowingLoop g = sample_growing_loop(lonely, alive1, 0, 0.7, rng);
        CHECK(g.elementary_count == 0);
        CHECK(g.loop.length() == 0);
    }

    // signed weights are measure-evaluator only; the sampler refuses them
    WeightedChain neg = fixtures::two_point(-0.3);
    std::vector<char> alive_neg(2, 1);
    CHECK_THROWS_AS(sample_growing_loop(neg, alive_neg, 0, 0.5, rng), invalid_input);
    // the pmf is still available
    CHECK(std::abs(growing_loop_pmf(neg, alive_neg, 0, 0.5, RootedLoop({0, 1, 0}))) > 0.0);

    // t=1 law equals p(l)/G(x,x): exact pmf against enumeration
    WeightedChain path = fixtures::path_srw(2);
    int x = path.index_of(1);
    GreenData gr = green_function(path);
    std::vector<char> alive(2, 1);
    enumerate_rooted_loops(path, x, 10, alive, [&](const std::vector<int>& v, Complex w) {
        Complex mu = growing_loop_pmf(path, alive, x, 1.0, RootedLoop{v});
        CHECK(std::abs(mu - w / gr.green(x, x)) < 1e-13);
    });

    // elementary-count distribution matches negbin(f, t)
    const int n = 200000;
    double f = first_return_mass(path, x).f.real();
    CHECK(f == doctest::Approx(0.25));
    std::map<int, int> hist;
    for (int i = 0; i < n; ++i) ++hist[sample_growing_loop(path, alive, x, 0.5, rng).elementary_count];
    double tv = 0.0;
    for (int k = 0; k <= 30; ++k) {
        double p = negbin_pmf(Complex(f), 0.5, k).real();
        double emp = hist.count(k) ? hist[k] / static_cast<double>(n) : 0.0;
        tv += std::abs(p - emp);
    }
    CHECK(0.5 * tv < 0.01);

    // loop-level frequencies match the pmf
    std::map<std::vector<int>, int> loops;
    for (int i = 0; i < n; ++i) ++loops[sample_growing_loop(path, alive, x, 0.5, rng).loop.v];
    for (auto& [v, count] : loops) {
        double p = growing_loop_pmf(path, alive, x, 0.5, RootedLoop{v}).real();
        if (p < 5e-4) continue;
        double se = std::sqrt(p * (1 - p) * n);
        CHECK(std::abs(count - p * n) <= 4.5 * se);
    }
}

TEST_CASE("growing loop has stationary independent increments") {
    Rng rng(22);
    WeightedChain path = fixtures::path_srw(2);
    int x = path.index_of(1);
    std::vector<char> alive(2, 1);
    const double t = 0.6, s = 0.9;
    const int n = 40000;
    std::map<int, int> inc_hist, ref_hist;
    std::map<std::pair<int, int>, int> joint;
    std::map<int, int> first_hist;
    for (int i = 0; i < n; ++i) {
        auto arr = sample_soup_arrivals(path, alive, x, t + s, rng);
        int kt = 0, kts = 0;
        for (const auto& a : arr) {
            int batch = RootedLoop(a.loop).local_time(x);
            if (a.time <= t) kt += batch;
            kts += batch;
        }
        ++inc_hist[kts - kt];
        ++first_hist[kt];
        ++joint[{std::min(kt, 3), std::min(kts - kt, 3)}];
        // independent reference K_s
        auto ref = sample_soup_arrivals(path, alive, x, s, rng);
        int ks = 0;
        for (const auto& a : ref) ks += RootedLoop(a.loop).local_time(x);
        ++ref_hist[ks];
    }
    // K_{t+s} - K_t ~ K_s: two-sample chi-square
    double stat = 0.0;
    int cells = 0;
    std::set<int> keys;
    for (auto& [k, v] : inc_hist) keys.insert(k);
    for (auto& [k, v] : ref_hist) keys.insert(k);
    for (int k : keys) {
        double a = inc_hist.count(k) ? inc_hist[k] : 0, b = ref_hist.count(k) ? ref_hist[k] : 0;
        if (a + b < 10) continue;
        stat += (a - b) * (a - b) / (a + b);
        ++cells;
    }
    CHECK(stats::chi_square_pvalue(stat, std::max(1, cells - 1)) > 0.001);

    // increments independent of K_t: chi-square on the truncated joint table
    std::map<int, int> ma, mb;
    for (auto& [ab, c] : joint) {
        ma[ab.first] += c;
        mb[ab.second] += c;
    }
    double istat = 0.0;
    int icells = 0;
    for (auto& [ab, o] : joint) {
        double e = static_cast<double>(ma[ab.first]) * mb[ab.second] / n;
        if (e < 5) continue;
        istat += (o - e) * (o - e) / e;
        ++icells;
    }
    int dof = std::max(1, icells - static_cast<int>(ma.size()) - static_cast<int>(mb.size()) + 1);
    CHECK(stats::chi_square_pvalue(istat, dof) > 0.001);
}

TEST_CASE("bubble soup law and unrooted equivalence") {
    Rng rng(23);
    // Q = 0: all loops trivial
    WeightedChain zero({0, 1}, {2}, {{0, 2, {1.0, 0.0}}, {1, 2, {1.0, 0.0}}}, Symmetry::general);
    for (int i = 0; i < 10; ++i)
        for (const auto& g : sample_bubble_soup(zero, {0, 1}, 0.8, rng))
            CHECK(g.loop.length() == 0);

    // mu_1(l-bar) = q(l-bar) / det G on the triangle: joint loop tuple law
    WeightedChain tri = fixtures::triangle();
    GreenData gr = green_function(tri);
    const int n = 150000;
    std::map<std::string, int> counts;
    auto key_of = [](const std::vector<GrowingLoop>& gs) {
        std::string k;
        for (const auto& g : gs) {
            for (int v : g.loop.v) k += static_cast<char>('a' + v);
            k += '|';
        }
        return k;
    };
    std::map<std::string, double> prob;
    for (int i = 0; i < n; ++i) {
        auto gs = sample_bubble_soup(tri, {0, 1, 2}, 1.0, rng);
        std::string k = key_of(gs);
        ++counts[k];
        if (!prob.count(k)) {
            Complex q = 1.0;
            for (const auto& g : gs) q *= path_weight(tri, g.loop.v);
            prob[k] = (q * gr.det_iq).real(); // q(l)/det G
        }
    }
    for (auto& [k, p] : prob) {
        if (p < 2e-3) continue;
        double se = std::sqrt(p * (1 - p) * n);
        CHECK(std::abs(counts[k] - p * n) <= 4.5 * se);
    }

    // unrooted multiset induced by the bubble soup vs the direct unrooted
    // Poisson soup, restricted to loops of length <= 6
    std::vector<char> alive(3, 1);
    std::map<std::string, double> intensity; // t * m(ell)
    for (int root = 0; root < 3; ++root)
        enumerate_rooted_loops(tri, root, 6, alive, [&](const std::vector<int>& v, Complex) {
            UnrootedLoop u{RootedLoop{v}};
            if (u.length() <= 6) intensity[u.key()] = unrooted_mass(tri, u).real();
        });
    REQUIRE(intensity.size() >= 8);

    const int m = 100000;
    std::map<std::string, std::map<int, int>> bubble_counts, direct_counts;
    for (int i = 0; i < m; ++i) {
        auto arrivals = sample_bubble_arrivals(tri, {0, 1, 2}, 1.0, rng);
        std::map<std::string, int> seen;
        for (const auto& a : arrivals) {
            if (a.loop.length() > 6) continue;
            UnrootedLoop u(a.loop);
            ++seen[u.key()];
        }
        for (auto& [k, mass] : intensity) ++bubble_counts[k][seen.count(k) ? seen[k] : 0];
        // direct sampler: independent Poisson counts per unrooted loop
        for (auto& [k, mass] : intensity) ++direct_counts[k][rng.poisson(mass)];
    }
    for (auto& [k, mass] : intensity) {
        std::set<int> vals;
        for (auto& [v, c] : bubble_counts[k]) vals.insert(v);
        for (auto& [v, c] : direct_counts[k]) vals.insert(v);
        double stat = 0.0;
        int cells = 0;
        for (int v : vals) {
            double a = bubble_counts[k].count(v) ? bubble_counts[k][v] : 0;
            double b = direct_counts[k].count(v) ? direct_counts[k][v] : 0;
            if (a + b < 10) continue;
            stat += (a - b) * (a - b) / (a + b);
            ++cells;
        }
        if (cells >= 2) CHECK(stats::chi_square_pvalue(stat, cells - 1) > 0.0005);
    }
}

TEST_CASE("projection to currents") {
    WeightedChain two = fixtures::two_point(0.5);
    EdgeIndex ei = EdgeIndex::from_chain(two);
    REQUIRE(ei.size() == 1);

    Current empty = project_current({}, ei, 2);
    CHECK(empty.k == std::vector<int>{0});
    CHECK(empty.n == std::vector<int>{0, 0});

    Current single = project_current({RootedLoop({0, 1, 0})}, ei, 2);
    CHECK(single.k == std::vector<int>{2});
    CHECK(single.n == std::vector<int>{1, 1});
    CHECK(single.s == 2);

    // integrality always holds for sampled soups
    Rng rng(24);
    WeightedChain tri = fixtures::triangle();
    EdgeIndex eit = EdgeIndex::from_chain(tri);
    BubbleSampler bs(tri, {0, 1, 2});
    for (int i = 0; i < 50000; ++i) {
        Current c = bs.sample_current(0.5, rng, eit);
        int ntot = 0, ktot = 0;
        for (int v : c.n) ntot += v;
        for (int v : c.k) ktot += v;
        CHECK(ntot == ktot);
    }
}

TEST_CASE("current law at t = 1/2") {
    WeightedChain two = fixtures::two_point(0.5);
    EdgeIndex ei = EdgeIndex::from_chain(two);
    GreenData g = green_function(two);

    // zero current gets sqrt(D)
    Current zero = current_from_counts({0}, ei, 2);
    CHECK(std::abs(current_pmf_half(two, ei, zero) - std::sqrt(g.det_iq)) < 1e-14);

    // k = 2: sqrt(1-a) * (1/4) * theta^2 / 2 with theta = 2q = 1
    Current k2 = current_from_counts({2}, ei, 2);
    double expect = std::sqrt(0.75) * 0.25 * 0.5;
    CHECK(std::abs(current_pmf_half(two, ei, k2) - Complex(expect)) < 1e-14);

    // odd counts are not currents here
    CHECK_THROWS_AS(current_from_counts({1}, ei, 2), invalid_input);

    // matches the exhaustive bubble-soup distribution, and covers ~1
    CurrentDistribution dist = bubble_current_distribution(two, ei, 0.5, {30});
    CHECK(dist.coverage_gap < 1e-9);
    double worst = 0.0;
    Complex total = 0.0;
    for (const Current& cur : dist.support) {
        worst = std::max(worst, std::abs(current_pmf_half(two, ei, cur) - dist.pmf.at(cur.key())));
        total += current_pmf_half(two, ei, cur);
    }
    CHECK(worst < 1e-12);
    CHECK(std::abs(total - Complex(1.0)) < 1e-9);

    // a chain with self-edges as well
    WeightedChain selfy({0, 1}, {},
                        {{0, 1, {0.3, 0.0}}, {1, 0, {0.3, 0.0}}, {0, 0, {0.2, 0.0}}},
                        Symmetry::symmetric);
    EdgeIndex eis = EdgeIndex::from_chain(selfy);
    CurrentDistribution dists = bubble_current_distribution(selfy, eis, 0.5,
                                                            std::vector<int>(eis.size(), 26));
    CHECK(dists.coverage_gap < 1e-9);
    double worst2 = 0.0;
    for (const Current& cur : dists.support)
        worst2 = std::max(worst2,
                          std::abs(current_pmf_half(selfy, eis, cur) - dists.pmf.at(cur.key())));
    CHECK(worst2 < 1e-12);

    // signed theta: the measure identity still holds
    WeightedChain neg({0, 1}, {}, {{0, 1, {-0.35, 0.0}}, {1, 0, {-0.35, 0.0}}},
                      Symmetry::symmetric);
    EdgeIndex ein = EdgeIndex::from_chain(neg);
    CurrentDistribution distn = bubble_current_distribution(neg, ein, 0.5, {30});
    double worst3 = 0.0;
    for (const Current& cur : distn.support)
        worst3 = std::max(worst3,
                          std::abs(current_pmf_half(neg, ein, cur) - distn.pmf.at(cur.key())));
    CHECK(worst3 < 1e-12);
}

TEST_CASE("graph identity in exact arithmetic") {
    CHECK(half_gamma_rational(0) == BigRational(1));
    CHECK(half_gamma_rational(1) == BigRational(1, 2));
    CHECK(half_gamma_rational(2) == BigRational(3, 4));

    // one vertex, one self-edge, k=1: both sides 1/2 (times sqrt(pi))
    IdentityGraph g1{1, {{0, 0}}};
    IdentitySides s1 = graph_identity_sides(g1, {1});
    CHECK(s1.lhs == BigRational(1, 2));
    CHECK(s1.rhs == BigRational(1, 2));
    CHECK(s1.sqrt_pi_power == 1);

    // vertex-reordering invariance of the enumeration side
    IdentityGraph g2{2, {{0, 1}, {0, 0}}};
    IdentityGraph g2_swapped{2, {{1, 0}, {1, 1}}};
    IdentitySides a = graph_identity_sides(g2, {2, 1});
    IdentitySides b = graph_identity_sides(g2_swapped, {2, 1});
    CHECK(a.lhs == b.lhs);
    CHECK(a.lhs == a.rhs);

    CHECK_THROWS_AS(graph_identity_sides(g2, {1, 1}), invalid_input); // not a current
    // instance too large for the configured enumeration budget
    CHECK_THROWS_AS(graph_identity_sides(g2, {2, 1}, /*enumeration_budget=*/2), size_error);
}

TEST_CASE("pairing identity in exact arithmetic") {
    PairingSides s = pairing_identity_sides(1, {1, 1});
    CHECK(s.lhs == 2);
    CHECK(s.rhs == 2);

    for (int bigk = 1; bigk <= 4; ++bigk) {
        PairingSides d = pairing_identity_sides(bigk, {2 * bigk});
        CHECK(d.lhs == d.rhs);
    }

    // exhaustive n <= 3, K <= 4
    for (int n = 1; n <= 3; ++n)
        for (int bigk = 1; bigk <= 4; ++bigk) {
            std::vector<int> k(static_cast<std::size_t>(n), 0);
            std::function<void(int, int)> gen = [&](int idx, int left) {
                if (idx == n - 1) {
                    k[static_cast<std::size_t>(idx)] = left;
                    PairingSides s2 = pairing_identity_sides(bigk, k);
                    CHECK(s2.lhs == s2.rhs);
                    return;
                }
                for (int v = 0; v <= left; ++v) {
                    k[static_cast<std::size_t>(idx)] = v;
                    gen(idx + 1, left - v);
                }
            };
            gen(0, 2 * bigk);
        }

    CHECK_THROWS_AS(pairing_identity_sides(2, {1, 2}), invalid_input); // parity violation
}

TEST_CASE("complex soup measure") {
    std::vector<Complex> mu{{0.2, 0.1}};
    // total mass one and the poisson form at integer counts
    Complex total = 0.0;
    for (int k = 0; k < 60; ++k) total += complex_soup_measure(mu, 2.0, {k});
    CHECK(std::abs(total - Complex(1.0)) < 1e-12);
    Complex direct = std::exp(-2.0 * mu[0]) * std::pow(2.0 * mu[0], 3) / 6.0;
    CHECK(std::abs(complex_soup_measure(mu, 2.0, {3}) - direct) < 1e-14);
}
