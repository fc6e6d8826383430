#include "loopforge/identities.hpp"

#include <functional>
#include <numeric>

namespace loopforge {

BigRational half_gamma_rational(int n) {
    if (n < 0) throw invalid_input("half_gamma_rational: n must be nonnegative");
    BigInt num = 1, den = 1;
    for (int j = 1; j <= n; ++j) {
        num *= 2 * j - 1; // (2n-1)!! = (2n)!/(2^n n!)
        den *= 2;
    }
    return BigRational(num, den);
}

namespace {

BigInt factorial(int n) {
    BigInt f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

} // namespace

std::vector<int> vertex_local_times(const IdentityGraph& g, const std::vector<int>& k) {
    std::vector<int> twice(static_cast<std::size_t>(g.n), 0);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        auto [u, v] = g.edges[e];
        if (u == v) {
            twice[static_cast<std::size_t>(u)] += 2 * k[e];
        } else {
            twice[static_cast<std::size_t>(u)] += k[e];
            twice[static_cast<std::size_t>(v)] += k[e];
        }
    }
    std::vector<int> n(static_cast<std::size_t>(g.n));
    for (int x = 0; x < g.n; ++x) {
        if (twice[static_cast<std::size_t>(x)] % 2 != 0) return {};
        n[static_cast<std::size_t>(x)] = twice[static_cast<std::size_t>(x)] / 2;
    }
    return n;
}

bool is_current(const IdentityGraph& g, const std::vector<int>& k) {
    return !vertex_local_times(g, k).empty() || g.n == 0;
}

namespace {

// Enumerates the ordered loop tuples: site j hosts a closed walk rooted at
// j over vertices >= j, consuming the remaining per-edge budget; every edge
// incident to j must be exhausted before moving to site j+1.
struct TupleEnumerator {
    const IdentityGraph& g;
    std::vector<std::vector<std::pair<int, int>>> incident; // vertex -> (edge id, other endpoint)
    std::vector<int> budget;
    std::vector<int> returns; // N_j per site
    long budget_steps;
    BigRational total = 0;

    TupleEnumerator(const IdentityGraph& gg, const std::vector<int>& k, long steps)
        : g(gg), budget(k), budget_steps(steps) {
        incident.resize(static_cast<std::size_t>(g.n));
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
            auto [u, v] = g.edges[e];
            incident[static_cast<std::size_t>(u)].push_back({static_cast<int>(e), v});
            if (u != v) incident[static_cast<std::size_t>(v)].push_back({static_cast<int>(e), u});
        }
        returns.assign(static_cast<std::size_t>(g.n), 0);
    }

    void run() { site(0, BigRational(1)); }

    void site(int j, const BigRational& acc) {
        if (j == g.n) {
            bool empty = true;
            for (int b : budget)
                if (b != 0) empty = false;
            if (empty) total += acc;
            return;
        }
        returns[static_cast<std::size_t>(j)] = 0;
        walk(j, j, acc);
    }

    // at `cur` inside site j's walk
    void walk(int j, int cur, const BigRational& acc) {
        if (cur == j) {
            // option: stop the walk here if every edge at j is used up
            bool ok = true;
            for (auto [e, other] : incident[static_cast<std::size_t>(j)])
                if (budget[static_cast<std::size_t>(e)] > 0) ok = false;
            if (ok) {
                int nj = returns[static_cast<std::size_t>(j)];
                BigRational factor = half_gamma_rational(nj) / BigRational(factorial(nj));
                site(j + 1, acc * factor);
            }
        }
        if (--budget_steps < 0) throw size_error("graph_identity_sides: enumeration budget exceeded");
        for (auto [e, other] : incident[static_cast<std::size_t>(cur)]) {
            if (budget[static_cast<std::size_t>(e)] == 0 || other < j) continue;
            --budget[static_cast<std::size_t>(e)];
            if (other == j) ++returns[static_cast<std::size_t>(j)];
            walk(j, other, acc);
            if (other == j) --returns[static_cast<std::size_t>(j)];
            ++budget[static_cast<std::size_t>(e)];
        }
    }
};

} // namespace

IdentitySides graph_identity_sides(const IdentityGraph& g, const std::vector<int>& k,
                                   long enumeration_budget) {
    if (static_cast<int>(k.size()) != static_cast<int>(g.edges.size()))
        throw invalid_input("graph_identity_sides: k must match the edge list");
    std::vector<int> n = vertex_local_times(g, k);
    if (n.empty() && g.n > 0) throw invalid_input("graph_identity_sides: k is not a current");

    IdentitySides sides;
    sides.sqrt_pi_power = g.n;

    int s = 0;
    for (std::size_t e = 0; e < g.edges.size(); ++e)
        if (g.edges[e].first != g.edges[e].second) s += k[e];

    TupleEnumerator en(g, k, enumeration_budget);
    en.run();
    BigInt two_s = BigInt(1) << s;
    sides.lhs = en.total / BigRational(two_s);

    sides.rhs = 1;
    for (int x = 0; x < g.n; ++x) sides.rhs *= half_gamma_rational(n[static_cast<std::size_t>(x)]);
    for (std::size_t e = 0; e < g.edges.size(); ++e)
        sides.rhs /= BigRational(factorial(k[e]));
    return sides;
}

PairingSides pairing_identity_sides(int big_k, const std::vector<int>& k) {
    const int n = static_cast<int>(k.size());
    long long total = std::accumulate(k.begin(), k.end(), 0LL);
    if (total != 2LL * big_k) throw invalid_input("pairing_identity_sides: sum k_j must equal 2K");
    for (int kj : k)
        if (kj < 0) throw invalid_input("pairing_identity_sides: k_j must be nonnegative");

    PairingSides sides;
    sides.rhs = factorial(2 * big_k);
    for (int kj : k) sides.rhs /= factorial(kj);

    // enumerate b_{ij} (i<j), then a_j = (k_j - sum_i b_ij)/2 when even
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::vector<int> b(pairs.size(), 0);
    std::vector<int> used(static_cast<std::size_t>(n), 0);
    BigRational lhs = 0;
    BigInt kfact = factorial(big_k);

    std::function<void(std::size_t)> rec = [&](std::size_t idx) {
        if (idx == pairs.size()) {
            BigRational term(kfact);
            int btot = 0;
            for (int j = 0; j < n; ++j) {
                int rem = k[static_cast<std::size_t>(j)] - used[static_cast<std::size_t>(j)];
                if (rem < 0 || rem % 2 != 0) return;
                term /= BigRational(factorial(rem / 2));
            }
            for (std::size_t e = 0; e < pairs.size(); ++e) {
                btot += b[e];
                term /= BigRational(factorial(b[e]));
            }
            lhs += term * BigRational(BigInt(1) << btot);
            return;
        }
        auto [i, j] = pairs[idx];
        int cap = std::min(k[static_cast<std::size_t>(i)] - used[static_cast<std::size_t>(i)],
                           k[static_cast<std::size_t>(j)] - used[static_cast<std::size_t>(j)]);
        for (int v = 0; v <= cap; ++v) {
            b[idx] = v;
            used[static_cast<std::size_t>(i)] += v;
            used[static_cast<std::size_t>(j)] += v;
            rec(idx + 1);
            used[static_cast<std::size_t>(i)] -= v;
            used[static_cast<std::size_t>(j)] -= v;
        }
        b[idx] = 0;
    };
    rec(0);

    if (boost::multiprecision::denominator(lhs) != 1)
        throw numerical_error("pairing_identity_sides: lhs is unexpectedly non-integral");
    sides.lhs = boost::multiprecision::numerator(lhs);
    return sides;
}

} // namespace loopforge
