#include "verify_suites.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "loopforge/fixtures.hpp"
#include "loopforge/identities.hpp"
#include "loopforge/isomorphism.hpp"
#include "loopforge/lerw.hpp"
#include "loopforge/multipath.hpp"
#include "loopforge/paths.hpp"
#include "loopforge/rng.hpp"
#include "loopforge/soup.hpp"
#include "loopforge/spanning.hpp"
#include "loopforge/stats.hpp"
#include "loopforge/zipper.hpp"

namespace loopforge::verify {

namespace {

using Task = std::function<Check()>;

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

Check make(const std::string& name, bool pass, const std::string& detail) {
    return Check{name, pass, detail};
}

std::vector<Check> run_tasks(const std::vector<Task>& tasks, int workers) {
    std::vector<Check> out(tasks.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) out[i] = tasks[i]();
        return out;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            out[i] = tasks[i]();
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return out;
}

// ---------------------------------------------------------------- chain suite

std::vector<Task> chain_tasks(std::uint64_t seed, double tol) {
    std::vector<Task> tasks;
    tasks.push_back([seed, tol] {
        Rng rng(seed, 11);
        double worst = 0.0;
        for (int i = 0; i < 30; ++i) {
            WeightedChain c = fixtures::random_integrable(rng, 8, i % 2 == 1);
            GreenData g = green_function(c);
            std::vector<int> all;
            for (int v = 0; v < c.interior_size(); ++v) all.push_back(v);
            Complex f = f_ordered(c, all);
            worst = std::max(worst, std::abs(f * g.det_iq - Complex(1.0)));
        }
        return make("chain.det-identity", worst < tol, "max |F*det - 1| = " + fmt(worst));
    });
    tasks.push_back([seed, tol] {
        Rng rng(seed, 12);
        double worst = 0.0;
        for (int i = 0; i < 10; ++i) {
            WeightedChain c = fixtures::random_integrable(rng, 7, i % 2 == 0);
            std::vector<int> b;
            for (int v = 0; v < c.interior_size(); ++v)
                if (rng.uniform() < 0.7) b.push_back(v);
            if (b.empty()) b.push_back(0);
            Complex ref = f_ordered(c, b);
            for (int t = 0; t < 10; ++t) {
                for (std::size_t j = b.size(); j > 1; --j)
                    std::swap(b[j - 1], b[static_cast<std::size_t>(rng.uniform() * j)]);
                worst = std::max(worst, std::abs(f_ordered(c, b) - ref) / std::abs(ref));
            }
        }
        return make("chain.f-permutation-invariance", worst < tol, "max rel spread = " + fmt(worst));
    });
    tasks.push_back([] {
        WeightedChain c = fixtures::two_point(0.5);
        GreenData g = green_function(c);
        double e1 = std::abs(g.green(0, 0) - Complex(4.0 / 3.0));
        double e2 = std::abs(g.green(0, 1) - Complex(2.0 / 3.0));
        double e3 = std::abs(g.green.determinant() - Complex(4.0 / 3.0));
        double fx = std::abs(first_return_mass(c, 0).f - Complex(0.25));
        bool ok = e1 < 1e-12 && e2 < 1e-12 && e3 < 1e-12 && fx < 1e-12;
        return make("chain.two-point-example", ok, "G(x,x) err " + fmt(e1) + ", f_x err " + fmt(fx));
    });
    tasks.push_back([] {
        WeightedChain c = fixtures::grid_srw(3, 3);
        Matrix h = poisson_kernel_matrix(c);
        double worst = 0.0;
        for (int x = 0; x < c.interior_size(); ++x)
            worst = std::max(worst, std::abs(h.row(x).sum() - Complex(1.0)));
        return make("chain.poisson-row-sums", worst < 1e-12, "max |sum H - 1| = " + fmt(worst));
    });
    tasks.push_back([] {
        WeightedChain c = fixtures::path_srw(3);
        int x1 = c.index_of(1), z0 = c.index_of(0);
        double err = std::abs(poisson_kernel(c, x1, z0) - Complex(0.75));
        return make("chain.gamblers-ruin", err < 1e-12, "|H(1,0) - 3/4| = " + fmt(err));
    });
    tasks.push_back([seed] {
        Rng rng(seed, 13);
        // hermitian integrable: G positive definite, diagonals in (1/2, inf)
        bool ok = true;
        for (int rep = 0; rep < 5; ++rep) {
            int n = 4;
            std::vector<EdgeWeight> edges;
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    if (rng.uniform() < 0.4) continue;
                    Complex w(0.3 * (2 * rng.uniform() - 1), j > i ? 0.3 * (2 * rng.uniform() - 1) : 0.0);
                    if (i == j) w = Complex(w.real(), 0.0);
                    edges.push_back({i, j, w / 4.0});
                    if (i != j) edges.push_back({j, i, std::conj(w) / 4.0});
                }
            WeightedChain c({0, 1, 2, 3}, {}, edges, Symmetry::hermitian);
            if (classify_weight(c).kind != WeightClass::integrable) continue;
            GreenData g = green_function(c);
            Eigen::SelfAdjointEigenSolver<Matrix> es(g.green);
            if (es.eigenvalues().minCoeff() <= 0.0) ok = false;
            for (int v = 0; v < n; ++v)
                if (g.green(v, v).real() <= 0.5) ok = false;
        }
        return make("chain.hermitian-positive-definite", ok, "diagonals above 1/2");
    });
    return tasks;
}

// ---------------------------------------------------------------- loops suite

std::vector<Task> loops_tasks(std::uint64_t seed) {
    std::vector<Task> tasks;
    tasks.push_back([] {
        // a path whose loop-erasure does not commute with reversal
        WeightedChain c = fixtures::triangle();
        bool found = false;
        std::function<void(std::vector<int>&)> scan = [&](std::vector<int>& p) {
            if (found) return;
            if (p.size() >= 2) {
                Saw a = loop_erase(Path{p});
                std::vector<int> rev(p.rbegin(), p.rend());
                Saw b = loop_erase(Path{rev});
                std::vector<int> brev(b.v.rbegin(), b.v.rend());
                if (a.v != brev) {
                    found = true;
                    return;
                }
            }
            if (p.size() > 5) return;
            for (int nxt = 0; nxt < 3; ++nxt) {
                if (c.weight(p.back(), nxt) == Complex(0.0)) continue;
                p.push_back(nxt);
                scan(p);
                p.pop_back();
            }
        };
        std::vector<int> p{0};
        scan(p);
        return make("loops.le-reversal-asymmetry", found, "found on paths of length <= 5");
    });
    tasks.push_back([seed] {
        Rng rng(seed, 21);
        WeightedChain c = fixtures::grid_srw(3, 3);
        bool ok = true;
        for (int i = 0; i < 2000 && ok; ++i) {
            LerwSample s = sample_lerw(c, i % 9, rng);
            auto loops = decompose_by_saw(s.trajectory, s.erased);
            Path rec{{s.erased.v[0]}};
            for (std::size_t j = 0; j < loops.size(); ++j) {
                rec = concat(rec, Path{loops[j].v});
                if (j + 1 < s.erased.v.size())
                    rec = concat(rec, Path{{s.erased.v[j], s.erased.v[j + 1]}});
            }
            ok = rec.v == s.trajectory.v;
        }
        return make("loops.decompose-roundtrip", ok, "2000 random grid paths");
    });
    tasks.push_back([] {
        WeightedChain c = fixtures::two_point(0.5);
        LoopMassReport r = loop_mass_at_vertex(c, 0, 40);
        double target = std::log(4.0 / 3.0);
        double e1 = std::abs(r.series_value.real() - target);
        double e2 = std::abs(r.enumerated_value.real() - target);
        bool ok = e1 < 1e-12 && e2 < r.tail_bound + 1e-12;
        return make("loops.mass-log-green", ok, "series err " + fmt(e1) + ", enum err " + fmt(e2));
    });
    tasks.push_back([] {
        // sum of rooted masses over all representatives equals the unrooted
        // mass: group every rooted loop of length <= 8 by its rotation class
        WeightedChain c = fixtures::cycle(3, 0.3);
        std::vector<char> alive(3, 1);
        std::map<std::string, Complex> sums;
        std::map<std::string, Complex> direct;
        for (int root = 0; root < 3; ++root)
            enumerate_rooted_loops(c, root, 8, alive, [&](const std::vector<int>& v, Complex w) {
                UnrootedLoop u{RootedLoop{v}};
                sums[u.key()] += w / static_cast<double>(v.size() - 1);
                direct[u.key()] = unrooted_mass(c, u);
            });
        double worst = 0.0;
        for (auto& [key, m] : direct) worst = std::max(worst, std::abs(sums[key] - m));
        bool ok = !direct.empty() && worst < 1e-14;
        return make("loops.unrooted-consistency", ok,
                    "classes " + std::to_string(direct.size()) + " max err " + fmt(worst));
    });
    tasks.push_back([] {
        // exp(total loop mass) = F(A) with certified truncation
        WeightedChain c = fixtures::triangle();
        GreenData g = green_function(c);
        int maxlen = 24;
        std::vector<char> alive(3, 1);
        double total = 0.0;
        for (int root = 0; root < 3; ++root) {
            std::vector<char> mask = alive;
            for (int v = 0; v < root; ++v) mask[static_cast<std::size_t>(v)] = 0;
            enumerate_rooted_loops(c, root, maxlen, mask, [&](const std::vector<int>& v, Complex w) {
                int lt = 0;
                for (std::size_t j = 1; j < v.size(); ++j)
                    if (v[j] == root) ++lt;
                total += (w / static_cast<double>(lt)).real();
            });
        }
        double target = -std::log(g.det_iq.real());
        double tail = 3.0 * abs_tail_bound(c, 0, maxlen);
        bool ok = std::abs(total - target) <= tail + 1e-12;
        return make("loops.exp-mass-equals-F", ok,
                    "|sum m - log F| = " + fmt(std::abs(total - target)) + " tail " + fmt(tail));
    });
    return tasks;
}

// ----------------------------------------------------------------- lerw suite

std::vector<Task> lerw_tasks(std::uint64_t seed) {
    std::vector<Task> tasks;
    tasks.push_back([] {
        WeightedChain c = fixtures::grid_srw(3, 3);
        auto law = lerw_exact_law(c, c.index_of(static_cast<VertexId>(102102)));
        double total = 0.0;
        for (auto& [p, w] : law) total += w;
        return make("lerw.law-total-mass", std::abs(total - 1.0) < 1e-10,
                    "|sum p-hat - 1| = " + fmt(std::abs(total - 1.0)));
    });
    tasks.push_back([seed] {
        Rng rng(seed, 31);
        WeightedChain c = fixtures::path_srw(3);
        int start = c.index_of(2);
        auto law = lerw_exact_law(c, start);
        std::map<std::vector<int>, int> counts;
        const int n = 20000;
        for (int i = 0; i < n; ++i) ++counts[sample_lerw(c, start, rng).erased.v];
        double worstz = 0.0;
        for (auto& [path, p] : law) {
            double se = std::sqrt(p * (1 - p) * n);
            double z = std::abs(counts[path] - p * n) / std::max(se, 1e-9);
            if (p >= 1e-3) worstz = std::max(worstz, z);
        }
        return make("lerw.mc-agreement", worstz < 4.0, "worst z = " + fmt(worstz));
    });
    tasks.push_back([seed] {
        Rng rng(seed, 32);
        WeightedChain c = fixtures::grid_srw(2, 2);
        int start = c.index_of(static_cast<VertexId>(101101));
        std::map<std::vector<int>, int> a, b;
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            ++a[sample_lerw(c, start, rng).erased.v];
            ++b[sample_laplacian_walk(c, start, rng).v];
        }
        // two-sample chi-square over observed SAWs
        std::set<std::vector<int>> keys;
        for (auto& [k, v] : a) keys.insert(k);
        for (auto& [k, v] : b) keys.insert(k);
        double stat = 0.0;
        int dof = 0;
        for (auto& k : keys) {
            double oa = a.count(k) ? a[k] : 0, ob = b.count(k) ? b[k] : 0;
            double tot = oa + ob;
            if (tot < 10) continue;
            stat += (oa - ob) * (oa - ob) / tot;
            ++dof;
        }
        double p = stats::chi_square_pvalue(stat, std::max(dof - 1, 1));
        return make("lerw.laplacian-equivalence", p > 0.001, "chi-square p = " + fmt(p));
    });
    tasks.push_back([] {
        WeightedChain c = fixtures::grid_srw(3, 3);
        Saw eta(std::vector<int>{c.index_of(static_cast<VertexId>(102102)),
                                 c.index_of(static_cast<VertexId>(102101))});
        HarmonicSolution h = solve_harmonic(c, eta.v);
        double worst = 0.0;
        for (int v = 0; v < c.interior_size(); ++v) {
            bool on = std::find(eta.v.begin(), eta.v.end(), v) != eta.v.end();
            if (on) continue;
            double lap = -h.phi[static_cast<std::size_t>(v)];
            for (int u = 0; u < c.total_size(); ++u)
                lap += c.weight(v, u).real() * h.phi[static_cast<std::size_t>(u)];
            worst = std::max(worst, std::abs(lap));
        }
        return make("lerw.harmonicity", worst < 1e-12, "max residual = " + fmt(worst));
    });
    tasks.push_back([seed] {
        Rng rng(seed, 33);
        // erased-loop independence: chi-square on (l0 length, l1 length)
        WeightedChain c = fixtures::grid_srw(2, 2);
        int start = c.index_of(static_cast<VertexId>(101101));
        std::map<std::pair<int, int>, int> joint;
        std::map<int, int> m0, m1;
        const int n = 20000;
        int used = 0;
        for (int i = 0; i < n; ++i) {
            LerwSample s = sample_lerw(c, start, rng);
            auto loops = decompose_by_saw(s.trajectory, s.erased);
            if (loops.size() < 2) continue;
            int a = std::min(loops[0].length(), 4), b = std::min(loops[1].length(), 4);
            ++joint[{a, b}];
            ++m0[a];
            ++m1[b];
            ++used;
        }
        double stat = 0.0;
        int cells = 0;
        for (auto& [ab, o] : joint) {
            double e = static_cast<double>(m0[ab.first]) * m1[ab.second] / used;
            if (e < 5) continue;
            stat += (o - e) * (o - e) / e;
            ++cells;
        }
        int dof = std::max(1, cells - static_cast<int>(m0.size()) - static_cast<int>(m1.size()) + 1);
        double p = stats::chi_square_pvalue(stat, dof);
        return make("lerw.erased-loop-independence", p > 0.001, "chi-square p = " + fmt(p));
    });
    return tasks;
}

// ------------------------------------------------------------- spanning suite

std::vector<Task> spanning_tasks(std::uint64_t seed) {
    std::vector<Task> tasks;
    tasks.push_back([seed] {
        Rng rng(seed, 41);
        Multigraph k4 = fixtures::complete_graph(4);
        WeightedChain c = chain_from_graph_type2(k4, 0);
        std::map<std::vector<std::pair<int, int>>, int> counts;
        const int n = 16000;
        for (int i = 0; i < n; ++i) {
            SpanningTree t = wilson(c, rng);
            check_tree_invariants(c, t);
            ++counts[tree_edges(t)];
        }
        if (counts.size() != 16) return make("spanning.k4-uniform", false, "tree count != 16");
        double expect = n / 16.0, bound = 5.0 * std::sqrt(n * (1.0 / 16) * (15.0 / 16));
        double stat = 0.0, worst = 0.0;
        for (auto& [k, o] : counts) {
            worst = std::max(worst, std::abs(o - expect));
            stat += (o - expect) * (o - expect) / expect;
        }
        double p = stats::chi_square_pvalue(stat, 15);
        bool ok = worst <= bound && p > 0.001;
        return make("spanning.k4-uniform", ok, "worst dev " + fmt(worst) + " chi2 p " + fmt(p));
    });
    tasks.push_back([] {
        // matrix-tree equals brute force on all connected graphs with <= 5 vertices
        bool ok = true;
        long checked = 0;
        for (int n = 2; n <= 5 && ok; ++n) {
            int m = n * (n - 1) / 2;
            for (int mask = 0; mask < (1 << m) && ok; ++mask) {
                Multigraph g(n);
                int bit = 0;
                for (int i = 0; i < n; ++i)
                    for (int j = i + 1; j < n; ++j) {
                        if (mask & (1 << bit)) g.add_edge(i, j);
                        ++bit;
                    }
                if (!g.connected()) continue;
                ++checked;
                if (matrix_tree_count(g).count != count_spanning_trees_brute(g)) ok = false;
            }
        }
        return make("spanning.kirchhoff-small", ok, "graphs checked: " + std::to_string(checked));
    });
    tasks.push_back([seed] {
        Rng rng(seed, 42);
        // tree distribution matches p(T;x0) F(A) on a 4-vertex multigraph
        Multigraph g(4);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g.add_edge(2, 3);
        g.add_edge(3, 0);
        g.add_edge(1, 3, 2); // doubled chord
        WeightedChain c = chain_from_graph_type1(g, 0);
        GreenData gr = green_function(c);
        std::map<std::vector<std::pair<int, int>>, int> counts;
        const int n = 30000;
        for (int i = 0; i < n; ++i) ++counts[tree_edges(wilson(c, rng))];
        double worstz = 0.0;
        for (auto& [edges, o] : counts) {
            double p = 1.0;
            for (auto [v, parent] : edges) p *= c.weight(v, parent).real();
            p /= gr.det_iq.real();
            double se = std::sqrt(p * (1 - p) * n);
            worstz = std::max(worstz, std::abs(o - p * n) / se);
        }
        return make("spanning.tree-probability", worstz < 4.5, "worst z = " + fmt(worstz));
    });
    tasks.push_back([seed] {
        Rng rng(seed, 43);
        SpanningForest f = wired_uniform_forest(2, 16, rng);
        ComponentStats s = forest_component_stats(f);
        bool acyclic = static_cast<int>(f.edges.size()) + s.components == f.vertices;
        return make("spanning.wired-forest-acyclic", acyclic,
                    "components " + std::to_string(s.components));
    });
    tasks.push_back([seed] {
        Rng rng(seed, 44);
        // type I vs type II equivalence on a 5-vertex graph
        Multigraph g(5);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g.add_edge(2, 0);
        g.add_edge(2, 3);
        g.add_edge(3, 4);
        g.add_edge(4, 0);
        WeightedChain c1 = chain_from_graph_type1(g, 0), c2 = chain_from_graph_type2(g, 0);
        std::map<std::vector<std::pair<int, int>>, std::pair<int, int>> counts;
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            ++counts[tree_edges(wilson(c1, rng))].first;
            ++counts[tree_edges(wilson(c2, rng))].second;
        }
        double stat = 0.0;
        int cells = 0;
        for (auto& [k, ab] : counts) {
            double tot = ab.first + ab.second;
            stat += (ab.first - ab.second) * (ab.first - ab.second) / tot;
            ++cells;
        }
        double p = stats::chi_square_pvalue(stat, std::max(1, cells - 1));
        return make("spanning.type1-type2", p > 0.001, "chi-square p = " + fmt(p));
    });
    return tasks;
}

// ------------------------------------------------------- soup identities suite

std::vector<Task> soup_tasks(std::uint64_t seed) {
    std::vector<Task> tasks;
    tasks.push_back([] {
        // graph identity, exact, all graphs with <= 2 vertices, <= 3 edges, k <= 2
        long instances = 0;
        bool ok = true;
        std::vector<std::pair<int, int>> slots1{{0, 0}};
        std::vector<std::pair<int, int>> slots2{{0, 0}, {1, 1}, {0, 1}};
        for (int n = 1; n <= 2 && ok; ++n) {
            auto& slots = n == 1 ? slots1 : slots2;
            std::function<void(std::size_t, std::vector<std::pair<int, int>>&)> pick =
                [&](std::size_t s, std::vector<std::pair<int, int>>& edges) {
                    if (!ok) return;
                    if (edges.size() <= 3 && !edges.empty()) {
                        IdentityGraph g{n, edges};
                        std::vector<int> k(edges.size(), 0);
                        std::function<void(std::size_t)> kpick = [&](std::size_t e) {
                            if (!ok) return;
                            if (e == edges.size()) {
                                if (!is_current(g, k)) return;
                                ++instances;
                                IdentitySides sides = graph_identity_sides(g, k);
                                if (sides.lhs != sides.rhs) ok = false;
                                return;
                            }
                            for (int v = 0; v <= 2; ++v) {
                                k[e] = v;
                                kpick(e + 1);
                            }
                        };
                        kpick(0);
                    }
                    if (edges.size() == 3) return;
                    for (std::size_t i = s; i < slots.size(); ++i) {
                        edges.push_back(slots[i]);
                        pick(i, edges);
                        edges.pop_back();
                    }
                };
            std::vector<std::pair<int, int>> edges;
            pick(0, edges);
        }
        return make("soup.graph-identity", ok, "instances: " + std::to_string(instances));
    });
    tasks.push_back([] {
        bool ok = true;
        long instances = 0;
        for (int n = 1; n <= 3 && ok; ++n)
            for (int bigk = 1; bigk <= 4 && ok; ++bigk) {
                std::vector<int> k(static_cast<std::size_t>(n), 0);
                std::function<void(int, int)> gen = [&](int idx, int left) {
                    if (!ok) return;
                    if (idx == n - 1) {
                        k[static_cast<std::size_t>(idx)] = left;
                        ++instances;
                        PairingSides s = pairing_identity_sides(bigk, k);
                        if (s.lhs != s.rhs) ok = false;
                        return;
                    }
                    for (int v = 0; v <= left; ++v) {
                        k[static_cast<std::size_t>(idx)] = v;
                        gen(idx + 1, left - v);
                    }
                };
                gen(0, 2 * bigk);
            }
        return make("soup.pairing-identity", ok, "instances: " + std::to_string(instances));
    });
    tasks.push_back([] {
        // negbin pmf sums to one and matches the geometric law at t=1
        Complex f(0.25, 0.1);
        Complex total = 0.0;
        for (int k = 0; k < 200; ++k) total += negbin_pmf(f, 0.5, k);
        double err1 = std::abs(total - Complex(1.0));
        double err2 = 0.0;
        for (int k = 0; k < 20; ++k) {
            Complex geo = std::pow(Complex(0.3), k) * (1.0 - 0.3);
            err2 = std::max(err2, std::abs(negbin_pmf(Complex(0.3), 1.0, k) - geo));
        }
        bool ok = err1 < 1e-12 && err2 < 1e-12;
        return make("soup.negbin-normalization", ok, "sum err " + fmt(err1) + " geom err " + fmt(err2));
    });
    tasks.push_back([] {
        // growing-loop law at t=1 equals the erased-loop law p(l)/G(x,x)
        WeightedChain c = fixtures::triangle();
        GreenData g = green_function(c);
        std::vector<char> alive(3, 1);
        double worst = 0.0;
        enumerate_rooted_loops(c, 0, 6, alive, [&](const std::vector<int>& v, Complex w) {
            RootedLoop l(v);
            Complex mu = growing_loop_pmf(c, alive, 0, 1.0, l);
            worst = std::max(worst, std::abs(mu - w / g.green(0, 0)));
        });
        return make("soup.growing-t1-erased", worst < 1e-12, "max err = " + fmt(worst));
    });
    tasks.push_back([seed] {
        Rng rng(seed, 51);
        // currents of sampled soups always satisfy the invariants
        WeightedChain c = fixtures::two_point(0.5);
        EdgeIndex ei = EdgeIndex::from_chain(c);
        BubbleSampler bs(c, {0, 1});
        bool ok = true;
        for (int i = 0; i < 20000 && ok; ++i) {
            Current cur = bs.sample_current(0.5, rng, ei);
            int total = 0;
            for (int x : cur.n) total += x;
            int edges = 0;
            for (int e : cur.k) edges += e;
            ok = (total == edges);
        }
        return make("soup.current-integrality", ok, "20000 samples");
    });
    tasks.push_back([] {
        // closed-form pmf vs exhaustive bubble-soup distribution on the two-point chain
        WeightedChain c = fixtures::two_point(0.5);
        EdgeIndex ei = EdgeIndex::from_chain(c);
        CurrentDistribution dist = bubble_current_distribution(c, ei, 0.5, {24});
        double worst = 0.0;
        for (const Current& cur : dist.support)
            worst = std::max(worst,
                             std::abs(current_pmf_half(c, ei, cur) - dist.pmf.at(cur.key())));
        bool ok = worst < 1e-10 && dist.coverage_gap < 1e-8;
        return make("soup.current-law-half", ok,
                    "max dev " + fmt(worst) + " gap " + fmt(dist.coverage_gap));
    });
    tasks.push_back([] {
        // complex soup measure normalizes over truncated multisets
        std::vector<Complex> mu{{0.2, 0.1}, {0.1, -0.05}};
        Complex total = 0.0;
        for (int a = 0; a < 40; ++a)
            for (int b = 0; b < 40; ++b) total += complex_soup_measure(mu, 1.0, {a, b});
        return make("soup.complex-soup-normalization", std::abs(total - Complex(1.0)) < 1e-10,
                    "|total - 1| = " + fmt(std::abs(total - Complex(1.0))));
    });
    return tasks;
}

// --------------------------------------------------------- isomorphism suite

std::vector<Task> iso_tasks(std::uint64_t seed) {
    std::vector<Task> tasks;
    tasks.push_back([] {
        EdgeWeightTheta t;
        t.n = 3;
        t.entries = {{0, 1, 0.4}, {1, 2, -0.3}, {0, 0, 0.2}, {2, 2, -0.1}};
        EdgeWeightTheta back = EdgeWeightTheta::from_chain(t.to_chain());
        bool ok = back.n == t.n && back.entries.size() == t.entries.size();
        for (std::size_t i = 0; ok && i < t.entries.size(); ++i) {
            auto [u1, v1, th1] = t.entries[i];
            bool found = false;
            for (auto [u2, v2, th2] : back.entries)
                if (u1 == u2 && v1 == v2 && std::abs(th1 - th2) < 1e-14) found = true;
            ok = found;
        }
        return make("iso.theta-roundtrip", ok, "entries preserved");
    });
    tasks.push_back([seed] {
        Rng rng(seed, 61);
        WeightedChain c = fixtures::two_point(0.5);
        GreenData g = green_function(c);
        stats::Moments prod;
        const int n = 200000;
        for (int i = 0; i < n; ++i) {
            FieldSample f = sample_gff(g.green, rng);
            prod.add(f.z[0] * f.z[1]);
        }
        double z = std::abs(prod.mean - 2.0 / 3.0) / prod.stderr_mean();
        return make("iso.gff-covariance", z < 5.0, "covariance z = " + fmt(z));
    });
    tasks.push_back([seed] {
        Rng rng(seed, 62);
        WeightedChain c = fixtures::two_point(0.5);
        GreenData g = green_function(c);
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            std::vector<double> z{4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0};
            worst = std::max(worst, std::abs(gff_density(c, z) - mvn_density(g.green, z)));
        }
        return make("iso.field-density", worst < 1e-10, "max |density diff| = " + fmt(worst));
    });
    tasks.push_back([] {
        // field density integrates to one on the two-point chain
        WeightedChain c = fixtures::two_point(0.5);
        double total = 0.0, hstep = 0.02;
        for (double zx = -8.0; zx < 8.0; zx += hstep)
            for (double zy = -8.0; zy < 8.0; zy += hstep)
                total += gff_density(c, {zx + hstep / 2, zy + hstep / 2}) * hstep * hstep;
        return make("iso.density-normalization", std::abs(total - 1.0) < 1e-6,
                    "|integral - 1| = " + fmt(std::abs(total - 1.0)));
    });
    tasks.push_back([seed] {
        Rng rng(seed, 63);
        WeightedChain c = fixtures::two_point(0.5);
        GreenData g = green_function(c);
        EdgeIndex ei = EdgeIndex::from_chain(c);
        BubbleSampler bs(c, {0, 1});
        const int n = 50000;
        std::vector<std::vector<double>> a(2), b(2);
        for (int i = 0; i < n; ++i) {
            auto sa = sample_T_from_soup(bs, ei, rng).t;
            FieldSample f = sample_gff(g.green, rng);
            for (int v = 0; v < 2; ++v) {
                a[static_cast<std::size_t>(v)].push_back(sa[static_cast<std::size_t>(v)]);
                b[static_cast<std::size_t>(v)].push_back(f.t[static_cast<std::size_t>(v)]);
            }
        }
        LeJanReport rep = le_jan_marginal_check(a, b);
        double worst_sig = 0.0;
        for (double s : rep.mean_diff_sigmas) worst_sig = std::max(worst_sig, s);
        for (double s : rep.second_moment_sigmas) worst_sig = std::max(worst_sig, s);
        bool ok = rep.min_ks_pvalue > 0.001 && worst_sig < 5.0;
        return make("iso.le-jan-marginal", ok,
                    "min KS p " + fmt(rep.min_ks_pvalue) + " worst z " + fmt(worst_sig));
    });
    tasks.push_back([] {
        EdgeWeightTheta t;
        t.n = 2;
        t.entries = {{0, 1, 0.8}};
        std::vector<double> tv{0.7, 1.3};
        auto law = sign_conditional_law(t, tv);
        double rho = 0.8 * std::sqrt(0.7 * 1.3);
        double expect = std::exp(rho) / (std::exp(rho) + std::exp(-rho));
        double same = law[0] + law[3];
        double flip = 0.0;
        for (std::size_t m = 0; m < 4; ++m) flip = std::max(flip, std::abs(law[m] - law[3 - m]));
        bool ok = std::abs(same - expect) < 1e-12 && flip < 1e-12;
        return make("iso.sign-law", ok, "|P(same) - formula| = " + fmt(std::abs(same - expect)));
    });
    tasks.push_back([seed] {
        Rng rng(seed, 64);
        WeightedChain c = fixtures::two_point(0.5);
        GreenData g = green_function(c);
        EdgeIndex ei = EdgeIndex::from_chain(c);
        BubbleSampler bs(c, {0, 1});
        std::vector<Complex> theta = theta_from_chain(c, ei);
        const int n = 200000;
        stats::Moments cov, mean0;
        for (int i = 0; i < n; ++i) {
            FieldSample f = lupu_sample(bs, ei, theta, rng);
            cov.add(f.z[0] * f.z[1]);
            mean0.add(f.z[0]);
        }
        double zc = std::abs(cov.mean - g.green(0, 1).real()) / cov.stderr_mean();
        double zm = std::abs(mean0.mean) / mean0.stderr_mean();
        bool ok = zc < 5.0 && zm < 5.0;
        return make("iso.lupu-covariance", ok, "cov z " + fmt(zc) + " mean z " + fmt(zm));
    });
    tasks.push_back([] {
        // single edge: E[exp(J rho)] = cosh(rho) = sum over even k
        EdgeIndex ei;
        ei.n_vertices = 2;
        ei.edges = {{0, 1}};
        ei.dense = {-1, 0, 0, -1};
        JjSumSides s = jj_current_sum(ei, 2, {0.7}, 40);
        double err = std::abs(s.lhs - std::cosh(0.7));
        bool ok = err < 1e-12 && std::abs(s.lhs - s.rhs) < 1e-12 + s.tail_bound;
        return make("iso.jj-current-sum", ok, "|lhs - cosh| = " + fmt(err));
    });
    return tasks;
}

// --------------------------------------------------------------- fomin suite

std::vector<Task> fomin_tasks(std::uint64_t);

// --------------------------------------------------------------- zipper suite

std::vector<Task> zipper_tasks(std::uint64_t seed) {
    (void)seed;
    std::vector<Task> tasks;
    tasks.push_back([] {
        // sign structure: in the positive order, SAWs through 01 carry +p
        // and SAWs through 10 carry -p
        LatticeDomain d = build_disc(2.0);
        WeightedChain cp = domain_chain(d, false), cq = domain_chain(d, true);
        int c0 = cq.index_of((static_cast<VertexId>(0 + 32768) << 16) + 32768);
        int c1 = cq.index_of((static_cast<VertexId>(1 + 32768) << 16) + 32768);
        int a = d.find(0, 2), b = d.find(0, -2);
        auto cid = [&](int idx) {
            auto [x, y] = d.point(idx);
            return cq.index_of((static_cast<VertexId>(x + 32768) << 16) + (y + 32768));
        };
        std::vector<char> alive(static_cast<std::size_t>(cq.interior_size()), 1);
        bool fwd_even = true, fwd_odd = true, rev_even = true, rev_odd = true;
        int fwd = 0, rev = 0;
        enumerate_saws_between(cq, cid(a), cid(b), alive, [&](const std::vector<int>& path, Complex wq) {
            int dir = 0;
            for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                if (path[i] == c0 && path[i + 1] == c1) dir = 1;
                if (path[i] == c1 && path[i + 1] == c0) dir = -1;
            }
            if (dir == 0) return;
            Complex wp = path_weight(cp, path);
            bool even = std::abs(wq - wp) < 1e-15;
            bool odd = std::abs(wq + wp) < 1e-15;
            if (dir == 1) {
                ++fwd;
                fwd_even = fwd_even && even;
                fwd_odd = fwd_odd && odd;
            } else {
                ++rev;
                rev_even = rev_even && even;
                rev_odd = rev_odd && odd;
            }
        });
        // exactly one ordering of (a,b) is positive
        bool ok = fwd > 0 && rev > 0 &&
                  ((fwd_even && rev_odd && !(fwd_odd || rev_even)) ||
                   (fwd_odd && rev_even && !(fwd_even || rev_odd)));
        return make("zipper.sign-structure", ok,
                    "saws through edge: " + std::to_string(fwd + rev));
    });
    tasks.push_back([] {
        // m_q = -m_p exactly on odd-crossing loops, = m_p otherwise
        LatticeDomain d = build_disc(2.0);
        WeightedChain cp = domain_chain(d, false), cq = domain_chain(d, true);
        auto rungs = zipper_rungs(d);
        bool ok = !rungs.empty();
        std::vector<char> alive(static_cast<std::size_t>(cp.interior_size()), 1);
        long odd_count = 0;
        for (int root = 0; root < cp.interior_size() && ok; ++root)
            enumerate_rooted_loops(cp, root, 8, alive, [&](const std::vector<int>& v, Complex wp) {
                Complex wq = path_weight(cq, v);
                if (std::abs(wq + wp) < 1e-16) ++odd_count;
                else if (std::abs(wq - wp) > 1e-16) ok = false;
            });
        return make("zipper.odd-loop-signs", ok && odd_count > 0,
                    "odd rooted loops seen: " + std::to_string(odd_count));
    });
    tasks.push_back([] {
        LatticeDomain d = build_disc(3.0);
        double exact = odd_loop_mass(d);
        OddLoopTruncation tr = odd_loop_mass_truncated(d, 12, /*run_dfs=*/true);
        double e1 = std::abs(tr.dfs_value - tr.trace_value);
        double e2 = std::abs(tr.trace_value - exact);
        bool ok = e1 < 1e-12 && e2 <= tr.tail_bound + 1e-12;
        return make("zipper.odd-mass-truncation", ok,
                    "dfs-trace " + fmt(e1) + " logdet gap " + fmt(e2) + " tail " + fmt(tr.tail_bound));
    });
    tasks.push_back([] {
        LatticeDomain d = build_disc(2.0);
        EdgeProbability p = lerw_edge_probability(d, {0, 2}, {0, -2});
        double err = std::abs(p.closed_form - p.enumerated);
        bool ok = p.enumerated >= 0.0 && err < 1e-8 && p.closed_form >= 0.0 && p.closed_form <= 1.0;
        return make("zipper.edge-probability", ok,
                    "closed " + fmt(p.closed_form) + " enum " + fmt(p.enumerated));
    });
    tasks.push_back([] {
        auto rows = green_stabilization({2, 4, 8});
        bool dec = std::abs(rows[1].g00_q - rows[0].g00_q) > std::abs(rows[2].g00_q - rows[1].g00_q);
        bool growing = rows[2].g00_p > rows[1].g00_p && rows[1].g00_p > rows[0].g00_p;
        return make("zipper.green-stabilization", dec && growing,
                    "q increments shrink, p Green grows");
    });
    tasks.push_back([] {
        bool ok = true;
        for (double r : {2.0, 3.0, 5.0}) {
            LatticeDomain d = build_disc(r);
            ConformalObservables o = domain_observables(d, {0, static_cast<int>(r)},
                                                        {static_cast<int>(r), 0});
            if (!o.koebe_ok || o.s < 0.0 || o.s > 1.0) ok = false;
        }
        LatticeDomain rect = build_rectangle(1, 3);
        ConformalObservables o = domain_observables(rect, {0, 1}, {3, 2});
        if (!o.koebe_ok || o.s < 0.0 || o.s > 1.0) ok = false;
        return make("zipper.koebe", ok, "discs r=2,3,5 and the 1x3 rectangle");
    });
    tasks.push_back([] {
        std::vector<double> grid;
        for (double r = 3.0; r <= 6.0 + 1e-9; r += 0.25) grid.push_back(r);
        CrossingResult c1 = crossing_exponent(1, grid, {M_PI / 2}, 200);
        CrossingResult c2 = crossing_exponent(2, grid, {M_PI / 2 - 0.35, M_PI / 2 + 0.35}, 200);
        double e1 = std::abs(c1.slope - 1.0);
        double e2 = std::abs(c2.slope - 3.0) / 3.0;
        double e3 = std::abs(c2.ratio_constant - c2.c_formula) / c2.c_formula;
        bool ok = e1 < 0.01 && e2 < 0.01 && e3 < 0.01;
        return make("zipper.crossing-exponent", ok,
                    "slope errs " + fmt(e1) + " " + fmt(e2) + " ratio err " + fmt(e3));
    });
    tasks.push_back([] {
        LatticeDomain disc = build_disc(2.0);
        bool ok = disc.n() == 9;
        LatticeDomain rect = build_rectangle(1, 3);
        ok = ok && rect.n() == 6; // x in {1,2}, y in {1,2,3}
        LatticeDomain approx = build_lattice_approx_disc(16);
        // corners of the squares' exposed edges, scaled by 1/n, must be
        // within sqrt(2)/n of the unit circle
        double worst = 0.0;
        std::set<std::pair<int, int>> in(approx.interior.begin(), approx.interior.end());
        for (auto [x, y] : approx.interior)
            for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
                if (in.count({x + dx, y + dy})) continue;
                double cx = x + 0.5 * dx, cy = y + 0.5 * dy;
                double px = 0.5 * dy, py = 0.5 * dx;
                for (double s : {-1.0, 1.0}) {
                    double gap = std::abs(std::hypot((cx + s * px) / 16.0, (cy + s * py) / 16.0) - 1.0);
                    worst = std::max(worst, gap);
                }
            }
        ok = ok && worst <= std::sqrt(2.0) / 16.0 + 1e-12;
        return make("zipper.domain-builders", ok, "approx boundary gap " + fmt(worst));
    });
    return tasks;
}

std::vector<Task> fomin_tasks(std::uint64_t seed) {
    (void)seed;
    std::vector<Task> tasks;
    tasks.push_back([] {
        WeightedChain c = fixtures::grid_srw(3, 3);
        int x1 = c.index_of(101100), x2 = c.index_of(102100);
        int y1 = c.index_of(101104), y2 = c.index_of(102104);
        FominTwoPath r = fomin_two_path_check(c, x1, x2, y1, y2);
        double err = std::abs(r.lhs - r.rhs);
        return make("fomin.two-path", err < 1e-8, "|lhs - rhs| = " + fmt(err));
    });
    tasks.push_back([] {
        WeightedChain c = fixtures::grid_srw(3, 2);
        int x1 = c.index_of(101100), y1 = c.index_of(103103);
        FominDet r = fomin_det_check(c, {x1}, {y1});
        double err = std::abs(r.signed_sum - r.determinant);
        double err2 = std::abs(r.hat_direct - walk_mass(c, x1, y1));
        bool ok = err < 1e-12 && err2 < 1e-12;
        return make("fomin.k1-walk-mass", ok, "err " + fmt(err) + " " + fmt(err2));
    });
    tasks.push_back([] {
        // ordered rectangle boundary points: hat H equals the determinant
        WeightedChain c = fixtures::grid_srw(3, 2);
        int x1 = c.index_of(101100), x2 = c.index_of(102100);
        int y2 = c.index_of(102103), y1 = c.index_of(101103);
        FominDet r = fomin_det_check(c, {x1, x2}, {y1, y2});
        double err = std::abs(r.hat_direct - r.determinant);
        return make("fomin.k2-determinant", err < 1e-8, "|hatH - det| = " + fmt(err));
    });
    tasks.push_back([] {
        // crossing pairing is impossible in the planar geometry
        WeightedChain c = fixtures::grid_srw(3, 2);
        int x1 = c.index_of(101100), x2 = c.index_of(102100);
        int y2 = c.index_of(102103), y1 = c.index_of(101103);
        Complex h = hat_h(c, {x1, x2}, {y2, y1});
        return make("fomin.crossing-vanishes", std::abs(h) < 1e-14, "|hatH| = " + fmt(std::abs(h)));
    });
    tasks.push_back([] {
        // edge traversal three ways on the 3x3 grid
        WeightedChain c = fixtures::grid_srw(3, 3);
        int x = c.index_of(100101), y = c.index_of(104103);
        int z = c.index_of(102102), w = c.index_of(102103);
        EdgeTraversal r = edge_traversal_expectation(c, x, y, z, w);
        double e1 = std::abs(r.closed_form - r.saw_sum);
        double e2 = std::abs(r.path_sum - r.closed_form);
        bool ok = e1 < 1e-10 && e2 <= r.path_tail + 1e-12;
        return make("fomin.edge-traversal", ok, "closed-saw " + fmt(e1) + " path gap " + fmt(e2));
    });
    return tasks;
}

} // namespace

std::vector<std::string> suite_names() {
    return {"chain", "loops", "lerw", "spanning", "soup-identities", "isomorphism", "fomin",
            "zipper", "all"};
}

std::vector<Check> run_suite(const std::string& suite, std::uint64_t seed, int workers,
                             double tolerance) {
    std::vector<Task> tasks;
    auto add = [&](std::vector<Task> t) {
        for (auto& x : t) tasks.push_back(std::move(x));
    };
    if (suite == "chain" || suite == "all") add(chain_tasks(seed, tolerance));
    if (suite == "loops" || suite == "all") add(loops_tasks(seed));
    if (suite == "lerw" || suite == "all") add(lerw_tasks(seed));
    if (suite == "spanning" || suite == "all") add(spanning_tasks(seed));
    if (suite == "soup-identities" || suite == "all") add(soup_tasks(seed));
    if (suite == "isomorphism" || suite == "all") add(iso_tasks(seed));
    if (suite == "fomin" || suite == "all") add(fomin_tasks(seed));
    if (suite == "zipper" || suite == "all") add(zipper_tasks(seed));
    if (tasks.empty()) throw invalid_input("unknown verify suite: " + suite);
    return run_tasks(tasks, workers);
}

std::vector<Check> run_fomin_on(const WeightedChain& chain, const std::vector<VertexId>& points) {
    if (points.size() != 4) throw invalid_input("fomin verify: need points x1,x2,y1,y2");
    std::vector<int> idx;
    for (VertexId id : points) {
        int v = chain.index_of(id);
        if (v < 0) throw invalid_input("fomin verify: unknown vertex id");
        idx.push_back(v);
    }
    FominTwoPath r = fomin_two_path_check(chain, idx[0], idx[1], idx[2], idx[3]);
    double err = std::abs(r.lhs - r.rhs);
    std::vector<Check> out;
    out.push_back({"fomin.two-path", err < 1e-8,
                   "lhs " + fmt(r.lhs.real()) + " rhs " + fmt(r.rhs.real()) + " |diff| " + fmt(err)});
    return out;
}

} // namespace loopforge::verify
