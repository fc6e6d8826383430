#include "loopforge/zipper.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <queue>
#include <set>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "loopforge/paths.hpp"

namespace loopforge {

namespace {

constexpr int kDx[4] = {1, -1, 0, 0};
constexpr int kDy[4] = {0, 0, 1, -1};

using Pt = std::pair<int, int>;

LatticeDomain finalize(LatticeDomain d) {
    std::set<Pt> in(d.interior.begin(), d.interior.end());
    std::set<Pt> bd;
    for (auto [x, y] : d.interior)
        for (int dir = 0; dir < 4; ++dir) {
            Pt nb{x + kDx[dir], y + kDy[dir]};
            if (!in.count(nb)) bd.insert(nb);
        }
    d.boundary.assign(bd.begin(), bd.end());
    d.index.clear();
    int idx = 0;
    for (auto [x, y] : d.interior) d.index[LatticeDomain::pack(x, y)] = idx++;
    for (auto [x, y] : d.boundary) d.index[LatticeDomain::pack(x, y)] = idx++;

    // simply connected iff the complement is connected: flood the complement
    // inside a padded bounding box from a corner
    int xmin = 1 << 30, xmax = -(1 << 30), ymin = 1 << 30, ymax = -(1 << 30);
    for (auto [x, y] : d.interior) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    xmin -= 2;
    ymin -= 2;
    xmax += 2;
    ymax += 2;
    const int w = xmax - xmin + 1, h = ymax - ymin + 1;
    std::vector<char> mark(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
    auto at = [&](int x, int y) -> char& {
        return mark[static_cast<std::size_t>(x - xmin) +
                    static_cast<std::size_t>(w) * static_cast<std::size_t>(y - ymin)];
    };
    for (auto [x, y] : d.interior) at(x, y) = 2;
    std::queue<Pt> q;
    q.push({xmin, ymin});
    at(xmin, ymin) = 1;
    long complement = static_cast<long>(w) * h - static_cast<long>(d.interior.size());
    long seen = 1;
    while (!q.empty()) {
        auto [x, y] = q.front();
        q.pop();
        for (int dir = 0; dir < 4; ++dir) {
            int nx = x + kDx[dir], ny = y + kDy[dir];
            if (nx < xmin || nx > xmax || ny < ymin || ny > ymax) continue;
            if (at(nx, ny) != 0) continue;
            at(nx, ny) = 1;
            ++seen;
            q.push({nx, ny});
        }
    }
    d.simply_connected = (seen == complement);
    return d;
}

bool connected_interior(const std::vector<Pt>& pts) {
    if (pts.empty()) return false;
    std::set<Pt> in(pts.begin(), pts.end());
    std::set<Pt> seen{pts.front()};
    std::queue<Pt> q;
    q.push(pts.front());
    while (!q.empty()) {
        auto [x, y] = q.front();
        q.pop();
        for (int dir = 0; dir < 4; ++dir) {
            Pt nb{x + kDx[dir], y + kDy[dir]};
            if (in.count(nb) && !seen.count(nb)) {
                seen.insert(nb);
                q.push(nb);
            }
        }
    }
    return seen.size() == in.size();
}

} // namespace

int LatticeDomain::find(int x, int y) const {
    auto it = index.find(pack(x, y));
    return it == index.end() ? -1 : it->second;
}

std::pair<int, int> LatticeDomain::point(int idx) const {
    if (idx < n()) return interior[static_cast<std::size_t>(idx)];
    return boundary[static_cast<std::size_t>(idx - n())];
}

LatticeDomain build_disc(double r) {
    if (r <= 0) throw invalid_input("build_disc: radius must be positive");
    LatticeDomain d;
    d.kind = LatticeDomain::Kind::disc;
    d.radius = r;
    int cap = static_cast<int>(std::ceil(r));
    for (int x = -cap; x <= cap; ++x)
        for (int y = -cap; y <= cap; ++y)
            if (x * x + y * y < r * r) d.interior.push_back({x, y});
    d = finalize(std::move(d));
    int v0 = d.find(0, 0), v1 = d.find(1, 0);
    if (v0 < 0 || v0 >= d.n() || v1 < 0 || v1 >= d.n())
        throw invalid_input("build_disc: domain must contain the vertices 0 and 1");
    return d;
}

LatticeDomain build_rectangle(int big_n, int r) {
    if (big_n < 1 || r < 1) throw invalid_input("build_rectangle: sizes must be positive");
    LatticeDomain d;
    d.kind = LatticeDomain::Kind::rectangle;
    for (int x = 1; x < r * big_n; ++x)
        for (int y = 1; static_cast<double>(y) < M_PI * big_n; ++y) d.interior.push_back({x, y});
    if (d.interior.empty()) throw invalid_input("build_rectangle: degenerate rectangle");
    return finalize(std::move(d));
}

LatticeDomain build_lattice_approx_disc(int n) {
    if (n < 2) throw invalid_input("build_lattice_approx_disc: n too small");
    // squares z + S fully inside the disc of radius n
    std::vector<Pt> pts;
    for (int x = -n - 1; x <= n + 1; ++x)
        for (int y = -n - 1; y <= n + 1; ++y) {
            double worst = 0.0;
            for (double cx : {-0.5, 0.5})
                for (double cy : {-0.5, 0.5})
                    worst = std::max(worst, std::hypot(x + cx, y + cy));
            if (worst < static_cast<double>(n)) pts.push_back({x, y});
        }
    // keep the component of the origin
    std::set<Pt> in(pts.begin(), pts.end());
    if (!in.count({0, 0})) throw invalid_input("build_lattice_approx_disc: origin missing");
    std::set<Pt> comp{{0, 0}};
    std::queue<Pt> q;
    q.push({0, 0});
    while (!q.empty()) {
        auto [x, y] = q.front();
        q.pop();
        for (int dir = 0; dir < 4; ++dir) {
            Pt nb{x + kDx[dir], y + kDy[dir]};
            if (in.count(nb) && !comp.count(nb)) {
                comp.insert(nb);
                q.push(nb);
            }
        }
    }
    LatticeDomain d;
    d.kind = LatticeDomain::Kind::lattice_approx;
    d.radius = n;
    d.interior.assign(comp.begin(), comp.end());
    if (!connected_interior(d.interior))
        throw invalid_input("build_lattice_approx_disc: disconnected component");
    d = finalize(std::move(d));
    if (d.find(0, 0) < 0 || d.find(1, 0) < 0 || d.find(1, 0) >= d.n())
        throw invalid_input("build_lattice_approx_disc: domain must contain 0 and 1");
    return d;
}

LatticeDomain domain_from_points(std::vector<std::pair<int, int>> pts) {
    if (pts.empty()) throw invalid_input("domain_from_points: empty interior");
    if (!connected_interior(pts)) throw invalid_input("domain_from_points: interior not connected");
    LatticeDomain d;
    d.kind = LatticeDomain::Kind::disc;
    double far = 0.0;
    for (auto [x, y] : pts) far = std::max(far, std::hypot(x, y));
    d.radius = far + 1.0;
    d.interior = std::move(pts);
    return finalize(std::move(d));
}

std::vector<std::pair<int, int>> zipper_rungs(const LatticeDomain& d) {
    std::vector<Pt> rungs;
    for (int j = 1;; ++j) {
        bool left = d.find(0, -j) >= 0 && d.find(0, -j) < d.n();
        bool right = d.find(1, -j) >= 0 && d.find(1, -j) < d.n();
        if (!left || !right) break;
        rungs.push_back({0, -j});
    }
    return rungs;
}

namespace {

// sign of the SRW zipper weight on the directed edge u->v
double edge_sign(const std::set<long long>& rung_rows, Pt u, Pt v) {
    if (u.second == v.second && std::abs(u.first - v.first) == 1) {
        int lx = std::min(u.first, v.first);
        if (lx == 0 && rung_rows.count(LatticeDomain::pack(0, u.second))) return -1.0;
    }
    return 1.0;
}

std::set<long long> rung_set(const LatticeDomain& d) {
    std::set<long long> s;
    for (auto [x, y] : zipper_rungs(d)) s.insert(LatticeDomain::pack(x, y));
    return s;
}

// sparse I - Q over the interior minus `skip`; SRW weight with optional
// zipper signs
Eigen::SparseMatrix<double> sparse_iq(const LatticeDomain& d, bool zipper,
                                      const std::set<int>& skip) {
    std::set<long long> rungs = zipper ? rung_set(d) : std::set<long long>{};
    std::vector<int> remap(static_cast<std::size_t>(d.n()), -1);
    int m = 0;
    for (int v = 0; v < d.n(); ++v)
        if (!skip.count(v)) remap[static_cast<std::size_t>(v)] = m++;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(m) * 5);
    for (int v = 0; v < d.n(); ++v) {
        int i = remap[static_cast<std::size_t>(v)];
        if (i < 0) continue;
        trip.emplace_back(i, i, 1.0);
        auto [x, y] = d.interior[static_cast<std::size_t>(v)];
        for (int dir = 0; dir < 4; ++dir) {
            int u = d.find(x + kDx[dir], y + kDy[dir]);
            if (u < 0 || u >= d.n()) continue;
            int j = remap[static_cast<std::size_t>(u)];
            if (j < 0) continue;
            double s = zipper ? edge_sign(rungs, {x, y}, {x + kDx[dir], y + kDy[dir]}) : 1.0;
            trip.emplace_back(i, j, -0.25 * s);
        }
    }
    Eigen::SparseMatrix<double> iq(m, m);
    iq.setFromTriplets(trip.begin(), trip.end());
    return iq;
}

double sparse_logdet(const Eigen::SparseMatrix<double>& iq) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(iq);
    if (ldlt.info() != Eigen::Success)
        throw numerical_error("sparse factorization failed (matrix not positive definite?)");
    double ld = 0.0;
    auto dvec = ldlt.vectorD();
    for (int i = 0; i < dvec.size(); ++i) {
        if (dvec(i) <= 0.0) throw numerical_error("sparse log-determinant hit a nonpositive pivot");
        ld += std::log(dvec(i));
    }
    return ld;
}

} // namespace

WeightedChain domain_chain(const LatticeDomain& d, bool zipper) {
    std::set<long long> rungs = zipper ? rung_set(d) : std::set<long long>{};
    std::vector<VertexId> interior, boundary;
    for (int v = 0; v < d.n() + d.b(); ++v) {
        auto [x, y] = d.point(v);
        VertexId id = (static_cast<VertexId>(x + 32768) << 16) + (y + 32768);
        if (v < d.n()) interior.push_back(id);
        else boundary.push_back(id);
    }
    std::vector<EdgeWeight> edges;
    for (int v = 0; v < d.n() + d.b(); ++v) {
        auto [x, y] = d.point(v);
        bool v_interior = v < d.n();
        for (int dir = 0; dir < 4; ++dir) {
            Pt nb{x + kDx[dir], y + kDy[dir]};
            int u = d.find(nb.first, nb.second);
            if (u < 0) continue;
            bool u_interior = u < d.n();
            if (!v_interior && !u_interior) continue;
            double s = zipper ? edge_sign(rungs, {x, y}, nb) : 1.0;
            VertexId from = (static_cast<VertexId>(x + 32768) << 16) + (y + 32768);
            VertexId to = (static_cast<VertexId>(nb.first + 32768) << 16) + (nb.second + 32768);
            edges.push_back({from, to, Complex(0.25 * s, 0.0)});
        }
    }
    return WeightedChain(std::move(interior), std::move(boundary), edges, Symmetry::symmetric);
}

double lattice_logdet(const LatticeDomain& d, bool zipper) {
    return sparse_logdet(sparse_iq(d, zipper, {}));
}

double odd_loop_mass(const LatticeDomain& d) {
    if (!d.simply_connected) throw invalid_input("odd_loop_mass: domain must be simply connected");
    return 0.5 * (lattice_logdet(d, true) - lattice_logdet(d, false));
}

OddLoopTruncation odd_loop_mass_truncated(const LatticeDomain& d, int max_len, bool run_dfs) {
    OddLoopTruncation out;
    const int n = d.n();
    if (n > 300) throw size_error("odd_loop_mass_truncated: domain too large for the dense oracle");

    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n), q = Eigen::MatrixXd::Zero(n, n);
    std::set<long long> rungs = rung_set(d);
    for (int v = 0; v < n; ++v) {
        auto [x, y] = d.interior[static_cast<std::size_t>(v)];
        for (int dir = 0; dir < 4; ++dir) {
            Pt nb{x + kDx[dir], y + kDy[dir]};
            int u = d.find(nb.first, nb.second);
            if (u < 0 || u >= n) continue;
            p(v, u) = 0.25;
            q(v, u) = 0.25 * edge_sign(rungs, {x, y}, nb);
        }
    }
    Eigen::MatrixXd pk = Eigen::MatrixXd::Identity(n, n), qk = pk;
    for (int len = 1; len <= max_len; ++len) {
        pk = pk * p;
        qk = qk * q;
        out.trace_value += 0.5 * (pk.trace() - qk.trace()) / len;
    }
    Eigen::MatrixXd gp =
        (Eigen::MatrixXd::Identity(n, n) - p).lu().solve(Eigen::MatrixXd::Identity(n, n));
    out.tail_bound = (pk * p * gp).trace() / (max_len + 1.0);

    if (run_dfs) {
        // rooted DFS: sum p(l)/|l| over odd-crossing loops of length <= max_len
        double acc = 0.0;
        std::vector<int> stack;
        std::function<void(int, int, int, double)> dfs = [&](int root, int cur, int parity,
                                                             double w) {
            auto [x, y] = d.interior[static_cast<std::size_t>(cur)];
            for (int dir = 0; dir < 4; ++dir) {
                Pt nb{x + kDx[dir], y + kDy[dir]};
                int u = d.find(nb.first, nb.second);
                if (u < 0 || u >= n) continue;
                int par2 = parity ^ (edge_sign(rungs, {x, y}, nb) < 0 ? 1 : 0);
                double w2 = w * 0.25;
                stack.push_back(u);
                if (u == root && par2 == 1) acc += w2 / static_cast<double>(stack.size());
                if (static_cast<int>(stack.size()) < max_len) dfs(root, u, par2, w2);
                stack.pop_back();
            }
        };
        for (int root = 0; root < n; ++root) {
            stack.clear();
            dfs(root, root, 0, 1.0);
        }
        out.dfs_value = acc;
    }
    return out;
}

SlopeFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw invalid_input("least_squares: need >= 2 points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

OddLoopSlopeResult odd_loop_slope(const std::vector<double>& radii) {
    OddLoopSlopeResult res;
    std::vector<double> lr, mass;
    for (double r : radii) {
        LatticeDomain d = build_disc(r);
        OddLoopSlopeRow row;
        row.radius = r;
        row.vertices = d.n();
        row.mass = odd_loop_mass(d);
        res.rows.push_back(row);
        lr.push_back(std::log(r));
        mass.push_back(row.mass);
    }
    res.slope = least_squares(lr, mass).slope;
    return res;
}

namespace {

// shortest path from src to dst through interior vertices not in `blocked`
// (src/dst may be boundary); returns empty when none exists
std::vector<int> bfs_path(const LatticeDomain& d, int src, int dst, const std::set<int>& blocked) {
    std::vector<int> prev(static_cast<std::size_t>(d.n() + d.b()), -2);
    std::queue<int> q;
    q.push(src);
    prev[static_cast<std::size_t>(src)] = -1;
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        auto [x, y] = d.point(v);
        for (int dir = 0; dir < 4; ++dir) {
            int u = d.find(x + kDx[dir], y + kDy[dir]);
            if (u < 0 || prev[static_cast<std::size_t>(u)] != -2) continue;
            if (u != dst && (u >= d.n() || blocked.count(u))) continue;
            prev[static_cast<std::size_t>(u)] = v;
            if (u == dst) {
                std::vector<int> path{u};
                int cur = v;
                while (cur != -1) {
                    path.push_back(cur);
                    cur = prev[static_cast<std::size_t>(cur)];
                }
                std::reverse(path.begin(), path.end());
                return path;
            }
            q.push(u);
        }
    }
    return {};
}

int path_rung_crossings(const LatticeDomain& d, const std::vector<int>& path,
                        const std::set<long long>& rungs) {
    int c = 0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        Pt u = d.point(path[i]), v = d.point(path[i + 1]);
        if (edge_sign(rungs, u, v) < 0) ++c;
    }
    return c;
}

} // namespace

EdgeProbability lerw_edge_probability(const LatticeDomain& d, std::pair<int, int> a,
                                      std::pair<int, int> b) {
    if (!d.simply_connected)
        throw invalid_input("lerw_edge_probability: domain must be simply connected");
    int ia = d.find(a.first, a.second), ib = d.find(b.first, b.second);
    if (ia < d.n() || ib < d.n() || ia < 0 || ib < 0 || ia == ib)
        throw invalid_input("lerw_edge_probability: a,b must be distinct boundary points");
    int v0 = d.find(0, 0), v1 = d.find(1, 0);
    if (v0 < 0 || v1 < 0 || v0 >= d.n() || v1 >= d.n())
        throw invalid_input("lerw_edge_probability: domain must contain interior 0 and 1");

    EdgeProbability out;
    std::set<long long> rungs = rung_set(d);

    // positive ordering: a SAW through the directed edge (0,0)->(1,0) must
    // cross the zipper an even number of times
    bool order_known = false, swap_ab = false;
    {
        std::vector<int> p1 = bfs_path(d, ia, v0, {v1});
        if (!p1.empty()) {
            std::set<int> blocked(p1.begin(), p1.end());
            std::vector<int> p2 = bfs_path(d, v1, ib, blocked);
            if (!p2.empty()) {
                int crossings = path_rung_crossings(d, p1, rungs) + path_rung_crossings(d, p2, rungs);
                order_known = true;
                swap_ab = (crossings % 2 != 0);
            }
        }
    }

    double m = odd_loop_mass(d);

    // F_e^q(A) = G_A(0,0;q) G_{A\{0}}(1,1;q)
    Eigen::SparseMatrix<double> iq_full = sparse_iq(d, true, {});
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> full(iq_full);
    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(d.n());
    e0(v0) = 1.0;
    double g00 = full.solve(e0)(v0);

    std::set<int> skip0{v0};
    Eigen::SparseMatrix<double> iq_no0 = sparse_iq(d, true, skip0);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> no0(iq_no0);
    int v1r = v1 - (v1 > v0 ? 1 : 0);
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(d.n() - 1);
    e1(v1r) = 1.0;
    double g11 = no0.solve(e1)(v1r);
    double fe = g00 * g11;

    // Delta^q on A' = A \ {0,1}
    std::set<int> skip01{v0, v1};
    Eigen::SparseMatrix<double> iq_ap = sparse_iq(d, true, skip01);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ap(iq_ap);
    std::vector<int> remap(static_cast<std::size_t>(d.n()), -1);
    {
        int mcount = 0;
        for (int v = 0; v < d.n(); ++v)
            if (!skip01.count(v)) remap[static_cast<std::size_t>(v)] = mcount++;
    }
    auto weight_into = [&](int target) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(d.n() - 2);
        auto [tx, ty] = d.point(target);
        for (int dir = 0; dir < 4; ++dir) {
            int u = d.find(tx + kDx[dir], ty + kDy[dir]);
            if (u < 0 || u >= d.n() || skip01.count(u)) continue;
            Pt up = d.point(u);
            w(remap[static_cast<std::size_t>(u)]) = 0.25 * edge_sign(rungs, up, {tx, ty});
        }
        return w;
    };
    Eigen::VectorXd gw0 = ap.solve(weight_into(v0));
    Eigen::VectorXd gw1 = ap.solve(weight_into(v1));
    auto kernel = [&](int from_bd, const Eigen::VectorXd& gw, int target) {
        auto [fx, fy] = d.point(from_bd);
        auto [tx, ty] = d.point(target);
        double total = 0.0;
        // direct step
        if (std::abs(fx - tx) + std::abs(fy - ty) == 1)
            total += 0.25 * edge_sign(rungs, {fx, fy}, {tx, ty});
        for (int dir = 0; dir < 4; ++dir) {
            int u = d.find(fx + kDx[dir], fy + kDy[dir]);
            if (u < 0 || u >= d.n() || skip01.count(u)) continue;
            Pt up = d.point(u);
            total += 0.25 * edge_sign(rungs, {fx, fy}, up) * gw(remap[static_cast<std::size_t>(u)]);
        }
        return total;
    };
    int sa = ia, sb = ib;
    if (swap_ab) std::swap(sa, sb);
    double delta = kernel(sa, gw0, v0) * kernel(sb, gw1, v1) - kernel(sa, gw1, v1) * kernel(sb, gw0, v0);

    // H^p_A(a,b) for normalization
    Eigen::SparseMatrix<double> iq_p = sparse_iq(d, false, {});
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> pfull(iq_p);
    Eigen::VectorXd wb = Eigen::VectorXd::Zero(d.n());
    {
        auto [bx, by] = d.point(ib);
        for (int dir = 0; dir < 4; ++dir) {
            int u = d.find(bx + kDx[dir], by + kDy[dir]);
            if (u >= 0 && u < d.n()) wb(u) = 0.25;
        }
    }
    Eigen::VectorXd gpb = pfull.solve(wb);
    double hab = 0.0;
    {
        auto [ax, ay] = d.point(ia);
        for (int dir = 0; dir < 4; ++dir) {
            int u = d.find(ax + kDx[dir], ay + kDy[dir]);
            if (u >= 0 && u < d.n()) hab += 0.25 * gpb(u);
        }
    }
    if (hab <= 0.0) throw numerical_error("lerw_edge_probability: H_A(a,b) vanishes");

    double closed = std::exp(2.0 * m) * 0.25 * fe * delta / hab;
    if (!order_known && closed < 0.0) {
        closed = -closed;
        swap_ab = true;
    }
    out.closed_form = closed;
    out.swapped_order = swap_ab;

    // enumeration oracle on small domains
    if (d.n() <= 12) {
        WeightedChain chain = domain_chain(d, false);
        // chain ids follow the packed coordinates used by domain_chain
        auto cid = [&](int idx) {
            auto [x, y] = d.point(idx);
            return chain.index_of((static_cast<VertexId>(x + 32768) << 16) + (y + 32768));
        };
        int ca = cid(ia), cb = cid(ib), c0 = cid(v0), c1 = cid(v1);
        std::vector<char> alive(static_cast<std::size_t>(chain.interior_size()), 1);
        Complex total = 0.0;
        enumerate_saws_between(chain, ca, cb, alive, [&](const std::vector<int>& path, Complex) {
            bool uses = false;
            for (std::size_t i = 0; i + 1 < path.size(); ++i)
                if ((path[i] == c0 && path[i + 1] == c1) || (path[i] == c1 && path[i + 1] == c0))
                    uses = true;
            if (!uses) return;
            total += path_weight(chain, path) * f_ordered(chain, path);
        });
        Complex habc = boundary_poisson_kernel(chain, ca, cb);
        out.enumerated = (total / habc).real();
    }
    return out;
}

std::vector<GreenStabilizationRow> green_stabilization(const std::vector<double>& radii) {
    std::vector<GreenStabilizationRow> rows;
    for (double r : radii) {
        LatticeDomain d = build_disc(r);
        GreenStabilizationRow row;
        row.radius = r;
        int v0 = d.find(0, 0), v1 = d.find(1, 0);

        Eigen::SparseMatrix<double> iq_q = sparse_iq(d, true, {});
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> fq(iq_q);
        Eigen::VectorXd e0 = Eigen::VectorXd::Zero(d.n());
        e0(v0) = 1.0;
        row.g00_q = fq.solve(e0)(v0);

        Eigen::SparseMatrix<double> iq_q0 = sparse_iq(d, true, {v0});
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> fq0(iq_q0);
        int v1r = v1 - (v1 > v0 ? 1 : 0);
        Eigen::VectorXd e1 = Eigen::VectorXd::Zero(d.n() - 1);
        e1(v1r) = 1.0;
        row.g11_q = fq0.solve(e1)(v1r);

        Eigen::SparseMatrix<double> iq_p = sparse_iq(d, false, {});
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> fp(iq_p);
        row.g00_p = fp.solve(e0)(v0);
        rows.push_back(row);
    }
    return rows;
}

// --- conformal observables -----------------------------------------------------

namespace {

using Cx = std::complex<double>;

// theta functions with nome qn (series; qn well below 1 for our aspects)
Cx theta1(Cx v, double qn) {
    Cx s = 0.0;
    double q14 = std::pow(qn, 0.25);
    for (int n = 0; n < 40; ++n) {
        double coef = std::pow(qn, n * (n + 1.0)) * (n % 2 == 0 ? 1.0 : -1.0);
        s += coef * std::sin((2.0 * n + 1.0) * v);
        if (coef == 0.0) break;
    }
    return 2.0 * q14 * s;
}

Cx theta4(Cx v, double qn) {
    Cx s = 1.0;
    for (int n = 1; n < 40; ++n) {
        double coef = std::pow(qn, static_cast<double>(n) * n) * (n % 2 == 0 ? 1.0 : -1.0);
        s += 2.0 * coef * std::cos(2.0 * n * v);
        if (coef == 0.0) break;
    }
    return s;
}

double theta2_zero(double qn) {
    double s = 0.0;
    for (int n = 0; n < 40; ++n) s += std::pow(qn, n * (n + 1.0));
    return 2.0 * std::pow(qn, 0.25) * s;
}

double theta3_zero(double qn) {
    double s = 1.0;
    for (int n = 1; n < 40; ++n) s += 2.0 * std::pow(qn, static_cast<double>(n) * n);
    return s;
}

struct RectMap {
    double w = 0, h = 0;
    double qn = 0, k = 0, bigk = 0;

    explicit RectMap(double width, double height) : w(width), h(height) {
        qn = std::exp(-2.0 * M_PI * h / w);
        double t2 = theta2_zero(qn), t3 = theta3_zero(qn);
        k = (t2 * t2) / (t3 * t3);
        bigk = 0.5 * M_PI * t3 * t3;
    }

    // sn at the affine image of z in (0,w)x(0,h)
    Cx sn(Cx z) const {
        Cx u = (2.0 * bigk / w) * z - bigk;
        Cx v = M_PI * u / (2.0 * bigk);
        double t2 = theta2_zero(qn), t3 = theta3_zero(qn);
        return (t3 / t2) * theta1(v, qn) / theta4(v, qn);
    }

    // unit-disc image with the center mapped to 0
    Cx map(Cx z) const {
        Cx a(0.0, 1.0 / std::sqrt(k));
        Cx s = sn(z);
        return (s - a) / (s + a);
    }

    double conformal_radius() const { return w / ((1.0 + k) * bigk); }
};

double angle_in_01(Cx fa, Cx fb) {
    double delta = std::arg(fb * std::conj(fa));
    if (delta < 0) delta += 2.0 * M_PI;
    return 0.5 * delta;
}

} // namespace

ConformalObservables disc_observables(double r, double angle_a, double angle_b) {
    if (r <= 0) throw invalid_input("disc_observables: radius must be positive");
    ConformalObservables o;
    o.r_a = r;
    o.theta = angle_in_01(std::polar(1.0, angle_a), std::polar(1.0, angle_b));
    o.s = std::sin(o.theta);
    o.dist_center = r;
    o.koebe_ok = true;
    return o;
}

ConformalObservables rectangle_observables(double w, double h, std::pair<double, double> a,
                                           std::pair<double, double> b) {
    if (w <= 0 || h <= 0) throw invalid_input("rectangle_observables: degenerate rectangle");
    // rotate so the aspect keeps the nome small
    if (w > 2.0 * h) {
        auto rot = [&](std::pair<double, double> p) {
            return std::pair<double, double>{p.second, w - p.first};
        };
        return rectangle_observables(h, w, rot(a), rot(b));
    }
    RectMap rm(w, h);
    Cx za(a.first, a.second), zb(b.first, b.second);
    ConformalObservables o;
    o.r_a = rm.conformal_radius();
    Cx fa = rm.map(za), fb = rm.map(zb);
    o.theta = angle_in_01(fa / std::abs(fa), fb / std::abs(fb));
    o.s = std::sin(o.theta);
    o.dist_center = std::min(w, h) / 2.0;
    o.koebe_ok = (o.r_a / 4.0 <= o.dist_center + 1e-9) && (o.dist_center <= o.r_a + 1e-9);
    return o;
}

ConformalObservables domain_observables(const LatticeDomain& d, std::pair<int, int> a,
                                        std::pair<int, int> b) {
    if (d.kind == LatticeDomain::Kind::rectangle) {
        int xmin = 1 << 30, xmax = -(1 << 30), ymin = 1 << 30, ymax = -(1 << 30);
        for (auto [x, y] : d.interior) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
        double w = xmax - xmin + 1.0, h = ymax - ymin + 1.0;
        double ox = xmin - 0.5, oy = ymin - 0.5;
        auto clamp_to_wall = [&](std::pair<int, int> p) {
            double px = p.first - ox, py = p.second - oy;
            px = std::clamp(px, 0.0, w);
            py = std::clamp(py, 0.0, h);
            // project onto the nearest wall
            double dl = px, dr = w - px, db = py, dt = h - py;
            double m = std::min({dl, dr, db, dt});
            if (m == dl) px = 0.0;
            else if (m == dr) px = w;
            else if (m == db) py = 0.0;
            else py = h;
            return std::pair<double, double>{px, py};
        };
        return rectangle_observables(w, h, clamp_to_wall(a), clamp_to_wall(b));
    }

    // disc-like domains: r_A approximated by the construction radius
    ConformalObservables o;
    o.r_a = d.radius;
    o.theta = angle_in_01(std::polar(1.0, std::atan2(static_cast<double>(a.second), static_cast<double>(a.first))),
                          std::polar(1.0, std::atan2(static_cast<double>(b.second), static_cast<double>(b.first))));
    o.s = std::sin(o.theta);
    // exact distance from 0 to the boundary of the union-of-squares region
    double best = 1e18;
    std::set<Pt> in(d.interior.begin(), d.interior.end());
    for (auto [x, y] : d.interior)
        for (int dir = 0; dir < 4; ++dir) {
            Pt nb{x + kDx[dir], y + kDy[dir]};
            if (in.count(nb)) continue;
            // shared square edge: unit segment centered between the points,
            // spanned by c + t e for t in [-1,1] with |e| = 1/2
            double cx = 0.5 * (x + nb.first), cy = 0.5 * (y + nb.second);
            double ex = kDy[dir] * 0.5, ey = kDx[dir] * 0.5;
            double denom = ex * ex + ey * ey;
            double tt = std::clamp(-(cx * ex + cy * ey) / denom, -1.0, 1.0);
            best = std::min(best, std::hypot(cx + tt * ex, cy + tt * ey));
        }
    o.dist_center = best;
    o.koebe_ok = (o.r_a / 4.0 <= best + 1e-9) && (best <= o.r_a + 1e-9);
    return o;
}

// --- crossing exponent ----------------------------------------------------------

double strip_kernel(double y, double ytilde, double r, int terms) {
    if (terms < 50) throw invalid_input("strip_kernel: need at least 50 terms");
    double s = 0.0;
    for (int j = 1; j <= terms; ++j) {
        double ejr = std::exp(-static_cast<double>(j) * r);
        double sj = 2.0 * j * ejr / (1.0 - ejr * ejr);
        s += std::sin(j * y) * std::sin(j * ytilde) * sj;
    }
    // tail bound: sum_{j>T} 2 j e^{-jr} (geometric-derivative closed form)
    double x = std::exp(-r);
    double tail = 2.0 * std::pow(x, terms + 1) *
                  ((terms + 1) - static_cast<double>(terms) * x) / ((1.0 - x) * (1.0 - x));
    double scale = 2.0 * std::exp(-r);
    if (tail > 1e-14 * scale)
        throw numerical_error("strip_kernel: series tail above 1e-14 of scale; increase terms");
    return (2.0 / M_PI) * s;
}

CrossingResult crossing_exponent(int n, const std::vector<double>& r_grid,
                                 const std::vector<double>& ys, int terms) {
    if (n < 1 || static_cast<int>(ys.size()) != n)
        throw invalid_input("crossing_exponent: need n ordered heights");
    for (int i = 0; i + 1 < n; ++i)
        if (!(ys[static_cast<std::size_t>(i)] < ys[static_cast<std::size_t>(i + 1)]))
            throw invalid_input("crossing_exponent: heights must increase");
    if (ys.front() <= 0.0 || ys.back() >= M_PI)
        throw invalid_input("crossing_exponent: heights must lie in (0,pi)");

    CrossingResult res;
    res.r_grid = r_grid;
    for (double r : r_grid) {
        Eigen::MatrixXd h(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                h(i, j) = strip_kernel(ys[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)], r, terms);
        res.logdet.push_back(std::log(std::abs(h.determinant())));
    }
    res.slope = -least_squares(r_grid, res.logdet).slope;

    if (n == 2) {
        double r = r_grid.back();
        double h11 = strip_kernel(ys[0], ys[0], r, terms);
        double h22 = strip_kernel(ys[1], ys[1], r, terms);
        double h12 = strip_kernel(ys[0], ys[1], r, terms);
        double h21 = strip_kernel(ys[1], ys[0], r, terms);
        double det = h11 * h22 - h12 * h21;
        double s1 = std::sin(ys[0]), s2 = std::sin(ys[1]);
        res.ratio_constant = det / (h11 * h22) * std::exp(r) * s1 * s1 * s2 * s2;
        res.c_formula = 2.0 * s1 * s1 * std::pow(std::sin(2.0 * ys[1]), 2) +
                        2.0 * s2 * s2 * std::pow(std::sin(2.0 * ys[0]), 2) -
                        4.0 * s1 * s2 * std::sin(2.0 * ys[0]) * std::sin(2.0 * ys[1]);
    }
    return res;
}

} // namespace loopforge
