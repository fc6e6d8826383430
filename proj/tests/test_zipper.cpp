#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "loopforge/paths.hpp"
#include "loopforge/zipper.hpp"

using namespace loopforge;

TEST_CASE("domain builders") {
    LatticeDomain disc = build_disc(2.0);
    CHECK(disc.n() == 9);
    CHECK(disc.simply_connected);
    CHECK(disc.find(0, 0) >= 0);
    CHECK(disc.find(1, 0) >= 0);
    CHECK_THROWS_AS(build_disc(1.0), invalid_input); // misses the vertex 1

    LatticeDomain rect = build_rectangle(1, 3);
    CHECK(rect.n() == 6); // x in {1,2}, y in {1,2,3}
    CHECK(rect.simply_connected);
    std::set<std::pair<int, int>> pts(rect.interior.begin(), rect.interior.end());
    for (int x = 1; x <= 2; ++x)
        for (int y = 1; y <= 3; ++y) CHECK(pts.count({x, y}) == 1);

    LatticeDomain approx = build_lattice_approx_disc(16);
    CHECK(approx.simply_connected);
    double worst = 0.0;
    std::set<std::pair<int, int>> in(approx.interior.begin(), approx.interior.end());
    for (auto [x, y] : approx.interior)
        for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
            if (in.count({x + dx, y + dy})) continue;
            double cx = x + 0.5 * dx, cy = y + 0.5 * dy;
            double px = 0.5 * dy, py = 0.5 * dx;
            for (double s : {-1.0, 1.0})
                worst = std::max(worst,
                                 std::abs(std::hypot((cx + s * px) / 16.0, (cy + s * py) / 16.0) - 1.0));
        }
    CHECK(worst <= std::sqrt(2.0) / 16.0 + 1e-12);

    // a C-shaped custom domain is still simply connected; a ring is not
    std::vector<std::pair<int, int>> cshape{{0, 0}, {1, 0}, {2, 0}, {0, 1}, {0, 2}, {1, 2}, {2, 2}};
    CHECK(domain_from_points(cshape).simply_connected);
    std::vector<std::pair<int, int>> ring;
    for (int x = -2; x <= 2; ++x)
        for (int y = -2; y <= 2; ++y)
            if (std::max(std::abs(x), std::abs(y)) == 2) ring.push_back({x, y});
    CHECK(!domain_from_points(ring).simply_connected);
}

TEST_CASE("zipper rungs end at the first missing row") {
    CHECK(zipper_rungs(build_disc(2.0)).size() == 1);
    CHECK(zipper_rungs(build_disc(4.0)).size() == 3);
    // strip above the axis has no rungs at all
    LatticeDomain strip = domain_from_points({{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    CHECK(zipper_rungs(strip).empty());
}

TEST_CASE("odd loop mass via log determinants") {
    // no rungs -> q == p -> zero mass
    LatticeDomain strip = domain_from_points({{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    CHECK(odd_loop_mass(strip) == doctest::Approx(0.0).epsilon(1e-14));

    // truncated oracle on a small disc: DFS equals traces, and the log-det
    // value sits within the certified tail
    LatticeDomain d3 = build_disc(3.0);
    double exact = odd_loop_mass(d3);
    OddLoopTruncation tr = odd_loop_mass_truncated(d3, 12, /*run_dfs=*/true);
    CHECK(std::abs(tr.dfs_value - tr.trace_value) < 1e-12);
    CHECK(std::abs(tr.trace_value - exact) <= tr.tail_bound + 1e-12);
    CHECK(tr.tail_bound < 0.1);

    // longer truncation tightens toward the log-det value
    OddLoopTruncation tr16 = odd_loop_mass_truncated(d3, 16, /*run_dfs=*/false);
    CHECK(std::abs(tr16.trace_value - exact) <= tr16.tail_bound + 1e-12);
    CHECK(tr16.tail_bound < tr.tail_bound);

    // dense-chain route agrees with the sparse log-det route bit-tolerably
    WeightedChain cq = domain_chain(d3, true), cp = domain_chain(d3, false);
    GreenData gq = green_function(cq), gp = green_function(cp);
    double dense = 0.5 * (std::log(gq.det_iq.real()) - std::log(gp.det_iq.real()));
    CHECK(std::abs(dense - exact) < 1e-12);

    // the log-det value stays within the certified truncation tail on all
    // discs up to r = 6
    for (double r : {4.0, 5.0, 6.0}) {
        LatticeDomain d = build_disc(r);
        double ex = odd_loop_mass(d);
        OddLoopTruncation t = odd_loop_mass_truncated(d, 18, /*run_dfs=*/false);
        CHECK(std::abs(t.trace_value - ex) <= t.tail_bound + 1e-12);
    }
}

TEST_CASE("odd loops flip sign and even loops keep it") {
    LatticeDomain d = build_disc(2.0);
    WeightedChain cp = domain_chain(d, false), cq = domain_chain(d, true);
    std::vector<char> alive(static_cast<std::size_t>(cp.interior_size()), 1);
    long odd = 0, even = 0;
    bool ok = true;
    for (int root = 0; root < cp.interior_size(); ++root)
        enumerate_rooted_loops(cp, root, 8, alive, [&](const std::vector<int>& v, Complex wp) {
            Complex wq = path_weight(cq, v);
            if (std::abs(wq + wp) < 1e-18) ++odd;
            else if (std::abs(wq - wp) < 1e-18) ++even;
            else ok = false;
        });
    CHECK(ok);
    CHECK(odd > 0);
    CHECK(even > 0);
}

TEST_CASE("lerw edge probability: closed form equals enumeration") {
    // 3x3 block containing 0 and 1
    std::vector<std::pair<int, int>> block;
    for (int x = 0; x <= 2; ++x)
        for (int y = -1; y <= 1; ++y) block.push_back({x, y});
    LatticeDomain d = domain_from_points(block);
    REQUIRE(d.simply_connected);
    REQUIRE(zipper_rungs(d).size() == 1);

    int checked = 0;
    for (auto a : d.boundary) {
        for (auto b : d.boundary) {
            if (a >= b) continue;
            EdgeProbability p = lerw_edge_probability(d, a, b);
            if (p.enumerated < 0.0) continue;
            ++checked;
            CHECK(p.closed_form >= -1e-12);
            CHECK(p.closed_form <= 1.0 + 1e-12);
            CHECK(std::abs(p.closed_form - p.enumerated) < 1e-8);
        }
        break; // one source point against all targets keeps this quick
    }
    CHECK(checked >= 5);

    // a disc works too
    LatticeDomain d2 = build_disc(2.0);
    EdgeProbability p2 = lerw_edge_probability(d2, {0, 2}, {0, -2});
    CHECK(p2.enumerated >= 0.0);
    CHECK(std::abs(p2.closed_form - p2.enumerated) < 1e-8);

    CHECK_THROWS_AS(lerw_edge_probability(d2, {0, 2}, {0, 2}), invalid_input);

    // non-simply-connected domains are refused (positive ordering undefined)
    std::vector<std::pair<int, int>> holed;
    for (int x = -1; x <= 3; ++x)
        for (int y = -2; y <= 2; ++y)
            if (!(x == 1 && y == 1)) holed.push_back({x, y});
    LatticeDomain dh = domain_from_points(holed);
    CHECK(!dh.simply_connected);
    CHECK_THROWS_AS(lerw_edge_probability(dh, {-2, 0}, {4, 0}), invalid_input);
    CHECK_THROWS_AS(odd_loop_mass(dh), invalid_input);
}

TEST_CASE("green stabilization table") {
    auto rows = green_stabilization({2, 4, 8, 16});
    REQUIRE(rows.size() == 4);
    // successive increments of G_A(0,0;q) shrink
    double inc1 = std::abs(rows[1].g00_q - rows[0].g00_q);
    double inc2 = std::abs(rows[2].g00_q - rows[1].g00_q);
    double inc3 = std::abs(rows[3].g00_q - rows[2].g00_q);
    CHECK(inc2 < inc1);
    CHECK(inc3 < inc2);
    double jnc1 = std::abs(rows[1].g11_q - rows[0].g11_q);
    double jnc2 = std::abs(rows[2].g11_q - rows[1].g11_q);
    CHECK(jnc2 < jnc1);
    // the SRW Green entry grows like log r instead
    CHECK(rows[3].g00_p - rows[2].g00_p > 0.3);
    CHECK(rows[2].g00_p - rows[1].g00_p > 0.3);
}

TEST_CASE("conformal observables") {
    // plain disc: identity-type map
    ConformalObservables o = disc_observables(3.0, 0.2, 1.4);
    CHECK(o.r_a == doctest::Approx(3.0));
    CHECK(o.theta == doctest::Approx(0.6));
    CHECK(o.s == doctest::Approx(std::sin(0.6)));
    CHECK(o.koebe_ok);

    // unit square: conformal radius about the center is 4 sqrt(pi) / Gamma(1/4)^2
    ConformalObservables sq = rectangle_observables(1.0, 1.0, {0.0, 0.5}, {1.0, 0.5});
    double gamma_quarter = 3.62561016275449;
    double expect = 4.0 * std::sqrt(M_PI) / (gamma_quarter * gamma_quarter);
    CHECK(sq.r_a == doctest::Approx(expect).epsilon(1e-6));
    CHECK(sq.koebe_ok);
    // opposite mid-side points are diametrically opposite by symmetry
    CHECK(sq.s == doctest::Approx(1.0).epsilon(1e-9));

    // rotation invariance for flat rectangles (internal swap path)
    ConformalObservables flat = rectangle_observables(10.0, 1.0, {0.0, 0.5}, {10.0, 0.5});
    ConformalObservables tall = rectangle_observables(1.0, 10.0, {0.5, 0.0}, {0.5, 10.0});
    CHECK(flat.r_a == doctest::Approx(tall.r_a).epsilon(1e-10));
    CHECK(flat.koebe_ok);

    // lattice domains: koebe sandwich and S in [0,1]
    for (double r : {2.0, 3.0, 5.0, 8.0}) {
        LatticeDomain d = build_disc(r);
        ConformalObservables od = domain_observables(d, {0, static_cast<int>(r)},
                                                     {static_cast<int>(r), 0});
        CHECK(od.koebe_ok);
        CHECK(od.s >= 0.0);
        CHECK(od.s <= 1.0);
    }
    LatticeDomain rect = build_rectangle(2, 2);
    ConformalObservables orect = domain_observables(rect, {0, 2}, {4, 3});
    CHECK(orect.koebe_ok);
    CHECK(orect.s >= 0.0);
    CHECK(orect.s <= 1.0);
}

TEST_CASE("crossing exponent slopes and the two-path constant") {
    std::vector<double> grid;
    for (double r = 3.0; r <= 6.0 + 1e-9; r += 0.25) grid.push_back(r);

    CrossingResult c1 = crossing_exponent(1, grid, {M_PI / 2}, 200);
    CHECK(std::abs(c1.slope - 1.0) < 0.01);

    CrossingResult c2 = crossing_exponent(2, grid, {M_PI / 2 - 0.35, M_PI / 2 + 0.35}, 200);
    CHECK(std::abs(c2.slope - 3.0) / 3.0 < 0.01);
    CHECK(std::abs(c2.ratio_constant - c2.c_formula) / c2.c_formula < 0.01);

    CrossingResult c3 =
        crossing_exponent(3, grid, {M_PI / 2 - 0.35, M_PI / 2, M_PI / 2 + 0.35}, 200);
    CHECK(std::abs(c3.slope - 6.0) / 6.0 < 0.01);

    // c(y1, y2) equals the displayed trigonometric polynomial
    double y1 = M_PI / 2 - 0.35, y2 = M_PI / 2 + 0.35;
    double c_formula = 2.0 * std::sin(y1) * std::sin(y1) * std::sin(2 * y2) * std::sin(2 * y2) +
                       2.0 * std::sin(y2) * std::sin(y2) * std::sin(2 * y1) * std::sin(2 * y1) -
                       4.0 * std::sin(y1) * std::sin(y2) * std::sin(2 * y1) * std::sin(2 * y2);
    CHECK(c2.c_formula == doctest::Approx(c_formula).epsilon(1e-12));

    // unordered heights are rejected; tiny separations demand more terms
    CHECK_THROWS_AS(crossing_exponent(2, grid, {2.0, 1.0}, 200), invalid_input);
    CHECK_THROWS_AS(strip_kernel(1.0, 1.0, 0.2, 50), numerical_error);
}
