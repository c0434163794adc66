#include "doctest.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "wkb/potential.hpp"

using namespace wkb;

namespace {

std::vector<cd> circle(cd center, double r, int loops, int n = 64) {
    std::vector<cd> pts;
    for (int k = 0; k <= n * loops; ++k) pts.push_back(center + std::polar(r, 2.0 * kPi * k / n));
    return pts;
}

}  // namespace

TEST_CASE("complex literal grammar") {
    CHECK(parse_complex("3") == cd(3, 0));
    CHECK(parse_complex("2i") == cd(0, 2));
    CHECK(parse_complex("1+2i") == cd(1, 2));
    CHECK(parse_complex("1-2i") == cd(1, -2));
    CHECK(parse_complex("-i") == cd(0, -1));
    CHECK(parse_complex("1/2-3/4i") == cd(0.5, -0.75));
    CHECK(parse_complex("1e-3+2e+1i") == cd(1e-3, 20));
    CHECK_THROWS_AS(parse_complex("1+x"), WkbError);
    CHECK_THROWS_AS(Polynomial::parse("1,,2"), WkbError);
}

TEST_CASE("polynomial trims trailing zeros") {
    auto p = Polynomial::parse("1,0,2,0,0");
    CHECK(p.degree() == 2);
    CHECK(p(cd(2, 0)) == cd(9, 0));
    CHECK(Polynomial::parse("0,0").is_zero());
}

TEST_CASE("turning points of simple potentials") {
    auto tp = find_turning_points(Polynomial::parse("-1,0,1"));
    REQUIRE(tp.size() == 2);
    CHECK(std::abs(tp[0].location - cd(-1, 0)) < 1e-12);
    CHECK(std::abs(tp[1].location - cd(1, 0)) < 1e-12);
    CHECK(tp[0].multiplicity == 1);

    auto cubic = find_turning_points(Polynomial::parse("0,0,0,1"));
    REQUIRE(cubic.size() == 1);
    CHECK(cubic[0].multiplicity == 3);
    CHECK(std::abs(cubic[0].location) < 1e-9);

    CHECK(find_turning_points(Polynomial::parse("2")).empty());
    CHECK_THROWS_AS(find_turning_points(Polynomial::parse("0")), WkbError);
}

TEST_CASE("multiplicities sum to the degree and residuals are small") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        // Product of linear factors with one deliberately repeated root.
        std::vector<cd> roots;
        int n = 1 + trial % 5;
        for (int k = 0; k < n; ++k) roots.push_back({u(rng), u(rng)});
        roots.push_back(roots[0]);
        std::vector<cd> c{1.0};
        for (cd r : roots) {
            std::vector<cd> next(c.size() + 1, 0.0);
            for (std::size_t k = 0; k < c.size(); ++k) {
                next[k + 1] += c[k];
                next[k] -= r * c[k];
            }
            c = next;
        }
        Polynomial V(c);
        auto tps = find_turning_points(V);
        int total = 0;
        for (const auto& tp : tps) {
            total += tp.multiplicity;
            CHECK(std::abs(V(tp.location)) <= 1e-9 * (1.0 + V.max_abs_coeff()) * std::pow(3.0, V.degree()));
        }
        CHECK(total == V.degree());
        for (std::size_t i = 0; i < tps.size(); ++i)
            for (std::size_t j = i + 1; j < tps.size(); ++j) CHECK(std::abs(tps[i].location - tps[j].location) > 1e-9);
    }
}

TEST_CASE("action integrals with closed forms") {
    auto one = Polynomial::parse("1");
    CHECK(std::abs(action_along_path(one, {{0.0, 1.0}, 1.0}) - cd(1, 0)) < 1e-12);

    auto x = Polynomial::parse("0,1");
    CHECK(std::abs(action_along_path(x, {{1.0, 4.0}, 1.0}) - cd(14.0 / 3.0, 0)) < 1e-10);

    // Weber segment: the branch equal to i sqrt(1-x^2) on (-1,1).
    auto weber = Polynomial::parse("-1,0,1");
    double tol = 1e-9;
    cd seed = cd(0, 1) * std::sqrt(1.0 - (tol - 1.0) * (tol - 1.0));
    cd val = action_along_path(weber, {{-1.0 + tol, 1.0 - tol}, seed});
    // Independent oracle: real Gauss-Kronrod on sqrt(1-x^2).
    double oracle = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [](double t) { return std::sqrt(1.0 - t * t); }, -1.0, 1.0, 30, 1e-13);
    CHECK(std::abs(val - cd(0, oracle)) < 1e-8);
    CHECK(std::abs(val - cd(0, kPi / 2)) < 1e-8);
}

TEST_CASE("square-root monodromy") {
    auto one = Polynomial::parse("1");
    CHECK(std::abs(sqrt_continuation(one, {circle(0.0, 1.0, 1), 1.0}) - cd(1, 0)) < 1e-12);
    auto x = Polynomial::parse("0,1");
    CHECK(std::abs(sqrt_continuation(x, {circle(0.0, 1.0, 1), 1.0}) - cd(-1, 0)) < 1e-9);
    CHECK(std::abs(sqrt_continuation(x, {circle(0.0, 1.0, 2), 1.0}) - cd(1, 0)) < 1e-9);
}

TEST_CASE("monodromy flips iff the enclosed multiplicity is odd") {
    auto V = Polynomial::parse("0,-1,0,1");  // zeros at -1, 0, 1
    BranchTracker tr(V);
    cd start(0.5, 0.5);
    cd seed = std::sqrt(V(start));
    struct Case { cd center; double r; int enclosed; };
    for (auto c : {Case{cd(0.5, 0.5), 0.3, 0}, Case{cd(0.0, 0.5), 0.8, 1}, Case{cd(0.5, 0.5), 1.0, 2},
                   Case{cd(0.0, 0.5), 2.0, 3}}) {
        auto loop = circle(c.center, c.r, 1, 256);
        BranchedPath to_loop{{start, loop.front()}, seed};
        cd s0 = tr.continue_path(to_loop);
        cd s1 = tr.continue_path({loop, s0});
        bool flipped = std::abs(s1 + s0) < 1e-6 * std::abs(s0);
        CHECK(flipped == (c.enclosed % 2 == 1));
    }
}

TEST_CASE("refinement stability and reversal antisymmetry") {
    auto V = Polynomial::parse("1,2i,0,1");
    BranchTracker tr(V);
    std::vector<cd> pts{{2, 1}, {0.5, 2}, {-1, 1.5}, {-2, -0.5}};
    cd seed = std::sqrt(V(pts[0]));
    cd end;
    cd forward = tr.integrate_path({pts, seed}, &end);
    std::vector<cd> refined;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        refined.push_back(pts[i]);
        refined.push_back(0.5 * (pts[i] + pts[i + 1]));
    }
    refined.push_back(pts.back());
    CHECK(std::abs(tr.integrate_path({refined, seed}) - forward) <= 10 * kDefaultQuadTol * (1 + std::abs(forward)));
    std::vector<cd> rev(pts.rbegin(), pts.rend());
    cd back_end;
    cd backward = tr.integrate_path({rev, end}, &back_end);
    CHECK(std::abs(backward + forward) <= 10 * kDefaultQuadTol * (1 + std::abs(forward)));
    CHECK(std::abs(back_end - seed) < 1e-9);
}

TEST_CASE("paths through turning points are rejected") {
    auto x = Polynomial::parse("0,1");
    CHECK_THROWS_AS(action_along_path(x, {{cd(-1, 0), cd(1, 0)}, cd(0, 1)}), WkbError);
}
