#include "doctest.h"

#include <algorithm>
#include <random>

#include "wkb/continuation.hpp"

using namespace wkb;

namespace {

bool oracle_in_cone(cd w, double alpha) { return std::abs(w) < 1e-12 || std::abs(std::arg(w)) <= alpha + 1e-9; }

/// Cut meets the open parallelogram: sample the ray densely and test membership.
bool sampled_hit(const Parallelogram& P, cd d, double reach) {
    cd dir = std::polar(1.0, -P.alpha);
    for (int k = 0; k <= 20000; ++k)
        if (P.contains(d + dir * (reach * k / 20000.0))) return true;
    return false;
}

std::vector<cd> points(const ContinuationReport& rep) {
    std::vector<cd> out;
    for (const auto& g : rep.singular_apexes) out.push_back(g.point);
    return out;
}

bool contains_point(const std::vector<cd>& set, cd p, double tol) {
    return std::any_of(set.begin(), set.end(), [&](cd q) { return std::abs(p - q) <= tol; });
}

}  // namespace

TEST_CASE("parallelogram vertices, membership and cut hits") {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> d(-3, 3);
    Parallelogram P{0.4, {0.5, -0.25}, 0.75};
    CHECK(in_cone(P.C() - P.A(), 0.4));
    CHECK(std::abs((P.B() - P.A()) / std::polar(1.0, -0.4) - 1.5) < 1e-12);
    CHECK(std::abs((P.D() - P.A()) / std::polar(1.0, 0.4) - 1.5) < 1e-12);
    CHECK(P.contains(from_k(P.center, 0.4)));
    auto V = P.shrink_about_A(0.5);
    CHECK(std::abs(V.A() - P.A()) < 1e-12);
    CHECK(V.radius == doctest::Approx(0.375));
    int hits = 0;
    for (int k = 0; k < 200; ++k) {
        cd s(d(rng), d(rng));
        bool fast = P.hit_by_cut(s), slow = sampled_hit(P, s, 20.0);
        // Sampling can miss only grazing hits; require agreement away from the edges.
        KCoords q = to_k(s, 0.4);
        double margin = std::min(std::abs(std::abs(q.u - P.center.u) - P.radius),
                                 std::abs(q.v - (P.center.v + P.radius)));
        if (margin > 1e-2) CHECK(fast == slow);
        hits += fast;
    }
    CHECK(hits > 0);
}

TEST_CASE("depth zero Airy slice at the base point has the two apexes +-z") {
    auto g = trace_geometry(Polynomial::parse("0,1"), 0.3);
    const cd x0(-1, 0.3), xe(-0.8, 0.5);
    NumericCover cover(g, x0);
    auto p = make_pipeline(cover, x0, 0);
    auto rep = compute_singularities(*p);
    REQUIRE(rep.singular_apexes.size() == 2);
    for (const auto& a : rep.singular_apexes) CHECK(std::abs(a.point) < 1e-12);
    auto q = make_pipeline(cover, xe, 0);
    auto rep2 = compute_singularities(*q);
    REQUIRE(rep2.singular_apexes.size() == 2);
    cd dz = q->z_x0 - q->z_eval;
    for (const auto& a : rep2.singular_apexes) CHECK(std::min(std::abs(a.point - dz), std::abs(a.point + dz)) < 1e-12);
}

TEST_CASE("cuts avoid the base parallelogram and both apex routes agree") {
    for (const char* V : {"0,1", "-1,0,1"}) {
        auto g = trace_geometry(Polynomial::parse(V), 0.3);
        NumericCover cover(g, cd(-1, 0.3));
        for (cd xe : {cd(-0.8, 0.5), cd(1.5, 0.6)}) {
            for (int depth = 0; depth <= 4; ++depth) {
                auto p = make_pipeline(cover, xe, depth);
                auto rep = compute_singularities(*p);
                CHECK(rep.disjoint);
                for (const auto& a : rep.singular_apexes) CHECK_FALSE(rep.base_U.hit_by_cut(a.point));
                CHECK(rep.sub_V.radius < rep.base_U.radius);
                auto direct = direct_apexes(rep, *p);
                REQUIRE(direct.size() == rep.singular_apexes.size());
                for (std::size_t k = 0; k < direct.size(); ++k) {
                    CHECK(direct[k].word == rep.singular_apexes[k].word);
                    CHECK(std::abs(direct[k].point - rep.singular_apexes[k].point) < 1e-8);
                }
            }
        }
    }
}

TEST_CASE("flat models: exact agreement of the two routes") {
    FlatModel m(0.3, {cd(0, 0), cd(1, 0.5)}, cd(0.25, -0.375));
    for (int depth = 0; depth <= 3; ++depth) {
        auto p = make_pipeline(m, cd(0.5, -0.25), depth);
        auto rep = compute_singularities(*p);
        auto direct = direct_apexes(rep, *p);
        REQUIRE(direct.size() == rep.singular_apexes.size());
        for (std::size_t k = 0; k < direct.size(); ++k) CHECK(direct[k].point == rep.singular_apexes[k].point);
    }
}

TEST_CASE("smallness: sorted sweep matches a brute-force count") {
    auto g = trace_geometry(Polynomial::parse("-1,0,1"), 0.3);
    NumericCover cover(g, cd(-1, 0.3));
    auto p = make_pipeline(cover, cd(1.5, 0.6), 4);
    auto rep = compute_singularities(*p);
    CHECK(rep.smallness_certified);
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> d(-20, 20);
    for (int k = 0; k < 100; ++k) {
        cd s(d(rng), d(rng));
        int brute = 0;
        for (const auto& a : rep.singular_apexes) brute += oracle_in_cone(s - a.point, 0.3);
        CHECK(rep.count_below(s) == brute);
    }
}

TEST_CASE("deeper runs keep every apex for a fixed base parallelogram") {
    auto g = trace_geometry(Polynomial::parse("-1,0,1"), 0.3);
    NumericCover cover(g, cd(-1, 0.3));
    const cd xe(-0.8, 0.5);
    auto deepest = make_pipeline(cover, xe, 4);
    ContinuationOptions opt;
    opt.U = compute_singularities(*deepest).base_U;
    std::vector<cd> prev;
    for (int depth = 0; depth <= 4; ++depth) {
        auto p = make_pipeline(cover, xe, depth);
        auto pts = points(compute_singularities(*p, opt));
        for (cd q : prev) CHECK(contains_point(pts, q, 1e-9));
        prev = pts;
    }
}

TEST_CASE("default domain is connected") {
    auto g = trace_geometry(Polynomial::parse("0,1"), 0.3);
    NumericCover cover(g, cd(-1, 0.3));
    auto p = make_pipeline(cover, cd(2, 0.5), 3);
    auto rep = compute_singularities(*p);
    CHECK(rep.disjoint);
    CHECK(domain_connected(rep));
}

TEST_CASE("removed rays follow the section support") {
    FlatModel m(0.3, {cd(0, 0)}, cd(0.5, 0.25));
    auto cx = m.build(Family::PlusAlpha, 3);
    auto sections = compute_sections(cx);
    for (const auto& s : cx.strips) {
        auto removed = compute_U_set(cx, sections, s.id, cd(0.1, 0.1), m.x0());
        CHECK(removed.size() == sections.at(s.id).coeffs.size());
    }
}
