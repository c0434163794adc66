#include "doctest.h"

#include <random>

#include "wkb/io.hpp"
#include "wkb/words.hpp"

using namespace wkb;

namespace {

/// Random puncture sets on a dyadic grid with distinct points.
std::vector<cd> random_punctures(std::mt19937& rng, int n) {
    std::uniform_int_distribution<int> coord(-8, 8);
    std::vector<cd> pts;
    while (static_cast<int>(pts.size()) < n) {
        cd p(coord(rng) / 4.0, coord(rng) / 4.0);
        bool fresh = true;
        for (cd q : pts) fresh = fresh && std::abs(p - q) > 0.1;
        if (fresh) pts.push_back(p);
    }
    return pts;
}

/// Base point off every alpha and -alpha line through the punctures.
cd generic_base(const std::vector<cd>& pts, double alpha) {
    for (int k = 0;; ++k) {
        cd x(0.3 + 0.17 * k, -0.41 + 0.11 * k);
        bool ok = true;
        for (cd p : pts) {
            KCoords d = to_k(x - p, alpha);
            ok = ok && std::abs(d.u) > 0.05 && std::abs(d.v) > 0.05;
        }
        if (ok) return x;
    }
}

int count_edges(const StripComplex& cx) {
    int e = 0;
    for (const auto& r : cx.rays) e += r.frontier() ? 0 : 1;
    return e;
}

}  // namespace

TEST_CASE("random flat models build trees") {
    std::mt19937 rng(7);
    const double alpha = 0.3;
    for (int trial = 0; trial < 150; ++trial) {
        auto pts = random_punctures(rng, 1 + trial % 3);
        FlatModel m(alpha, pts, generic_base(pts, alpha));
        int depth = trial % 4;
        for (Family f : {Family::PlusAlpha, Family::MinusAlpha}) {
            auto cx = m.build(f, depth);
            CHECK(is_tree(cx));
            CHECK(count_edges(cx) == static_cast<int>(cx.strips.size()) - 1);
            CHECK(verify_complex(cx).empty());
            CHECK(m.collisions(f, depth) == 0);
        }
    }
}

TEST_CASE("an extra edge breaks the tree invariant") {
    FlatModel m(0.3, {cd(0, 0)}, cd(0.5, 0.25));
    auto cx = m.build(Family::PlusAlpha, 2);
    REQUIRE(is_tree(cx));
    int far = -1;
    for (const auto& s : cx.strips)
        if (s.depth == 2) far = s.id;
    REQUIRE(far >= 0);
    Ray extra = cx.rays[cx.strips[far].parent_ray];
    extra.id = static_cast<int>(cx.rays.size());
    extra.strips[0] = cx.root;
    extra.strips[1] = far;
    cx.rays.push_back(extra);
    cx.strips[cx.root].rays.push_back(extra.id);
    cx.strips[far].rays.push_back(extra.id);
    CHECK_FALSE(is_tree(cx));
    CHECK_FALSE(verify_complex(cx).empty());
}

TEST_CASE("numeric Airy and Weber complexes are trees with consistent deck data") {
    for (const char* V : {"0,1", "-1,0,1"}) {
        auto g = trace_geometry(Polynomial::parse(V), 0.3);
        NumericCover cover(g, cd(-1, 0.3));
        for (int depth = 0; depth <= 4; ++depth) {
            for (Family f : {Family::PlusAlpha, Family::MinusAlpha}) {
                auto cx = cover.build(f, depth);
                CHECK(is_tree(cx));
                CHECK(verify_complex(cx).empty());
                CHECK(cover.deck_roundtrip_residual(cx) < 1e-8);
            }
        }
    }
}

TEST_CASE("located z agrees with the Airy closed form") {
    auto g = trace_geometry(Polynomial::parse("0,1"), 0.3);
    const cd x0(-1, 0.3);
    NumericCover cover(g, x0);
    auto cx = cover.build(Family::PlusAlpha, 4);
    auto at0 = cover.locate(cx, x0);
    CHECK(at0.strip == cx.root);
    CHECK(std::abs(at0.z - cover.z_x0()) < 1e-10);
    for (cd x : {cd(2, 0.5), cd(-0.8, 0.5), cd(0.3, -1.2), cd(-2, -0.4)}) {
        auto loc = cover.locate(cx, x);
        double exact = 2.0 / 3.0 * std::pow(std::abs(x), 1.5);
        CHECK(std::abs(std::abs(loc.z) - exact) < 1e-8);
    }
}

TEST_CASE("located z differences match quadrature along the segment") {
    auto V = Polynomial::parse("-1,0,1");
    auto g = trace_geometry(V, 0.3);
    const cd x0(-1, 0.3);
    NumericCover cover(g, x0);
    auto cx = cover.build(Family::PlusAlpha, 4);
    for (cd x : {cd(-0.8, 0.5), cd(1.5, 0.6), cd(-2.0, 0.2)}) {
        auto loc = cover.locate(cx, x);
        cd integral = action_along_path(V, {{x0, x}, std::sqrt(V(x0))});
        cd dz = loc.z - cover.z_x0();
        CHECK(std::min(std::abs(dz - integral), std::abs(dz + integral)) < 1e-8);
    }
}

TEST_CASE("synthetic description round-trips") {
    FlatModel m(0.3, {cd(0.5, 0.25), cd(-0.75, -0.5)}, cd(0.125, -1.0));
    auto p = m.build(Family::PlusAlpha, 2);
    auto q = m.build(Family::MinusAlpha, 2);
    auto in = load_synthetic(synthetic_json(0.3, m.x0(), &p, &q).dump());
    REQUIRE(in.plus);
    REQUIRE(in.minus);
    for (const auto* pair : {&p, &q}) {
        const StripComplex& a = *pair;
        const StripComplex& b = a.family == Family::PlusAlpha ? *in.plus : *in.minus;
        REQUIRE(a.strips.size() == b.strips.size());
        REQUIRE(a.rays.size() == b.rays.size());
        CHECK(a.root == b.root);
        for (std::size_t k = 0; k < a.rays.size(); ++k) {
            CHECK(a.rays[k].handedness == b.rays[k].handedness);
            CHECK(a.rays[k].strips[0] == b.rays[k].strips[0]);
            CHECK(a.rays[k].strips[1] == b.rays[k].strips[1]);
            CHECK(std::abs(a.rays[k].c_hat - b.rays[k].c_hat) < 1e-12);
        }
        for (std::size_t k = 0; k < a.strips.size(); ++k) {
            CHECK(a.strips[k].depth == b.strips[k].depth);
            CHECK(a.strips[k].band.lo.has_value() == b.strips[k].band.lo.has_value());
            CHECK(a.strips[k].band.hi.has_value() == b.strips[k].band.hi.has_value());
            if (a.strips[k].band.lo) CHECK(std::abs(*a.strips[k].band.lo - *b.strips[k].band.lo) < 1e-12);
        }
    }
}

TEST_CASE("synthetic loader rejects malformed input") {
    CHECK_THROWS_AS(load_synthetic("{"), WkbError);
    CHECK_THROWS_AS(load_synthetic(R"({"alpha": 2.0, "family": "plus", "root": 0, "strips": []})"), WkbError);
    CHECK_THROWS_AS(load_synthetic(R"({"alpha": 0.3, "family": "plus", "root": "a",
        "strips": [{"id": "a", "shape": {"type": "disc"}}]})"),
                    WkbError);
}

TEST_CASE("bounded cells are parallelograms A..C with C - A in K") {
    FlatModel m(0.3, {cd(0, 0), cd(1, 0.5)}, cd(0.25, -0.375));
    auto p = m.build(Family::PlusAlpha, 4);
    auto q = m.build(Family::MinusAlpha, 3);
    auto cells = intersect_complexes(p, q);
    int bounded = 0;
    for (const auto& c : cells.cells) {
        if (!c.bounded()) continue;
        ++bounded;
        CHECK(in_cone(*c.corner_C - *c.corner_A, 0.3));
    }
    CHECK(bounded > 0);
    for (const auto& [Pi, walk] : cells.walk) {
        CHECK_FALSE(walk.empty());
        for (int P : walk) CHECK(cells.find(P, Pi).has_value());
    }
}
