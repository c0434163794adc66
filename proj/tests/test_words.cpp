#include "doctest.h"

#include <algorithm>
#include <random>

#include "wkb/words.hpp"

using namespace wkb;

namespace {

/// Independent cone membership: |arg w| <= alpha, with a small absolute slack.
bool oracle_in_cone(cd w, double alpha, double slack = 1e-9) {
    if (std::abs(w) <= slack) return true;
    return std::abs(std::arg(w)) <= alpha + 1e-9;
}

/// Samples z on an n x n grid over the closed cell A..C and checks fiber inclusion pointwise.
bool grid_inclusion(Sign si, cd ai, Sign so, cd ao, cd A, cd C, double alpha, int n) {
    KCoords a = to_k(A, alpha), c = to_k(C, alpha);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double u = a.u + (c.u - a.u) * i / (n - 1);
            double v = a.v + (c.v - a.v) * j / (n - 1);
            cd z = from_k({u, v}, alpha);
            if (!oracle_in_cone(fiber_apex(si, ai, z) - fiber_apex(so, ao, z), alpha)) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("word apexes and signs") {
    FlatModel m(0.3, {cd(0.5, 0.25)}, cd(-0.5, -0.75));
    auto cx = m.build(Family::PlusAlpha, 2);
    cd z0 = m.x0();
    Word L{cx.family, {}, Terminal::L}, R{cx.family, {}, Terminal::R};
    CHECK(c_hat_word(L, cx, z0) == z0);
    CHECK(c_hat_word(R, cx, z0) == -z0);
    CHECK(word_sign(L, cx) == Sign::Plus);
    CHECK(word_sign(R, cx) == Sign::Minus);
    int left = -1, right = -1;
    for (const auto& r : cx.rays) (r.handedness == Handedness::Left ? left : right) = r.id;
    REQUIRE(left >= 0);
    REQUIRE(right >= 0);
    // l2 l1 L with l1 right-going and l2 left-going.
    Word w{cx.family, {left, right}, Terminal::L};
    cd expect = z0 - 2.0 * cx.rays[right].c_hat + 2.0 * cx.rays[left].c_hat;
    CHECK(std::abs(c_hat_word(w, cx, z0) - expect) < 1e-14);
    CHECK(word_sign(w, cx) == Sign::Plus);
    CHECK(word_sign(Word{cx.family, {right}, Terminal::L}, cx) == Sign::Minus);
    CHECK_THROWS_AS(validate_word(Word{cx.family, {left}, Terminal::L}, cx), WkbError);
    CHECK_THROWS_AS(validate_word(Word{cx.family, {right, right}, Terminal::L}, cx), WkbError);
    CHECK_NOTHROW(validate_word(w, cx));
}

TEST_CASE("every enumerated word alternates") {
    FlatModel m(0.3, {cd(0, 0), cd(1, 0.5)}, cd(0.25, -0.375));
    auto cx = m.build(Family::MinusAlpha, 3);
    auto words = all_words(cx, 3);
    CHECK(std::is_sorted(words.begin(), words.end()));
    for (const auto& w : words) CHECK_NOTHROW(validate_word(w, cx));
}

TEST_CASE("enumerate_small agrees with brute-force filtering") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> d(-4, 4);
    FlatModel m(0.3, {cd(0, 0), cd(1, 0.5), cd(-0.5, -1)}, cd(0.25, -0.375));
    auto cx = m.build(Family::PlusAlpha, 3);
    auto all = all_words(cx, 3);
    for (int trial = 0; trial < 50; ++trial) {
        cd s(d(rng), d(rng));
        std::vector<Word> brute;
        for (const auto& w : all)
            if (oracle_in_cone(s - c_hat_word(w, cx, m.x0()), 0.3)) brute.push_back(w);
        std::sort(brute.begin(), brute.end());
        CHECK(enumerate_small(cx, m.x0(), s, 3) == brute);
    }
}

TEST_CASE("cone inclusion agrees with grid sampling over bounded cells") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> d(-2, 2), w(0.1, 1.5);
    const double alpha = 0.4;
    int disagreements = 0, included = 0;
    for (int trial = 0; trial < 300; ++trial) {
        cd A(d(rng), d(rng));
        cd C = A + from_k({w(rng), w(rng)}, alpha);
        Sign si = rng() % 2 ? Sign::Plus : Sign::Minus;
        Sign so = rng() % 2 ? Sign::Plus : Sign::Minus;
        cd ao(d(rng), d(rng));
        cd ai = ao + cd(d(rng), d(rng)) * 0.5 + (rng() % 2 ? from_k({w(rng), w(rng)}, alpha) : cd(0));
        RegionHandle reg = RegionHandle::corners(A, C);
        bool fast = cone_inclusion({si, ai, DeltaKind::K, reg}, {so, ao, DeltaKind::K, reg}, alpha);
        bool slow = grid_inclusion(si, ai, so, ao, A, C, alpha, 40);
        disagreements += fast != slow;
        included += fast;
    }
    CHECK(disagreements == 0);
    CHECK(included > 0);
}

TEST_CASE("mixed signs over a region missing the needed corner are never included") {
    RegionHandle upper = RegionHandle::corners(cd(0, 0), std::nullopt);
    RegionHandle lower = RegionHandle::corners(std::nullopt, cd(0, 0));
    ConeSet plus{Sign::Plus, cd(0, 0), DeltaKind::K, lower}, minus{Sign::Minus, cd(-5, 0), DeltaKind::K, lower};
    CHECK_FALSE(cone_inclusion(minus, plus, 0.3));
    plus.region = minus.region = upper;
    CHECK_FALSE(cone_inclusion(plus, minus, 0.3));
}

TEST_CASE("inclusion is a partial order on same-sign cone sets") {
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> c(-6, 6);
    const double alpha = 0.5;
    RegionHandle reg = RegionHandle::corners(cd(0, 0), cd(1, 0));
    std::vector<ConeSet> sets;
    for (int k = 0; k < 30; ++k) sets.push_back({Sign::Plus, cd(c(rng) / 2.0, c(rng) / 4.0), DeltaKind::K, reg});
    auto inc = [&](const ConeSet& a, const ConeSet& b) { return cone_inclusion(a, b, alpha); };
    for (const auto& a : sets) {
        CHECK(inc(a, a));
        for (const auto& b : sets) {
            if (inc(a, b) && inc(b, a)) CHECK(a.apex == b.apex);
            for (const auto& e : sets)
                if (inc(a, b) && inc(b, e)) CHECK(inc(a, e));
        }
    }
}

TEST_CASE("aligned words have equal apexes and signs") {
    FlatModel m(0.3, {cd(0, 0), cd(1, 0.5)}, cd(0.25, -0.375));
    auto plus = m.build(Family::PlusAlpha, 6);
    auto minus = m.build(Family::MinusAlpha, 2);
    auto cells = intersect_complexes(plus, minus);
    int aligned = 0;
    for (const auto& w : all_words(minus, 2)) {
        auto a = align_word(w, minus, plus, cells);
        if (!a) continue;
        ++aligned;
        CHECK(a->family == Family::PlusAlpha);
        CHECK(std::abs(c_hat_word(*a, plus, m.x0()) - c_hat_word(w, minus, m.x0())) < 1e-12);
        CHECK(word_sign(*a, plus) == word_sign(w, minus));
    }
    CHECK(aligned > 10);
}
