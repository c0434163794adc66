#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "wkb/cover.hpp"

namespace wkb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Positive-length overlap of (a0, a1) with the band.
bool overlaps(double a0, double a1, const Band& b) {
    double lo = std::max(a0, b.lo.value_or(-kInf));
    double hi = std::min(a1, b.hi.value_or(kInf));
    double scale = 1.0 + std::min(std::abs(lo), std::abs(hi));
    return hi - lo > 1e-12 * (std::isfinite(scale) ? scale : 1.0);
}

}  // namespace

CellComplex intersect_complexes(const StripComplex& plus, const StripComplex& minus) {
    CellComplex cc;
    cc.plus = &plus;
    cc.minus = &minus;
    double alpha = plus.alpha;
    std::map<int, bool> blocked;
    auto add = [&](int P, int Pi, std::deque<std::pair<int, int>>& q) {
        if (cc.index.count({P, Pi})) return;
        Cell c;
        c.id = static_cast<int>(cc.cells.size());
        c.alpha_strip = P;
        c.minus_alpha_strip = Pi;
        const Band& pb = plus.strips[P].band;    // v-band
        const Band& mb = minus.strips[Pi].band;  // u-band
        c.u_lo = mb.lo;
        c.u_hi = mb.hi;
        c.v_lo = pb.lo;
        c.v_hi = pb.hi;
        if (c.u_lo && c.v_lo) c.corner_A = from_k({*c.u_lo, *c.v_lo}, alpha);
        if (c.u_hi && c.v_hi) c.corner_C = from_k({*c.u_hi, *c.v_hi}, alpha);
        if (c.corner_A && c.corner_C) c.epsilon = *c.corner_C - *c.corner_A;
        for (auto u : {c.u_lo, c.u_hi})
            for (auto v : {c.v_lo, c.v_hi})
                if (u && v) c.vertices.push_back(from_k({*u, *v}, alpha));
        cc.index[{P, Pi}] = c.id;
        cc.cells.push_back(c);
        q.push_back({P, Pi});
    };
    std::deque<std::pair<int, int>> q;
    add(plus.root, minus.root, q);
    while (!q.empty()) {
        auto [P, Pi] = q.front();
        q.pop_front();
        const Band& pb = plus.strips[P].band;
        const Band& mb = minus.strips[Pi].band;
        for (int rid : plus.strips[P].rays) {
            const Ray& r = plus.rays[rid];
            KCoords k = to_k(r.c_hat, alpha);
            bool meets = r.handedness == Handedness::Right ? overlaps(k.u, kInf, mb) : overlaps(-kInf, k.u, mb);
            if (!meets) continue;
            int other = r.other(P);
            if (other < 0) {
                blocked[Pi] = true;
                continue;
            }
            add(other, Pi, q);
        }
        for (int rid : minus.strips[Pi].rays) {
            const Ray& r = minus.rays[rid];
            KCoords k = to_k(r.c_hat, alpha);
            bool meets = r.handedness == Handedness::Right ? overlaps(k.v, kInf, pb) : overlaps(-kInf, k.v, pb);
            if (!meets) continue;
            int other = r.other(Pi);
            if (other < 0) continue;
            add(P, other, q);
        }
    }
    for (const auto& c : cc.cells) cc.walk[c.minus_alpha_strip].push_back(c.alpha_strip);
    for (auto& [Pi, ps] : cc.walk) {
        std::sort(ps.begin(), ps.end(), [&](int a, int b) {
            double la = plus.strips[a].band.lo.value_or(-kInf), lb = plus.strips[b].band.lo.value_or(-kInf);
            return la < lb;
        });
        bool ok = !blocked[Pi] && !plus.strips[ps.front()].band.lo && !plus.strips[ps.back()].band.hi;
        for (std::size_t k = 0; k + 1 < ps.size() && ok; ++k) {
            const auto& hi = plus.strips[ps[k]].band.hi;
            const auto& lo = plus.strips[ps[k + 1]].band.lo;
            if (!hi || !lo || std::abs(*hi - *lo) > 1e-9 * (1.0 + std::abs(*hi))) ok = false;
        }
        cc.walk_complete[Pi] = ok;
    }
    return cc;
}

}  // namespace wkb
