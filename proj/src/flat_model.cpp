#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include "wkb/cover.hpp"

namespace wkb {

namespace {

// Offsets chosen to keep representative points off the vertical cuts of dyadic punctures.
constexpr double kAlongOffset = 0.318309886183791;
constexpr double kRayOffset = 1.0;

using FreeWord = std::vector<int>;

void append_letter(FreeWord& w, int letter) {
    if (!w.empty() && w.back() == -letter) w.pop_back();
    else w.push_back(letter);
}

/// Signed crossings of the segment a->b with the downward vertical cuts below the punctures.
void append_crossings(FreeWord& w, cd a, cd b, const std::vector<cd>& punctures) {
    struct Hit {
        double t;
        int letter;
        double height;
    };
    std::vector<Hit> hits;
    for (int j = 0; j < static_cast<int>(punctures.size()); ++j) {
        double x = punctures[j].real();
        double da = a.real() - x, db = b.real() - x;
        if ((da < 0) == (db < 0)) continue;
        double t = da / (da - db);
        double y = a.imag() + t * (b.imag() - a.imag());
        if (y >= punctures[j].imag()) continue;
        hits.push_back({t, db > 0 ? j + 1 : -(j + 1), punctures[j].imag()});
    }
    // Punctures with equal real parts have overlapping cuts. Order simultaneous crossings as if
    // each cut were shifted right by an infinitesimal amount proportional to its height.
    bool rightwards = b.real() > a.real();
    std::sort(hits.begin(), hits.end(), [&](const Hit& p, const Hit& q) {
        if (std::abs(p.t - q.t) > 1e-12) return p.t < q.t;
        return rightwards ? p.height < q.height : p.height > q.height;
    });
    for (const auto& h : hits) append_letter(w, h.letter);
}

struct FlatFaces {
    std::vector<int> order;      // puncture indices sorted by transverse coordinate
    std::vector<double> levels;  // sorted transverse coordinates
    int face_of(double t) const {
        return static_cast<int>(std::upper_bound(levels.begin(), levels.end(), t) - levels.begin());
    }
    Band band(int face) const {
        Band b;
        if (face > 0) b.lo = levels[face - 1];
        if (face < static_cast<int>(levels.size())) b.hi = levels[face];
        return b;
    }
    double representative_t(int face) const {
        int m = static_cast<int>(levels.size());
        if (m == 0) return 0.0;
        double span = m > 1 ? (levels.back() - levels.front()) : 1.0;
        if (face == 0) return levels.front() - 0.5 * span;
        if (face == m) return levels.back() + 0.5 * span;
        return 0.5 * (levels[face - 1] + levels[face]);
    }
};

}  // namespace

FlatModel::FlatModel(double alpha, std::vector<cd> punctures, cd x0)
    : alpha_(alpha), punctures_(std::move(punctures)), x0_(x0) {}

StripComplex FlatModel::build(Family f, int depth) const { return build_impl(f, depth, nullptr); }

int FlatModel::collisions(Family f, int depth) const {
    int c = 0;
    build_impl(f, depth, &c);
    return c;
}

StripComplex FlatModel::build_impl(Family f, int depth, int* collisions) const {
    StripComplex cx;
    cx.family = f;
    cx.alpha = alpha_;
    cx.depth = depth;
    cx.z_x0 = x0_;
    FlatFaces faces;
    int m = static_cast<int>(punctures_.size());
    faces.order.resize(m);
    for (int j = 0; j < m; ++j) faces.order[j] = j;
    std::sort(faces.order.begin(), faces.order.end(), [&](int a, int b) {
        return cx.transverse(punctures_[a]) < cx.transverse(punctures_[b]);
    });
    for (int j : faces.order) faces.levels.push_back(cx.transverse(punctures_[j]));
    for (int k = 1; k < m; ++k)
        if (faces.levels[k] - faces.levels[k - 1] <= 1e-12)
            throw WkbError(ErrorKind::DegenerateInput, "punctures share a line of the family");
    std::vector<int> rank(m);
    for (int k = 0; k < m; ++k) rank[faces.order[k]] = k;

    double theta = family_angle(f, alpha_);
    cd dir = std::polar(1.0, theta);
    auto rep_point = [&](int face) {
        double t = faces.representative_t(face);
        KCoords k = f == Family::PlusAlpha ? KCoords{kAlongOffset, t} : KCoords{t, kAlongOffset};
        return from_k(k, alpha_);
    };

    std::map<std::pair<int, FreeWord>, int> seen;
    Strip root;
    root.id = 0;
    root.family = f;
    root.region = faces.face_of(cx.transverse(x0_));
    root.band = faces.band(root.region);
    cx.strips.push_back(root);
    std::vector<FreeWord> classes{FreeWord{}};
    seen[{root.region, FreeWord{}}] = 0;
    std::deque<int> queue{0};
    while (!queue.empty()) {
        int sid = queue.front();
        queue.pop_front();
        const Strip cur = cx.strips[sid];
        int parent_local = cur.parent_ray >= 0 ? cx.rays[cur.parent_ray].curve : -1;
        for (int j = 0; j < m; ++j) {
            int r = rank[j];
            int other;
            if (cur.region == r) other = r + 1;
            else if (cur.region == r + 1) other = r;
            else continue;
            for (int d = 0; d < 2; ++d) {
                int local = 2 * j + d;
                if (local == parent_local) continue;
                Ray ray;
                ray.id = static_cast<int>(cx.rays.size());
                ray.family = f;
                ray.c_hat = punctures_[j];
                ray.handedness = d == 0 ? Handedness::Right : Handedness::Left;
                ray.curve = local;
                ray.tp = j;
                ray.strips[0] = sid;
                cx.strips[sid].rays.push_back(ray.id);
                if (cur.depth < depth) {
                    cd mid = punctures_[j] + (d == 0 ? kRayOffset : -kRayOffset) * dir;
                    FreeWord w = classes[sid];
                    append_crossings(w, rep_point(cur.region), mid, punctures_);
                    append_crossings(w, mid, rep_point(other), punctures_);
                    auto key = std::make_pair(other, w);
                    if (seen.count(key)) {
                        if (collisions) ++*collisions;
                        ray.strips[1] = seen[key];
                        cx.strips[seen[key]].rays.push_back(ray.id);
                    } else {
                        Strip child;
                        child.id = static_cast<int>(cx.strips.size());
                        child.family = f;
                        child.region = other;
                        child.depth = cur.depth + 1;
                        child.parent_ray = ray.id;
                        child.deck_word = cur.deck_word;
                        child.deck_word.push_back(local);
                        child.band = faces.band(other);
                        child.rays.push_back(ray.id);
                        ray.strips[1] = child.id;
                        seen[key] = child.id;
                        classes.push_back(w);
                        cx.strips.push_back(child);
                        queue.push_back(child.id);
                    }
                }
                cx.rays.push_back(ray);
            }
        }
    }
    return cx;
}

NumericCover::Located FlatModel::locate(const StripComplex& cx, cd x) const {
    struct Hit {
        double t;
        int local;
    };
    std::vector<Hit> hits;
    double ta = cx.transverse(x0_), tb = cx.transverse(x);
    for (int j = 0; j < static_cast<int>(punctures_.size()); ++j) {
        double tj = cx.transverse(punctures_[j]);
        if ((ta < tj) == (tb < tj)) continue;
        double t = (tj - ta) / (tb - ta);
        cd y = x0_ + t * (x - x0_);
        hits.push_back({t, 2 * j + (cx.along(y) > cx.along(punctures_[j]) ? 0 : 1)});
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.t < b.t; });
    NumericCover::Located out;
    out.strip = cx.root;
    out.z = x;
    for (const auto& h : hits) {
        int next = -1;
        for (int rid : cx.strips[out.strip].rays)
            if (cx.rays[rid].curve == h.local) next = cx.rays[rid].other(out.strip);
        if (next < 0) throw WkbError(ErrorKind::DepthExhausted, "evaluation point lies beyond the built complex");
        out.strip = next;
    }
    return out;
}

}  // namespace wkb
