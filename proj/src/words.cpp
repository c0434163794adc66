#include "wkb/words.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wkb {

bool operator<(const Word& a, const Word& b) {
    if (a.family != b.family) return a.family < b.family;
    if (a.letters.size() != b.letters.size()) return a.letters.size() < b.letters.size();
    if (a.letters != b.letters) return a.letters < b.letters;
    return a.terminal < b.terminal;
}

Word Word::prepend(int ray) const {
    Word w = *this;
    w.letters.insert(w.letters.begin(), ray);
    return w;
}

std::string Word::str() const {
    std::ostringstream os;
    for (int l : letters) os << 'r' << l << ' ';
    os << (terminal == Terminal::L ? 'L' : 'R');
    return os.str();
}

Handedness required_handedness(Terminal t, int i) {
    bool odd = i % 2 == 1;
    if (t == Terminal::L) return odd ? Handedness::Right : Handedness::Left;
    return odd ? Handedness::Left : Handedness::Right;
}

void validate_word(const Word& w, const StripComplex& cx) {
    if (w.family != cx.family) throw WkbError(ErrorKind::MalformedWord, "word family differs from the complex");
    int n = w.length();
    for (int i = 1; i <= n; ++i) {
        int ray = w.letters[n - i];
        if (ray < 0 || ray >= static_cast<int>(cx.rays.size()))
            throw WkbError(ErrorKind::MalformedWord, "unknown ray in word " + w.str());
        if (cx.rays[ray].handedness != required_handedness(w.terminal, i))
            throw WkbError(ErrorKind::MalformedWord, "handedness does not alternate in word " + w.str());
    }
}

Sign word_sign(const Word& w, const StripComplex& cx) {
    if (w.letters.empty()) return w.terminal == Terminal::L ? Sign::Plus : Sign::Minus;
    return cx.rays.at(w.letters.front()).handedness == Handedness::Left ? Sign::Plus : Sign::Minus;
}

cd c_hat_word(const Word& w, const StripComplex& cx, cd x0_action) {
    validate_word(w, cx);
    cd apex = w.terminal == Terminal::L ? x0_action : -x0_action;
    for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) {
        const Ray& r = cx.rays[*it];
        apex += (r.handedness == Handedness::Left ? 2.0 : -2.0) * r.c_hat;
    }
    return apex;
}

RegionHandle RegionHandle::cell(const Cell& c) { return {RegionKind::Cell, c.id, c.corner_A, c.corner_C}; }
RegionHandle RegionHandle::strip(int id) { return {RegionKind::Strip, id, std::nullopt, std::nullopt}; }
RegionHandle RegionHandle::ray(const Ray& r) {
    RegionHandle h{RegionKind::Ray, r.id, std::nullopt, std::nullopt};
    // Right-going rays start at their apex (K-minimal); left-going rays end there.
    if (r.handedness == Handedness::Right) h.A = r.c_hat;
    else h.C = r.c_hat;
    return h;
}
RegionHandle RegionHandle::slice(cd z) { return {RegionKind::Slice, -1, z, z}; }
RegionHandle RegionHandle::corners(std::optional<cd> A, std::optional<cd> C, int id) {
    return {RegionKind::Cell, id, A, C};
}

bool cone_inclusion(const ConeSet& inner, const ConeSet& outer, double alpha) {
    if (inner.region.kind == RegionKind::Unsupported || outer.region.kind == RegionKind::Unsupported)
        throw WkbError(ErrorKind::UnsupportedRegion, "cone sets must live on a cell, strip, ray or slice");
    if (inner.delta != DeltaKind::K || outer.delta != DeltaKind::K)
        throw WkbError(ErrorKind::UnsupportedRegion, "inclusion is decided for K-cone sets only");
    const RegionHandle& reg = outer.region;
    double scale = std::abs(inner.apex) + std::abs(outer.apex);
    if (inner.sign == outer.sign) return in_cone(inner.apex - outer.apex, alpha, scale);
    if (inner.sign == Sign::Minus) {
        if (!reg.A) return false;
        return in_cone(2.0 * *reg.A + inner.apex - outer.apex, alpha, scale + 2.0 * std::abs(*reg.A));
    }
    if (!reg.C) return false;
    return in_cone(-2.0 * *reg.C + inner.apex - outer.apex, alpha, scale + 2.0 * std::abs(*reg.C));
}

cd fiber_apex(Sign sign, cd apex, cd z) { return sign == Sign::Plus ? apex - z : apex + z; }

namespace {

void extend_words(const StripComplex& cx, const std::vector<int>& rays, Word& w, int max_len, std::vector<Word>& out) {
    out.push_back(w);
    if (w.length() >= max_len) return;
    Handedness need = required_handedness(w.terminal, w.length() + 1);
    for (int r : rays) {
        if (cx.rays[r].handedness != need) continue;
        w.letters.insert(w.letters.begin(), r);
        extend_words(cx, rays, w, max_len, out);
        w.letters.erase(w.letters.begin());
    }
}

std::vector<int> ray_list(const StripComplex& cx, const std::vector<int>& rays) {
    if (!rays.empty()) return rays;
    std::vector<int> all(cx.rays.size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<int>(k);
    return all;
}

/// Euclidean distance from w to the closed cone K.
double distance_to_cone(cd w, double alpha) {
    if (in_cone(w, alpha)) return 0.0;
    double best = std::abs(w);
    for (double ang : {alpha, -alpha}) {
        cd e = std::polar(1.0, ang);
        double t = std::real(w * std::conj(e));
        if (t > 0) best = std::min(best, std::abs(w - t * e));
    }
    return best;
}

}  // namespace

std::vector<Word> all_words(const StripComplex& cx, int max_len, const std::vector<int>& rays) {
    std::vector<int> rs = ray_list(cx, rays);
    std::vector<Word> out;
    for (Terminal t : {Terminal::L, Terminal::R}) {
        Word w{cx.family, {}, t};
        extend_words(cx, rs, w, max_len, out);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Word> enumerate_small(const StripComplex& cx, cd x0_action, cd s, int depth) {
    double max_shift = 0.0;
    for (const auto& r : cx.rays) max_shift = std::max(max_shift, 2.0 * std::abs(r.c_hat));
    std::vector<Word> out;
    double alpha = cx.alpha;
    // Depth-first growth from the terminal with a reachability bound on the remaining letters.
    struct Frame {
        Word w;
        cd apex;
    };
    std::vector<Frame> stack;
    stack.push_back({{cx.family, {}, Terminal::L}, x0_action});
    stack.push_back({{cx.family, {}, Terminal::R}, -x0_action});
    while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();
        double scale = std::abs(s) + std::abs(f.apex);
        if (in_cone(s - f.apex, alpha, scale)) out.push_back(f.w);
        int remaining = depth - f.w.length();
        if (remaining <= 0) continue;
        if (distance_to_cone(s - f.apex, alpha) > remaining * max_shift + 1e-9 * (1.0 + scale)) continue;
        Handedness need = required_handedness(f.w.terminal, f.w.length() + 1);
        for (const auto& r : cx.rays) {
            if (r.handedness != need) continue;
            cd apex = f.apex + (need == Handedness::Left ? 2.0 : -2.0) * r.c_hat;
            stack.push_back({f.w.prepend(r.id), apex});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

int align_ray(int ell, const StripComplex& minus, const StripComplex& plus, const CellComplex& cells) {
    const Ray& r = minus.rays.at(ell);
    double alpha = plus.alpha;
    KCoords k = to_k(r.c_hat, alpha);
    double tol = 1e-9 * (1.0 + std::abs(k.v));
    for (int Pi : {r.strips[0], r.strips[1]}) {
        if (Pi < 0) continue;
        auto it = cells.walk.find(Pi);
        if (it == cells.walk.end()) continue;
        for (int P : it->second) {
            const Band& b = plus.strips[P].band;
            bool contains_start;
            if (r.handedness == Handedness::Right)
                contains_start = (!b.lo || *b.lo <= k.v + tol) && (!b.hi || *b.hi > k.v + tol);
            else
                contains_start = (!b.lo || *b.lo < k.v - tol) && (!b.hi || *b.hi >= k.v - tol);
            if (!contains_start) continue;
            for (int rid : plus.strips[P].rays) {
                const Ray& cand = plus.rays[rid];
                if (cand.handedness == r.handedness && std::abs(cand.c_hat - r.c_hat) <= 1e-8 * (1.0 + std::abs(r.c_hat)))
                    return rid;
            }
            throw WkbError(ErrorKind::NotCovered, "no alpha-ray with the same apex on the aligned strip");
        }
    }
    throw WkbError(ErrorKind::NotCovered, "the aligned alpha-strip is not in the built complex");
}

std::optional<Word> align_word(const Word& w, const StripComplex& minus, const StripComplex& plus,
                               const CellComplex& cells) {
    Word out{Family::PlusAlpha, {}, w.terminal};
    for (int l : w.letters) {
        try {
            out.letters.push_back(align_ray(l, minus, plus, cells));
        } catch (const WkbError& e) {
            if (e.kind() == ErrorKind::NotCovered) return std::nullopt;
            throw;
        }
    }
    return out;
}

}  // namespace wkb
