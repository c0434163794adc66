#include "wkb/sheafcalc.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <deque>
#include <set>

namespace wkb {

using boost::multiprecision::cpp_rational;

const StripComplex& ComplexWordSpace::complex(const Word& w) const {
    const StripComplex* cx = w.family == Family::PlusAlpha ? plus_ : minus_;
    if (!cx) throw WkbError(ErrorKind::MalformedWord, "no complex for the family of " + w.str());
    return *cx;
}

// ---------------------------------------------------------------------------------------------

BigInt MorphismMatrix::entry(const Word& src, const Word& dst) const {
    auto it = cols.find(src);
    if (it == cols.end()) return 0;
    auto jt = it->second.find(dst);
    return jt == it->second.end() ? BigInt(0) : jt->second;
}

void MorphismMatrix::add(const Word& src, const Word& dst, const BigInt& v) {
    if (v == 0) return;
    Column& col = cols[src];
    BigInt& e = col[dst];
    e += v;
    if (e == 0) {
        col.erase(dst);
        if (col.empty()) cols.erase(src);
    }
}

bool MorphismMatrix::is_zero() const { return cols.empty(); }

std::vector<Word> MorphismMatrix::basis() const {
    std::set<Word> s;
    for (const auto& [src, col] : cols) {
        s.insert(src);
        for (const auto& [dst, v] : col) s.insert(dst);
    }
    return {s.begin(), s.end()};
}

MorphismMatrix MorphismMatrix::identity(const std::vector<Word>& words, const RegionHandle& region) {
    MorphismMatrix m;
    m.region = region;
    for (const auto& w : words) m.add(w, w, 1);
    return m;
}

MorphismMatrix add(const MorphismMatrix& a, const MorphismMatrix& b, int sign_b) {
    if (!(a.region == b.region)) throw WkbError(ErrorKind::RegionMismatch, "matrices live on different regions");
    MorphismMatrix out = a;
    for (const auto& [src, col] : b.cols)
        for (const auto& [dst, v] : col) out.add(src, dst, sign_b * v);
    return out;
}

namespace {

bool entry_supported(const Word& src, const Word& dst, const RegionHandle& region, const WordSpace& space,
                     cd shift = 0.0) {
    ConeSet inner = space.cone(dst, region);
    ConeSet outer = space.cone(src, region);
    outer.apex += shift;
    return cone_inclusion(inner, outer, space.alpha());
}

void add_scaled(Column& acc, const Column& v, const BigInt& c) {
    if (c == 0) return;
    for (const auto& [w, x] : v) {
        BigInt& e = acc[w];
        e += c * x;
        if (e == 0) acc.erase(w);
    }
}

}  // namespace

bool support_ok(const MorphismMatrix& f, const WordSpace& space) {
    for (const auto& [src, col] : f.cols)
        for (const auto& [dst, v] : col)
            if (!entry_supported(src, dst, f.region, space)) return false;
    return true;
}

MorphismMatrix compose(const MorphismMatrix& f, const MorphismMatrix& g, const WordSpace& space) {
    if (!(f.region == g.region)) throw WkbError(ErrorKind::RegionMismatch, "cannot compose across regions");
    MorphismMatrix out;
    out.region = f.region;
    for (const auto& [src, gcol] : g.cols) {
        Column acc;
        for (const auto& [mid, gv] : gcol) {
            auto it = f.cols.find(mid);
            if (it != f.cols.end()) add_scaled(acc, it->second, gv);
        }
        for (const auto& [dst, v] : acc) {
            if (!entry_supported(src, dst, out.region, space))
                throw WkbError(ErrorKind::InvariantFailure,
                               "composite entry " + src.str() + " -> " + dst.str() + " violates the support condition");
            out.add(src, dst, v);
        }
    }
    return out;
}

bool filtration_degree(const MorphismMatrix& f, cd epsilon, const WordSpace& space) {
    for (const auto& [src, col] : f.cols)
        for (const auto& [dst, v] : col)
            if (!entry_supported(src, dst, f.region, space, epsilon)) return false;
    return true;
}

NeumannResult neumann_invert(const MorphismMatrix& m, cd epsilon, int order, const WordSpace& space) {
    std::vector<Word> basis = m.basis();
    MorphismMatrix id = MorphismMatrix::identity(basis, m.region);
    MorphismMatrix n = add(m, id, -1);
    NeumannResult res;
    res.inverse = id;
    MorphismMatrix power = n;
    for (int j = 1; j <= order; ++j) {
        if (res.nilpotency_step == 0 && filtration_degree(power, epsilon, space)) res.nilpotency_step = j;
        res.inverse = add(res.inverse, power, j % 2 == 0 ? 1 : -1);
        if (power.is_zero()) {
            if (res.nilpotency_step == 0) res.nilpotency_step = j;
            break;
        }
        power = compose(n, power, space);
    }
    if (res.nilpotency_step == 0)
        throw WkbError(ErrorKind::NotLocallyNilpotent,
                       "no power of m - Id up to the requested order lies in the shifted filtration");
    MorphismMatrix residual = add(compose(m, res.inverse, space), id, -1);
    int steps = order / res.nilpotency_step;
    res.verified = residual.is_zero() || filtration_degree(residual, epsilon * static_cast<double>(steps), space);
    return res;
}

int kernel_rank(const MorphismMatrix& f) {
    std::vector<Word> rows = f.basis();
    std::vector<Word> srcs;
    for (const auto& [src, col] : f.cols) srcs.push_back(src);
    // Columns with no entries still count as sources only if they appear as targets; the
    // truncated matrix is taken square over its basis.
    std::map<Word, int> ri;
    for (std::size_t k = 0; k < rows.size(); ++k) ri[rows[k]] = static_cast<int>(k);
    std::size_t n = rows.size();
    std::vector<std::vector<cpp_rational>> a(n, std::vector<cpp_rational>(n, 0));
    for (const auto& [src, col] : f.cols)
        for (const auto& [dst, v] : col) a[ri[dst]][ri[src]] = cpp_rational(v);
    std::size_t rank = 0;
    for (std::size_t c = 0; c < n && rank < n; ++c) {
        std::size_t piv = rank;
        while (piv < n && a[piv][c] == 0) ++piv;
        if (piv == n) continue;
        std::swap(a[piv], a[rank]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == rank || a[r][c] == 0) continue;
            cpp_rational k = a[r][c] / a[rank][c];
            for (std::size_t j = c; j < n; ++j) a[r][j] -= k * a[rank][j];
        }
        ++rank;
    }
    return static_cast<int>(n - rank);
}

// ---------------------------------------------------------------------------------------------

std::optional<Word> GluingMap::n_image(const Word& w) const {
    if (w.family != cx->family) return std::nullopt;
    Sign s = word_sign(w, *cx);
    Handedness h = cx->rays[ray].handedness;
    bool acts = (h == Handedness::Left && s == Sign::Minus) || (h == Handedness::Right && s == Sign::Plus);
    if (!acts || w.length() + 1 > max_len) return std::nullopt;
    return w.prepend(ray);
}

Column GluingMap::apply(const Column& v) const {
    Column out = v;
    for (const auto& [w, c] : v) {
        auto img = n_image(w);
        if (!img) continue;
        BigInt& e = out[*img];
        e += theta * c;
        if (e == 0) out.erase(*img);
    }
    return out;
}

MorphismMatrix GluingMap::matrix(const std::vector<Word>& basis, const RegionHandle& region) const {
    MorphismMatrix m;
    m.region = region;
    for (const auto& w : basis) {
        Column col = apply(Column{{w, 1}});
        for (const auto& [dst, c] : col) m.add(w, dst, c);
    }
    return m;
}

int gluing_theta(const StripComplex& cx, int from, int to, int ray) {
    const Ray& r = cx.rays[ray];
    if (!((r.strips[0] == from && r.strips[1] == to) || (r.strips[1] == from && r.strips[0] == to)))
        throw WkbError(ErrorKind::NotAdjacent, "strips do not share the ray");
    bool above = cx.above(to, from, ray);
    if (r.handedness == Handedness::Left) return above ? 1 : -1;
    return above ? -1 : 1;
}

GluingMap gluing_map(const StripComplex& cx, int from, int to, int ray, int max_len) {
    GluingMap g;
    g.ray = ray;
    g.theta = gluing_theta(cx, from, to, ray);
    g.cx = &cx;
    g.max_len = max_len;
    return g;
}

SectionVector root_section(const StripComplex& cx) {
    SectionVector e;
    e.strip = cx.root;
    e.coeffs[Word{cx.family, {}, Terminal::L}] = 1;
    e.coeffs[Word{cx.family, {}, Terminal::R}] = 1;
    return e;
}

SectionVector propagate_section(const SectionVector& e, const GluingMap& across, int target) {
    const Ray& r = across.cx->rays[across.ray];
    bool adjacent = (r.strips[0] == e.strip && r.strips[1] == target) || (r.strips[1] == e.strip && r.strips[0] == target);
    if (!adjacent || target < 0) throw WkbError(ErrorKind::NotAdjacent, "section moved across a ray not between the strips");
    return {target, across.apply(e.coeffs)};
}

std::map<int, SectionVector> compute_sections(const StripComplex& cx, int max_len) {
    std::map<int, SectionVector> out;
    out[cx.root] = root_section(cx);
    std::deque<int> q{cx.root};
    while (!q.empty()) {
        int P = q.front();
        q.pop_front();
        for (int rid : cx.strips[P].rays) {
            int Q = cx.rays[rid].other(P);
            if (Q < 0 || out.count(Q)) continue;
            out[Q] = propagate_section(out[P], gluing_map(cx, P, Q, rid, max_len), Q);
            q.push_back(Q);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------------------------

namespace {

int ray_between(const StripComplex& cx, int a, int b) {
    for (int rid : cx.strips[a].rays)
        if (cx.rays[rid].other(a) == b) return rid;
    return -1;
}

Column truncate(const Column& v, int max_len) {
    Column out;
    for (const auto& [w, c] : v)
        if (w.length() <= max_len) out[w] = c;
    return out;
}

}  // namespace

IPsiPhi::IPsiPhi(const StripComplex& plus, const StripComplex& minus, const CellComplex& cells, cd z_x0, int max_len)
    : plus_(plus), minus_(minus), cells_(cells), space_(&plus, &minus, z_x0), max_len_(max_len) {}

Column IPsiPhi::keep_sign(const Column& v, Sign s) const {
    Column out;
    for (const auto& [w, c] : v)
        if (space_.sign(w) == s) out[w] = c;
    return out;
}

Column IPsiPhi::i_column(int cell, const Word& w) {
    auto key = std::make_pair(cell, w);
    auto it = i_cache_.find(key);
    if (it != i_cache_.end()) return it->second;
    const Cell& c = cells_.cells.at(cell);
    int Pi = c.minus_alpha_strip;
    const std::vector<int>& walk = cells_.walk.at(Pi);
    auto pos = std::find(walk.begin(), walk.end(), c.alpha_strip);
    if (pos == walk.end()) throw WkbError(ErrorKind::NotCovered, "cell strip missing from its walk");
    int k = static_cast<int>(pos - walk.begin());
    if (!cells_.walk_complete.at(Pi)) partial_ = true;
    Column v{{w, 1}};
    if (space_.sign(w) == Sign::Plus) {
        for (int j = 0; j < k; ++j) {
            int rid = ray_between(plus_, walk[j], walk[j + 1]);
            v = gluing_map(plus_, walk[j], walk[j + 1], rid, max_len_).apply(v);
        }
    } else {
        for (int j = static_cast<int>(walk.size()) - 1; j > k; --j) {
            int rid = ray_between(plus_, walk[j], walk[j - 1]);
            v = gluing_map(plus_, walk[j], walk[j - 1], rid, max_len_).apply(v);
        }
    }
    i_cache_[key] = v;
    return v;
}

Column IPsiPhi::i_apply(int cell, const Column& v) {
    Column out;
    for (const auto& [w, c] : v) add_scaled(out, i_column(cell, w), c);
    return out;
}

Column IPsiPhi::i_inverse_apply(int cell, const Column& v) {
    // i = Id + n with n strictly lengthening, so the Neumann series terminates at the truncation.
    Column result = v;
    Column term = v;
    for (int iter = 0; iter <= max_len_ + 1 && !term.empty(); ++iter) {
        Column nt = i_apply(cell, term);
        add_scaled(nt, term, -1);
        term.clear();
        add_scaled(term, nt, -1);
        add_scaled(result, term, 1);
    }
    return truncate(result, max_len_);
}

std::vector<int> IPsiPhi::strips_meeting(int ray) {
    const Ray& r = minus_.rays[ray];
    KCoords k = to_k(r.c_hat, minus_.alpha);
    std::vector<int> out;
    for (int P : cells_.walk.at(r.strips[0])) {
        if (!cells_.find(P, r.strips[1])) continue;
        const Band& b = plus_.strips[P].band;
        bool meets = r.handedness == Handedness::Right ? (!b.hi || *b.hi > k.v + 1e-12) : (!b.lo || *b.lo < k.v - 1e-12);
        if (meets) out.push_back(P);
    }
    return out;
}

Column IPsiPhi::transfer(int from, int to, int ray, const Column& v) {
    std::vector<int> Ps = strips_meeting(ray);
    if (Ps.empty()) throw WkbError(ErrorKind::NotCovered, "no alpha-strip meets the -alpha ray");
    std::optional<Column> first;
    for (int P : Ps) {
        int c_from = *cells_.find(P, from);
        int c_to = *cells_.find(P, to);
        Column r = i_inverse_apply(c_to, i_apply(c_from, v));
        if (!first) {
            first = r;
        } else if (r != *first) {
            ++transfer_mismatches_;
        }
    }
    return *first;
}

std::vector<int> IPsiPhi::path_between(int a, int b) const {
    // Paths to the root, then splice at the lowest common strip.
    auto to_root = [&](int s) {
        std::vector<int> p{s};
        while (minus_.strips[s].parent_ray >= 0) {
            s = minus_.rays[minus_.strips[s].parent_ray].other(s);
            p.push_back(s);
        }
        return p;
    };
    std::vector<int> pa = to_root(a), pb = to_root(b);
    while (pa.size() > 1 && pb.size() > 1 && pa[pa.size() - 2] == pb[pb.size() - 2]) {
        pa.pop_back();
        pb.pop_back();
    }
    std::vector<int> path = pa;
    for (int k = static_cast<int>(pb.size()) - 2; k >= 0; --k) path.push_back(pb[k]);
    return path;
}

Column IPsiPhi::u_column(int Pi, const Word& w) {
    auto key = std::make_pair(Pi, w);
    auto it = u_cache_.find(key);
    if (it != u_cache_.end()) return it->second;
    Sign s = space_.sign(w);
    int start = minus_.root;
    Column base;
    if (w.length() == 0) {
        int cell = *cells_.find(plus_.root, minus_.root);
        Column el = i_inverse_apply(cell, {{Word{Family::PlusAlpha, {}, Terminal::L}, 1}});
        Column er = i_inverse_apply(cell, {{Word{Family::PlusAlpha, {}, Terminal::R}, 1}});
        add_scaled(base, keep_sign(el, s), 1);
        add_scaled(base, keep_sign(er, s), 1);
    } else {
        int ell = w.letters.front();
        Word tail = w;
        tail.letters.erase(tail.letters.begin());
        const Ray& r = minus_.rays[ell];
        if (r.frontier()) throw WkbError(ErrorKind::DepthExhausted, "word letter on a frontier ray");
        int a = r.strips[0], b = r.strips[1];
        int P1 = minus_.strips[a].depth <= minus_.strips[b].depth ? a : b;
        int P2 = r.other(P1);
        Sign ts = space_.sign(tail);
        Sign other = ts == Sign::Plus ? Sign::Minus : Sign::Plus;
        Column u = u_column(P1, tail);
        Column step = keep_sign(transfer(P1, P2, ell, u), other);
        step = keep_sign(transfer(P2, P1, ell, step), other);
        int theta = gluing_theta(minus_, P2, P1, ell);
        add_scaled(base, step, -theta);
        start = P1;
    }
    base = truncate(base, max_len_);
    std::vector<int> path = path_between(start, Pi);
    Column cur = base;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        int rid = ray_between(minus_, path[k], path[k + 1]);
        cur = keep_sign(transfer(path[k], path[k + 1], rid, cur), s);
        u_cache_[{path[k + 1], w}] = cur;
    }
    u_cache_[{start, w}] = base;
    return u_cache_.at(key);
}

Column IPsiPhi::j_column(int cell, const Word& w) {
    const Cell& c = cells_.cells.at(cell);
    return truncate(i_apply(cell, u_column(c.minus_alpha_strip, w)), max_len_);
}

MorphismMatrix IPsiPhi::j_matrix(int cell, const std::vector<Word>& minus_words) {
    MorphismMatrix m;
    m.region = RegionHandle::cell(cells_.cells.at(cell));
    for (const auto& w : minus_words)
        for (const auto& [dst, v] : j_column(cell, w)) m.add(w, dst, v);
    return m;
}

IpipReport check_ipip(IPsiPhi& ip, const CellComplex& cells, const std::vector<Word>& minus_words) {
    IpipReport rep;
    const WordSpace& space = ip.space();
    for (const Cell& c : cells.cells) {
        if (!cells.walk_complete.at(c.minus_alpha_strip)) {
            rep.partial = true;
            continue;
        }
        ++rep.cells_checked;
        RegionHandle region = RegionHandle::cell(c);
        for (const Word& w : minus_words) {
            auto aw = align_word(w, *cells.minus, *cells.plus, cells);
            if (!aw) {
                ++rep.uncovered;
                continue;
            }
            Column col;
            try {
                col = ip.j_column(c.id, w);
            } catch (const WkbError& e) {
                if (e.kind() != ErrorKind::DepthExhausted && e.kind() != ErrorKind::NotCovered) throw;
                ++rep.uncovered;
                continue;
            }
            ++rep.words_checked;
            BigInt expect = w.length() % 2 == 0 ? 1 : -1;
            auto it = col.find(*aw);
            BigInt got = it == col.end() ? BigInt(0) : it->second;
            if (got != expect) ++rep.diagonal_failures;
            if (got != 1) ++rep.diagonal_not_unit;
            for (const auto& [dst, v] : col) {
                if (dst == *aw) continue;
                ConeSet inner = space.cone(dst, region);
                ConeSet outer = space.cone(w, region);
                bool incl = cone_inclusion(inner, outer, space.alpha());
                bool back = cone_inclusion(outer, inner, space.alpha());
                if (!incl || back) ++rep.strictness_failures;
            }
        }
    }
    rep.transfer_mismatches = ip.transfer_mismatches();
    rep.partial = rep.partial || ip.partial();
    return rep;
}

}  // namespace wkb
