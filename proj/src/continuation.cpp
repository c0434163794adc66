#include "wkb/continuation.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <set>

namespace wkb {

namespace {

constexpr int kExtraAlphaDepth = 12;

bool all_walks_complete(const CellComplex& cc) {
    for (const auto& [Pi, ok] : cc.walk_complete)
        if (!ok) return false;
    return true;
}

template <class Build>
void grow_until_complete(Pipeline& p, Build build_plus) {
    int d = std::max(p.depth, 1) + 2;
    for (;; ++d) {
        p.plus = build_plus(d);
        p.cells = intersect_complexes(p.plus, p.minus);
        if (all_walks_complete(p.cells) || d >= p.depth + kExtraAlphaDepth) break;
    }
    if (!all_walks_complete(p.cells)) p.caveats.push_back("some -alpha strips have incomplete alpha walks");
}

void locate_cell(Pipeline& p) {
    auto c = p.cells.find(p.P_eval, p.Pi_eval);
    if (!c) throw WkbError(ErrorKind::NotCovered, "evaluation point lies in no built cell");
    p.cell_eval = *c;
}

}  // namespace

bool Parallelogram::contains(cd s) const {
    KCoords k = to_k(s, alpha);
    return std::abs(k.u - center.u) < radius && std::abs(k.v - center.v) < radius;
}

bool Parallelogram::hit_by_cut(cd d) const {
    KCoords k = to_k(d, alpha);
    return std::abs(k.u - center.u) < radius && k.v < center.v + radius;
}

Parallelogram Parallelogram::shrink_about_A(double ratio) const {
    Parallelogram out = *this;
    out.radius = radius * ratio;
    out.center = {center.u - radius + out.radius, center.v - radius + out.radius};
    return out;
}

std::shared_ptr<Pipeline> make_pipeline(const NumericCover& cover, cd x_eval, int depth) {
    auto p = std::make_shared<Pipeline>();
    p->alpha = cover.geometry().alpha;
    p->depth = depth;
    p->z_x0 = cover.z_x0();
    NumericCover::Located lm;
    for (int d = depth + 1;; ++d) {
        p->minus = cover.build(Family::MinusAlpha, d);
        try {
            lm = cover.locate(p->minus, x_eval);
            break;
        } catch (const WkbError& e) {
            if (e.kind() != ErrorKind::DepthExhausted || d >= depth + kExtraAlphaDepth) throw;
        }
    }
    grow_until_complete(*p, [&](int d) { return cover.build(Family::PlusAlpha, d); });
    auto lp = cover.locate(p->plus, x_eval);
    p->P_eval = lp.strip;
    p->Pi_eval = lm.strip;
    p->z_eval = lp.z;
    if (p->plus.strips[lp.strip].depth > depth)
        p->caveats.push_back("evaluation strip lies beyond the requested depth; section words are truncated");
    locate_cell(*p);
    return p;
}

std::shared_ptr<Pipeline> make_pipeline(const FlatModel& model, cd x_eval, int depth) {
    auto p = std::make_shared<Pipeline>();
    p->alpha = model.alpha();
    p->depth = depth;
    p->z_x0 = model.x0();
    NumericCover::Located lm;
    for (int d = depth + 1;; ++d) {
        p->minus = model.build(Family::MinusAlpha, d);
        try {
            lm = model.locate(p->minus, x_eval);
            break;
        } catch (const WkbError& e) {
            if (e.kind() != ErrorKind::DepthExhausted || d >= depth + kExtraAlphaDepth) throw;
        }
    }
    grow_until_complete(*p, [&](int d) { return model.build(Family::PlusAlpha, d); });
    auto lp = model.locate(p->plus, x_eval);
    p->P_eval = lp.strip;
    p->Pi_eval = lm.strip;
    p->z_eval = lp.z;
    if (p->plus.strips[lp.strip].depth > depth)
        p->caveats.push_back("evaluation strip lies beyond the requested depth; section words are truncated");
    locate_cell(*p);
    return p;
}

std::shared_ptr<Pipeline> make_pipeline(const SyntheticInput& input, int depth) {
    if (!input.plus || !input.minus)
        throw WkbError(ErrorKind::DegenerateInput, "singularities need both families in the synthetic input");
    auto p = std::make_shared<Pipeline>();
    p->alpha = input.alpha;
    p->depth = depth;
    p->z_x0 = input.z_x0;
    p->z_eval = input.z_x0;
    p->plus = *input.plus;
    p->minus = *input.minus;
    p->cells = intersect_complexes(p->plus, p->minus);
    if (!all_walks_complete(p->cells)) p->caveats.push_back("some -alpha strips have incomplete alpha walks");
    p->P_eval = p->plus.root;
    p->Pi_eval = p->minus.root;
    locate_cell(*p);
    return p;
}

std::vector<RemovedRay> compute_U_set(const StripComplex& plus, const std::map<int, SectionVector>& sections, int P,
                                      cd z, cd z_x0) {
    std::vector<RemovedRay> out;
    auto it = sections.find(P);
    if (it == sections.end()) return out;
    for (const auto& [w, c] : it->second.coeffs)
        out.push_back({fiber_apex(word_sign(w, plus), c_hat_word(w, plus, z_x0), z), w});
    return out;
}

int ContinuationReport::count_below(cd s) const {
    std::vector<KCoords> ks;
    ks.reserve(singular_apexes.size());
    for (const auto& a : singular_apexes) ks.push_back(to_k(a.point, alpha));
    std::sort(ks.begin(), ks.end(), [](const KCoords& a, const KCoords& b) { return a.u < b.u; });
    KCoords q = to_k(s, alpha);
    double tol = 1e-12 * (1.0 + std::abs(s));
    int n = 0;
    for (const auto& k : ks) {
        if (k.u > q.u + tol) break;
        if (k.v <= q.v + tol) ++n;
    }
    return n;
}

namespace {

/// Apex of a word built letter by letter from its terminal, memoized on the tail.
class ApexRecursion {
public:
    ApexRecursion(const StripComplex& cx, cd z_x0) : cx_(cx), z_x0_(z_x0) {}
    cd operator()(const Word& w) {
        auto it = memo_.find(w);
        if (it != memo_.end()) return it->second;
        cd a;
        if (w.letters.empty()) {
            a = w.terminal == Terminal::L ? z_x0_ : -z_x0_;
        } else {
            Word tail = w;
            tail.letters.erase(tail.letters.begin());
            const Ray& r = cx_.rays[w.letters.front()];
            a = (*this)(tail) + (r.handedness == Handedness::Left ? 2.0 * r.c_hat : -2.0 * r.c_hat);
        }
        memo_[w] = a;
        return a;
    }

private:
    const StripComplex& cx_;
    cd z_x0_;
    std::map<Word, cd> memo_;
};

std::optional<Word> align_inverse(const Word& w, const std::map<int, int>& inv) {
    Word out{Family::MinusAlpha, {}, w.terminal};
    for (int l : w.letters) {
        auto it = inv.find(l);
        if (it == inv.end()) return std::nullopt;
        out.letters.push_back(it->second);
    }
    return out;
}

}  // namespace

namespace {
bool cuts_leave_connected(const Parallelogram& U, const std::vector<cd>& apexes, double alpha, int n);
}  // namespace

ContinuationReport compute_singularities(Pipeline& p, const ContinuationOptions& opt) {
    ContinuationReport rep;
    rep.alpha = p.alpha;
    rep.fiber_point = p.z_eval;
    rep.depth = p.depth;
    rep.caveats = p.caveats;
    rep.partial = !p.caveats.empty();

    auto sections = compute_sections(p.plus, p.depth);
    for (const auto& [w, c] : sections.at(p.P_eval).coeffs) rep.section_support.push_back(w);

    // Inverse of the letterwise alignment of -alpha rays with alpha rays.
    std::map<int, int> inv;
    for (const Ray& r : p.minus.rays) {
        try {
            int a = align_ray(r.id, p.minus, p.plus, p.cells);
            inv.emplace(a, r.id);
        } catch (const WkbError& e) {
            if (e.kind() != ErrorKind::NotCovered) throw;
        }
    }

    ApexRecursion apex(p.plus, p.z_x0);
    auto d_of = [&](const Word& w) { return fiber_apex(word_sign(w, p.plus), apex(w), p.z_eval); };

    IPsiPhi ip(p.plus, p.minus, p.cells, p.z_x0, p.depth);
    std::map<Word, Column> jcols;
    for (const Word& w : rep.section_support) {
        auto wt = align_inverse(w, inv);
        if (!wt) {
            rep.partial = true;
            rep.caveats.push_back("no -alpha preimage for " + w.str());
            continue;
        }
        try {
            jcols[w] = ip.j_column(p.cell_eval, *wt);
        } catch (const WkbError& e) {
            if (e.kind() != ErrorKind::DepthExhausted && e.kind() != ErrorKind::NotCovered) throw;
            rep.partial = true;
            rep.caveats.push_back(std::string("matrix column unavailable for ") + w.str() + ": " + e.what());
        }
    }
    if (ip.partial()) rep.partial = true;

    // Candidate cuts: every word that can enter the singular set.
    std::set<Word> candidates(rep.section_support.begin(), rep.section_support.end());
    for (const auto& [w, col] : jcols)
        for (const auto& [dst, v] : col) candidates.insert(dst);
    std::vector<KCoords> cuts;
    std::vector<cd> cut_points;
    for (const Word& w : candidates) {
        cut_points.push_back(d_of(w));
        cuts.push_back(to_k(cut_points.back(), p.alpha));
    }

    if (opt.U) {
        rep.base_U = *opt.U;
        rep.base_U.alpha = p.alpha;
    } else {
        std::vector<KCoords> centres;
        for (const Word& w : rep.section_support) {
            KCoords k = to_k(d_of(w), p.alpha);
            centres.push_back({k.u + opt.rho, k.v + opt.rho});
        }
        KCoords low{0.0, 0.0};
        for (const auto& k : cuts) low = {std::min(low.u, k.u), std::min(low.v, k.v)};
        centres.push_back({low.u - 2.0 * opt.rho, low.v - 2.0 * opt.rho});
        // Largest radius, preferring centres whose domain stays connected.
        double best = -1.0;
        bool best_connected = false;
        for (const auto& c : centres) {
            double r = opt.rho;
            for (const auto& k : cuts) r = std::min(r, std::max(std::abs(k.u - c.u), k.v - c.v));
            if (r <= 0.0) continue;
            // Keep a margin so that no apex sits on the boundary of U.
            Parallelogram cand{p.alpha, c, 0.9 * r};
            bool conn = cuts_leave_connected(cand, cut_points, p.alpha, 60);
            bool better = best < 0.0 || (conn && !best_connected) || (conn == best_connected && cand.radius > best + 1e-12);
            if (better) {
                best = cand.radius;
                best_connected = conn;
                rep.base_U = cand;
            }
        }
        if (best <= 0.0) throw WkbError(ErrorKind::InvariantFailure, "no base parallelogram avoids the cuts");
    }
    rep.sub_V = rep.base_U.shrink_about_A(0.5);

    // S: section words whose cone set meets V.
    KCoords a = to_k(rep.sub_V.A(), p.alpha);
    double side = 2.0 * rep.sub_V.radius;
    for (const Word& w : rep.section_support) {
        KCoords k = to_k(d_of(w), p.alpha);
        if (k.u < a.u + side && k.v < a.v + side) rep.S.push_back(w);
    }

    std::set<Word> delta(rep.section_support.begin(), rep.section_support.end());
    for (const Word& w : rep.S) {
        auto it = jcols.find(w);
        if (it == jcols.end()) continue;
        for (const auto& [dst, v] : it->second) delta.insert(dst);
    }
    for (const Word& w : delta) rep.singular_apexes.push_back({d_of(w), w});

    for (const auto& g : rep.singular_apexes)
        if (rep.base_U.hit_by_cut(g.point)) rep.disjoint = false;

    // Smallness probes: sweep count against a plain scan.
    std::mt19937 rng(opt.seed);
    double span = 1.0;
    for (const auto& g : rep.singular_apexes) span = std::max(span, std::abs(g.point - p.z_eval));
    std::uniform_real_distribution<double> U(-2.0 * span, 2.0 * span);
    bool agree = true;
    for (int k = 0; k < opt.probes; ++k) {
        cd s = p.z_eval + cd(U(rng), U(rng));
        int plain = 0;
        for (const auto& g : rep.singular_apexes)
            if (in_cone(s - g.point, p.alpha, std::abs(s) + std::abs(g.point))) ++plain;
        if (plain != rep.count_below(s)) agree = false;
    }
    rep.smallness_certified = agree && !rep.partial;
    return rep;
}

std::vector<SingularApex> direct_apexes(const ContinuationReport& rep, const Pipeline& p) {
    std::vector<SingularApex> out;
    for (const auto& g : rep.singular_apexes)
        out.push_back({fiber_apex(word_sign(g.word, p.plus), c_hat_word(g.word, p.plus, p.z_x0), p.z_eval), g.word});
    return out;
}

namespace {

bool cuts_leave_connected(const Parallelogram& U, const std::vector<cd>& apexes, double alpha, int n) {
    KCoords a = to_k(U.A(), alpha);
    double extent = 2.0 * U.radius;
    for (cd d : apexes) {
        KCoords k = to_k(d, alpha);
        extent = std::max({extent, k.u - a.u, k.v - a.v});
    }
    extent *= 1.5;
    double h = extent / n;
    std::vector<char> open(static_cast<std::size_t>(n) * n, 1);
    for (cd d : apexes) {
        KCoords k = to_k(d, alpha);
        for (int i = 0; i < n; ++i) {
            double u = a.u + (i + 0.5) * h;
            if (std::abs(u - k.u) > 0.5 * h) continue;
            for (int j = 0; j < n; ++j)
                if (a.v + (j + 0.5) * h >= k.v - 0.5 * h) open[static_cast<std::size_t>(i) * n + j] = 0;
        }
    }
    int start = -1, total = 0;
    for (int c = 0; c < n * n; ++c)
        if (open[c]) {
            ++total;
            if (start < 0) start = c;
        }
    if (start < 0) return false;
    std::vector<char> seen(open.size(), 0);
    std::deque<int> q{start};
    seen[start] = 1;
    int reached = 0;
    while (!q.empty()) {
        int c = q.front();
        q.pop_front();
        ++reached;
        int i = c / n, j = c % n;
        const int di[] = {1, -1, 0, 0}, dj[] = {0, 0, 1, -1};
        for (int t = 0; t < 4; ++t) {
            int ii = i + di[t], jj = j + dj[t];
            if (ii < 0 || jj < 0 || ii >= n || jj >= n) continue;
            int nc = ii * n + jj;
            if (open[nc] && !seen[nc]) {
                seen[nc] = 1;
                q.push_back(nc);
            }
        }
    }
    return reached == total;
}

}  // namespace

bool domain_connected(const ContinuationReport& rep, int n) {
    std::vector<cd> apexes;
    for (const auto& g : rep.singular_apexes) apexes.push_back(g.point);
    return cuts_leave_connected(rep.base_U, apexes, rep.alpha, n);
}

std::vector<SingularApex> borel_singularity_table(const Polynomial& V, double alpha, cd x0, cd x_eval, int depth,
                                                  const TraceConfig& cfg) {
    StokesGeometry geom = trace_geometry(V, alpha, cfg);
    NumericCover cover(geom, x0);
    auto p = make_pipeline(cover, x_eval, depth);
    return compute_singularities(*p).singular_apexes;
}

}  // namespace wkb
