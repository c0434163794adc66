#include "wkb/cover.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

namespace wkb {

namespace {

const cd I(0.0, 1.0);

double wrap_2pi(double a) {
    double r = std::fmod(a, 2.0 * kPi);
    if (r < 0) r += 2.0 * kPi;
    return r;
}

int unit_sign(cd ratio, const char* what) {
    if (std::abs(ratio - 1.0) < 1e-6) return 1;
    if (std::abs(ratio + 1.0) < 1e-6) return -1;
    throw WkbError(ErrorKind::InconsistentBranch, std::string("branch ratio is not +-1 at ") + what);
}

/// Integral of sqrt(V) along the circle |x| = r from angle a0 counterclockwise to a1 >= a0.
cd arc_integral(const BranchTracker& tr, double r, cd from, double a0, cd to, double a1, cd seed, cd* end) {
    int n = std::max(8, static_cast<int>(std::ceil((a1 - a0) / (2.0 * kPi) * 1024.0)));
    std::vector<cd> pts;
    pts.push_back(from);
    for (int k = 1; k < n; ++k) pts.push_back(std::polar(r, a0 + (a1 - a0) * k / n));
    pts.push_back(to);
    return tr.integrate_path({pts, seed}, end);
}

}  // namespace

std::vector<int> Region::boundary_curves() const {
    std::vector<int> out;
    for (const auto& s : sectors) {
        out.push_back(s.exit_curve);
        out.push_back(s.entry_curve);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

RegionDecomposition build_regions(const StokesGeometry& geom, Family family, double min_radius) {
    RegionDecomposition dec;
    dec.family = family;
    dec.theta = family_angle(family, geom.alpha);
    const auto& curves = geom.curves(family);
    int N = static_cast<int>(curves.size());
    BranchTracker tr(geom.potential, geom.turning_points, geom.cfg.tol);
    if (N == 0) {
        Region r;
        dec.regions.push_back(r);
        if (!geom.potential.is_zero()) dec.plane_root = std::sqrt(geom.potential(0.0));
        return dec;
    }
    for (const auto& c : curves)
        if (c.terminus != Terminus::Infinity)
            throw WkbError(ErrorKind::AssumptionViolation, "a curve does not terminate at infinity");

    // Arc circle crossed exactly once by every curve.
    double m = 0.0;
    for (const auto& tp : geom.turning_points) m = std::max(m, std::abs(tp.location));
    std::vector<int> cross_index(N, -1);
    double radius = 0.0;
    for (double rho : {1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0}) {
        double r = rho * (1.0 + m);
        if (r < min_radius) continue;
        bool ok = true;
        for (int i = 0; i < N && ok; ++i) {
            const auto& s = curves[i].samples;
            int first = -1;
            for (int k = 0; k < static_cast<int>(s.size()); ++k)
                if (std::abs(s[k]) >= r) {
                    first = k;
                    break;
                }
            if (first < 1) {
                ok = false;
                break;
            }
            for (int k = first; k < static_cast<int>(s.size()); ++k)
                if (std::abs(s[k]) < r) ok = false;
            cross_index[i] = first;
        }
        if (ok) {
            radius = r;
            break;
        }
    }
    if (radius == 0.0) throw WkbError(ErrorKind::NonTransversal, "curves do not separate on any arc circle");
    dec.arc_radius = radius;

    dec.q_point.resize(N);
    dec.q_action.resize(N);
    dec.q_sqrt.resize(N);
    std::vector<double> q_angle(N);
    for (int i = 0; i < N; ++i) {
        const auto& c = curves[i];
        int k = cross_index[i];
        cd a = c.samples[k - 1], b = c.samples[k];
        // Solve |a + t (b - a)| = radius for t in (0, 1].
        cd d = b - a;
        double A = std::norm(d), B = 2.0 * std::real(std::conj(a) * d), C = std::norm(a) - radius * radius;
        double t = (-B + std::sqrt(std::max(0.0, B * B - 4 * A * C))) / (2 * A);
        cd q = a + t * d;
        q *= radius / std::abs(q);
        cd end;
        dec.q_action[i] = c.actions[k - 1] + tr.integrate_segment(a, q, c.sqrt_values[k - 1], &end);
        dec.q_sqrt[i] = end;
        dec.q_point[i] = q;
        q_angle[i] = wrap_2pi(std::arg(q));
    }

    // Rotation system.
    dec.order_at_infinity.resize(N);
    std::iota(dec.order_at_infinity.begin(), dec.order_at_infinity.end(), 0);
    std::sort(dec.order_at_infinity.begin(), dec.order_at_infinity.end(),
              [&](int a, int b) { return q_angle[a] < q_angle[b]; });
    std::vector<int> next_end(N);
    for (int k = 0; k < N; ++k) next_end[dec.order_at_infinity[k]] = dec.order_at_infinity[(k + 1) % N];
    std::vector<int> succ(N), pred(N);
    for (int t = 0; t < static_cast<int>(geom.turning_points.size()); ++t) {
        std::vector<int> at;
        for (int i = 0; i < N; ++i)
            if (curves[i].origin == t) at.push_back(i);
        std::sort(at.begin(), at.end(), [&](int a, int b) { return curves[a].launch_angle < curves[b].launch_angle; });
        for (std::size_t k = 0; k < at.size(); ++k) {
            succ[at[k]] = at[(k + 1) % at.size()];
            pred[at[(k + 1) % at.size()]] = at[k];
        }
    }

    dec.exit_region.assign(N, -1);
    dec.entry_region.assign(N, -1);
    dec.exit_sector.assign(N, -1);
    for (int start = 0; start < N; ++start) {
        if (dec.exit_region[start] >= 0) continue;
        Region reg;
        reg.id = static_cast<int>(dec.regions.size());
        int c = start;
        do {
            RegionSector sec{curves[c].origin, c, succ[c]};
            if (dec.exit_region[c] >= 0) throw WkbError(ErrorKind::NonTransversal, "inconsistent rotation system");
            dec.exit_region[c] = reg.id;
            dec.exit_sector[c] = static_cast<int>(reg.sectors.size());
            dec.entry_region[succ[c]] = reg.id;
            reg.sectors.push_back(sec);
            c = pred[next_end[c]];
        } while (c != start);
        if (reg.sectors.size() > 2)
            throw WkbError(ErrorKind::NonTransversal, "region bounded by more than two turning-point sectors");
        dec.regions.push_back(reg);
    }

    // Region actions A_R.
    double theta = dec.theta;
    auto arc = [&](int from_curve, int to_curve, cd seed, cd* end) {
        double a0 = q_angle[from_curve], a1 = q_angle[to_curve];
        if (a1 <= a0) a1 += 2.0 * kPi;
        return arc_integral(tr, radius, dec.q_point[from_curve], a0, dec.q_point[to_curve], a1, seed, end);
    };
    for (auto& reg : dec.regions) {
        const auto& s1 = reg.sectors[0];
        reg.sector_action.push_back(0.0);
        reg.eta[s1.exit_curve] = 1;
        int E1 = next_end[s1.exit_curve];
        cd b;
        cd I1 = arc(s1.exit_curve, E1, dec.q_sqrt[s1.exit_curve], &b);
        int eta_E1 = unit_sign(b / dec.q_sqrt[E1], "arc end");
        cd at_E1 = dec.q_action[s1.exit_curve] + I1;
        double scale = 1.0 + std::abs(dec.q_action[s1.exit_curve]) + std::abs(I1);
        if (reg.sectors.size() == 1) {
            if (eta_E1 != -1) throw WkbError(ErrorKind::InconsistentBranch, "half-plane boundary orientation");
            reg.eta[s1.entry_curve] = -1;
            cd closing = at_E1 + dec.q_action[E1];
            if (std::abs(closing) > 1e-8 * scale)
                throw WkbError(ErrorKind::InconsistentBranch, "half-plane action does not close");
            continue;
        }
        const auto& s2 = reg.sectors[1];
        if (s2.entry_curve != E1) throw WkbError(ErrorKind::InconsistentBranch, "strip sector order");
        reg.eta[E1] = eta_E1;
        cd A2 = at_E1 - static_cast<double>(eta_E1) * dec.q_action[E1];
        reg.sector_action.push_back(A2);
        int eta_c2 = -eta_E1;
        reg.eta[s2.exit_curve] = eta_c2;
        int E2 = next_end[s2.exit_curve];
        if (E2 != s1.entry_curve) throw WkbError(ErrorKind::InconsistentBranch, "strip arc order");
        cd I2 = arc(s2.exit_curve, E2, static_cast<double>(eta_c2) * dec.q_sqrt[s2.exit_curve], &b);
        int eta_e1 = unit_sign(b / dec.q_sqrt[E2], "second arc end");
        if (eta_e1 != -1) throw WkbError(ErrorKind::InconsistentBranch, "strip lower boundary orientation");
        reg.eta[E2] = -1;
        cd closing = A2 + static_cast<double>(eta_c2) * dec.q_action[s2.exit_curve] + I2 + dec.q_action[E2];
        scale += std::abs(A2) + std::abs(I2);
        if (std::abs(closing) > 1e-8 * scale)
            throw WkbError(ErrorKind::InconsistentBranch, "strip action does not close");
        reg.height = std::imag(std::polar(1.0, -theta) * A2);
        if (!(reg.height > 0)) throw WkbError(ErrorKind::InconsistentBranch, "strip has non-positive height");
    }
    return dec;
}

bool euler_check(const StokesGeometry& geom, const RegionDecomposition& dec) {
    int V = static_cast<int>(geom.turning_points.size()) + 1;
    int E = static_cast<int>(geom.curves(dec.family).size());
    int F = static_cast<int>(dec.regions.size());
    return V - E + F == 2;
}

// ---------------------------------------------------------------------------------------------

double StripComplex::transverse(cd zeta) const {
    KCoords k = to_k(zeta, alpha);
    return family == Family::PlusAlpha ? k.v : k.u;
}

double StripComplex::along(cd zeta) const {
    KCoords k = to_k(zeta, alpha);
    return family == Family::PlusAlpha ? k.u : k.v;
}

int StripComplex::side(int strip, int ray) const {
    double t = transverse(rays[ray].c_hat);
    const Band& b = strips[strip].band;
    double eps = 1e-9 * (1.0 + std::abs(t));
    if (b.lo && std::abs(*b.lo - t) <= eps) return 1;
    if (b.hi && std::abs(*b.hi - t) <= eps) return -1;
    return 0;
}

bool StripComplex::above(int b, int /*a*/, int ray) const {
    int s = side(b, ray);
    return family == Family::PlusAlpha ? s == -1 : s == 1;
}

ShapeType StripComplex::shape(int strip) const {
    const Band& b = strips[strip].band;
    if (!b.lo && !b.hi) return ShapeType::Plane;
    if (b.lo && b.hi) return ShapeType::Strip;
    bool larger_side = b.lo.has_value();  // extends to +infinity in the transverse coordinate
    bool upper = family == Family::PlusAlpha ? !larger_side : larger_side;
    return upper ? ShapeType::HalfPlaneUpper : ShapeType::HalfPlaneLower;
}

bool is_tree(const StripComplex& cx) {
    int n = static_cast<int>(cx.strips.size());
    if (n == 0) return false;
    int edges = 0;
    std::vector<std::vector<int>> adj(n);
    for (const auto& r : cx.rays) {
        if (r.frontier()) continue;
        if (r.strips[0] < 0 || r.strips[0] >= n || r.strips[1] >= n || r.strips[0] == r.strips[1]) return false;
        ++edges;
        adj[r.strips[0]].push_back(r.strips[1]);
        adj[r.strips[1]].push_back(r.strips[0]);
    }
    if (edges != n - 1) return false;
    std::vector<char> seen(n, 0);
    std::deque<int> q{cx.root};
    seen[cx.root] = 1;
    int count = 1;
    while (!q.empty()) {
        int a = q.front();
        q.pop_front();
        for (int b : adj[a])
            if (!seen[b]) {
                seen[b] = 1;
                ++count;
                q.push_back(b);
            }
    }
    return count == n;
}

std::vector<std::string> verify_complex(const StripComplex& cx) {
    std::vector<std::string> out;
    if (!is_tree(cx)) out.push_back("strip graph is not a tree");
    for (const auto& r : cx.rays) {
        std::ostringstream os;
        os << "ray " << r.id;
        if (r.strips[0] < 0 || r.strips[0] >= static_cast<int>(cx.strips.size())) {
            out.push_back(os.str() + " has no strip");
            continue;
        }
        int s0 = cx.side(r.strips[0], r.id);
        if (s0 == 0) out.push_back(os.str() + " does not lie on the boundary of its first strip");
        if (!r.frontier()) {
            if (r.strips[1] >= static_cast<int>(cx.strips.size())) {
                out.push_back(os.str() + " references a missing strip");
                continue;
            }
            int s1 = cx.side(r.strips[1], r.id);
            if (s1 == 0) out.push_back(os.str() + " does not lie on the boundary of its second strip");
            if (s0 != 0 && s1 != 0 && s0 == s1) out.push_back(os.str() + " has both strips on one side");
        }
        for (int k = 0; k < (r.frontier() ? 1 : 2); ++k) {
            const auto& rs = cx.strips[r.strips[k]].rays;
            if (std::find(rs.begin(), rs.end(), r.id) == rs.end())
                out.push_back(os.str() + " missing from its strip's ray list");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------------------------

namespace {

Band face_band(const Region& reg, int sign, cd shift, double theta, Family family, double alpha) {
    Band b;
    if (reg.is_plane()) return b;
    double gc = std::imag(std::polar(1.0, -theta) * shift);
    std::optional<double> glo, ghi;
    if (sign > 0) {
        glo = gc;
        if (reg.is_strip()) ghi = gc + reg.height;
    } else {
        ghi = gc;
        if (reg.is_strip()) glo = gc - reg.height;
    }
    // transverse coordinate t = kappa * g / sin(2 alpha)
    double kappa = (family == Family::PlusAlpha ? -1.0 : 1.0) / std::sin(2.0 * alpha);
    auto map = [&](std::optional<double> g) -> std::optional<double> {
        if (!g) return std::nullopt;
        return kappa * *g;
    };
    if (kappa > 0) {
        b.lo = map(glo);
        b.hi = map(ghi);
    } else {
        b.lo = map(ghi);
        b.hi = map(glo);
    }
    return b;
}

}  // namespace

NumericCover::NumericCover(const StokesGeometry& geom, cd x0)
    : geom_(geom), tracker_(geom.potential, geom.turning_points, geom.cfg.tol), x0_(x0) {
    if (!geom.assumptions_ok)
        throw WkbError(ErrorKind::AssumptionViolation, "geometry does not satisfy the standing assumptions");
    if (tracker_.distance_to_tp(x0) < 1e-6) throw WkbError(ErrorKind::DegenerateInput, "x0 is a turning point");
    double min_r = 1.5 * std::abs(x0);
    plus_ = build_regions(geom, Family::PlusAlpha, min_r);
    minus_ = build_regions(geom, Family::MinusAlpha, min_r);
    RootData rp = locate_root(plus_);
    RootData rm = locate_root(minus_);
    root_plus_ = rp.region;
    root_minus_ = rm.region;
    mu_plus_ = rp.mu;
    mu_minus_ = rm.mu;
    z_x0_ = static_cast<double>(rp.mu) * rp.action;
    shift_minus_ = z_x0_ - static_cast<double>(rm.mu) * rm.action;
}

NumericCover::RootData NumericCover::locate_root(const RegionDecomposition& dec) const {
    if (dec.regions.size() == 1 && dec.regions[0].is_plane()) return {0, dec.plane_root * x0_, 1};
    cd principal = std::sqrt(geom_.potential(x0_));
    double r = dec.arc_radius;
    std::vector<LevelSample> line;
    try {
        line = trace_level_line(tracker_, x0_, principal, dec.theta, r, geom_.cfg);
    } catch (const WkbError& e) {
        if (e.kind() != ErrorKind::BranchCollision) throw;
        line = trace_level_line(tracker_, x0_, principal, dec.theta + kPi, r, geom_.cfg);
    }
    const auto& P = line[line.size() - 2];
    const auto& L = line.back();
    cd d = L.x - P.x;
    double A = std::norm(d), B = 2.0 * std::real(std::conj(P.x) * d), C = std::norm(P.x) - r * r;
    double t = (-B + std::sqrt(std::max(0.0, B * B - 4 * A * C))) / (2 * A);
    cd q = P.x + t * d;
    q *= r / std::abs(q);
    cd beta;
    cd I0 = P.action + tracker_.integrate_segment(P.x, q, P.sqrt_value, &beta);
    double a = wrap_2pi(std::arg(q));
    int N = static_cast<int>(dec.q_point.size());
    int c = dec.order_at_infinity.back();
    for (int k = 0; k < N; ++k) {
        int id = dec.order_at_infinity[k];
        if (wrap_2pi(std::arg(dec.q_point[id])) <= a) c = id;
    }
    int region = dec.exit_region[c];
    const Region& reg = dec.regions[region];
    int eta_c = reg.eta.at(c);
    double a0 = wrap_2pi(std::arg(dec.q_point[c]));
    double a1 = a >= a0 ? a : a + 2.0 * kPi;
    cd b;
    cd arc = arc_integral(tracker_, r, dec.q_point[c], a0, q, a1, static_cast<double>(eta_c) * dec.q_sqrt[c], &b);
    cd Aq = reg.sector_action[dec.exit_sector[c]] + static_cast<double>(eta_c) * dec.q_action[c] + arc;
    int mu = unit_sign(b / beta, "base point");
    return {region, Aq - static_cast<double>(mu) * I0, mu};
}

StripComplex NumericCover::build(Family f, int depth) const {
    const RegionDecomposition& dec = regions(f);
    const auto& curves = geom_.curves(f);
    double theta = dec.theta;
    StripComplex cx;
    cx.family = f;
    cx.alpha = geom_.alpha;
    cx.depth = depth;
    cx.z_x0 = z_x0_;
    Strip root;
    root.id = 0;
    root.family = f;
    root.region = root_region(f);
    root.sign = f == Family::PlusAlpha ? mu_plus_ : mu_minus_;
    root.shift = f == Family::PlusAlpha ? cd(0.0) : shift_minus_;
    root.band = face_band(dec.regions[root.region], root.sign, root.shift, theta, f, geom_.alpha);
    cx.strips.push_back(root);
    std::deque<int> queue{0};
    while (!queue.empty()) {
        int sid = queue.front();
        queue.pop_front();
        const Strip cur = cx.strips[sid];
        const Region& reg = dec.regions[cur.region];
        int parent_curve = cur.parent_ray >= 0 ? cx.rays[cur.parent_ray].curve : -1;
        for (int C : reg.boundary_curves()) {
            if (C == parent_curve) continue;
            int tp = curves[C].origin;
            int sector = dec.exit_region[C] == cur.region ? dec.exit_sector[C] : -1;
            cd A_w = 0.0;
            bool found = false;
            for (std::size_t k = 0; k < reg.sectors.size(); ++k)
                if (reg.sectors[k].exit_curve == C || reg.sectors[k].entry_curve == C) {
                    A_w = reg.sector_action[k];
                    found = true;
                }
            (void)sector;
            if (!found) throw WkbError(ErrorKind::InvariantFailure, "boundary curve without sector");
            int eta = reg.eta.at(C);
            Ray ray;
            ray.id = static_cast<int>(cx.rays.size());
            ray.family = f;
            ray.c_hat = static_cast<double>(cur.sign) * A_w + cur.shift;
            ray.handedness = cur.sign * eta > 0 ? Handedness::Right : Handedness::Left;
            ray.curve = C;
            ray.tp = tp;
            ray.strips[0] = sid;
            cx.strips[sid].rays.push_back(ray.id);
            if (cur.depth < depth) {
                int other = dec.other_region(C, cur.region);
                const Region& oreg = dec.regions[other];
                Strip child;
                child.id = static_cast<int>(cx.strips.size());
                child.family = f;
                child.region = other;
                child.depth = cur.depth + 1;
                child.parent_ray = ray.id;
                child.deck_word = cur.deck_word;
                child.deck_word.push_back(C);
                child.sign = cur.sign * eta * oreg.eta.at(C);
                cd A_w2 = 0.0;
                for (std::size_t k = 0; k < oreg.sectors.size(); ++k)
                    if (oreg.sectors[k].exit_curve == C || oreg.sectors[k].entry_curve == C) A_w2 = oreg.sector_action[k];
                child.shift = ray.c_hat - static_cast<double>(child.sign) * A_w2;
                child.band = face_band(oreg, child.sign, child.shift, theta, f, geom_.alpha);
                child.rays.push_back(ray.id);
                ray.strips[1] = child.id;
                cx.strips.push_back(child);
                queue.push_back(child.id);
            }
            cx.rays.push_back(ray);
        }
    }
    return cx;
}

namespace {

struct Crossing {
    double t;
    int curve;
};

std::vector<Crossing> segment_crossings(cd a, cd b, const std::vector<StokesCurve>& curves) {
    std::vector<Crossing> out;
    auto cross = [](cd p, cd q) { return p.real() * q.imag() - p.imag() * q.real(); };
    cd r = b - a;
    for (int i = 0; i < static_cast<int>(curves.size()); ++i) {
        std::vector<cd> pts{curves[i].origin_tp.location};
        pts.insert(pts.end(), curves[i].samples.begin(), curves[i].samples.end());
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
            cd s = pts[k + 1] - pts[k];
            double den = cross(r, s);
            if (den == 0.0) continue;
            double t = cross(pts[k] - a, s) / den;
            double u = cross(pts[k] - a, r) / den;
            if (t >= 0 && t < 1 && u >= 0 && u < 1) out.push_back({t, i});
        }
    }
    std::sort(out.begin(), out.end(), [](const Crossing& x, const Crossing& y) { return x.t < y.t; });
    return out;
}

}  // namespace

NumericCover::Located NumericCover::locate(const StripComplex& cx, cd x) const {
    Located out;
    out.strip = cx.root;
    for (const auto& c : segment_crossings(x0_, x, geom_.curves(cx.family))) {
        int next = -1;
        for (int rid : cx.strips[out.strip].rays)
            if (cx.rays[rid].curve == c.curve) next = cx.rays[rid].other(out.strip);
        if (next < 0) throw WkbError(ErrorKind::DepthExhausted, "evaluation point lies beyond the built complex");
        out.strip = next;
    }
    cd principal = std::sqrt(geom_.potential(x0_));
    out.z = z_x0_ + tracker_.integrate_segment(x0_, x, principal, nullptr);
    if (!cx.strips[out.strip].band.contains(cx.transverse(out.z), -1e-7 * (1.0 + std::abs(out.z))))
        throw WkbError(ErrorKind::InconsistentBranch, "z(x) lies outside the located strip");
    return out;
}

double NumericCover::deck_roundtrip_residual(const StripComplex& cx) const {
    const RegionDecomposition& dec = regions(cx.family);
    const auto& root = cx.strips[cx.root];
    auto sector_action = [&](const Region& reg, int C) {
        for (std::size_t k = 0; k < reg.sectors.size(); ++k)
            if (reg.sectors[k].exit_curve == C || reg.sectors[k].entry_curve == C) return reg.sector_action[k];
        throw WkbError(ErrorKind::InvariantFailure, "curve is not on the region boundary");
    };
    auto cross = [&](int region, int sign, cd shift, int C, int* nregion, int* nsign, cd* nshift) {
        const Region& reg = dec.regions[region];
        int other = dec.other_region(C, region);
        const Region& oreg = dec.regions[other];
        cd apex = static_cast<double>(sign) * sector_action(reg, C) + shift;
        *nsign = sign * reg.eta.at(C) * oreg.eta.at(C);
        *nshift = apex - static_cast<double>(*nsign) * sector_action(oreg, C);
        *nregion = other;
    };
    double worst = 0.0;
    for (const auto& st : cx.strips) {
        int region = root.region, sign = root.sign;
        cd shift = root.shift;
        for (int C : st.deck_word) cross(region, sign, shift, C, &region, &sign, &shift);
        worst = std::max(worst, std::abs(shift - st.shift) + std::abs(sign - st.sign) + (region != st.region));
        for (auto it = st.deck_word.rbegin(); it != st.deck_word.rend(); ++it)
            cross(region, sign, shift, *it, &region, &sign, &shift);
        worst = std::max(worst, std::abs(shift - root.shift) + std::abs(sign - root.sign) + (region != root.region));
    }
    return worst;
}

}  // namespace wkb
