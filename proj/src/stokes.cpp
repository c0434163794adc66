#include "wkb/stokes.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <sstream>

namespace wkb {

namespace {

const cd I(0.0, 1.0);

double wrap_2pi(double a) {
    double r = std::fmod(a, 2.0 * kPi);
    if (r < 0) r += 2.0 * kPi;
    return r;
}

/// Predictor-corrector stepping along a level line of Im(e^{-i theta} S).
class LevelStepper {
public:
    LevelStepper(const BranchTracker& tr, double theta, const TraceConfig& cfg)
        : tr_(tr), rot_(std::polar(1.0, theta)), cfg_(cfg) {}

    LevelSample advance(const LevelSample& cur, double h) const {
        auto field = [&](cd y) {
            cd sy = tr_.sqrt_near(y, cur.sqrt_value);
            return rot_ * std::abs(sy) / sy;
        };
        cd k1 = field(cur.x);
        cd k2 = field(cur.x + 0.5 * h * k1);
        cd k3 = field(cur.x + 0.5 * h * k2);
        cd k4 = field(cur.x + h * k3);
        cd xn = cur.x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        cd sn;
        cd Sn = cur.action + tr_.integrate_segment(cur.x, xn, cur.sqrt_value, &sn, cfg_.quad_tol);
        for (int it = 0; it < 4; ++it) {
            double f = std::imag(std::conj(rot_) * Sn);
            if (std::abs(f) <= 1e-14 * (1.0 + std::abs(Sn))) break;
            xn += -I * f * rot_ / sn;
            Sn = cur.action + tr_.integrate_segment(cur.x, xn, cur.sqrt_value, &sn, cfg_.quad_tol);
        }
        return {xn, Sn, sn};
    }

    double tau(cd S) const { return std::real(std::conj(rot_) * S); }

private:
    const BranchTracker& tr_;
    cd rot_;
    const TraceConfig& cfg_;
};

bool action_growing(const std::vector<cd>& actions) {
    if (actions.size() < 11) return false;
    for (std::size_t i = actions.size() - 10; i < actions.size(); ++i)
        if (!(std::abs(actions[i]) > std::abs(actions[i - 1]))) return false;
    return true;
}

/// Local action from the turning point w to w + delta along the straight ray, using the
/// substitution x = w + delta u^2, which removes the endpoint singularity.
struct LocalLaunch {
    std::vector<cd> taylor;  // Taylor coefficients of V at w
    int k;
    cd root_ck;

    cd branch_factor(cd delta, double phi) const {
        return root_ck * std::pow(std::abs(delta), 0.5 * k) * std::polar(1.0, 0.5 * k * phi);
    }
    cd g(cd delta, double u) const {
        cd acc = 0.0, pw = 1.0, step = delta * u * u;
        for (std::size_t j = k; j < taylor.size(); ++j) {
            acc += taylor[j] / taylor[k] * pw;
            pw *= step;
        }
        return acc;
    }
    cd sqrt_at(cd delta, double phi, double sigma) const { return sigma * branch_factor(delta, phi) * std::sqrt(g(delta, 1.0)); }
    cd action(cd delta, double phi, double sigma, double quad_tol) const {
        cd bf = sigma * branch_factor(delta, phi);
        auto f = [&](double u) -> cd { return bf * std::pow(u, k) * std::sqrt(g(delta, u)) * 2.0 * delta * u; };
        double err = 0.0;
        cd val = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, 0.0, 1.0, 10, quad_tol, &err);
        if (err > 1e-8 * (1.0 + std::abs(val))) throw WkbError(ErrorKind::QuadratureFailure, "launch quadrature");
        return val;
    }
};

}  // namespace

double default_escape_radius(const std::vector<TurningPoint>& tps) {
    double m = 0.0;
    for (const auto& tp : tps) m = std::max(m, std::abs(tp.location));
    return 50.0 * (1.0 + m);
}

double default_launch_radius(const std::vector<TurningPoint>& tps, int index) {
    double d = 1.0;
    for (int j = 0; j < static_cast<int>(tps.size()); ++j)
        if (j != index) d = std::min(d, std::abs(tps[j].location - tps[index].location));
    return 0.01 * d;
}

Window default_window(const std::vector<TurningPoint>& tps) {
    double m = 0.0;
    for (const auto& tp : tps) m = std::max(m, std::abs(tp.location));
    double w = 2.0 * (1.0 + m);
    return {-w, w, -w, w};
}

std::vector<StokesCurve> trace_curves(const BranchTracker& tracker, int tp_index, Family family, double alpha,
                                      const TraceConfig& cfg) {
    const auto& tps = tracker.turning_points();
    const TurningPoint& tp = tps.at(tp_index);
    const Polynomial& V = tracker.potential();
    double theta = family_angle(family, alpha);
    cd rot = std::polar(1.0, theta);
    int k = tp.multiplicity;
    double r0 = cfg.launch_radius > 0 ? cfg.launch_radius : default_launch_radius(tps, tp_index);
    double R = cfg.escape_radius > 0 ? cfg.escape_radius : default_escape_radius(tps);

    LocalLaunch local;
    local.k = k;
    for (int j = 0; j <= V.degree(); ++j) local.taylor.push_back(V.taylor_coeff(tp.location, j));
    cd ck = local.taylor[k];
    if (std::abs(ck) == 0.0) throw WkbError(ErrorKind::LaunchFailure, "vanishing leading local coefficient");
    local.root_ck = std::sqrt(ck);
    cd C = 2.0 * local.root_ck / static_cast<double>(k + 2);

    LevelStepper stepper(tracker, theta, cfg);
    std::vector<StokesCurve> out;
    for (int j = 0; j < k + 2; ++j) {
        double phi = 2.0 / (k + 2) * (theta + j * kPi - std::arg(C));
        cd delta = std::polar(r0, phi);
        double sigma = 1.0;
        cd S = local.action(delta, phi, sigma, cfg.quad_tol);
        if (stepper.tau(S) < 0) {
            sigma = -1.0;
            S = -S;
        }
        cd s = local.sqrt_at(delta, phi, sigma);
        for (int it = 0; it < 6; ++it) {
            double f = std::imag(std::conj(rot) * S);
            if (std::abs(f) <= 1e-15 * (1.0 + std::abs(S))) break;
            cd nd = delta - I * f * rot / s;
            phi += std::arg(nd / delta);
            delta = nd;
            S = local.action(delta, phi, sigma, cfg.quad_tol);
            s = local.sqrt_at(delta, phi, sigma);
        }
        if (stepper.tau(S) <= 0 || std::abs(std::imag(std::conj(rot) * S)) > 1e-9 * (1.0 + std::abs(S)) ||
            std::abs(std::abs(delta) - r0) > 0.5 * r0)
            throw WkbError(ErrorKind::LaunchFailure, "launch direction could not be separated");

        StokesCurve c;
        c.origin = tp_index;
        c.origin_tp = tp;
        c.family = family;
        c.angle = theta;
        c.branch_index = j;
        c.launch_angle = wrap_2pi(std::arg(delta));
        LevelSample cur{tp.location + delta, S, s};
        std::vector<LevelSample> pts{cur};
        c.samples.push_back(cur.x);
        c.actions.push_back(cur.action);
        c.sqrt_values.push_back(cur.sqrt_value);
        bool done = false;
        for (int step = 0; !done; ++step) {
            if (step >= cfg.max_steps)
                throw WkbError(ErrorKind::StepBudgetExceeded, "curve did not terminate within max_steps");
            double h = cfg.step * std::max(r0, tracker.distance_to_tp(cur.x));
            LevelSample next = stepper.advance(cur, h);
            if (!(stepper.tau(next.action) > stepper.tau(cur.action)))
                throw WkbError(ErrorKind::NonConvergence, "level-line stepping lost monotonicity");
            cur = next;
            c.samples.push_back(cur.x);
            c.actions.push_back(cur.action);
            c.sqrt_values.push_back(cur.sqrt_value);
            for (int t = 0; t < static_cast<int>(tps.size()); ++t) {
                if (t == tp_index) continue;
                if (std::abs(cur.x - tps[t].location) < r0) {
                    c.terminus = Terminus::TurningPointHit;
                    c.target = t;
                    done = true;
                }
            }
            if (!done && std::abs(cur.x) > R && action_growing(c.actions)) {
                c.terminus = Terminus::Infinity;
                c.asymptotic_direction = std::arg(cur.x);
                done = true;
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<LevelSample> trace_level_line(const BranchTracker& tracker, cd x, cd sqrt_seed, double theta,
                                          double stop_radius, const TraceConfig& cfg) {
    LevelStepper stepper(tracker, theta, cfg);
    double r_min = 1e-7 * (1.0 + std::abs(x));
    LevelSample cur{x, 0.0, sqrt_seed};
    std::vector<LevelSample> out{cur};
    for (int step = 0; std::abs(cur.x) <= stop_radius; ++step) {
        if (step >= cfg.max_steps) throw WkbError(ErrorKind::StepBudgetExceeded, "level line did not escape");
        double d = tracker.distance_to_tp(cur.x);
        if (d < r_min) throw WkbError(ErrorKind::BranchCollision, "level line runs into a turning point");
        double h = cfg.step * std::min(d, 1.0 + std::abs(cur.x));
        cur = stepper.advance(cur, h);
        out.push_back(cur);
    }
    return out;
}

StokesGeometry trace_geometry(const Polynomial& V, double alpha, const TraceConfig& cfg) {
    StokesGeometry g;
    g.potential = V;
    g.alpha = alpha;
    g.cfg = cfg;
    g.turning_points = find_turning_points(V, cfg.tol);
    g.escape_radius = cfg.escape_radius > 0 ? cfg.escape_radius : default_escape_radius(g.turning_points);
    g.launch_radius = 1.0;
    BranchTracker tracker(V, g.turning_points, cfg.tol);
    for (int i = 0; i < static_cast<int>(g.turning_points.size()); ++i) {
        g.launch_radius = std::min(g.launch_radius, cfg.launch_radius > 0 ? cfg.launch_radius
                                                                         : default_launch_radius(g.turning_points, i));
        for (auto& c : trace_curves(tracker, i, Family::PlusAlpha, alpha, cfg)) g.curves_plus.push_back(std::move(c));
        for (auto& c : trace_curves(tracker, i, Family::MinusAlpha, alpha, cfg)) g.curves_minus.push_back(std::move(c));
    }
    auto rep = check_assumptions(g, default_window(g.turning_points));
    g.assumptions_ok = rep.ok;
    g.violations = rep.violations;
    return g;
}

namespace {

bool segments_cross(cd a, cd b, cd c, cd d, cd* where) {
    auto cross = [](cd p, cd q) { return p.real() * q.imag() - p.imag() * q.real(); };
    cd r = b - a, s = d - c;
    double den = cross(r, s);
    if (den == 0.0) return false;
    double t = cross(c - a, s) / den;
    double u = cross(c - a, r) / den;
    if (t < 0 || t >= 1 || u < 0 || u >= 1) return false;
    *where = a + t * r;
    return true;
}

std::string curve_label(const StokesCurve& c) {
    std::ostringstream os;
    os << family_name(c.family) << " curve (turning point " << c.origin << ", branch " << c.branch_index << ")";
    return os.str();
}

}  // namespace

AssumptionReport check_assumptions(const StokesGeometry& geom, const Window& window) {
    AssumptionReport rep;
    double s2 = std::sin(2.0 * geom.alpha);
    if (std::abs(s2) < 1e-9) {
        rep.ok = false;
        rep.violations.push_back("non-transversal: the alpha and -alpha families coincide (sin 2 alpha = 0)");
    }
    for (const auto* fam : {&geom.curves_plus, &geom.curves_minus})
        for (const auto& c : *fam)
            if (c.terminus == Terminus::TurningPointHit) {
                rep.ok = false;
                std::ostringstream os;
                os << "turning-point connection: " << curve_label(c) << " hits turning point " << c.target;
                rep.violations.push_back(os.str());
            }
    if (!rep.ok) return rep;
    for (const auto& a : geom.curves_plus)
        for (const auto& b : geom.curves_minus) {
            for (std::size_t i = 0; i + 1 < a.samples.size(); ++i) {
                cd p = a.samples[i], q = a.samples[i + 1];
                if (!window.contains(p) && !window.contains(q)) continue;
                double pxmin = std::min(p.real(), q.real()), pxmax = std::max(p.real(), q.real());
                double pymin = std::min(p.imag(), q.imag()), pymax = std::max(p.imag(), q.imag());
                for (std::size_t j = 0; j + 1 < b.samples.size(); ++j) {
                    cd r = b.samples[j], s = b.samples[j + 1];
                    if (std::max(r.real(), s.real()) < pxmin || std::min(r.real(), s.real()) > pxmax ||
                        std::max(r.imag(), s.imag()) < pymin || std::min(r.imag(), s.imag()) > pymax)
                        continue;
                    cd w;
                    if (!segments_cross(p, q, r, s, &w) || !window.contains(w)) continue;
                    ++rep.crossings;
                    double sang = std::abs(std::sin(std::arg((q - p) / (s - r))));
                    if (sang < 0.5 * std::abs(s2)) {
                        rep.ok = false;
                        rep.violations.push_back("non-transversal crossing: " + curve_label(a) + " and " +
                                                 curve_label(b));
                    }
                }
            }
        }
    return rep;
}

double suggest_alpha(const Polynomial& V, int n_samples, const TraceConfig& cfg) {
    if (n_samples < 1) throw WkbError(ErrorKind::DegenerateInput, "n_samples must be positive");
    double best_alpha = -1.0, best_clear = -1.0;
    for (int j = 0; j < n_samples; ++j) {
        double alpha = (j + 0.5) * kPi / (2.0 * n_samples);
        StokesGeometry g;
        try {
            g = trace_geometry(V, alpha, cfg);
        } catch (const WkbError&) {
            continue;
        }
        if (!g.assumptions_ok) continue;
        double clear = std::numeric_limits<double>::infinity();
        for (const auto* fam : {&g.curves_plus, &g.curves_minus})
            for (const auto& c : *fam)
                for (cd x : c.samples)
                    for (int t = 0; t < static_cast<int>(g.turning_points.size()); ++t)
                        if (t != c.origin) clear = std::min(clear, std::abs(x - g.turning_points[t].location));
        if (clear > best_clear) {
            best_clear = clear;
            best_alpha = alpha;
        }
    }
    if (best_alpha < 0) throw WkbError(ErrorKind::NoAdmissibleAngle, "no sampled angle passes the assumption checks");
    return best_alpha;
}

}  // namespace wkb
