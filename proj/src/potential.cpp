#include "wkb/potential.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace wkb {

Polynomial::Polynomial(std::vector<cd> coeffs) : coeffs_(std::move(coeffs)) {
    while (!coeffs_.empty() && coeffs_.back() == cd(0.0, 0.0)) coeffs_.pop_back();
}

Polynomial Polynomial::parse(const std::string& text) {
    std::vector<cd> cs;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) cs.push_back(parse_complex(item));
    if (cs.empty()) throw WkbError(ErrorKind::Parse, "empty potential");
    return Polynomial(std::move(cs));
}

double Polynomial::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
    return m;
}

cd Polynomial::operator()(cd x) const {
    cd acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

Polynomial Polynomial::derivative(int order) const {
    std::vector<cd> cs = coeffs_;
    for (int o = 0; o < order; ++o) {
        if (cs.empty()) break;
        std::vector<cd> d;
        for (std::size_t k = 1; k < cs.size(); ++k) d.push_back(cs[k] * static_cast<double>(k));
        cs = std::move(d);
    }
    return Polynomial(std::move(cs));
}

cd Polynomial::taylor_coeff(cd w, int k) const {
    double fact = 1.0;
    for (int j = 2; j <= k; ++j) fact *= j;
    return derivative(k)(w) / fact;
}

namespace {

// Size of the k-th Taylor coefficient's terms at c; used as a relative scale.
double taylor_scale(const Polynomial& V, cd c, int k) {
    double r = std::max(1.0, std::abs(c));
    double s = 0.0;
    const auto& a = V.coeffs();
    for (int j = k; j < static_cast<int>(a.size()); ++j) {
        double binom = 1.0;
        for (int t = 0; t < k; ++t) binom = binom * (j - t) / (t + 1);
        s += std::abs(a[j]) * binom * std::pow(r, j - k);
    }
    return s;
}

cd newton_polish(const Polynomial& p, cd x) {
    Polynomial dp = p.derivative();
    cd best = x;
    double best_res = std::abs(p(x));
    for (int it = 0; it < 60; ++it) {
        cd d = dp(x);
        if (d == cd(0.0, 0.0)) break;
        cd step = p(x) / d;
        x -= step;
        double res = std::abs(p(x));
        if (res < best_res) {
            best_res = res;
            best = x;
        }
        if (std::abs(step) <= 1e-16 * (1.0 + std::abs(x))) break;
    }
    return best;
}

bool lex_less(cd a, cd b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
    void unite(int a, int b) { p[find(a)] = find(b); }
};

std::vector<std::vector<int>> clusters(const std::vector<cd>& pts, double tol, bool loose) {
    int n = static_cast<int>(pts.size());
    UnionFind uf(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double radius = tol;
            if (loose) radius = std::max(tol, 1e-5 * (1.0 + std::max(std::abs(pts[i]), std::abs(pts[j]))));
            if (std::abs(pts[i] - pts[j]) <= radius) uf.unite(i, j);
        }
    std::vector<std::vector<int>> groups;
    std::vector<int> slot(n, -1);
    for (int i = 0; i < n; ++i) {
        int r = uf.find(i);
        if (slot[r] < 0) {
            slot[r] = static_cast<int>(groups.size());
            groups.emplace_back();
        }
        groups[slot[r]].push_back(i);
    }
    return groups;
}

}  // namespace

std::vector<TurningPoint> find_turning_points(const Polynomial& V, double tol) {
    if (V.is_zero()) throw WkbError(ErrorKind::DegenerateInput, "potential is identically zero");
    int n = V.degree();
    if (n == 0) return {};
    const auto& a = V.coeffs();
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -a[i] / a[n];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp, false);
    if (solver.info() != Eigen::Success) throw WkbError(ErrorKind::NonConvergence, "companion eigenvalues failed");
    std::vector<cd> raw(n);
    for (int i = 0; i < n; ++i) raw[i] = solver.eigenvalues()[i];

    std::vector<TurningPoint> out;
    for (const auto& group : clusters(raw, tol, true)) {
        int m = static_cast<int>(group.size());
        cd c = 0.0;
        for (int i : group) c += raw[i];
        c /= static_cast<double>(m);
        bool accepted = true;
        if (m > 1) {
            c = newton_polish(V.derivative(m - 1), c);
            for (int k = 0; k < m && accepted; ++k)
                if (std::abs(V.taylor_coeff(c, k)) > 1e-6 * taylor_scale(V, c, k)) accepted = false;
        } else {
            c = newton_polish(V, c);
        }
        if (accepted) {
            out.push_back({c, m});
            continue;
        }
        std::vector<cd> singles;
        for (int i : group) singles.push_back(newton_polish(V, raw[i]));
        for (const auto& sub : clusters(singles, tol, false)) {
            cd s = 0.0;
            for (int i : sub) s += singles[i];
            out.push_back({s / static_cast<double>(sub.size()), static_cast<int>(sub.size())});
        }
    }
    for (const auto& tp : out) {
        if (std::abs(V(tp.location)) > 1e-6 * taylor_scale(V, tp.location, 0))
            throw WkbError(ErrorKind::NonConvergence, "root polishing did not converge");
    }
    std::sort(out.begin(), out.end(),
              [](const TurningPoint& x, const TurningPoint& y) { return lex_less(x.location, y.location); });
    return out;
}

BranchTracker::BranchTracker(Polynomial V, std::vector<TurningPoint> tps, double tol)
    : V_(std::move(V)), tps_(std::move(tps)), tol_(tol) {}

BranchTracker::BranchTracker(const Polynomial& V, double tol)
    : BranchTracker(V, find_turning_points(V, tol), tol) {}

cd BranchTracker::sqrt_near(cd x, cd reference) const {
    cd s = std::sqrt(V_(x));
    return std::real(std::conj(reference) * s) >= 0.0 ? s : -s;
}

double BranchTracker::distance_to_tp(cd x) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& tp : tps_) d = std::min(d, std::abs(x - tp.location));
    return d;
}

void BranchTracker::check_seed(cd x, cd seed) const {
    cd v = V_(x);
    if (std::abs(seed * seed - v) > 1e-6 * (1.0 + std::abs(v)))
        throw WkbError(ErrorKind::DegenerateInput, "sqrt seed does not square to V at the first waypoint");
}

std::vector<BranchTracker::Node> BranchTracker::track(cd a, cd b, cd seed) const {
    std::vector<Node> nodes{{a, seed}};
    double len = std::abs(b - a);
    if (len == 0.0) return nodes;
    double deg = std::max(1, V_.degree());
    double t = 0.0;
    cd s = seed;
    int guard = 0;
    while (t < 1.0) {
        cd x = a + t * (b - a);
        double d = distance_to_tp(x);
        if (d < 0.5 * tol_) throw WkbError(ErrorKind::BranchCollision, "path meets a turning point");
        double dt = std::min(1.0 - t, 0.5 * d / deg / len);
        // Check the segment does not pass closer to a turning point than allowed.
        cd y = a + (t + dt) * (b - a);
        for (const auto& tp : tps_) {
            cd dir = (y - x);
            double proj = std::clamp(std::real((tp.location - x) * std::conj(dir)) / std::norm(dir), 0.0, 1.0);
            if (std::abs(x + proj * dir - tp.location) < 0.5 * tol_)
                throw WkbError(ErrorKind::BranchCollision, "path meets a turning point");
        }
        cd sy = sqrt_near(y, s);
        if (std::abs(sy - s) > 0.5 * std::max(std::abs(s), std::abs(sy)) && dt > 1e-14) {
            // Very rapid relative change: refine by halving until the jump criterion holds.
            double h = dt;
            while (h > 1e-14) {
                h *= 0.5;
                y = a + (t + h) * (b - a);
                sy = sqrt_near(y, s);
                if (std::abs(sy - s) <= 0.5 * std::max(std::abs(s), std::abs(sy))) break;
            }
            dt = h;
        }
        t = (dt >= 1.0 - t) ? 1.0 : t + dt;
        s = sy;
        nodes.push_back({t == 1.0 ? b : y, s});
        if (++guard > 10000000) throw WkbError(ErrorKind::BranchCollision, "branch tracking step budget exceeded");
    }
    return nodes;
}

cd BranchTracker::continue_segment(cd a, cd b, cd seed) const { return track(a, b, seed).back().s; }

cd BranchTracker::integrate_segment(cd a, cd b, cd seed, cd* end_value, double quad_tol) const {
    auto nodes = track(a, b, seed);
    cd total = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        cd x0 = nodes[i].x, x1 = nodes[i + 1].x;
        cd s0 = nodes[i].s, s1 = nodes[i + 1].s;
        cd dx = x1 - x0;
        auto f = [&](double u) -> cd {
            cd ref = s0 + u * (s1 - s0);
            return sqrt_near(x0 + u * dx, ref) * dx;
        };
        double err = 0.0;
        cd piece = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, 0.0, 1.0, 12,
                                                                                 std::max(quad_tol, 1e-15), &err);
        if (!std::isfinite(err) || err > 1e-6 * (1.0 + std::abs(piece)))
            throw WkbError(ErrorKind::QuadratureFailure, "adaptive quadrature did not reach tolerance");
        total += piece;
    }
    if (end_value) *end_value = nodes.back().s;
    return total;
}

cd BranchTracker::continue_path(const BranchedPath& path) const {
    if (path.waypoints.empty()) throw WkbError(ErrorKind::DegenerateInput, "empty path");
    check_seed(path.waypoints.front(), path.sqrtV_seed);
    cd s = path.sqrtV_seed;
    for (std::size_t i = 0; i + 1 < path.waypoints.size(); ++i)
        s = continue_segment(path.waypoints[i], path.waypoints[i + 1], s);
    return s;
}

cd BranchTracker::integrate_path(const BranchedPath& path, cd* end_value, double quad_tol) const {
    if (path.waypoints.empty()) throw WkbError(ErrorKind::DegenerateInput, "empty path");
    check_seed(path.waypoints.front(), path.sqrtV_seed);
    cd s = path.sqrtV_seed;
    cd total = 0.0;
    for (std::size_t i = 0; i + 1 < path.waypoints.size(); ++i)
        total += integrate_segment(path.waypoints[i], path.waypoints[i + 1], s, &s, quad_tol);
    if (end_value) *end_value = s;
    return total;
}

cd sqrt_continuation(const Polynomial& V, const BranchedPath& path) {
    return BranchTracker(V).continue_path(path);
}

cd action_along_path(const Polynomial& V, const BranchedPath& path, double quad_tol) {
    return BranchTracker(V).integrate_path(path, nullptr, quad_tol);
}

}  // namespace wkb
