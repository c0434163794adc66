#pragma once
// Polynomial potentials, turning points, square-root continuation and action integrals.

#include <string>
#include <vector>

#include "wkb/core.hpp"

namespace wkb {

/// Complex polynomial with coefficients in ascending degree. Trailing zeros are trimmed;
/// the zero polynomial has no coefficients.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<cd> coeffs);

    /// Parses a comma-separated list of complex literals (ascending degree).
    static Polynomial parse(const std::string& text);

    const std::vector<cd>& coeffs() const { return coeffs_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const { return coeffs_.empty(); }
    double max_abs_coeff() const;

    cd operator()(cd x) const;
    Polynomial derivative(int order = 1) const;
    /// Coefficient of (x-w)^k in the Taylor expansion at w.
    cd taylor_coeff(cd w, int k) const;

private:
    std::vector<cd> coeffs_;
};

struct TurningPoint {
    cd location;
    int multiplicity = 1;
};

struct BranchedPath {
    std::vector<cd> waypoints;
    cd sqrtV_seed;
};

constexpr double kDefaultTol = 1e-9;
constexpr double kDefaultQuadTol = 1e-10;

/// All distinct zeros with multiplicities, sorted by (real, imag).
std::vector<TurningPoint> find_turning_points(const Polynomial& V, double tol = kDefaultTol);

/// Tracks a continuous branch of sqrt(V) along polylines and integrates it.
/// Holds the turning points so repeated queries do not recompute them.
class BranchTracker {
public:
    BranchTracker(Polynomial V, std::vector<TurningPoint> tps, double tol = kDefaultTol);
    explicit BranchTracker(const Polynomial& V, double tol = kDefaultTol);

    const Polynomial& potential() const { return V_; }
    const std::vector<TurningPoint>& turning_points() const { return tps_; }

    /// Branch of sqrt(V) at x closest to the reference value.
    cd sqrt_near(cd x, cd reference) const;
    /// Distance from x to the nearest turning point (infinity if none).
    double distance_to_tp(cd x) const;

    /// Value of sqrt(V) at b continued along the straight segment a->b.
    cd continue_segment(cd a, cd b, cd seed) const;
    /// Integral of sqrt(V) along the segment a->b; the continued end value is stored in end_value.
    cd integrate_segment(cd a, cd b, cd seed, cd* end_value, double quad_tol = kDefaultQuadTol) const;

    cd continue_path(const BranchedPath& path) const;
    cd integrate_path(const BranchedPath& path, cd* end_value = nullptr,
                      double quad_tol = kDefaultQuadTol) const;

private:
    struct Node {
        cd x;
        cd s;
    };
    std::vector<Node> track(cd a, cd b, cd seed) const;
    void check_seed(cd x, cd seed) const;

    Polynomial V_;
    std::vector<TurningPoint> tps_;
    double tol_;
};

cd sqrt_continuation(const Polynomial& V, const BranchedPath& path);
cd action_along_path(const Polynomial& V, const BranchedPath& path, double quad_tol = kDefaultQuadTol);

}  // namespace wkb
