#pragma once
// Tracing of Stokes curves from turning points and the standing-assumption checks.

#include <optional>
#include <string>
#include <vector>

#include "wkb/potential.hpp"

namespace wkb {

struct TraceConfig {
    double step = 0.05;           ///< step as a fraction of the distance to the nearest turning point
    double escape_radius = 0.0;   ///< 0 selects 50 (1 + max |turning point|)
    int max_steps = 20000;
    double launch_radius = 0.0;   ///< 0 selects 0.01 min(1, distance to the nearest other turning point)
    double tol = kDefaultTol;
    double quad_tol = 1e-13;
};

enum class Terminus { Infinity, TurningPointHit };

struct StokesCurve {
    int origin = 0;              ///< index into the turning-point list
    TurningPoint origin_tp;
    Family family = Family::PlusAlpha;
    double angle = 0.0;          ///< +alpha or -alpha
    int branch_index = 0;
    double launch_angle = 0.0;   ///< argument of samples[0] - origin, in [0, 2 pi)
    std::vector<cd> samples;
    std::vector<cd> actions;     ///< S(sample) - S(origin) on the curve's branch; e^{-i angle} * action > 0
    std::vector<cd> sqrt_values; ///< the same branch of sqrt(V) at each sample
    Terminus terminus = Terminus::Infinity;
    int target = -1;             ///< turning point hit, if any
    std::optional<double> asymptotic_direction;
};

struct Window {
    double xmin = -1, xmax = 1, ymin = -1, ymax = 1;
    bool contains(cd x) const { return x.real() >= xmin && x.real() <= xmax && x.imag() >= ymin && x.imag() <= ymax; }
};

struct AssumptionReport {
    bool ok = true;
    std::vector<std::string> violations;
    int crossings = 0;  ///< transversal plus/minus crossings found inside the window
};

struct StokesGeometry {
    Polynomial potential;
    double alpha = 0.0;
    std::vector<TurningPoint> turning_points;
    std::vector<StokesCurve> curves_plus;
    std::vector<StokesCurve> curves_minus;
    bool assumptions_ok = false;
    std::vector<std::string> violations;
    TraceConfig cfg;
    double escape_radius = 0.0;
    double launch_radius = 0.0;

    const std::vector<StokesCurve>& curves(Family f) const { return f == Family::PlusAlpha ? curves_plus : curves_minus; }
};

/// A point on a level line Im(e^{-i theta}(S - S_base)) = 0.
struct LevelSample {
    cd x;
    cd action;
    cd sqrt_value;
};

double default_escape_radius(const std::vector<TurningPoint>& tps);
double default_launch_radius(const std::vector<TurningPoint>& tps, int index);
Window default_window(const std::vector<TurningPoint>& tps);

std::vector<StokesCurve> trace_curves(const BranchTracker& tracker, int tp_index, Family family, double alpha,
                                      const TraceConfig& cfg);

/// Follows the level line from x through increasing e^{-i theta} S until |x| exceeds stop_radius.
/// Returns the samples (first one is x with action 0) or throws BranchCollision if a turning point is met.
std::vector<LevelSample> trace_level_line(const BranchTracker& tracker, cd x, cd sqrt_seed, double theta,
                                          double stop_radius, const TraceConfig& cfg);

StokesGeometry trace_geometry(const Polynomial& V, double alpha, const TraceConfig& cfg = {});

AssumptionReport check_assumptions(const StokesGeometry& geom, const Window& window);

/// Scans alpha_j = (j + 1/2) pi / (2 n) and returns the admissible angle with the largest clearance.
double suggest_alpha(const Polynomial& V, int n_samples, const TraceConfig& cfg = {});

}  // namespace wkb
