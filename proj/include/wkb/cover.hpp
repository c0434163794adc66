#pragma once
// Strip decomposition of the universal cover: regions of the Stokes graph, strip trees with
// apex-labelled boundary rays, and the parallelogram cells where the two families meet.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wkb/stokes.hpp"

namespace wkb {

// ---------------------------------------------------------------------------------------------
// Regions of C minus the curves of one family.

struct RegionSector {
    int tp = -1;
    int exit_curve = -1;   ///< curve c: the region lies on its counterclockwise side
    int entry_curve = -1;  ///< curve e = successor of c around the turning point
};

struct Region {
    int id = 0;
    std::vector<RegionSector> sectors;  ///< 0 (plane), 1 (half-plane) or 2 (strip)
    std::vector<cd> sector_action;      ///< A_R at each sector's turning point; A_R = 0 at the first
    std::map<int, int> eta;             ///< curve -> +-1: the region branch equals eta times the curve branch
    double height = 0.0;                ///< width of the strip image (strips only)

    bool is_plane() const { return sectors.empty(); }
    bool is_strip() const { return sectors.size() == 2; }
    std::vector<int> boundary_curves() const;
};

struct RegionDecomposition {
    Family family = Family::PlusAlpha;
    double theta = 0.0;
    double arc_radius = 0.0;
    std::vector<Region> regions;
    std::vector<int> exit_region;   ///< per curve: region where it is an exit curve
    std::vector<int> entry_region;  ///< per curve: region where it is an entry curve
    std::vector<int> exit_sector;   ///< per curve: sector index inside exit_region
    std::vector<cd> q_point;        ///< crossing of each curve with the arc circle
    std::vector<cd> q_action;       ///< S_C at the crossing
    std::vector<cd> q_sqrt;         ///< curve branch of sqrt(V) at the crossing
    std::vector<int> order_at_infinity;
    cd plane_root = 1.0;            ///< sqrt of the constant potential (plane case)

    int other_region(int curve, int region) const {
        return exit_region[curve] == region ? entry_region[curve] : exit_region[curve];
    }
};

/// Builds the region decomposition for one family. min_radius forces the arc circle outside
/// a given point (used to keep the base point inside).
RegionDecomposition build_regions(const StokesGeometry& geom, Family family, double min_radius = 0.0);

/// Euler characteristic check of the Stokes graph (turning points + infinity as vertices).
bool euler_check(const StokesGeometry& geom, const RegionDecomposition& dec);

// ---------------------------------------------------------------------------------------------
// Strip complexes.

/// Open interval in the transverse coordinate of a family (v for PlusAlpha, u for MinusAlpha).
struct Band {
    std::optional<double> lo;
    std::optional<double> hi;
    bool contains(double t, double eps = 0.0) const {
        return (!lo || t > *lo + eps) && (!hi || t < *hi - eps);
    }
};

struct Ray {
    int id = 0;
    Family family = Family::PlusAlpha;
    cd c_hat;
    Handedness handedness = Handedness::Right;
    int strips[2] = {-1, -1};  ///< second entry -1 marks a frontier ray at the truncation depth
    int curve = -1;            ///< generating curve (numeric) or puncture ray (synthetic)
    int tp = -1;

    bool frontier() const { return strips[1] < 0; }
    int other(int strip) const { return strips[0] == strip ? strips[1] : strips[0]; }
};

enum class ShapeType { Plane, HalfPlaneUpper, HalfPlaneLower, Strip };

struct Strip {
    int id = 0;
    Family family = Family::PlusAlpha;
    int region = -1;
    std::vector<int> deck_word;  ///< curves (or synthetic rays) crossed from the root
    int depth = 0;
    int parent_ray = -1;
    int sign = 1;                ///< z = sign * A_region + shift on this strip (numeric)
    cd shift = 0.0;
    Band band;
    std::vector<int> rays;
};

struct StripComplex {
    Family family = Family::PlusAlpha;
    double alpha = 0.0;
    int root = 0;
    int depth = 0;
    cd z_x0 = 0.0;
    std::vector<Strip> strips;
    std::vector<Ray> rays;

    /// Transverse coordinate of a z-plane point for this family.
    double transverse(cd zeta) const;
    /// Coordinate along the family's lines.
    double along(cd zeta) const;
    /// +1 if the strip lies on the side of larger transverse coordinate of the ray's line.
    int side(int strip, int ray) const;
    /// True if strip b lies above strip a across their common ray (larger Im(e^{-i theta} z)).
    bool above(int b, int a, int ray) const;
    ShapeType shape(int strip) const;
};

/// Diagnostics of the structural invariants: tree, handedness, apex placement.
std::vector<std::string> verify_complex(const StripComplex& cx);
bool is_tree(const StripComplex& cx);

// ---------------------------------------------------------------------------------------------
// Numeric covers built from traced geometry.

class NumericCover {
public:
    NumericCover(const StokesGeometry& geom, cd x0);

    const StokesGeometry& geometry() const { return geom_; }
    const RegionDecomposition& regions(Family f) const { return f == Family::PlusAlpha ? plus_ : minus_; }
    const BranchTracker& tracker() const { return tracker_; }
    cd x0() const { return x0_; }
    cd z_x0() const { return z_x0_; }
    int root_region(Family f) const { return f == Family::PlusAlpha ? root_plus_ : root_minus_; }

    StripComplex build(Family f, int depth) const;

    struct Located {
        int strip = -1;
        cd z;
    };
    /// Strip of the complex containing x (reached along the segment x0 -> x) and z(x).
    Located locate(const StripComplex& cx, cd x) const;

    /// Replays deck words and returns the worst (sign, shift) mismatch.
    double deck_roundtrip_residual(const StripComplex& cx) const;

private:
    struct RootData {
        int region;
        cd action;  // A_R(x0)
        int mu;     // region branch at x0 = mu * principal sqrt(V(x0))
    };
    RootData locate_root(const RegionDecomposition& dec) const;

    StokesGeometry geom_;
    BranchTracker tracker_;
    cd x0_;
    RegionDecomposition plus_, minus_;
    int root_plus_ = 0, root_minus_ = 0;
    int mu_plus_ = 1, mu_minus_ = 1;
    cd z_x0_;
    cd shift_minus_;
};

// ---------------------------------------------------------------------------------------------
// Exact synthetic geometries.

/// Universal cover of C minus finitely many punctures, with z the identity. Each puncture
/// carries two rays per family (its alpha- and -alpha-lines). Punctures must have distinct
/// transverse coordinates in both families.
class FlatModel {
public:
    FlatModel(double alpha, std::vector<cd> punctures, cd x0);

    StripComplex build(Family f, int depth) const;
    /// Number of (face, homotopy class) collisions seen while building; zero for a tree.
    int collisions(Family f, int depth) const;
    NumericCover::Located locate(const StripComplex& cx, cd x) const;

    double alpha() const { return alpha_; }
    const std::vector<cd>& punctures() const { return punctures_; }
    cd x0() const { return x0_; }

private:
    StripComplex build_impl(Family f, int depth, int* collisions) const;

    double alpha_;
    std::vector<cd> punctures_;
    cd x0_;
};

/// Loads a synthetic complex description (JSON text). Returns one complex per family present.
struct SyntheticInput {
    double alpha = 0.0;
    cd z_x0 = 0.0;
    std::optional<StripComplex> plus;
    std::optional<StripComplex> minus;
};
SyntheticInput load_synthetic(const std::string& json_text);

// ---------------------------------------------------------------------------------------------
// Cells.

struct Cell {
    int id = 0;
    int alpha_strip = -1;
    int minus_alpha_strip = -1;
    std::optional<cd> corner_A;
    std::optional<cd> corner_C;
    std::optional<cd> epsilon;
    std::vector<cd> vertices;
    /// K-coordinate bounds of the parallelogram.
    std::optional<double> u_lo, u_hi, v_lo, v_hi;
    bool bounded() const { return corner_A && corner_C; }
};

struct CellComplex {
    const StripComplex* plus = nullptr;
    const StripComplex* minus = nullptr;
    std::vector<Cell> cells;
    std::map<std::pair<int, int>, int> index;       ///< (P, Pi) -> cell id
    std::map<int, std::vector<int>> walk;           ///< Pi -> alpha strips left to right
    std::map<int, bool> walk_complete;              ///< Pi -> walk reached both half-plane ends

    std::optional<int> find(int P, int Pi) const {
        auto it = index.find({P, Pi});
        if (it == index.end()) return std::nullopt;
        return it->second;
    }
};

CellComplex intersect_complexes(const StripComplex& plus, const StripComplex& minus);

}  // namespace wkb
