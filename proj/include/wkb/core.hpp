#pragma once
// Shared scalar types, error kinds and small geometric helpers.

#include <complex>
#include <stdexcept>
#include <string>

namespace wkb {

using cd = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind {
    Parse,
    DegenerateInput,
    NonConvergence,
    BranchCollision,
    QuadratureFailure,
    StepBudgetExceeded,
    LaunchFailure,
    NoAdmissibleAngle,
    NonTransversal,
    DepthExhausted,
    InconsistentBranch,
    MalformedWord,
    UnsupportedRegion,
    NotCovered,
    RegionMismatch,
    NotLocallyNilpotent,
    NotAdjacent,
    AssumptionViolation,
    InvariantFailure,
};

const char* error_kind_name(ErrorKind k);

class WkbError : public std::runtime_error {
public:
    WkbError(ErrorKind kind, const std::string& msg)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

enum class Family { PlusAlpha, MinusAlpha };
enum class Handedness { Left, Right };

inline const char* family_name(Family f) { return f == Family::PlusAlpha ? "plus" : "minus"; }
inline const char* handedness_name(Handedness h) { return h == Handedness::Left ? "left" : "right"; }

/// Angle of the curve family: +alpha or -alpha.
inline double family_angle(Family f, double alpha) { return f == Family::PlusAlpha ? alpha : -alpha; }

/// Coordinates with respect to the edges of the cone K: zeta = u e^{i alpha} + v e^{-i alpha}.
/// K is the closed first quadrant u, v >= 0.
struct KCoords {
    double u = 0.0;
    double v = 0.0;
};

inline KCoords to_k(cd zeta, double alpha) {
    double s2 = std::sin(2.0 * alpha);
    return {std::imag(std::polar(1.0, alpha) * zeta) / s2, -std::imag(std::polar(1.0, -alpha) * zeta) / s2};
}

inline cd from_k(KCoords k, double alpha) {
    return k.u * std::polar(1.0, alpha) + k.v * std::polar(1.0, -alpha);
}

/// Membership in the closed cone K with a relative angle tolerance at the boundary.
bool in_cone(cd zeta, double alpha, double scale = 1.0);
/// Membership in the interior of K.
bool in_cone_interior(cd zeta, double alpha, double scale = 1.0);

/// Parses a complex literal: "a", "bi", "a+bi", "a-bi", "i", with "p/q" allowed for each part.
cd parse_complex(const std::string& text);

}  // namespace wkb
