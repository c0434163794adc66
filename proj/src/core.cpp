#include "wkb/core.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace wkb {

const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::Parse: return "parse";
        case ErrorKind::DegenerateInput: return "degenerate_input";
        case ErrorKind::NonConvergence: return "non_convergence";
        case ErrorKind::BranchCollision: return "branch_collision";
        case ErrorKind::QuadratureFailure: return "quadrature_failure";
        case ErrorKind::StepBudgetExceeded: return "step_budget_exceeded";
        case ErrorKind::LaunchFailure: return "launch_failure";
        case ErrorKind::NoAdmissibleAngle: return "no_admissible_angle";
        case ErrorKind::NonTransversal: return "non_transversal";
        case ErrorKind::DepthExhausted: return "depth_exhausted";
        case ErrorKind::InconsistentBranch: return "inconsistent_branch";
        case ErrorKind::MalformedWord: return "malformed_word";
        case ErrorKind::UnsupportedRegion: return "unsupported_region";
        case ErrorKind::NotCovered: return "not_covered";
        case ErrorKind::RegionMismatch: return "region_mismatch";
        case ErrorKind::NotLocallyNilpotent: return "not_locally_nilpotent";
        case ErrorKind::NotAdjacent: return "not_adjacent";
        case ErrorKind::AssumptionViolation: return "assumption_violation";
        case ErrorKind::InvariantFailure: return "invariant_failure";
    }
    return "unknown";
}

namespace {

constexpr double kAngleTol = 1e-9;

double parse_real(const std::string& s) {
    if (s.empty()) throw WkbError(ErrorKind::Parse, "empty number");
    auto slash = s.find('/');
    auto parse_plain = [](const std::string& t) {
        if (t.empty()) throw WkbError(ErrorKind::Parse, "empty number");
        char* end = nullptr;
        double v = std::strtod(t.c_str(), &end);
        if (end != t.c_str() + t.size() || !std::isfinite(v))
            throw WkbError(ErrorKind::Parse, "bad number '" + t + "'");
        return v;
    };
    if (slash == std::string::npos) return parse_plain(s);
    double p = parse_plain(s.substr(0, slash));
    double q = parse_plain(s.substr(slash + 1));
    if (q == 0.0) throw WkbError(ErrorKind::Parse, "zero denominator in '" + s + "'");
    return p / q;
}

}  // namespace

bool in_cone(cd zeta, double alpha, double scale) {
    if (std::abs(zeta) <= 1e-12 * std::max(1.0, scale)) return true;
    return std::abs(std::arg(zeta)) <= alpha + kAngleTol;
}

bool in_cone_interior(cd zeta, double alpha, double scale) {
    if (std::abs(zeta) <= 1e-12 * std::max(1.0, scale)) return false;
    return std::abs(std::arg(zeta)) < alpha - kAngleTol;
}

cd parse_complex(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw WkbError(ErrorKind::Parse, "empty complex literal");
    if (s.back() != 'i' && s.back() != 'j') return {parse_real(s), 0.0};
    std::string body = s.substr(0, s.size() - 1);
    // Split at the last sign that is not part of an exponent.
    std::size_t split = std::string::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    std::string re_part = split == std::string::npos ? "" : body.substr(0, split);
    std::string im_part = split == std::string::npos ? body : body.substr(split);
    double im;
    if (im_part.empty() || im_part == "+") im = 1.0;
    else if (im_part == "-") im = -1.0;
    else im = parse_real(im_part[0] == '+' ? im_part.substr(1) : im_part);
    double re = re_part.empty() ? 0.0 : parse_real(re_part);
    return {re, im};
}

}  // namespace wkb
