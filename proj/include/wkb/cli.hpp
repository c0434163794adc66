#pragma once
// Command-line driver: configuration, subcommands and exit codes.

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wkb {

/// Options shared by all subcommands. Field names match the config-file keys and the flags.
struct RunConfig {
    std::string command;
    std::string potential;
    std::string alpha = "auto";
    std::string x0 = "auto";
    std::string x_eval;  ///< empty: same as x0
    int depth = 2;
    std::optional<std::array<double, 4>> window;
    double step = 0.05;
    double escape_radius = 0.0;
    int max_steps = 20000;
    double tol = 1e-9;
    double quad_tol = 1e-13;
    std::string output;  ///< directory; empty writes to standard output
    std::string format = "json";
    bool force = false;
    std::string u_center;  ///< s-plane point, complex literal
    double u_radius = 0.0;
    std::string synthetic;
};

/// Exit codes: 0 success, 1 pipeline failure, 2 parse/usage error, 3 assumption failure,
/// 4 invariant failure. Error records are written to err as one JSON object.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wkb
