#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "otdcov/testkit.hpp"

namespace otdcov::cli {

/// Exit codes: 0 success, 2 invalid input, 3 numerical/internal failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidInput = 2;
inline constexpr int kExitNumericalFailure = 3;

/// Runs the otdcov command line (subcommands: test, null-table, grid,
/// power) against explicit streams. `args` excludes the program name.
/// Every command is deterministic given its full flag set and --seed.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parsed dataset file: header x1..x{d1},y1..y{d2}, one observation per row.
struct Dataset {
  Sample x, y;
  std::vector<std::string> warnings;
};

/// Reads and validates a dataset CSV. Sphere margins must have unit rows:
/// within 1e-6 accepted as-is, within 1e-3 renormalized with a warning,
/// otherwise rejected. Errors carry 1-based line numbers.
Dataset read_dataset_csv(const std::string& path, int d1, int d2, Space space);

ScoreSpec parse_euclidean_score(const std::string& text, double biloop_c);
SphereMargin parse_sphere_margin(const std::string& text);
ChartKind parse_chart(const std::string& text);
Variant parse_variant(const std::string& text);
Space parse_space(const std::string& text);

}  // namespace otdcov::cli
