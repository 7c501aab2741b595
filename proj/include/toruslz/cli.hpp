#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace toruslz::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInternalError = 1,
  kConfigError = 2,
  kNonConvergence = 3,
};

/// Parameters shared by all subcommands. Every field can also be set from a
/// JSON file passed with --config (same key names); explicit flags win.
struct RunConfig {
  double hbar = 1.0;
  double ell = 1.0;
  int cutoff = 16;
  std::vector<int> cutoffs{8, 16, 24, 32};
  std::int64_t grid = 0;  // 0 picks the smallest power of two >= 2 (2N + 1)
  double epsilon = 0.1;
  double pp_min = 0.8;
  double ac_max = 0.2;
  double tolerance = 1e-9;
  std::int64_t dense_limit = 5000;
  std::int64_t num_eigenpairs = 16;
  double bin_width = 0.1;
  std::vector<double> radii;
  double radius = 0.0;
  std::int64_t m_max = 3;
  std::int64_t samples = 100;
  double lambda_max = 0.0;  // 0 picks (m_max + 1) hbar
  double unsafe_aspect = 0.0;
  double duration = 0.0;  // 0 picks 2 pi
  double phi0 = std::numeric_limits<double>::quiet_NaN();  // NaN: first arc inside the box
  bool dump_operator = false;
  bool dump_vectors = false;
  std::int64_t density_index = -1;
  std::string out_dir;
  std::string format = "csv";
  unsigned threads = 1;
};

/// Runs the command line tool; returns the process exit code. Normal output
/// goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace toruslz::cli
