#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "toruslz/analytic_spectrum.hpp"
#include "toruslz/classical_dynamics.hpp"
#include "toruslz/eigensolver.hpp"
#include "toruslz/localization.hpp"

namespace toruslz::io {

using Json = nlohmann::ordered_json;

/// printf("%.12e"); every float in a text artifact goes through this.
std::string format_double(double value);

/// The double that format_double(value) parses back to. JSON numbers are
/// stored rounded so that text artifacts carry exactly 12 significant digits.
double rounded(double value);

/// Serialised JSON text (2-space indent, trailing newline).
std::string dump(const Json& doc);

/// m, r_over_ell, lambda_over_hbar; rows in (m, r) order.
void write_branch_csv(std::ostream& out, std::span<const FiberSpectrum> table, double hbar);

/// {gap: [lo, hi], pp: "integer lattice", bands: [...]}, values in units of hbar.
Json bands_json(const BandStructure& bands);

/// {N, hbar, eigenvalues, residual_bound} plus dimensionless eigenvalues.
Json spectrum_json(const EigenDecomposition& decomp, int cutoff, double hbar);

/// bin_lo, bin_hi, count.
void write_histogram_csv(std::ostream& out, const Histogram& histogram);

/// Thresholds are echoed in '#' header lines before the column row.
void write_localization_csv(std::ostream& out, const LocalizationReport& report);

/// t, x, y, phi, quadrant, event_flag (0 regular, 1 arc end, 2 arc start).
void write_trajectory_csv(std::ostream& out, const OrbitTrace& trace);

/// {r_over_ell, period, mu_measured, winding, n_events}.
Json orbit_json(const Orbit& orbit);

Json sweep_json(std::span<const SweepRow> rows, double epsilon, double hbar);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

/// 8-byte magic followed by the cutoff N as little-endian int64.
constexpr std::array<char, 8> kOperatorMagic{'T', 'L', 'Z', 'O', 'P', '0', '0', '1'};
constexpr std::array<char, 8> kVectorsMagic{'T', 'L', 'Z', 'V', 'E', 'C', '0', '1'};

struct ComplexDump {
  std::array<char, 8> magic{};
  std::int64_t cutoff = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  /// Row-major.
  std::vector<Complex> data;
};

/// Header, then the matrix row-major as little-endian complex128 pairs.
void write_complex_dump(const std::filesystem::path& path, const std::array<char, 8>& magic,
                        std::int64_t cutoff, const Eigen::MatrixXcd& matrix);

/// Inverse of write_complex_dump. rows = (2N+1)^2; cols follows from the file
/// size. Throws std::runtime_error on a malformed file.
ComplexDump read_complex_dump(const std::filesystem::path& path);

/// Flat little-endian float64 grid at `path` and {G, ell} at `path` + ".json".
void write_density(const std::filesystem::path& path, const PositionDensity& density);

/// Writes `contents` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& contents);

}  // namespace toruslz::io
