#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "toruslz/eigensolver.hpp"
#include "toruslz/geometry.hpp"

namespace toruslz {

/// |psi|^2 sampled at the cell centres of a G x G grid on [-ell, ell)^2.
/// values[ix * G + iy] belongs to (x_ix, y_iy), x_i = -ell + (i + 1/2) * 2 ell / G.
struct PositionDensity {
  Index grid = 0;
  double ell = 1.0;
  std::vector<double> values;
  double cell_area = 0.0;
  /// sum(values) * cell_area; equals the coefficient norm squared.
  double normalization = 0.0;

  double coordinate(Index i) const noexcept {
    return -ell + (static_cast<double>(i) + 0.5) * (2.0 * ell / static_cast<double>(grid));
  }
};

/// Synthesises psi = sum c_{n1 n2} u_{n1}(x) u_{n2}(y) on the grid with a 2D FFT.
/// Throws UndersampledGrid when G < 2 (2N + 1) and DimensionMismatch when
/// the coefficient count is not (2N+1)^2.
PositionDensity to_position_density(std::span<const Complex> coefficients, int cutoff,
                                    Index grid, const TorusGeometry& geom);

/// Fraction of the density at grid points with x^2 + y^2 < ell^2.
double disk_mass(const PositionDensity& density, const TorusGeometry& geom);

enum class LocalizationLabel { kPpLike, kAcLike, kMixed };

std::string to_string(LocalizationLabel label);

struct LocalizationThresholds {
  /// disk_mass at or above this is PP_LIKE.
  double pp_min_disk_mass = 0.8;
  /// disk_mass at or below this is AC_LIKE.
  double ac_max_disk_mass = 0.2;
};

LocalizationLabel classify(double disk_mass, const LocalizationThresholds& thresholds);

struct LocalizationRecord {
  double lambda = 0.0;
  double disk_mass = 0.0;
  double corner_mass = 0.0;
  LocalizationLabel label = LocalizationLabel::kMixed;
};

struct LocalizationReport {
  int cutoff = 0;
  Index grid = 0;
  double hbar = 1.0;
  LocalizationThresholds thresholds;
  /// Same order as the eigenpairs of the decomposition.
  std::vector<LocalizationRecord> records;
};

/// Position-space disk/corner split of every eigenvector. Throws
/// std::invalid_argument when the decomposition carries no vectors.
LocalizationReport classify_spectrum(const EigenDecomposition& decomp, int cutoff, Index grid,
                                     const LocalizationThresholds& thresholds,
                                     const TorusGeometry& geom,
                                     const PhysicalConstants& consts, unsigned threads = 1);

/// Fourier coefficients <u_{n1} u_{n2} | f> for |n1|, |n2| <= N, by the
/// midpoint rule on a Q x Q grid (spectrally accurate for smooth periodic f).
std::vector<Complex> project_to_basis(const std::function<Complex(double, double)>& f,
                                      int cutoff, Index quadrature_points,
                                      const TorusGeometry& geom);

}  // namespace toruslz
