#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "toruslz/geometry.hpp"

namespace toruslz {

struct PhysicalConstants {
  double hbar = 1.0;
  explicit PhysicalConstants(double h = 1.0);
};

/// Eigenvalue hbar*m/mu(r) of the fiber operator -i hbar d/dphi on L^2(S_mu(r)).
/// Throws SingularityError at mu(r) = 0 when m != 0.
double fiber_eigenvalue(std::int64_t m, double r, const TorusGeometry& geom,
                        const PhysicalConstants& consts);

/// Normalised fiber eigenfunction exp(i m phi / mu) / sqrt(2 pi mu), with phi
/// the arc-length coordinate on the effective circle of radius mu(r).
std::complex<double> fiber_eigenfunction(std::int64_t m, double r, double phi,
                                         const TorusGeometry& geom);

/// Radius at which branch m reaches lambda; ell when lambda = hbar*m.
double branch_radius(std::int64_t m, double lambda, const TorusGeometry& geom,
                     const PhysicalConstants& consts);

/// Band degeneracy of a spectral value. Values in hbar*Z are pure point and
/// infinitely degenerate, which is reported through `infinite`.
struct Degeneracy {
  std::int64_t count = 0;
  bool infinite = false;
  friend bool operator==(const Degeneracy&, const Degeneracy&) = default;
};

Degeneracy degeneracy(double lambda, const PhysicalConstants& consts);

enum class ClosedEnd { kLow, kHigh };

struct Band {
  double lo = 0.0;
  double hi = 0.0;
  std::int64_t degeneracy = 0;
  ClosedEnd closed_end = ClosedEnd::kLow;
  /// Interval clipped by lambda_max; the clipped end is then closed too.
  bool truncated = false;
};

struct BandStructure {
  double hbar = 1.0;
  double gap_lo = -1.0;
  double gap_hi = 1.0;
  /// Pure point values hbar*k with |k| <= lambda_max / hbar.
  std::vector<std::int64_t> pp_multiples;
  /// Sorted by lo.
  std::vector<Band> bands;
};

BandStructure band_structure(double lambda_max, const PhysicalConstants& consts);

struct BranchSample {
  double r_over_ell = 0.0;
  double lambda = 0.0;
};

struct FiberSpectrum {
  std::int64_t m = 0;
  std::vector<BranchSample> samples;
};

/// Branches m = -m_max..m_max on the uniform grid r/ell = k sqrt(2) / r_samples,
/// k = 0..r_samples-1. Rows are ordered by (m, r).
std::vector<FiberSpectrum> branch_table(std::int64_t m_max, std::int64_t r_samples,
                                        const TorusGeometry& geom,
                                        const PhysicalConstants& consts,
                                        unsigned threads = 1);

/// Same, on a caller-supplied grid of r/ell values.
std::vector<FiberSpectrum> branch_table(std::int64_t m_max,
                                        std::span<const double> r_over_ell,
                                        const TorusGeometry& geom,
                                        const PhysicalConstants& consts,
                                        unsigned threads = 1);

}  // namespace toruslz
