#include "toruslz/analytic_spectrum.hpp"

#include <cmath>
#include <string>

#include "toruslz/errors.hpp"
#include "toruslz/parallel.hpp"

namespace toruslz {

PhysicalConstants::PhysicalConstants(double h) : hbar(h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw DomainError("PhysicalConstants: hbar must be positive and finite");
  }
}

double fiber_eigenvalue(std::int64_t m, double r, const TorusGeometry& geom,
                        const PhysicalConstants& consts) {
  const double ratio = mu(r, geom);
  if (m == 0) return 0.0;
  if (ratio <= 0.0) {
    throw SingularityError("fiber_eigenvalue: mu(r) = 0 at the corner radius");
  }
  return consts.hbar * static_cast<double>(m) / ratio;
}

std::complex<double> fiber_eigenfunction(std::int64_t m, double r, double phi,
                                         const TorusGeometry& geom) {
  const double ratio = mu(r, geom);
  if (ratio <= 0.0) {
    throw SingularityError("fiber_eigenfunction: mu(r) = 0 at the corner radius");
  }
  const double norm = 1.0 / std::sqrt(2.0 * kPi * ratio);
  return std::polar(norm, static_cast<double>(m) * phi / ratio);
}

double branch_radius(std::int64_t m, double lambda, const TorusGeometry& geom,
                     const PhysicalConstants& consts) {
  if (m == 0) throw DomainError("branch_radius: branch m = 0 is flat");
  const double ratio = consts.hbar * static_cast<double>(m) / lambda;
  if (!(ratio > 0.0) || ratio > 1.0) {
    throw DomainError("branch_radius: lambda = " + std::to_string(lambda) +
                      " is not reached by branch m = " + std::to_string(m));
  }
  if (ratio == 1.0) return geom.ell();
  return geom.ell() / std::cos(0.25 * kPi * (1.0 - ratio));
}

Degeneracy degeneracy(double lambda, const PhysicalConstants& consts) {
  const double x = std::abs(lambda) / consts.hbar;
  const double whole = std::floor(x);
  if (whole == x) return {0, true};
  return {static_cast<std::int64_t>(whole), false};
}

BandStructure band_structure(double lambda_max, const PhysicalConstants& consts) {
  const double hbar = consts.hbar;
  if (!(lambda_max > hbar)) {
    throw DomainError("band_structure: lambda_max must exceed hbar");
  }
  BandStructure out;
  out.hbar = hbar;
  out.gap_lo = -hbar;
  out.gap_hi = hbar;

  const auto top = static_cast<std::int64_t>(std::floor(lambda_max / hbar));
  for (std::int64_t k = -top; k <= top; ++k) out.pp_multiples.push_back(k);

  std::vector<Band> positive;
  for (std::int64_t d = 1; hbar * static_cast<double>(d) < lambda_max; ++d) {
    Band b;
    b.lo = hbar * static_cast<double>(d);
    const double full_hi = hbar * static_cast<double>(d + 1);
    b.truncated = full_hi > lambda_max;
    b.hi = b.truncated ? lambda_max : full_hi;
    b.degeneracy = d;
    b.closed_end = ClosedEnd::kLow;
    positive.push_back(b);
  }
  for (auto it = positive.rbegin(); it != positive.rend(); ++it) {
    Band mirrored = *it;
    mirrored.lo = -it->hi;
    mirrored.hi = -it->lo;
    mirrored.closed_end = ClosedEnd::kHigh;
    out.bands.push_back(mirrored);
  }
  out.bands.insert(out.bands.end(), positive.begin(), positive.end());
  return out;
}

std::vector<FiberSpectrum> branch_table(std::int64_t m_max,
                                        std::span<const double> r_over_ell,
                                        [[maybe_unused]] const TorusGeometry& geom,
                                        const PhysicalConstants& consts,
                                        unsigned threads) {
  if (m_max < 1) throw DomainError("branch_table: m_max must be >= 1");
  const auto count = static_cast<std::size_t>(2 * m_max + 1);
  std::vector<FiberSpectrum> table(count);
  const TorusGeometry unit(1.0);
  parallel_for(count, threads, [&](std::size_t i) {
    FiberSpectrum& branch = table[i];
    branch.m = static_cast<std::int64_t>(i) - m_max;
    branch.samples.reserve(r_over_ell.size());
    // Evaluated on the unit torus: the branch depends on r only through r/ell.
    for (double rho : r_over_ell) {
      branch.samples.push_back({rho, fiber_eigenvalue(branch.m, rho, unit, consts)});
    }
  });
  return table;
}

std::vector<FiberSpectrum> branch_table(std::int64_t m_max, std::int64_t r_samples,
                                        const TorusGeometry& geom,
                                        const PhysicalConstants& consts,
                                        unsigned threads) {
  if (r_samples < 2) throw DomainError("branch_table: need at least 2 radial samples");
  std::vector<double> grid(static_cast<std::size_t>(r_samples));
  for (std::int64_t k = 0; k < r_samples; ++k) {
    grid[static_cast<std::size_t>(k)] =
        kSqrt2 * static_cast<double>(k) / static_cast<double>(r_samples);
  }
  return branch_table(m_max, grid, geom, consts, threads);
}

}  // namespace toruslz
