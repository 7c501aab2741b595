#include "toruslz/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "toruslz/errors.hpp"

namespace toruslz {

namespace {

double wrap_coordinate(double v, double ell) {
  const double side = 2.0 * ell;
  double shifted = std::fmod(v + ell, side);
  if (shifted < 0.0) shifted += side;
  double out = shifted - ell;
  // fmod can land exactly on +ell after the shift when v + ell is a tiny
  // negative number; fold it back into the half-open domain.
  if (out >= ell) out -= side;
  return out;
}

void require_radius(double r, const TorusGeometry& geom, const char* op) {
  if (!(r >= 0.0) || r > geom.max_radius()) {
    throw DomainError(std::string(op) + ": radius " + std::to_string(r) +
                      " outside [0, sqrt(2)*ell]");
  }
}

}  // namespace

TorusGeometry::TorusGeometry(double ell) : ell_(ell) {
  if (!(ell > 0.0) || !std::isfinite(ell)) {
    throw DomainError("TorusGeometry: ell must be positive and finite");
  }
}

bool AngularRange::contains(double phi) const {
  const double a = normalize_angle(phi);
  return std::any_of(segments.begin(), segments.end(),
                     [a](const AngleInterval& s) { return a >= s.lo && a < s.hi; });
}

Point2 wrap(Point2 point, const TorusGeometry& geom) {
  return {wrap_coordinate(point.x, geom.ell()), wrap_coordinate(point.y, geom.ell())};
}

double normalize_angle(double phi) {
  constexpr double kTwoPi = 2.0 * kPi;
  double a = std::fmod(phi, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

double theta_r(double r, const TorusGeometry& geom) {
  if (!(r >= geom.ell()) || r > geom.max_radius()) {
    throw DomainError("theta_r: radius " + std::to_string(r) +
                      " outside [ell, sqrt(2)*ell]");
  }
  const double c = std::clamp(geom.ell() / r, -1.0, 1.0);
  return std::acos(c);
}

double mu(double r, const TorusGeometry& geom) {
  require_radius(r, geom, "mu");
  if (r < geom.ell()) return 1.0;
  return std::max(0.0, 1.0 - (4.0 / kPi) * theta_r(r, geom));
}

AngularRange gamma_segments(double r, const TorusGeometry& geom) {
  if (!(r > 0.0) || r > geom.max_radius()) {
    throw DomainError("gamma_segments: radius " + std::to_string(r) +
                      " outside (0, sqrt(2)*ell]");
  }
  AngularRange range;
  if (r < geom.ell()) {
    range.segments.push_back({0.0, 2.0 * kPi});
    range.total_measure = 2.0 * kPi;
    return range;
  }
  const double theta = theta_r(r, geom);
  const double quarter = kPi / 2.0;
  range.segments.reserve(4);
  for (int j = 0; j < 4; ++j) {
    const double lo = j * quarter + theta;
    const double hi = std::max(lo, (j + 1) * quarter - theta);
    range.segments.push_back({lo, hi});
  }
  range.total_measure = 2.0 * kPi * mu(r, geom);
  return range;
}

}  // namespace toruslz
