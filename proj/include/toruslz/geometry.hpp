#pragma once

#include <array>
#include <numbers>
#include <vector>

namespace toruslz {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrt2 = std::numbers::sqrt2;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Flat square torus with fundamental domain [-ell, ell)^2.
class TorusGeometry {
 public:
  explicit TorusGeometry(double ell = 1.0);

  double ell() const noexcept { return ell_; }
  double side() const noexcept { return 2.0 * ell_; }
  /// Largest distance from the rotation centre, sqrt(2) * ell.
  double max_radius() const noexcept { return kSqrt2 * ell_; }

 private:
  double ell_;
};

/// Half-open angle interval [lo, hi) in radians.
struct AngleInterval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const noexcept { return hi - lo; }
};

/// Set of polar angles phi for which (r cos phi, r sin phi) lies in the
/// fundamental square. Angles are represented in [0, 2 pi).
struct AngularRange {
  std::vector<AngleInterval> segments;
  double total_measure = 0.0;

  /// Membership of an arbitrary angle (reduced mod 2 pi first).
  bool contains(double phi) const;
};

/// Reduce each coordinate into [-ell, ell).
Point2 wrap(Point2 point, const TorusGeometry& geom);

/// Reduce an angle into [0, 2 pi).
double normalize_angle(double phi);

/// Boundary angle arccos(ell / r); requires ell <= r <= sqrt(2) ell.
double theta_r(double r, const TorusGeometry& geom);

/// Effective circumference ratio |Gamma_r| / 2 pi; requires 0 <= r <= sqrt(2) ell.
double mu(double r, const TorusGeometry& geom);

/// Gamma_r: one full circle for r < ell, four arcs
/// [j pi/2 + theta_r, (j+1) pi/2 - theta_r) for ell <= r <= sqrt(2) ell.
AngularRange gamma_segments(double r, const TorusGeometry& geom);

}  // namespace toruslz
