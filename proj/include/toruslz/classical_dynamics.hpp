#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "toruslz/analytic_spectrum.hpp"
#include "toruslz/geometry.hpp"

namespace toruslz {

/// Point moving under the rotation flow x' = -y, y' = x (unit angular speed).
struct ClassicalState {
  /// Wrapped into the fundamental domain.
  Point2 position;
  /// Distance from the rotation centre; conserved by the flow.
  double r = 0.0;
  /// Polar angle of the position, in [0, 2 pi) and inside Gamma_r.
  double phi = 0.0;
};

/// Builds a state at (r cos phi, r sin phi). Throws DomainError when r is
/// outside (0, sqrt(2) ell] or phi is not in Gamma_r.
ClassicalState make_state(double r, double phi, const TorusGeometry& geom);

/// Advances the flow by dt (any sign). Wraps at |x| = ell or |y| = ell are
/// applied in closed form from theta_r; there is no time stepping. Throws
/// DomainError at r = sqrt(2) ell, where every arc has zero length.
ClassicalState evolve(const ClassicalState& state, double dt, const TorusGeometry& geom);

/// One arc of an orbit and the jump applied when it ends.
struct ArcEvent {
  double start_angle = 0.0;
  double end_angle = 0.0;
  int quadrant = 0;
  /// Polar-angle jump at the end of the arc; 0 for the circular regime.
  double jump = 0.0;
  /// Flow time at which the arc ends.
  double end_time = 0.0;
};

struct Orbit {
  double r = 0.0;
  double r_over_ell = 0.0;
  std::vector<ArcEvent> events;
  /// First return time at unit angular speed.
  double period = 0.0;
  double mu_measured = 0.0;
  /// Total signed polar angle swept per period, continuous arcs plus jumps.
  double swept_angle = 0.0;
  int winding = 0;
  std::size_t wrap_count = 0;
};

enum class SampleKind : int { kRegular = 0, kArcEnd = 1, kArcStart = 2 };

struct TrajectorySample {
  double t = 0.0;
  Point2 position;
  double phi = 0.0;
  int quadrant = 0;
  SampleKind kind = SampleKind::kRegular;
};

struct OrbitTrace {
  Orbit orbit;
  /// `samples` uniform times in [0, T) plus two rows at every wrap: the arc
  /// end on the boundary (before wrapping) and the arc start after the jump.
  std::vector<TrajectorySample> trajectory;
};

/// Traces one full period starting from phi = 0 (r <= ell) or phi = theta_r
/// (r > ell). Throws DomainError unless 0 < r < sqrt(2) ell.
OrbitTrace trace_orbit(double r, const TorusGeometry& geom, std::size_t samples);

/// round(swept_angle / 2 pi): +1 for circular orbits, -1 for edge orbits.
int winding_number(const Orbit& orbit);

/// Bohr-Sommerfeld level: m wavelengths on an orbit of circumference
/// 2 pi r mu(r) give L_z = r p = hbar m / mu(r).
double semiclassical_level(std::int64_t m, double r, const TorusGeometry& geom,
                           const PhysicalConstants& consts);

/// de Broglie wavelength 2 pi r mu(r) / |m| of the m-th semiclassical orbit.
double de_broglie_wavelength(std::int64_t m, double r, const TorusGeometry& geom);

/// Rectangular torus [-ell_x, ell_x) x [-ell_y, ell_y). Only reachable from
/// the CLI behind --unsafe-aspect: orbits need not close and none of the
/// square-torus invariants (period law, winding, event count) are promised.
struct RectangularTorus {
  double ell_x = 1.0;
  double ell_y = 1.0;
};

/// Forward-only (dt >= 0) event-driven flow on a rectangular torus.
ClassicalState evolve_rectangular(const ClassicalState& state, double dt,
                                  const RectangularTorus& box);

/// Whether the circle point at angle phi lies in the closed box.
bool in_box(double r, double phi, const RectangularTorus& box);

/// Midpoint of the first arc of the radius-r circle that lies inside the box.
/// Throws DomainError when no arc does (r beyond the box corner).
double rectangular_start_angle(double r, const RectangularTorus& box);

/// Samples the flow for `duration` starting at angle phi0, which must satisfy
/// in_box; `orbit.period` is
/// set to `duration` and `winding` counts swept turns over that window.
OrbitTrace trace_rectangular(double r, double phi0, double duration, std::size_t samples,
                             const RectangularTorus& box);

}  // namespace toruslz
