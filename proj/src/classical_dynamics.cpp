#include "toruslz/classical_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "toruslz/errors.hpp"

namespace toruslz {

namespace {

constexpr double kQuarter = kPi / 2.0;
constexpr double kTwoPi = 2.0 * kPi;

Point2 polar_point(double r, double phi) { return {r * std::cos(phi), r * std::sin(phi)}; }

int quadrant_of(double phi) {
  return std::clamp(static_cast<int>(std::floor(normalize_angle(phi) / kQuarter)), 0, 3);
}

// Edge orbits (ell < r < sqrt(2) ell) visit the arcs in quadrant order
// 0, 3, 2, 1: leaving quadrant j through its upper end wraps the position
// onto the start of quadrant j - 1. Arc-length coordinate s in [0, 4a)
// counts along that cycle.
struct EdgeCycle {
  double theta = 0.0;
  double arc = 0.0;  // pi/2 - 2 theta

  static EdgeCycle make(double r, const TorusGeometry& geom) {
    EdgeCycle c;
    c.theta = theta_r(r, geom);
    c.arc = kQuarter - 2.0 * c.theta;
    if (!(c.arc > 0.0)) {
      throw DomainError("evolve: r = sqrt(2) ell is a fixed point set (zero-length arcs)");
    }
    return c;
  }

  double period() const { return 4.0 * arc; }
  static int quadrant_at(int cycle_index) { return (4 - cycle_index) % 4; }
  double start_angle(int quadrant) const { return quadrant * kQuarter + theta; }
  double end_angle(int quadrant) const { return (quadrant + 1) * kQuarter - theta; }

  double to_cycle(double phi) const {
    const double a = normalize_angle(phi);
    const int j = std::clamp(static_cast<int>(std::floor((a - theta) / kQuarter)), 0, 3);
    const double offset = std::clamp(a - start_angle(j), 0.0, arc);
    const int c = (4 - j) % 4;
    return c * arc + offset;
  }

  double from_cycle(double s) const {
    const int c = std::clamp(static_cast<int>(std::floor(s / arc)), 0, 3);
    const double offset = std::clamp(s - c * arc, 0.0, arc);
    return start_angle(quadrant_at(c)) + offset;
  }
};

double reduce(double s, double period) {
  double out = std::fmod(s, period);
  if (out < 0.0) out += period;
  if (out >= period) out = 0.0;
  return out;
}

ClassicalState state_at(double r, double phi, const TorusGeometry& geom) {
  ClassicalState s;
  s.r = r;
  s.phi = normalize_angle(phi);
  s.position = wrap(polar_point(r, s.phi), geom);
  return s;
}

void check_orbit_radius(double r, const TorusGeometry& geom) {
  if (!(r > 0.0) || !(r < geom.max_radius())) {
    throw DomainError("trace_orbit: radius " + std::to_string(r) +
                      " outside (0, sqrt(2)*ell)");
  }
}

// Rectangular boxes ---------------------------------------------------------

double wrap_coordinate(double v, double half) {
  const double side = 2.0 * half;
  double shifted = std::fmod(v + half, side);
  if (shifted < 0.0) shifted += side;
  double out = shifted - half;
  if (out >= half) out -= side;
  return out;
}

struct WallHit {
  double delta = std::numeric_limits<double>::infinity();
  double exit_angle = 0.0;
  Point2 entry;
};

// First outward wall crossing of the circle of radius r after angle phi.
WallHit next_wall(double r, double phi, const RectangularTorus& box) {
  WallHit best;
  auto consider = [&](double target, Point2 entry) {
    double delta = normalize_angle(target - phi);
    if (delta < 1e-13) delta += kTwoPi;
    if (delta < best.delta) {
      best.delta = delta;
      best.exit_angle = target;
      best.entry = entry;
    }
  };
  if (r > box.ell_x) {
    const double alpha = std::acos(box.ell_x / r);
    const double y = r * std::sin(alpha);
    consider(-alpha, {-box.ell_x, -y});          // leaves through x = +ell_x
    consider(kPi - alpha, {box.ell_x, y});       // leaves through x = -ell_x
  }
  if (r > box.ell_y) {
    const double beta = std::asin(box.ell_y / r);
    const double x = r * std::cos(beta);
    consider(beta, {x, -box.ell_y});             // leaves through y = +ell_y
    consider(kPi + beta, {-x, box.ell_y});       // leaves through y = -ell_y
  }
  return best;
}

double advance_rectangular(double r, double phi, double dt, const RectangularTorus& box,
                           double t0, std::vector<ArcEvent>* events, double* swept) {
  double remaining = dt;
  double t = t0;
  double arc_start = phi;
  // Each wrap consumes at least the shortest arc, so this only guards
  // against degenerate tangent configurations.
  for (std::size_t guard = 0; guard < 100000000; ++guard) {
    const WallHit hit = next_wall(r, phi, box);
    if (!(hit.delta <= remaining)) {
      if (swept) *swept += remaining;
      return normalize_angle(phi + remaining);
    }
    remaining -= hit.delta;
    t += hit.delta;
    const double next_phi = normalize_angle(std::atan2(hit.entry.y, hit.entry.x));
    double jump = next_phi - normalize_angle(hit.exit_angle);
    jump = std::remainder(jump, kTwoPi);
    if (swept) *swept += hit.delta + jump;
    if (events) {
      events->push_back({normalize_angle(arc_start), normalize_angle(hit.exit_angle),
                         quadrant_of(arc_start), jump, t});
    }
    phi = next_phi;
    arc_start = phi;
  }
  throw DomainError("evolve_rectangular: wrap limit exceeded");
}

}  // namespace

ClassicalState make_state(double r, double phi, const TorusGeometry& geom) {
  if (!(r > 0.0) || r > geom.max_radius()) {
    throw DomainError("make_state: radius outside (0, sqrt(2)*ell]");
  }
  if (r > geom.ell() && !gamma_segments(r, geom).contains(phi)) {
    throw DomainError("make_state: angle not in Gamma_r");
  }
  return state_at(r, phi, geom);
}

ClassicalState evolve(const ClassicalState& state, double dt, const TorusGeometry& geom) {
  if (state.r <= geom.ell()) return state_at(state.r, state.phi + dt, geom);
  const EdgeCycle cycle = EdgeCycle::make(state.r, geom);
  const double s = reduce(cycle.to_cycle(state.phi) + dt, cycle.period());
  return state_at(state.r, cycle.from_cycle(s), geom);
}

OrbitTrace trace_orbit(double r, const TorusGeometry& geom, std::size_t samples) {
  check_orbit_radius(r, geom);
  OrbitTrace trace;
  Orbit& orbit = trace.orbit;
  orbit.r = r;
  orbit.r_over_ell = r / geom.ell();

  if (r <= geom.ell()) {
    orbit.period = kTwoPi;
    orbit.events.push_back({0.0, kTwoPi, 0, 0.0, kTwoPi});
    orbit.swept_angle = kTwoPi;
    orbit.wrap_count = 0;
  } else {
    const EdgeCycle cycle = EdgeCycle::make(r, geom);
    orbit.period = cycle.period();
    for (int c = 0; c < 4; ++c) {
      const int j = EdgeCycle::quadrant_at(c);
      ArcEvent e;
      e.start_angle = cycle.start_angle(j);
      e.end_angle = cycle.end_angle(j);
      e.quadrant = j;
      // Wrapping (x, ell) to (x, -ell) etc. maps the arc end onto the next start.
      e.jump = 2.0 * cycle.theta - kPi;
      e.end_time = (c + 1) * cycle.arc;
      orbit.swept_angle += (e.end_angle - e.start_angle) + e.jump;
      orbit.events.push_back(e);
    }
    orbit.wrap_count = 4;
  }
  orbit.mu_measured = orbit.period / kTwoPi;
  orbit.winding = winding_number(orbit);

  const ClassicalState start =
      state_at(r, r <= geom.ell() ? 0.0 : theta_r(r, geom), geom);
  struct Row {
    TrajectorySample sample;
    int rank;
  };
  std::vector<Row> rows;
  rows.reserve(samples + 2 * orbit.wrap_count);
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = orbit.period * static_cast<double>(k) / static_cast<double>(samples);
    const ClassicalState s = evolve(start, t, geom);
    rows.push_back({{t, s.position, s.phi, quadrant_of(s.phi), SampleKind::kRegular}, 2});
  }
  if (orbit.wrap_count > 0) {
    for (std::size_t i = 0; i < orbit.events.size(); ++i) {
      const ArcEvent& e = orbit.events[i];
      const ArcEvent& next = orbit.events[(i + 1) % orbit.events.size()];
      rows.push_back({{e.end_time, polar_point(r, e.end_angle), e.end_angle, e.quadrant,
                       SampleKind::kArcEnd},
                      0});
      const ClassicalState after = state_at(r, next.start_angle, geom);
      rows.push_back(
          {{e.end_time, after.position, after.phi, next.quadrant, SampleKind::kArcStart}, 1});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.sample.t != b.sample.t) return a.sample.t < b.sample.t;
    return a.rank < b.rank;
  });
  trace.trajectory.reserve(rows.size());
  for (const Row& row : rows) trace.trajectory.push_back(row.sample);
  return trace;
}

int winding_number(const Orbit& orbit) {
  return static_cast<int>(std::lround(orbit.swept_angle / kTwoPi));
}

double semiclassical_level(std::int64_t m, double r, const TorusGeometry& geom,
                           const PhysicalConstants& consts) {
  const double ratio = mu(r, geom);
  if (m == 0) return 0.0;
  if (ratio <= 0.0) throw SingularityError("semiclassical_level: orbit has zero length");
  return consts.hbar * static_cast<double>(m) / ratio;
}

double de_broglie_wavelength(std::int64_t m, double r, const TorusGeometry& geom) {
  if (m == 0) throw DomainError("de_broglie_wavelength: m = 0 has no wavelength");
  return kTwoPi * r * mu(r, geom) / static_cast<double>(m < 0 ? -m : m);
}

ClassicalState evolve_rectangular(const ClassicalState& state, double dt,
                                  const RectangularTorus& box) {
  if (!(box.ell_x > 0.0 && box.ell_y > 0.0)) {
    throw DomainError("evolve_rectangular: box half-sides must be positive");
  }
  if (dt < 0.0) throw DomainError("evolve_rectangular: only forward evolution is supported");
  ClassicalState out;
  out.r = state.r;
  out.phi = advance_rectangular(state.r, state.phi, dt, box, 0.0, nullptr, nullptr);
  const Point2 p = polar_point(out.r, out.phi);
  out.position = {wrap_coordinate(p.x, box.ell_x), wrap_coordinate(p.y, box.ell_y)};
  return out;
}

bool in_box(double r, double phi, const RectangularTorus& box) {
  const Point2 p = polar_point(r, phi);
  const double slack = 1e-12 * r;
  return std::abs(p.x) <= box.ell_x + slack && std::abs(p.y) <= box.ell_y + slack;
}

double rectangular_start_angle(double r, const RectangularTorus& box) {
  if (!(box.ell_x > 0.0 && box.ell_y > 0.0) || !(r > 0.0)) {
    throw DomainError("rectangular_start_angle: need r > 0 and a positive box");
  }
  std::vector<double> cuts{0.0, kTwoPi};
  if (r > box.ell_x) {
    const double a = std::acos(box.ell_x / r);
    for (double c : {a, kPi - a, kPi + a, kTwoPi - a}) cuts.push_back(c);
  }
  if (r > box.ell_y) {
    const double b = std::asin(box.ell_y / r);
    for (double c : {b, kPi - b, kPi + b, kTwoPi - b}) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] <= 1e-12) continue;
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    if (in_box(r, mid, box)) return mid;
  }
  throw DomainError("rectangular_start_angle: circle lies outside the box");
}

OrbitTrace trace_rectangular(double r, double phi0, double duration, std::size_t samples,
                             const RectangularTorus& box) {
  if (!(r > 0.0) || !(duration > 0.0)) {
    throw DomainError("trace_rectangular: need r > 0 and duration > 0");
  }
  if (!(box.ell_x > 0.0 && box.ell_y > 0.0)) {
    throw DomainError("trace_rectangular: box half-sides must be positive");
  }
  if (!in_box(r, phi0, box)) throw DomainError("trace_rectangular: start point outside the box");
  OrbitTrace trace;
  Orbit& orbit = trace.orbit;
  orbit.r = r;
  orbit.r_over_ell = r / box.ell_x;
  ClassicalState start;
  start.r = r;
  start.phi = normalize_angle(phi0);
  advance_rectangular(r, start.phi, duration, box, 0.0, &orbit.events, &orbit.swept_angle);
  orbit.period = duration;
  orbit.mu_measured = duration / kTwoPi;
  orbit.wrap_count = orbit.events.size();
  orbit.winding = winding_number(orbit);
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = duration * static_cast<double>(k) / static_cast<double>(samples);
    const ClassicalState s = evolve_rectangular(start, t, box);
    trace.trajectory.push_back({t, s.position, s.phi, quadrant_of(s.phi), SampleKind::kRegular});
  }
  return trace;
}

}  // namespace toruslz
