// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "toruslz/analytic_spectrum.hpp"
#include "toruslz/classical_dynamics.hpp"
#include "toruslz/cli.hpp"
#include "toruslz/eigensolver.hpp"
#include "toruslz/errors.hpp"
#include "toruslz/geometry.hpp"
#include "toruslz/localization.hpp"
#include "toruslz/operator_builder.hpp"

using namespace toruslz;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Outcome geometry_exactness() {
  Outcome o;
  const auto t0 = Clock::now();
  const TorusGeometry g(1.0);
  o.require(mu(1.0, g) == 1.0, "mu(ell) = 1");
  o.require(mu(std::sqrt(2.0), g) == 0.0, "mu(sqrt2 ell) = 0");
  const double half = mu(1.0 / std::cos(kPi / 8.0), g);
  o.require(std::abs(half - 0.5) <= 1e-12, "mu(ell / cos(pi/8)) = 1/2");

  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (double ell : {1.0, 0.37, 5.0}) {
    const TorusGeometry h(ell);
    std::uniform_real_distribution<double> radius(0.0, h.max_radius());
    for (int i = 0; i < 10000; ++i) {
      double r = radius(rng);
      if (r == 0.0) r = 1e-9;
      double total = 0.0;
      for (const auto& s : gamma_segments(r, h).segments) total += s.length();
      worst = std::max(worst, std::abs(total - 2.0 * kPi * mu(r, h)));
    }
  }
  o.require(worst <= 1e-12, "|Gamma_r| = 2 pi mu(r)");
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 1.0, "runtime < 1 s");
  o.detail << "mu(ell/cos(pi/8)) - 1/2 = " << half - 0.5 << ", max ||Gamma_r| - 2 pi mu| = " << worst
           << " over 3x10^4 radii, " << elapsed << " s";
  return o;
}

Outcome fiber_spectrum() {
  Outcome o;
  const auto t0 = Clock::now();
  const TorusGeometry g(1.0);
  const PhysicalConstants h(1.0);
  std::mt19937_64 rng(7);

  std::uniform_real_distribution<double> inner(0.0, 1.0);
  std::uniform_real_distribution<double> outer(1.0, std::sqrt(2.0));
  std::uniform_int_distribution<int> mode(-20, 20);
  bool formula = true;
  double roundtrip = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const std::int64_t m = mode(rng);
    const double ri = inner(rng);
    formula &= fiber_eigenvalue(m, ri, g, h) == static_cast<double>(m);
    double ro = outer(rng);
    if (ro >= std::sqrt(2.0) - 1e-9) ro = 1.3;
    const double lam = fiber_eigenvalue(m, ro, g, h);
    formula &= lam == static_cast<double>(m) / mu(ro, g);
    if (m != 0) roundtrip = std::max(roundtrip, std::abs(branch_radius(m, lam, g, h) - ro));
  }
  o.require(formula, "lambda_m(r) = hbar m / mu(r)");
  o.require(roundtrip <= 1e-10, "branch_radius round trip");

  std::uniform_real_distribution<double> value(-40.0, 40.0);
  bool counts = true;
  for (int i = 0; i < 10000; ++i) {
    const double lam = value(rng);
    std::int64_t brute = 0;
    for (std::int64_t m = 1; m <= 100; ++m) {
      if (lam > static_cast<double>(m)) ++brute;
      if (lam < -static_cast<double>(m)) ++brute;
    }
    const Degeneracy d = degeneracy(lam, h);
    counts &= !d.infinite && d.count == brute &&
              d.count == static_cast<std::int64_t>(std::floor(std::abs(lam)));
  }
  o.require(counts, "degeneracy = floor(|lambda|/hbar) = brute-force count");

  const BandStructure bs = band_structure(50.0, h);
  bool gap_empty = true;
  for (const Band& b : bs.bands) gap_empty &= (b.hi <= -1.0 || b.lo >= 1.0);
  o.require(gap_empty, "no band in (-hbar, hbar)");
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 1.0, "runtime < 1 s");
  o.detail << "max branch_radius round-trip error " << roundtrip << ", " << bs.bands.size()
           << " bands outside the gap, " << elapsed << " s";
  return o;
}

Complex q_oracle(int m, int n, double ell) {
  using boost::math::quadrature::gauss_kronrod;
  const double k = kPi * (n - m) / ell;
  const double re = gauss_kronrod<double, 61>::integrate(
      [&](double x) { return x * std::cos(k * x); }, -ell, ell, 12, 1e-15);
  const double im = gauss_kronrod<double, 61>::integrate(
      [&](double x) { return x * std::sin(k * x); }, -ell, ell, 12, 1e-15);
  return Complex(re, im) / (2.0 * ell);
}

Outcome operator_structure() {
  Outcome o;
  const auto t0 = Clock::now();
  const PhysicalConstants h(1.0);

  bool hermitian = true;
  bool diagonal_free = true;
  double ell_defect = 0.0;
  for (int n = 0; n <= 10; ++n) {
    const TruncatedOperator op = build_lz(n, h);
    const Eigen::MatrixXcd& a = op.matrix();
    hermitian &= a == a.adjoint();
    diagonal_free &= a.diagonal().cwiseAbs().maxCoeff() == 0.0;
    for (double ell : {0.25, 1.0, 7.0}) {
      const TorusGeometry g(ell);
      const Eigen::MatrixXcd q = q_matrix(n, g);
      const Eigen::MatrixXcd p = p_matrix(n, g, h);
      const Index s = q.rows();
      for (Index i = 0; i < s; ++i)
        for (Index j = 0; j < s; ++j)
          for (Index k = 0; k < s; ++k)
            for (Index l = 0; l < s; ++l) {
              const Complex kron = q(i, j) * p(k, l) - p(i, j) * q(k, l);
              ell_defect = std::max(ell_defect, std::abs(kron - a(i * s + k, j * s + l)));
            }
    }
  }
  o.require(hermitian, "exactly Hermitian");
  o.require(diagonal_free, "zero diagonal");
  o.require(ell_defect <= 1e-12, "same matrix for every ell");

  double q_err = 0.0;
  for (double ell : {1.0, 3.0}) {
    const TorusGeometry g(ell);
    for (int m = -16; m <= 16; ++m)
      for (int n = -16; n <= 16; ++n)
        q_err = std::max(q_err, std::abs(q_matrix_element(m, n, g) - q_oracle(m, n, ell)));
  }
  o.require(q_err <= 1e-12, "q elements vs quadrature");

  double asym = 0.0;
  SolverOptions opts;
  opts.compute_vectors = false;
  for (int n = 0; n <= 16; ++n) {
    const EigenDecomposition d = eigendecompose(build_lz(n, h), opts);
    const Index m = d.size();
    for (Index i = 0; i < m; ++i)
      asym = std::max(asym, std::abs(d.eigenvalues(i) + d.eigenvalues(m - 1 - i)));
  }
  o.require(asym <= 1e-10, "spectrum symmetric under negation");
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 30.0, "runtime < 30 s");
  o.detail << "q oracle error " << q_err << ", ell defect " << ell_defect
           << ", max |lambda_i + lambda_{n-1-i}| " << asym << " (N <= 16), " << elapsed << " s";
  return o;
}

Outcome spectral_convergence() {
  Outcome o;
  const auto t0 = Clock::now();
  const std::vector<int> cutoffs{8, 16, 24, 32};
  const auto rows = convergence_sweep(cutoffs, 0.1, PhysicalConstants(1.0));
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) monotone &= rows[i].gap_occupancy <= rows[i - 1].gap_occupancy;
  o.require(monotone, "gap occupancy nonincreasing");
  o.require(rows.back().gap_occupancy < 0.05, "gap occupancy < 0.05 at N = 32");
  o.require(rows.back().peak_fraction >= 0.65 && rows.back().peak_fraction <= 0.90,
            "peak fraction in [0.65, 0.90] at N = 32");

  SolverOptions opts;
  opts.compute_vectors = false;
  const SpectralStatistics s =
      spectral_statistics(eigendecompose(build_lz(32, PhysicalConstants(1.0)), opts), 0.1);
  o.require(s.band_interior_above > 0 && s.band_interior_below > 0, "nonempty bands on both sides");
  o.detail << "gap occupancy";
  for (const auto& r : rows) o.detail << " N=" << r.cutoff << ":" << r.gap_occupancy;
  o.detail << "; peak fraction";
  for (const auto& r : rows) o.detail << " N=" << r.cutoff << ":" << r.peak_fraction;
  o.detail << "; band interiors above/below " << s.band_interior_above << "/" << s.band_interior_below
           << ", " << seconds_since(t0) << " s";
  return o;
}

double bump(double t) { return t < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; }

Outcome localization_dichotomy() {
  Outcome o;
  const auto t0 = Clock::now();
  const int n = 32;
  const Index grid = 256;
  const TorusGeometry g(1.0);
  const PhysicalConstants h(1.0);
  const EigenDecomposition d = eigendecompose(build_lz(n, h));
  const LocalizationReport rep = classify_spectrum(d, n, grid, {}, g, h);
  double band = 0.0, peak = 0.0;
  int nb = 0, np = 0;
  for (const auto& r : rep.records) {
    const double dist = std::abs(r.lambda - std::round(r.lambda));
    if (dist > 0.2) {
      band += r.corner_mass;
      ++nb;
    } else if (dist < 0.05) {
      peak += r.corner_mass;
      ++np;
    }
  }
  const double band_mean = nb > 0 ? band / nb : 0.0;
  const double peak_mean = np > 0 ? peak / np : 1.0;
  o.require(nb > 0 && np > 0, "both populations nonempty");
  o.require(band_mean - peak_mean >= 0.3, "corner-mass contrast >= 0.3");

  double worst_disk = 1.0;
  bool all_pp = true;
  for (int m = -3; m <= 3; ++m) {
    const auto f = [m](double x, double y) {
      const Complex z = m >= 0 ? Complex(x, y) : Complex(x, -y);
      return std::pow(z, std::abs(m)) * bump(std::hypot(x, y) / 0.9);
    };
    const auto c = project_to_basis(f, n, grid, g);
    const double mass = disk_mass(to_position_density(c, n, grid, g), g);
    worst_disk = std::min(worst_disk, mass);
    all_pp &= classify(mass, {}) == LocalizationLabel::kPpLike;
  }
  o.require(worst_disk >= 0.95 && all_pp, "synthetic disk states PP_LIKE with disk mass >= 0.95");
  o.detail << "mean corner mass: band interiors " << band_mean << " (" << nb << " states), near integers "
           << peak_mean << " (" << np << " states), contrast " << band_mean - peak_mean
           << "; min synthetic disk mass " << worst_disk << ", " << seconds_since(t0) << " s";
  return o;
}

Outcome classical_flow() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(99);
  double period_err = 0.0;
  double radius_err = 0.0;
  bool winding = true;
  bool events = true;
  for (double ell : {1.0, 2.5}) {
    const TorusGeometry g(ell);
    std::uniform_real_distribution<double> radius(1e-6, g.max_radius());
    std::uniform_real_distribution<double> time(-30.0, 30.0);
    for (int i = 0; i < 1000; ++i) {
      double r = radius(rng);
      if (r >= g.max_radius()) continue;
      const OrbitTrace tr = trace_orbit(r, g, 16);
      period_err = std::max(period_err, std::abs(tr.orbit.period - 2.0 * kPi * mu(r, g)));
      winding &= tr.orbit.winding == (r < ell ? 1 : (r > ell ? -1 : tr.orbit.winding));
      if (r > ell) events &= tr.orbit.wrap_count == 4 && tr.orbit.events.size() == 4;
      for (const auto& s : tr.trajectory)
        radius_err = std::max(radius_err, std::abs(std::hypot(s.position.x, s.position.y) - r) / ell);
      const AngularRange range = gamma_segments(r, g);
      const auto& seg = range.segments.front();
      ClassicalState s = make_state(r, seg.lo + 0.5 * seg.length(), g);
      for (int k = 0; k < 10; ++k) {
        s = evolve(s, time(rng), g);
        radius_err = std::max(radius_err, std::abs(std::hypot(s.position.x, s.position.y) - r) / ell);
      }
    }
  }
  o.require(period_err <= 1e-12, "T = 2 pi mu(r)");
  o.require(winding, "winding +1 inside, -1 outside");
  o.require(events, "4 wrap events per edge period");
  o.require(radius_err <= 1e-13, "radius conserved");
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 5.0, "runtime < 5 s");
  o.detail << "max period error " << period_err << ", max radius drift (units of ell) " << radius_err
           << ", " << elapsed << " s";
  return o;
}

Outcome semiclassical_coincidence() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> radius(0.0, std::sqrt(2.0));
  std::uniform_int_distribution<int> mode(-100, 100);
  const TorusGeometry g(1.0);
  const PhysicalConstants h(1.0);
  int mismatches = 0;
  int tested = 0;
  while (tested < 1000) {
    const double r = radius(rng);
    const std::int64_t m = mode(rng);
    if (m != 0 && mu(r, g) == 0.0) continue;
    ++tested;
    if (semiclassical_level(m, r, g, h) != fiber_eigenvalue(m, r, g, h)) ++mismatches;
  }
  o.require(mismatches == 0, "bitwise equality");
  o.detail << mismatches << " mismatches in " << tested << " random (m, r)";
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return files;
}

Outcome reproducibility() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / ("toruslz_acceptance_" + std::to_string(::getpid()));
  const std::string out = dir.string();
  const std::vector<std::vector<std::string>> commands{
      {"mu", "--r", "0.5,1.0823922,1.4142"},
      {"branches", "--m-max", "3", "--samples", "100", "--out", out},
      {"spectrum", "--N", "8", "--out", out, "--dump-operator", "--dump-vectors"},
      {"localize", "--N", "6", "--grid", "64", "--out", out, "--density-index", "3"},
      {"orbit", "--r", "1.2", "--samples", "200", "--out", out},
      {"orbit", "--r", "1.2", "--unsafe-aspect", "1.3", "--duration", "30", "--out", out + "/rect"},
      {"sweep", "--N", "2,4,6,8", "--out", out},
  };
  int identical = 0;
  std::size_t total_files = 0;
  for (const auto& args : commands) {
    std::string first_stdout;
    std::map<std::string, std::string> first;
    bool same = true;
    for (int pass = 0; pass < 2; ++pass) {
      fs::remove_all(dir);
      std::ostringstream sout, serr;
      const int code = cli::run_cli(args, sout, serr);
      if (code != 0) {
        same = false;
        o.require(false, args[0] + " exited with " + std::to_string(code));
        break;
      }
      auto files = fs::exists(dir) ? snapshot(dir) : std::map<std::string, std::string>{};
      if (pass == 0) {
        first_stdout = sout.str();
        first = std::move(files);
      } else {
        same = first_stdout == sout.str() && first == files;
        total_files += files.size();
      }
    }
    if (same) ++identical;
    o.require(same, args[0] + " output differs between runs");
  }

  fs::remove_all(dir);
  std::ostringstream sout, serr;
  cli::run_cli({"branches", "--m-max", "3", "--samples", "100", "--out", out}, sout, serr);
  const std::string golden = slurp(fs::path(TORUSLZ_GOLDEN_DIR) / "branches_m3_s100.csv");
  const bool golden_ok = !golden.empty() && golden == slurp(dir / "branches.csv");
  o.require(golden_ok, "branch CSV matches golden file");
  fs::remove_all(dir);
  o.detail << identical << "/" << commands.size() << " commands byte-identical across two runs ("
           << total_files << " files), golden branch CSV " << (golden_ok ? "identical" : "differs");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"1 geometry exactness", geometry_exactness},
      {"2 fiber spectrum", fiber_spectrum},
      {"3 operator structure", operator_structure},
      {"4 spectral convergence", spectral_convergence},
      {"5 localization dichotomy", localization_dichotomy},
      {"6 classical flow", classical_flow},
      {"7 semiclassical coincidence", semiclassical_coincidence},
      {"8 reproducibility", reproducibility},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    if (!o.pass) ++failures;
    std::printf("[%s] criterion %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures,
              std::size(criteria));
  return failures == 0 ? 0 : 1;
}
