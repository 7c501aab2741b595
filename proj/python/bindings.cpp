#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "toruslz/analytic_spectrum.hpp"
#include "toruslz/classical_dynamics.hpp"
#include "toruslz/cli.hpp"
#include "toruslz/eigensolver.hpp"
#include "toruslz/errors.hpp"
#include "toruslz/geometry.hpp"
#include "toruslz/localization.hpp"
#include "toruslz/operator_builder.hpp"

namespace py = pybind11;
using namespace toruslz;

namespace {

py::dict orbit_dict(const Orbit& o) {
  py::dict d;
  d["r"] = o.r;
  d["r_over_ell"] = o.r_over_ell;
  d["period"] = o.period;
  d["mu_measured"] = o.mu_measured;
  d["swept_angle"] = o.swept_angle;
  d["winding"] = o.winding;
  d["n_events"] = o.wrap_count;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Angular momentum L_z on the flat square torus";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<SingularityError>(m, "SingularityError", PyExc_ValueError);
  py::register_exception<UndersampledGrid>(m, "UndersampledGrid", PyExc_ValueError);
  py::register_exception<NonConvergence>(m, "NonConvergence", PyExc_RuntimeError);

  m.def("mu", [](double r, double ell) { return mu(r, TorusGeometry(ell)); }, py::arg("r"),
        py::arg("ell") = 1.0, "Effective circumference ratio |Gamma_r| / 2 pi.");
  m.def("theta_r", [](double r, double ell) { return theta_r(r, TorusGeometry(ell)); },
        py::arg("r"), py::arg("ell") = 1.0);
  m.def(
      "gamma_segments",
      [](double r, double ell) {
        std::vector<std::pair<double, double>> out;
        for (const auto& s : gamma_segments(r, TorusGeometry(ell)).segments) out.emplace_back(s.lo, s.hi);
        return out;
      },
      py::arg("r"), py::arg("ell") = 1.0, "Half-open angular segments [lo, hi) of Gamma_r.");

  m.def(
      "fiber_eigenvalue",
      [](std::int64_t mm, double r, double ell, double hbar) {
        return fiber_eigenvalue(mm, r, TorusGeometry(ell), PhysicalConstants(hbar));
      },
      py::arg("m"), py::arg("r"), py::arg("ell") = 1.0, py::arg("hbar") = 1.0);
  m.def(
      "branch_radius",
      [](std::int64_t mm, double lambda, double ell, double hbar) {
        return branch_radius(mm, lambda, TorusGeometry(ell), PhysicalConstants(hbar));
      },
      py::arg("m"), py::arg("lam"), py::arg("ell") = 1.0, py::arg("hbar") = 1.0);
  m.def(
      "degeneracy",
      [](double lambda, double hbar) {
        const Degeneracy d = degeneracy(lambda, PhysicalConstants(hbar));
        return py::make_tuple(d.count, d.infinite);
      },
      py::arg("lam"), py::arg("hbar") = 1.0, "(count, infinite) band degeneracy of a value.");
  m.def(
      "branch_table",
      [](std::int64_t m_max, std::int64_t samples, double ell, double hbar) {
        const auto table =
            branch_table(m_max, samples, TorusGeometry(ell), PhysicalConstants(hbar));
        Eigen::MatrixXd rows(static_cast<Index>((2 * m_max + 1) * samples), 3);
        Index k = 0;
        for (const auto& branch : table) {
          for (const auto& s : branch.samples) {
            rows.row(k++) << static_cast<double>(branch.m), s.r_over_ell, s.lambda / hbar;
          }
        }
        return rows;
      },
      py::arg("m_max"), py::arg("samples"), py::arg("ell") = 1.0, py::arg("hbar") = 1.0,
      "Rows (m, r/ell, lambda/hbar) ordered by (m, r).");

  m.def(
      "lz_matrix",
      [](int cutoff, double hbar) { return build_lz(cutoff, PhysicalConstants(hbar)).matrix(); },
      py::arg("N"), py::arg("hbar") = 1.0, "Dense truncated L_z of dimension (2N+1)^2.");
  m.def(
      "apply_lz",
      [](int cutoff, const Eigen::VectorXcd& v, double hbar) {
        return apply_lz(cutoff, std::span<const Complex>(v.data(), static_cast<std::size_t>(v.size())),
                        PhysicalConstants(hbar));
      },
      py::arg("N"), py::arg("v"), py::arg("hbar") = 1.0);
  m.def(
      "eigenvalues",
      [](int cutoff, double hbar, double tolerance) {
        SolverOptions opts;
        opts.tolerance = tolerance;
        opts.compute_vectors = false;
        BuildOptions build;
        build.materialize = false;
        py::gil_scoped_release release;
        return eigendecompose(build_lz(cutoff, PhysicalConstants(hbar), build), opts).eigenvalues;
      },
      py::arg("N"), py::arg("hbar") = 1.0, py::arg("tolerance") = 1e-9,
      "Ascending eigenvalues of the truncated operator.");
  m.def(
      "spectral_statistics",
      [](const Eigen::VectorXd& values, double epsilon, double hbar) {
        const SpectralStatistics s = spectral_statistics(
            std::span<const double>(values.data(), static_cast<std::size_t>(values.size())),
            epsilon, PhysicalConstants(hbar));
        py::dict d;
        d["peak_fraction"] = s.peak_fraction;
        d["gap_occupancy"] = s.gap_occupancy;
        d["band_occupancy"] = std::vector<double>(s.band_occupancy.begin(), s.band_occupancy.end());
        d["band_interior_above"] = s.band_interior_above;
        d["band_interior_below"] = s.band_interior_below;
        return d;
      },
      py::arg("eigenvalues"), py::arg("epsilon") = 0.1, py::arg("hbar") = 1.0);
  m.def(
      "localize",
      [](int cutoff, Index grid, double ell, double hbar) {
        const PhysicalConstants consts(hbar);
        py::gil_scoped_release release;
        const EigenDecomposition d = eigendecompose(build_lz(cutoff, consts));
        const LocalizationReport rep =
            classify_spectrum(d, cutoff, grid, {}, TorusGeometry(ell), consts);
        Eigen::MatrixXd rows(static_cast<Index>(rep.records.size()), 2);
        for (std::size_t i = 0; i < rep.records.size(); ++i) {
          rows(static_cast<Index>(i), 0) = rep.records[i].lambda / hbar;
          rows(static_cast<Index>(i), 1) = rep.records[i].disk_mass;
        }
        return rows;
      },
      py::arg("N"), py::arg("grid"), py::arg("ell") = 1.0, py::arg("hbar") = 1.0,
      "Rows (lambda/hbar, disk_mass) for every eigenpair.");

  m.def(
      "trace_orbit",
      [](double r, double ell, std::size_t samples) {
        const OrbitTrace t = trace_orbit(r, TorusGeometry(ell), samples);
        py::dict d = orbit_dict(t.orbit);
        Eigen::MatrixXd traj(static_cast<Index>(t.trajectory.size()), 6);
        for (std::size_t i = 0; i < t.trajectory.size(); ++i) {
          const auto& s = t.trajectory[i];
          traj.row(static_cast<Index>(i)) << s.t, s.position.x, s.position.y, s.phi,
              static_cast<double>(s.quadrant), static_cast<double>(static_cast<int>(s.kind));
        }
        d["trajectory"] = traj;
        return d;
      },
      py::arg("r"), py::arg("ell") = 1.0, py::arg("samples") = 256,
      "Orbit summary plus trajectory rows (t, x, y, phi, quadrant, event_flag).");
  m.def(
      "semiclassical_level",
      [](std::int64_t mm, double r, double ell, double hbar) {
        return semiclassical_level(mm, r, TorusGeometry(ell), PhysicalConstants(hbar));
      },
      py::arg("m"), py::arg("r"), py::arg("ell") = 1.0, py::arg("hbar") = 1.0);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = cli::run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line tool in-process: (exit_code, stdout, stderr).");
}
