#include "toruslz/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "toruslz/errors.hpp"
#include "toruslz/parallel.hpp"

namespace toruslz {

namespace {

struct SectorVector {
  // Up to four (flat index, coefficient) entries.
  std::array<Index, 4> index{};
  std::array<Complex, 4> coeff{};
  int size = 0;
};

Complex i_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

std::vector<SectorVector> sector_vectors(const ModeBasis& basis, int sector) {
  std::vector<SectorVector> out;
  const int n = basis.cutoff();
  if (sector == 0) {
    SectorVector origin;
    origin.index[0] = basis.flat(0, 0);
    origin.coeff[0] = {1.0, 0.0};
    origin.size = 1;
    out.push_back(origin);
  }
  for (int n1 = 1; n1 <= n; ++n1) {
    for (int n2 = 0; n2 <= n; ++n2) {
      SectorVector v;
      Index flat = basis.flat(n1, n2);
      for (int j = 0; j < 4; ++j) {
        v.index[j] = flat;
        v.coeff[j] = 0.5 * i_power(-j * sector);
        flat = basis.rotate(flat);
      }
      v.size = 4;
      out.push_back(v);
    }
  }
  return out;
}

double max_column_residual(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& v,
                           const Eigen::VectorXd& w) {
  if (v.cols() == 0) return 0.0;
  const Eigen::MatrixXcd r = a * v - v * w.cast<Complex>().asDiagonal();
  return r.colwise().norm().maxCoeff();
}

double orthonormality_defect(const Eigen::MatrixXcd& v) {
  if (v.cols() == 0) return 0.0;
  const Eigen::MatrixXcd g = v.adjoint() * v;
  return (g - Eigen::MatrixXcd::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff();
}

void check_hermitian(const Eigen::MatrixXcd& a, double rel_tol) {
  if (a.rows() != a.cols()) throw NotHermitian("matrix is not square");
  if (a.size() == 0) return;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double defect = (a - a.adjoint()).cwiseAbs().maxCoeff();
  if (defect > rel_tol * scale) {
    throw NotHermitian("matrix is not Hermitian: max |A - A^H| = " + std::to_string(defect));
  }
}

struct DenseSolution {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
  double residual = 0.0;
  double orthonormality = 0.0;
};

void lapack_check(lapack_int info, const char* routine) {
  if (info != 0) {
    throw NonConvergence(std::string(routine) + " failed with info = " + std::to_string(info),
                         std::numeric_limits<double>::infinity());
  }
}

// zheevr (MRRR), falling back to zheev when the vectors fail the residual or
// orthonormality check. Some OpenBLAS builds return wrong zheevd vectors
// with info = 0, so the result is always verified.
DenseSolution dense_hermitian(const Eigen::MatrixXcd& a, bool vectors) {
  DenseSolution out;
  const auto n = static_cast<lapack_int>(a.rows());
  out.values.resize(a.rows());
  if (n == 0) return out;
  Eigen::MatrixXcd work = a;
  Eigen::MatrixXcd z(vectors ? a.rows() : 1, vectors ? a.rows() : 1);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  lapack_check(LAPACKE_zheevr(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'A', 'U', n, work.data(), n,
                              0.0, 0.0, 0, 0, 0.0, &found, out.values.data(), z.data(),
                              vectors ? n : 1, support.data()),
               "zheevr");
  if (!vectors) return out;
  out.vectors = std::move(z);
  out.residual = max_column_residual(a, out.vectors, out.values);
  out.orthonormality = orthonormality_defect(out.vectors);
  const double scale = std::max(1.0, out.values.cwiseAbs().maxCoeff());
  if (out.residual <= 1e-11 * scale * n && out.orthonormality <= 1e-10) return out;

  out.vectors = a;
  lapack_check(LAPACKE_zheev(LAPACK_COL_MAJOR, 'V', 'U', n, out.vectors.data(), n,
                             out.values.data()),
               "zheev");
  out.residual = max_column_residual(a, out.vectors, out.values);
  out.orthonormality = orthonormality_defect(out.vectors);
  return out;
}

EigenDecomposition solve_sectors(const TruncatedOperator& op, const SolverOptions& options) {
  const ModeBasis& basis = op.basis();
  const PhysicalConstants& consts = op.constants();

  struct SectorResult {
    std::vector<SectorVector> vectors;
    Eigen::VectorXd values;
    Eigen::MatrixXcd local;
    double residual = 0.0;
    double orthonormality = 0.0;
  };
  std::array<SectorResult, 4> results;
  for (int k = 0; k < 4; ++k) {
    SectorResult& res = results[k];
    res.vectors = sector_vectors(basis, k);
    DenseSolution sol = dense_hermitian(sector_matrix(op.cutoff(), k, consts), true);
    res.values = std::move(sol.values);
    res.local = std::move(sol.vectors);
    res.residual = sol.residual;
    res.orthonormality = sol.orthonormality;
  }

  // Merge sectors into one ascending list; ties ordered by (sector, column).
  std::vector<std::tuple<double, int, Index>> order;
  order.reserve(static_cast<std::size_t>(op.dim()));
  for (int k = 0; k < 4; ++k) {
    for (Index c = 0; c < results[k].values.size(); ++c) {
      order.emplace_back(results[k].values(c), k, c);
    }
  }
  std::sort(order.begin(), order.end());

  EigenDecomposition out;
  out.cutoff = op.cutoff();
  out.hbar = consts.hbar;
  out.method = SolverMethod::kDenseSectors;
  out.complete = true;
  out.eigenvalues.resize(op.dim());
  out.sectors.resize(order.size());
  for (std::size_t j = 0; j < order.size(); ++j) {
    out.eigenvalues(static_cast<Index>(j)) = std::get<0>(order[j]);
    out.sectors[j] = std::get<1>(order[j]);
  }
  out.operator_norm =
      op.dim() > 0 ? out.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  double residual = 0.0;
  double ortho = 0.0;
  for (const auto& r : results) {
    residual = std::max(residual, r.residual);
    ortho = std::max(ortho, r.orthonormality);
  }
  out.residual_bound = out.operator_norm > 0.0 ? residual / out.operator_norm : residual;
  out.orthonormality_error = ortho;

  if (options.compute_vectors) {
    out.eigenvectors = Eigen::MatrixXcd::Zero(op.dim(), op.dim());
    for (std::size_t j = 0; j < order.size(); ++j) {
      const auto& [value, k, c] = order[j];
      const SectorResult& res = results[k];
      for (Index row = 0; row < res.local.rows(); ++row) {
        const Complex w = res.local(row, c);
        const SectorVector& sv = res.vectors[static_cast<std::size_t>(row)];
        for (int t = 0; t < sv.size; ++t) {
          out.eigenvectors(sv.index[t], static_cast<Index>(j)) = sv.coeff[t] * w;
        }
      }
    }
  }
  return out;
}

}  // namespace

std::string to_string(SolverMethod method) {
  switch (method) {
    case SolverMethod::kDenseSectors: return "dense-sectors";
    case SolverMethod::kDense: return "dense";
    case SolverMethod::kLanczos: return "lanczos";
  }
  return "unknown";
}

Eigen::MatrixXcd sector_basis(int cutoff, int sector) {
  if (sector < 0 || sector > 3) throw DomainError("sector index must be in 0..3");
  const ModeBasis basis(cutoff);
  const auto vectors = sector_vectors(basis, sector);
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(basis.dim(), static_cast<Index>(vectors.size()));
  for (std::size_t c = 0; c < vectors.size(); ++c) {
    for (int t = 0; t < vectors[c].size; ++t) {
      b(vectors[c].index[t], static_cast<Index>(c)) += vectors[c].coeff[t];
    }
  }
  return b;
}

Eigen::MatrixXcd sector_matrix(int cutoff, int sector, const PhysicalConstants& consts) {
  if (sector < 0 || sector > 3) throw DomainError("sector index must be in 0..3");
  const ModeBasis basis(cutoff);
  const auto vectors = sector_vectors(basis, sector);
  const auto s = static_cast<Index>(vectors.size());
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(s, s);
  for (Index col = 0; col < s; ++col) {
    const SectorVector& vb = vectors[static_cast<std::size_t>(col)];
    for (Index row = 0; row <= col; ++row) {
      const SectorVector& va = vectors[static_cast<std::size_t>(row)];
      Complex sum{0.0, 0.0};
      for (int i = 0; i < va.size; ++i) {
        const ModeBasis::Mode mi = basis.mode(va.index[i]);
        for (int j = 0; j < vb.size; ++j) {
          const ModeBasis::Mode mj = basis.mode(vb.index[j]);
          if (mi.n1 != mj.n1 && mi.n2 != mj.n2) continue;
          sum += std::conj(va.coeff[i]) * vb.coeff[j] * lz_element(mi, mj, consts);
        }
      }
      a(row, col) = sum;
      a(col, row) = std::conj(sum);
    }
    a(col, col) = a(col, col).real();
  }
  return a;
}

Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& a) {
  check_hermitian(a, 1e-12);
  return dense_hermitian(a, false).values;
}

EigenDecomposition eigendecompose_dense(const Eigen::MatrixXcd& a, double tolerance,
                                        bool compute_vectors) {
  check_hermitian(a, 1e-12);
  EigenDecomposition out;
  out.method = SolverMethod::kDense;
  DenseSolution sol = dense_hermitian(a, true);
  Eigen::MatrixXcd& work = sol.vectors;
  out.eigenvalues = std::move(sol.values);
  out.operator_norm = a.rows() > 0 ? out.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  const double residual = sol.residual;
  out.residual_bound = out.operator_norm > 0.0 ? residual / out.operator_norm : residual;
  out.orthonormality_error = sol.orthonormality;
  out.sectors.assign(static_cast<std::size_t>(a.rows()), -1);
  if (compute_vectors) out.eigenvectors = std::move(work);
  if (out.residual_bound > tolerance) {
    throw NonConvergence("dense eigensolver residual above tolerance", out.residual_bound);
  }
  return out;
}

EigenDecomposition eigendecompose(const TruncatedOperator& op, const SolverOptions& options) {
  if (op.is_materialized()) check_hermitian(op.matrix(), 0.0);

  EigenDecomposition out;
  if (op.dim() > options.dense_limit) {
    const LinearMap apply = [&op](const Eigen::VectorXcd& in, Eigen::VectorXcd& result) {
      result = op.apply(in);
    };
    out = lanczos(apply, op.dim(), options.tolerance, options.iterative);
    out.cutoff = op.cutoff();
    out.hbar = op.constants().hbar;
    if (!options.compute_vectors) out.eigenvectors.resize(0, 0);
    return out;
  }

  if (options.use_rotation_symmetry) {
    out = solve_sectors(op, options);
  } else {
    const Eigen::MatrixXcd dense =
        op.is_materialized() ? op.matrix() : build_lz(op.cutoff(), op.constants()).matrix();
    out = eigendecompose_dense(dense, std::numeric_limits<double>::infinity(),
                               options.compute_vectors);
    out.cutoff = op.cutoff();
    out.hbar = op.constants().hbar;
  }
  if (out.residual_bound > options.tolerance) {
    throw NonConvergence("eigensolver residual above tolerance", out.residual_bound);
  }
  return out;
}

Histogram make_histogram(std::span<const double> values, double bin_width) {
  if (!(bin_width > 0.0)) throw DomainError("make_histogram: bin width must be positive");
  std::int64_t kmax = 0;
  std::vector<std::int64_t> bins;
  bins.reserve(values.size());
  for (double v : values) {
    const auto k = static_cast<std::int64_t>(std::floor(v / bin_width + 0.5));
    bins.push_back(k);
    kmax = std::max(kmax, std::abs(k));
  }
  Histogram h;
  const std::int64_t nbins = 2 * kmax + 1;
  h.counts.assign(static_cast<std::size_t>(nbins), 0);
  h.edges.reserve(static_cast<std::size_t>(nbins + 1));
  for (std::int64_t k = -kmax; k <= kmax + 1; ++k) {
    h.edges.push_back((static_cast<double>(k) - 0.5) * bin_width);
  }
  for (std::int64_t k : bins) ++h.counts[static_cast<std::size_t>(k + kmax)];
  return h;
}

SpectralStatistics spectral_statistics(std::span<const double> eigenvalues, double epsilon,
                                       const PhysicalConstants& consts, double bin_width) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw DomainError("spectral_statistics: epsilon must lie in (0, 0.5)");
  }
  SpectralStatistics s;
  s.epsilon = epsilon;
  s.count = static_cast<Index>(eigenvalues.size());
  std::vector<double> scaled(eigenvalues.size());
  std::transform(eigenvalues.begin(), eigenvalues.end(), scaled.begin(),
                 [&](double v) { return v / consts.hbar; });
  s.histogram = make_histogram(scaled, bin_width);
  if (scaled.empty()) return s;

  Index peaks = 0;
  Index gap = 0;
  std::array<Index, 3> bands{};
  for (double x : scaled) {
    const double a = std::abs(x);
    const double dist = std::abs(x - std::round(x));
    if (dist <= epsilon) ++peaks;
    if (a > epsilon && a < 1.0 - epsilon) ++gap;
    for (int d = 1; d <= 3; ++d) {
      if (a > d + epsilon && a < d + 1 - epsilon) ++bands[d - 1];
    }
    if (dist > epsilon && x > 1.0) ++s.band_interior_above;
    if (dist > epsilon && x < -1.0) ++s.band_interior_below;
  }
  const double total = static_cast<double>(scaled.size());
  s.peak_fraction = static_cast<double>(peaks) / total;
  s.gap_occupancy = static_cast<double>(gap) / total;
  for (int d = 0; d < 3; ++d) s.band_occupancy[d] = static_cast<double>(bands[d]) / total;
  return s;
}

SpectralStatistics spectral_statistics(const EigenDecomposition& decomp, double epsilon,
                                       double bin_width) {
  return spectral_statistics(
      std::span<const double>(decomp.eigenvalues.data(),
                              static_cast<std::size_t>(decomp.eigenvalues.size())),
      epsilon, PhysicalConstants(decomp.hbar), bin_width);
}

std::vector<SweepRow> convergence_sweep(std::span<const int> cutoffs, double epsilon,
                                        const PhysicalConstants& consts,
                                        const SolverOptions& options, unsigned threads) {
  if (!std::is_sorted(cutoffs.begin(), cutoffs.end())) {
    throw DomainError("convergence_sweep: cutoff list must be ascending");
  }
  SolverOptions opts = options;
  opts.compute_vectors = false;
  std::vector<SweepRow> rows(cutoffs.size());
  parallel_for(cutoffs.size(), threads, [&](std::size_t i) {
    BuildOptions build;
    build.materialize = false;
    const TruncatedOperator op = build_lz(cutoffs[i], consts, build);
    const EigenDecomposition decomp = eigendecompose(op, opts);
    const SpectralStatistics stats = spectral_statistics(decomp, epsilon);
    SweepRow& row = rows[i];
    row.cutoff = cutoffs[i];
    row.dim = op.dim();
    row.peak_fraction = stats.peak_fraction;
    row.gap_occupancy = stats.gap_occupancy;
    row.band_occupancy = stats.band_occupancy;
    row.residual_bound = decomp.residual_bound;
  });
  return rows;
}

}  // namespace toruslz
