#include "toruslz/operator_builder.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "toruslz/errors.hpp"
#include "toruslz/parallel.hpp"

namespace toruslz {

namespace {

double alternating_sign(std::int64_t k) { return (k % 2 == 0) ? 1.0 : -1.0; }

// i (-1)^k / k for k != 0; the ell- and pi-free part of q_{mn} with k = m - n.
Complex kernel(std::int64_t k) {
  if (k == 0) return {0.0, 0.0};
  return {0.0, alternating_sign(k) / static_cast<double>(k)};
}

Eigen::MatrixXcd kernel_matrix(int cutoff) {
  const int side = 2 * cutoff + 1;
  Eigen::MatrixXcd k(side, side);
  for (int a = 0; a < side; ++a) {
    for (int b = 0; b < side; ++b) k(a, b) = kernel(a - b);
  }
  return k;
}

Eigen::VectorXd mode_numbers(int cutoff) {
  return Eigen::VectorXd::LinSpaced(2 * cutoff + 1, -cutoff, cutoff);
}

// exp(-1 / (1 - (x/w)^2)) on |x| < w.
double bump(double x, double width) {
  const double t = x / width;
  if (std::abs(t) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - t * t));
}

}  // namespace

ModeBasis::ModeBasis(int cutoff) : cutoff_(cutoff) {
  if (cutoff < 0) throw DomainError("ModeBasis: cutoff N must be >= 0");
}

Complex q_matrix_element(std::int64_t m, std::int64_t n, const TorusGeometry& geom) {
  return kernel(m - n) * (geom.ell() / kPi);
}

double p_matrix_element(std::int64_t m, std::int64_t n, const TorusGeometry& geom,
                        const PhysicalConstants& consts) {
  if (m != n) return 0.0;
  return kPi * consts.hbar / geom.ell() * static_cast<double>(n);
}

Complex lz_element(const ModeBasis::Mode& row, const ModeBasis::Mode& col,
                   const PhysicalConstants& consts) {
  Complex value{0.0, 0.0};
  if (row.n2 == col.n2) value += kernel(row.n1 - col.n1) * static_cast<double>(col.n2);
  if (row.n1 == col.n1) value -= kernel(row.n2 - col.n2) * static_cast<double>(col.n1);
  return value * consts.hbar;
}

Eigen::MatrixXcd q_matrix(int cutoff, const TorusGeometry& geom) {
  if (cutoff < 0) throw DomainError("q_matrix: cutoff N must be >= 0");
  return kernel_matrix(cutoff) * (geom.ell() / kPi);
}

Eigen::MatrixXcd p_matrix(int cutoff, const TorusGeometry& geom,
                          const PhysicalConstants& consts) {
  if (cutoff < 0) throw DomainError("p_matrix: cutoff N must be >= 0");
  const Eigen::VectorXd n = mode_numbers(cutoff) * (kPi * consts.hbar / geom.ell());
  return n.cast<Complex>().asDiagonal();
}

TruncatedOperator::TruncatedOperator(int cutoff, PhysicalConstants consts,
                                     std::optional<Eigen::MatrixXcd> dense)
    : basis_(cutoff), consts_(consts), dense_(std::move(dense)) {
  if (dense_ && (dense_->rows() != dim() || dense_->cols() != dim())) {
    throw DimensionMismatch("TruncatedOperator: dense matrix has wrong shape");
  }
}

const Eigen::MatrixXcd& TruncatedOperator::matrix() const {
  if (!dense_) throw std::logic_error("TruncatedOperator: operator is matrix-free");
  return *dense_;
}

Complex TruncatedOperator::element(Index row, Index col) const {
  if (dense_) return (*dense_)(row, col);
  return lz_element(basis_.mode(row), basis_.mode(col), consts_);
}

Eigen::VectorXcd TruncatedOperator::apply(const Eigen::VectorXcd& v) const {
  return apply_lz(cutoff(), std::span<const Complex>(v.data(), static_cast<std::size_t>(v.size())),
                  consts_);
}

Eigen::MatrixXcd TruncatedOperator::squared() const {
  const Eigen::MatrixXcd& a = matrix();
  return a * a;
}

TruncatedOperator build_lz(int cutoff, const PhysicalConstants& consts,
                           const BuildOptions& options) {
  const ModeBasis basis(cutoff);
  if (!options.materialize) return TruncatedOperator(cutoff, consts, std::nullopt);

  const auto dim = static_cast<std::size_t>(basis.dim());
  const std::size_t bytes = dim * dim * sizeof(Complex);
  if (dim != 0 && bytes / dim / sizeof(Complex) != dim) {
    throw ResourceError("build_lz: matrix size overflows");
  }
  if (bytes > options.memory_budget_bytes) {
    throw ResourceError("build_lz: dense matrix for N = " + std::to_string(cutoff) +
                        " needs " + std::to_string(bytes) + " bytes, budget is " +
                        std::to_string(options.memory_budget_bytes));
  }

  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(basis.dim(), basis.dim());
  // Column-major storage: fill column by column so each worker owns its columns.
  parallel_for(dim, options.threads, [&](std::size_t c) {
    const auto col = static_cast<Index>(c);
    const ModeBasis::Mode cm = basis.mode(col);
    // Nonzeros sit in the same n1 row-block or the same n2 position.
    for (int m1 = -cutoff; m1 <= cutoff; ++m1) {
      const Index row = basis.flat(m1, cm.n2);
      a(row, col) = lz_element(basis.mode(row), cm, consts);
    }
    for (int m2 = -cutoff; m2 <= cutoff; ++m2) {
      const Index row = basis.flat(cm.n1, m2);
      a(row, col) = lz_element(basis.mode(row), cm, consts);
    }
  });
  return TruncatedOperator(cutoff, consts, std::move(a));
}

Eigen::VectorXcd apply_lz(int cutoff, std::span<const Complex> v,
                          const PhysicalConstants& consts) {
  const ModeBasis basis(cutoff);
  if (static_cast<Index>(v.size()) != basis.dim()) {
    throw DimensionMismatch("apply_lz: vector length " + std::to_string(v.size()) +
                            " != (2N+1)^2 = " + std::to_string(basis.dim()));
  }
  using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int side = basis.side();
  Eigen::Map<const RowMajor> x(v.data(), side, side);
  const Eigen::MatrixXcd k = kernel_matrix(cutoff);
  const Eigen::VectorXcd n = mode_numbers(cutoff).cast<Complex>();

  // K is antisymmetric, so L_z X = hbar (K X D + D X K) with D = diag(n).
  RowMajor y = (k * x) * n.asDiagonal();
  y.noalias() += n.asDiagonal() * (x * k);
  y *= consts.hbar;
  return Eigen::Map<const Eigen::VectorXcd>(y.data(), basis.dim());
}

CommutatorReport commutator_check(int cutoff, const TorusGeometry& geom,
                                  const PhysicalConstants& consts) {
  if (cutoff < 4) throw DomainError("commutator_check: needs N >= 4");
  const Eigen::MatrixXcd q = q_matrix(cutoff, geom);
  const Eigen::MatrixXcd p = p_matrix(cutoff, geom, consts);
  const Eigen::MatrixXcd c = q * p - p * q;
  const Complex ih{0.0, consts.hbar};
  const int side = 2 * cutoff + 1;

  CommutatorReport report;
  report.cutoff = cutoff;
  report.trace = c.trace();
  report.identity_trace = ih * static_cast<double>(side);
  report.origin_diagonal = c(cutoff, cutoff);

  const int half = cutoff / 2;
  for (int a = 0; a < side; ++a) {
    for (int b = 0; b < side; ++b) {
      const int m = a - cutoff;
      const int n = b - cutoff;
      const double delta = (m == n) ? 1.0 : 0.0;
      const Complex canonical = ih * delta;
      const Complex with_boundary = ih * (delta - alternating_sign(m - n));
      if (std::abs(m) <= half && std::abs(n) <= half) {
        report.interior_max_deviation =
            std::max(report.interior_max_deviation, std::abs(c(a, b) - canonical));
      }
      report.boundary_identity_residual =
          std::max(report.boundary_identity_residual, std::abs(c(a, b) - with_boundary));
    }
  }

  // Fourier coefficients of a C-infinity bump vanishing at the boundary,
  // by the midpoint rule (spectrally accurate for periodic smooth integrands).
  constexpr int kQuadrature = 8192;
  const double h = geom.side() / kQuadrature;
  Eigen::VectorXcd coeff = Eigen::VectorXcd::Zero(side);
  for (int j = 0; j < kQuadrature; ++j) {
    const double x = -geom.ell() + (j + 0.5) * h;
    const double f = bump(x, 0.5 * geom.ell());
    if (f == 0.0) continue;
    for (int a = 0; a < side; ++a) {
      const double phase = -kPi * static_cast<double>(a - cutoff) * x / geom.ell();
      coeff(a) += std::polar(f * h / std::sqrt(geom.side()), phase);
    }
  }
  const Eigen::VectorXcd residual = c * coeff - ih * coeff;
  report.smooth_state_residual = residual.norm() / coeff.norm();
  return report;
}

}  // namespace toruslz
