#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "toruslz/analytic_spectrum.hpp"
#include "toruslz/geometry.hpp"

namespace toruslz {

using Complex = std::complex<double>;
using Index = Eigen::Index;

/// Doubly indexed Fourier basis u_{n1}(x) u_{n2}(y) with |n1|, |n2| <= N.
/// Flat index is row-major in n1: (n1 + N) * (2N + 1) + (n2 + N).
class ModeBasis {
 public:
  struct Mode {
    int n1 = 0;
    int n2 = 0;
    friend bool operator==(const Mode&, const Mode&) = default;
  };

  explicit ModeBasis(int cutoff);

  int cutoff() const noexcept { return cutoff_; }
  int side() const noexcept { return 2 * cutoff_ + 1; }
  Index dim() const noexcept { return static_cast<Index>(side()) * side(); }

  Index flat(int n1, int n2) const noexcept {
    return static_cast<Index>(n1 + cutoff_) * side() + (n2 + cutoff_);
  }
  Mode mode(Index flat) const noexcept {
    return {static_cast<int>(flat / side()) - cutoff_,
            static_cast<int>(flat % side()) - cutoff_};
  }
  /// Image of a flat index under the quarter turn (n1, n2) -> (-n2, n1).
  Index rotate(Index flat) const noexcept {
    const Mode m = mode(flat);
    return this->flat(-m.n2, m.n1);
  }

 private:
  int cutoff_;
};

/// <u_m | x | u_n> on [-ell, ell): 0 on the diagonal, i ell (-1)^{m-n} / (pi (m-n)) otherwise.
Complex q_matrix_element(std::int64_t m, std::int64_t n, const TorusGeometry& geom);

/// <u_m | p | u_n> = (pi hbar / ell) n delta_{mn}.
double p_matrix_element(std::int64_t m, std::int64_t n, const TorusGeometry& geom,
                        const PhysicalConstants& consts);

/// Closed-form <m1 m2 | L_z | n1 n2>; ell cancels between q and p.
Complex lz_element(const ModeBasis::Mode& row, const ModeBasis::Mode& col,
                   const PhysicalConstants& consts);

/// Truncated one-dimensional position and momentum matrices, (2N+1) x (2N+1).
Eigen::MatrixXcd q_matrix(int cutoff, const TorusGeometry& geom);
Eigen::MatrixXcd p_matrix(int cutoff, const TorusGeometry& geom, const PhysicalConstants& consts);

struct BuildOptions {
  /// Upper bound on bytes for the dense matrix.
  std::size_t memory_budget_bytes = std::size_t{1} << 30;
  /// When false only the matrix-free representation is kept.
  bool materialize = true;
  unsigned threads = 1;
};

/// Fourier-basis truncation of L_z = q (x) p - p (x) q.
///
/// Immutable after construction. The dense matrix is present unless the
/// operator was built with `materialize = false`; `apply` is always
/// available and costs O(N^3).
class TruncatedOperator {
 public:
  TruncatedOperator(int cutoff, PhysicalConstants consts,
                    std::optional<Eigen::MatrixXcd> dense);

  int cutoff() const noexcept { return basis_.cutoff(); }
  Index dim() const noexcept { return basis_.dim(); }
  const ModeBasis& basis() const noexcept { return basis_; }
  const PhysicalConstants& constants() const noexcept { return consts_; }

  bool is_materialized() const noexcept { return dense_.has_value(); }
  /// Throws std::logic_error when the operator is matrix-free.
  const Eigen::MatrixXcd& matrix() const;

  Complex element(Index row, Index col) const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;

  /// Truncate-then-square: (P L_z P)^2, which is not P L_z^2 P.
  Eigen::MatrixXcd squared() const;

 private:
  ModeBasis basis_;
  PhysicalConstants consts_;
  std::optional<Eigen::MatrixXcd> dense_;
};

/// Throws ResourceError when the dense matrix would exceed the memory budget.
TruncatedOperator build_lz(int cutoff, const PhysicalConstants& consts,
                           const BuildOptions& options = {});

/// Matrix-free L_z v for a coefficient vector of length (2N+1)^2.
/// Throws DimensionMismatch on a wrong length.
Eigen::VectorXcd apply_lz(int cutoff, std::span<const Complex> v,
                          const PhysicalConstants& consts);

/// Truncated canonical commutator [q, p] in one dimension.
///
/// The finite matrix satisfies [q, p]_{mn} = i hbar (delta_{mn} - (-1)^{m-n})
/// exactly: the second term is the boundary contribution from x psi leaving
/// the periodic domain, and it does not shrink with N. On states that vanish
/// at x = +-ell the boundary term drops out, which `smooth_state_residual`
/// measures.
struct CommutatorReport {
  int cutoff = 0;
  /// max |[q,p]_{mn} - i hbar delta_{mn}| over |m|, |n| <= N/2.
  double interior_max_deviation = 0.0;
  /// max |[q,p]_{mn} - i hbar (delta_{mn} - (-1)^{m-n})| over the full block.
  double boundary_identity_residual = 0.0;
  Complex trace{0.0, 0.0};
  Complex identity_trace{0.0, 0.0};
  Complex origin_diagonal{0.0, 0.0};
  /// ||([q,p] - i hbar) c|| / ||c|| for the truncated coefficients c of a
  /// smooth bump supported in |x| < ell/2.
  double smooth_state_residual = 0.0;
};

CommutatorReport commutator_check(int cutoff, const TorusGeometry& geom,
                                  const PhysicalConstants& consts);

}  // namespace toruslz
