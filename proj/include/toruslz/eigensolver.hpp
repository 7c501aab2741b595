#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "toruslz/operator_builder.hpp"

namespace toruslz {

enum class SolverMethod { kDenseSectors, kDense, kLanczos };

std::string to_string(SolverMethod method);

/// Numerical eigenpairs with verified residuals.
struct EigenDecomposition {
  /// -1 when the decomposition did not come from a TruncatedOperator.
  int cutoff = -1;
  double hbar = 1.0;
  SolverMethod method = SolverMethod::kDense;
  /// Ascending.
  Eigen::VectorXd eigenvalues;
  /// Column j pairs with eigenvalues(j); empty when vectors were not requested.
  Eigen::MatrixXcd eigenvectors;
  /// Quarter-turn eigenvalue i^k of each eigenpair (k in 0..3), or -1.
  std::vector<int> sectors;
  /// max_j ||A v_j - lambda_j v_j|| / ||A||.
  double residual_bound = 0.0;
  /// max |V^H V - I|; zero when vectors were not computed.
  double orthonormality_error = 0.0;
  /// Spectral norm (or its estimate on the iterative path).
  double operator_norm = 0.0;
  /// True when every eigenvalue of the matrix is present.
  bool complete = true;

  bool has_vectors() const noexcept { return eigenvectors.size() > 0; }
  Index size() const noexcept { return eigenvalues.size(); }
};

struct IterativeOptions {
  enum class Target { kLargest, kSmallest, kNearShift };
  Index num_eigenpairs = 16;
  Target target = Target::kLargest;
  /// Centre of the window for kNearShift.
  double shift = 0.0;
  /// Krylov dimension cap; 0 picks min(dim, max(20 k + 200, 400)).
  Index max_iterations = 0;
  std::uint64_t seed = 0x70725aULL;
};

struct SolverOptions {
  double tolerance = 1e-9;
  /// Matrices of dimension above this use the iterative path.
  Index dense_limit = 5000;
  bool compute_vectors = true;
  /// Split the operator into quarter-turn sectors on the dense path.
  bool use_rotation_symmetry = true;
  IterativeOptions iterative;
};

/// Eigendecomposition of the truncated L_z.
///
/// Dense path (dim <= dense_limit): the quarter-turn U (n1, n2) -> (-n2, n1)
/// commutes with L_z, so the matrix is split into four U-eigenspaces of
/// dimension ~dim/4 that are diagonalised independently. Residuals and
/// orthonormality are measured inside each sector, which is exact because
/// the sector bases are orthonormal.
///
/// Iterative path: Lanczos with full reorthogonalisation on the matrix-free
/// apply, returning `iterative.num_eigenpairs` eigenpairs at the requested
/// end of the spectrum or nearest a shift (shift-invert, with MINRES solves
/// of (A - shift) x = b). Degenerate clusters are not guaranteed to be fully
/// resolved on this path.
///
/// Throws NotHermitian for a materialised non-Hermitian matrix and
/// NonConvergence when the residual contract cannot be met.
EigenDecomposition eigendecompose(const TruncatedOperator& op,
                                  const SolverOptions& options = {});

/// Dense Hermitian eigensolver (LAPACK zheevr, zheev fallback) for an arbitrary matrix.
EigenDecomposition eigendecompose_dense(const Eigen::MatrixXcd& a, double tolerance = 1e-9,
                                        bool compute_vectors = true);

/// Eigenvalues of a Hermitian matrix only.
Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& a);

/// Matrix of L_z restricted to the quarter-turn eigenspace with eigenvalue i^k,
/// in the symmetrised basis described in `sector_basis`.
Eigen::MatrixXcd sector_matrix(int cutoff, int sector, const PhysicalConstants& consts);

/// Columns of the isometry from sector k into the full mode space: for each
/// orbit representative a (n1 >= 1, n2 >= 0) the vector
/// (1/2) sum_j i^{-jk} e_{U^j a}; sector 0 also contains e_{(0,0)} first.
Eigen::MatrixXcd sector_basis(int cutoff, int sector);

using LinearMap = std::function<void(const Eigen::VectorXcd& in, Eigen::VectorXcd& out)>;

/// Lanczos with full reorthogonalisation for a Hermitian linear map.
EigenDecomposition lanczos(const LinearMap& apply, Index dim, double tolerance,
                           const IterativeOptions& options);

struct Histogram {
  /// counts.size() + 1 edges, bins are half-open [edge_k, edge_{k+1}).
  std::vector<double> edges;
  std::vector<std::int64_t> counts;
};

/// Bins centred on multiples of `bin_width`, covering all values.
Histogram make_histogram(std::span<const double> values, double bin_width);

/// Counting statistics of a spectrum, in units of hbar.
struct SpectralStatistics {
  double epsilon = 0.1;
  Index count = 0;
  Histogram histogram;
  /// Fraction within epsilon*hbar of an integer multiple of hbar.
  double peak_fraction = 0.0;
  /// Fraction with epsilon < |lambda|/hbar < 1 - epsilon.
  double gap_occupancy = 0.0;
  /// Fraction with d + epsilon < |lambda|/hbar < d + 1 - epsilon, d = 1, 2, 3.
  std::array<double, 3> band_occupancy{};
  /// Eigenvalues beyond the gap and farther than epsilon*hbar from any
  /// integer multiple of hbar, on the positive and negative side.
  Index band_interior_above = 0;
  Index band_interior_below = 0;
};

SpectralStatistics spectral_statistics(std::span<const double> eigenvalues, double epsilon,
                                       const PhysicalConstants& consts,
                                       double bin_width = 0.1);
SpectralStatistics spectral_statistics(const EigenDecomposition& decomp, double epsilon,
                                       double bin_width = 0.1);

struct SweepRow {
  int cutoff = 0;
  Index dim = 0;
  double peak_fraction = 0.0;
  double gap_occupancy = 0.0;
  std::array<double, 3> band_occupancy{};
  double residual_bound = 0.0;
};

/// One row of eigenvalue statistics per cutoff; rows keep the input order.
/// Throws DomainError when `cutoffs` is not ascending.
std::vector<SweepRow> convergence_sweep(std::span<const int> cutoffs, double epsilon,
                                        const PhysicalConstants& consts,
                                        const SolverOptions& options = {},
                                        unsigned threads = 1);

}  // namespace toruslz
