#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <random>
#include <string>

#include "toruslz/eigensolver.hpp"
#include "toruslz/errors.hpp"

namespace toruslz {

namespace {

using Target = IterativeOptions::Target;

Eigen::VectorXcd random_unit_vector(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXcd v(dim);
  for (Index i = 0; i < dim; ++i) v(i) = Complex(normal(rng), normal(rng));
  return v / v.norm();
}

// Two passes of classical Gram-Schmidt against the first `count` columns.
void reorthogonalize(const Eigen::MatrixXcd& basis, Index count, Eigen::VectorXcd& w) {
  if (count == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::VectorXcd h = basis.leftCols(count).adjoint() * w;
    w.noalias() -= basis.leftCols(count) * h;
  }
}

// Largest |Ritz value| of a short unreorthogonalised Lanczos run; a lower
// bound on ||A|| that is accurate to a few digits after ~40 steps.
double estimate_norm(const LinearMap& apply, Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const Index steps = std::min<Index>(dim, 40);
  Eigen::VectorXcd q = random_unit_vector(dim, rng);
  Eigen::VectorXcd q_prev = Eigen::VectorXcd::Zero(dim);
  Eigen::VectorXcd w(dim);
  std::vector<double> alpha;
  std::vector<double> beta;
  double b = 0.0;
  for (Index j = 0; j < steps; ++j) {
    apply(q, w);
    const double a = q.dot(w).real();
    w -= a * q + b * q_prev;
    alpha.push_back(a);
    b = w.norm();
    if (b < 1e-14 * std::max(1.0, std::abs(a))) break;
    beta.push_back(b);
    q_prev = q;
    q = w / b;
  }
  const auto n = static_cast<Index>(alpha.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    t(i, i) = alpha[static_cast<std::size_t>(i)];
    if (i + 1 < n) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// MINRES for (A - shift) x = b with A Hermitian; the Lanczos coefficients
// stay real, so the real-arithmetic recurrences carry over unchanged.
// Returns false if the residual estimate does not reach rtol within maxit.
bool minres(const LinearMap& apply, double shift, const Eigen::VectorXcd& b, double rtol,
            Index maxit, Eigen::VectorXcd& x) {
  const Index dim = b.size();
  x.setZero(dim);
  const double beta1 = b.norm();
  if (beta1 == 0.0) return true;
  Eigen::VectorXcd r1 = b, r2 = b, y = b, v(dim);
  Eigen::VectorXcd w = Eigen::VectorXcd::Zero(dim), w1(dim), w2 = Eigen::VectorXcd::Zero(dim);
  double beta = beta1, oldb = 0.0, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  for (Index itn = 1; itn <= maxit; ++itn) {
    v = y / beta;
    apply(v, y);
    y -= shift * v;
    if (itn >= 2) y -= (beta / oldb) * r1;
    const double alfa = v.dot(y).real();
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    oldb = beta;
    beta = y.norm();
    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), std::numeric_limits<double>::min());
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar *= sn;
    w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    x += phi * w;
    if (phibar <= rtol * beta1) return true;
    if (beta == 0.0) return false;
  }
  return false;
}

}  // namespace

EigenDecomposition lanczos(const LinearMap& apply, Index dim, double tolerance,
                           const IterativeOptions& options) {
  if (dim <= 0) throw DomainError("lanczos: empty operator");
  const Index wanted = std::clamp<Index>(options.num_eigenpairs, 1, dim);
  const Index max_iter =
      options.max_iterations > 0
          ? std::min(options.max_iterations, dim)
          : std::min(dim, std::max<Index>(20 * wanted + 200, 400));
  const bool inverted = options.target == Target::kNearShift;
  const double shift = options.shift;

  const LinearMap krylov_op = [&](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    if (!inverted) {
      apply(in, out);
      return;
    }
    if (!minres(apply, shift, in, 1e-13, 20 * dim + 100, out)) {
      throw NonConvergence("lanczos: inner solve failed; shift may coincide with an eigenvalue",
                           std::numeric_limits<double>::infinity());
    }
  };

  const double norm_a = std::max(estimate_norm(apply, dim, options.seed),
                                 std::numeric_limits<double>::min());
  std::mt19937_64 rng(options.seed);

  Eigen::MatrixXcd q(dim, max_iter);
  std::vector<double> alpha;
  std::vector<double> beta;
  q.col(0) = random_unit_vector(dim, rng);
  Eigen::VectorXcd w(dim);
  double achieved = std::numeric_limits<double>::infinity();
  // Size of the Krylov operator: ||A|| directly, or the largest |alpha| seen
  // for the inverse (a lower bound on 1 / dist(shift, spectrum)).
  double krylov_norm = inverted ? 0.0 : norm_a;

  for (Index j = 0; j < max_iter; ++j) {
    krylov_op(q.col(j), w);
    const double a = q.col(j).dot(w).real();
    alpha.push_back(a);
    if (inverted) krylov_norm = std::max(krylov_norm, std::abs(a));
    w -= a * q.col(j);
    if (j > 0) w -= beta.back() * q.col(j - 1);
    reorthogonalize(q, j + 1, w);
    double b = w.norm();
    const Index steps = j + 1;

    const bool exhausted = steps == max_iter;
    const bool invariant = b < 1e-12 * krylov_norm;
    const bool check = steps >= wanted && (steps % 10 == 0 || exhausted || invariant);

    if (check) {
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(steps, steps);
      for (Index i = 0; i < steps; ++i) {
        t(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < steps) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
      // Ritz values ascending; pick the wanted end, or the largest |theta|
      // of the inverse.
      std::vector<Index> order(static_cast<std::size_t>(steps));
      std::iota(order.begin(), order.end(), Index{0});
      if (options.target == Target::kLargest) {
        std::reverse(order.begin(), order.end());
      } else if (inverted) {
        const Eigen::VectorXd& theta = es.eigenvalues();
        std::stable_sort(order.begin(), order.end(),
                         [&](Index l, Index r) { return std::abs(theta(l)) > std::abs(theta(r)); });
        krylov_norm = std::max(krylov_norm, std::abs(theta(order.front())));
      }
      const std::vector<Index> pick(order.begin(), order.begin() + wanted);
      double worst_estimate = 0.0;
      for (Index i : pick) worst_estimate = std::max(worst_estimate, b * std::abs(es.eigenvectors()(steps - 1, i)));
      if (worst_estimate <= tolerance * krylov_norm || exhausted || invariant) {
        Eigen::MatrixXd s(steps, wanted);
        for (Index i = 0; i < wanted; ++i) s.col(i) = es.eigenvectors().col(pick[static_cast<std::size_t>(i)]);
        Eigen::MatrixXcd y = q.leftCols(steps) * s.cast<Complex>();

        // Rayleigh-Ritz with A itself; the Krylov operator may be the inverse.
        Eigen::MatrixXcd ay(dim, wanted);
        for (Index i = 0; i < wanted; ++i) {
          Eigen::VectorXcd col = y.col(i);
          Eigen::VectorXcd out(dim);
          apply(col, out);
          ay.col(i) = out;
        }
        Eigen::MatrixXcd h = y.adjoint() * ay;
        h = 0.5 * (h + h.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> rr(h);
        const Eigen::MatrixXcd vectors = y * rr.eigenvectors();
        const Eigen::MatrixXcd a_vectors = ay * rr.eigenvectors();
        const Eigen::VectorXd values = rr.eigenvalues();
        const Eigen::MatrixXcd resid = a_vectors - vectors * values.cast<Complex>().asDiagonal();
        achieved = resid.colwise().norm().maxCoeff() / norm_a;

        if (achieved <= tolerance) {
          EigenDecomposition out;
          out.method = SolverMethod::kLanczos;
          out.eigenvalues = values;
          out.eigenvectors = vectors;
          out.sectors.assign(static_cast<std::size_t>(wanted), -1);
          out.operator_norm = std::max(norm_a, values.cwiseAbs().maxCoeff());
          out.residual_bound = resid.colwise().norm().maxCoeff() / out.operator_norm;
          const Eigen::MatrixXcd g = vectors.adjoint() * vectors;
          out.orthonormality_error =
              (g - Eigen::MatrixXcd::Identity(wanted, wanted)).cwiseAbs().maxCoeff();
          out.complete = wanted == dim;
          return out;
        }
        if (exhausted) break;
      }
    }

    if (steps == max_iter) break;
    if (invariant) {
      // Krylov space closed: continue from a fresh direction orthogonal to it.
      w = random_unit_vector(dim, rng);
      reorthogonalize(q, steps, w);
      b = w.norm();
      w /= b;
      beta.push_back(0.0);
      q.col(steps) = w;
      continue;
    }
    beta.push_back(b);
    q.col(steps) = w / b;
  }
  throw NonConvergence("lanczos: no convergence after " + std::to_string(max_iter) +
                           " iterations",
                       achieved);
}

}  // namespace toruslz
