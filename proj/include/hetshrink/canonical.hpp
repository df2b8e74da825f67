#ifndef HETSHRINK_CANONICAL_HPP
#define HETSHRINK_CANONICAL_HPP

#include "hetshrink/core.hpp"

#include <algorithm>
#include <utility>

namespace hetshrink {

/// Reduction of a general (Sigma, Q) problem to diagonal form:
/// Q = B^T B and B Sigma B^T = diag(d), with B = O R, R the symmetric square
/// root of Q and O orthogonal.
struct Factorization {
  Matrix b;
  Matrix b_inv;
  Vector d;
  Matrix r_sqrt;
  Matrix o;
};

/// Relative tolerance for treating two canonical variances as equal.
inline constexpr double kEqualEigenTol = 1e-8;

namespace detail {

struct SymmetricRoot {
  Matrix root;
  Matrix inv_root;
};

inline SymmetricRoot symmetric_root(const Matrix& q) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (q + q.transpose()));
  const Vector s = es.eigenvalues().cwiseSqrt();
  const Matrix& v = es.eigenvectors();
  return {v * s.asDiagonal() * v.transpose(), v * s.cwiseInverse().asDiagonal() * v.transpose()};
}

// Index groups of (numerically) equal entries of an ascending vector.
inline std::vector<std::pair<Index, Index>> tie_groups(const Vector& sorted, double rel_tol) {
  std::vector<std::pair<Index, Index>> groups;
  Index start = 0;
  for (Index j = 1; j <= sorted.size(); ++j) {
    const bool split =
        j == sorted.size() ||
        std::abs(sorted(j) - sorted(start)) >
            rel_tol * std::max(std::abs(sorted(j)), std::abs(sorted(start)));
    if (split) {
      groups.emplace_back(start, j - start);
      start = j;
    }
  }
  return groups;
}

}  // namespace detail

inline Factorization factor_problem(const Matrix& sigma, const Matrix& q) {
  detail::require_spd(sigma, "sigma");
  detail::require_spd(q, "q");
  detail::require_same_size(sigma.rows(), q.rows(), "factor_problem");

  auto [r, r_inv] = detail::symmetric_root(q);
  const Matrix m = r * sigma * r;
  // Eigen returns eigenvalues in ascending order; ties keep solver order.
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  Factorization f;
  f.o = es.eigenvectors().transpose();
  f.d = es.eigenvalues();
  f.r_sqrt = r;
  f.b = f.o * r;
  f.b_inv = r_inv * f.o.transpose();
  return f;
}

/// True iff the symmetric part of A*Sigma is nonnegative definite.
inline bool check_condition_a(const Matrix& sigma, const Direction& a) {
  detail::require_same_size(sigma.rows(), a.dim(), "check_condition_a");
  const Matrix as = a.matrix() * sigma;
  const Matrix sym = 0.5 * (as + as.transpose());
  if (as.norm() == 0.0) return true;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -kMatrixTol * as.norm();
}

/// True iff A*Sigma = Sigma*A^T and Q*A = A^T*Q.
inline bool check_condition_a2(const Matrix& sigma, const Matrix& q, const Direction& a) {
  detail::require_same_size(sigma.rows(), a.dim(), "check_condition_a2");
  detail::require_same_size(q.rows(), a.dim(), "check_condition_a2");
  const Matrix am = a.matrix();
  const double scale_s = std::max(am.norm() * sigma.norm(), 1e-300);
  const double scale_q = std::max(am.norm() * q.norm(), 1e-300);
  return (am * sigma - sigma * am.transpose()).norm() <= kMatrixTol * scale_s &&
         (q * am - am.transpose() * q).norm() <= kMatrixTol * scale_q;
}

/// c*(Sigma, Q, A) = tr(A Sigma Q) - lambda_max(A Sigma Q + Sigma A^T Q).
///
/// The second matrix equals S Q with S = A Sigma + Sigma A^T symmetric, so
/// its spectrum is that of R S R with R = Q^{1/2}.
inline double c_star_general(const Matrix& sigma, const Matrix& q, const Direction& a) {
  detail::require_same_size(sigma.rows(), a.dim(), "c_star_general");
  detail::require_same_size(q.rows(), a.dim(), "c_star_general");
  const Matrix am = a.matrix();
  const Matrix s = am * sigma + sigma * am.transpose();
  const Matrix r = detail::symmetric_root(q).root;
  const Matrix rsr = r * s * r;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rsr + rsr.transpose()), Eigen::EigenvaluesOnly);
  return (am * sigma * q).trace() - es.eigenvalues().maxCoeff();
}

/// A = B^{-1} diag(a*) B.
inline Direction map_direction(const Factorization& fact, const Vector& a_star) {
  detail::require_same_size(fact.d.size(), a_star.size(), "map_direction");
  for (Index j = 0; j < a_star.size(); ++j) {
    if (!(a_star(j) >= 0.0)) throw Error(ErrorCode::NegativeDirection, "a* must be >= 0");
  }
  return Direction::general(fact.b_inv * a_star.asDiagonal() * fact.b);
}

/// Factorization whose B also diagonalizes A (B A B^{-1} = diag(a*)), for A
/// satisfying A Sigma = Sigma A^T and Q A = A^T Q. Within each block of equal
/// canonical variances the transformed direction is rotated to diagonal form.
struct AlignedFactorization {
  Factorization fact;
  Vector a_star;
};

inline AlignedFactorization align_direction(const Matrix& sigma, const Matrix& q, const Direction& a) {
  if (!check_condition_a2(sigma, q, a)) {
    throw Error(ErrorCode::ConditionA2Violated, "A Sigma and Q A must both be symmetric");
  }
  Factorization f = factor_problem(sigma, q);
  Matrix a_t = f.b * a.matrix() * f.b_inv;
  a_t = 0.5 * (a_t + a_t.transpose());

  const Index p = f.d.size();
  Matrix w = Matrix::Identity(p, p);
  for (auto [start, len] : detail::tie_groups(f.d, kEqualEigenTol)) {
    if (len < 2) continue;
    Eigen::SelfAdjointEigenSolver<Matrix> es(a_t.block(start, start, len, len));
    w.block(start, start, len, len) = es.eigenvectors().transpose();
  }
  f.o = w * f.o;
  f.b = w * f.b;
  f.b_inv = f.b_inv * w.transpose();
  // Same-variance rotation leaves d unchanged up to rounding.
  AlignedFactorization out{std::move(f), (w * a_t * w.transpose()).diagonal()};
  return out;
}

}  // namespace hetshrink

#endif  // HETSHRINK_CANONICAL_HPP
