#ifndef HETSHRINK_DIRECTION_SOLVER_HPP
#define HETSHRINK_DIRECTION_SOLVER_HPP

#include "hetshrink/core.hpp"

#include <algorithm>
#include <numeric>

// Closed-form maximizer of c*(D, A) = sum_j d_j a_j - 2 max_j d_j a_j over
// diagonal A >= 0 with sum_j (d_j + gamma_j) a_j^2 held fixed.
//
// Every quantity depends on the prior only through the Bayes importance
// d*_j = d_j^2 / (d_j + gamma_j). For the infinite homoscedastic prior the
// common factor gamma is dropped and d*_j = d_j^2 is used instead; the
// direction is scale-free, so this is exactly the limiting solution.

namespace hetshrink {

struct BayesImportance {
  Vector d_star;
  std::vector<Index> perm;  // perm[i] = original index of the i-th largest d*
};

namespace detail {

inline std::vector<Index> sort_descending(const Vector& v) {
  std::vector<Index> perm(static_cast<std::size_t>(v.size()));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::stable_sort(perm.begin(), perm.end(), [&](Index a, Index b) { return v(a) > v(b); });
  return perm;
}

inline Vector permute(const Vector& v, const std::vector<Index>& perm) {
  Vector out(v.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out(static_cast<Index>(i)) = v(perm[i]);
  return out;
}

inline Vector unpermute(const Vector& sorted, const std::vector<Index>& perm) {
  Vector out(sorted.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out(perm[i]) = sorted(static_cast<Index>(i));
  return out;
}

inline Vector bayes_importance_of(const Vector& d, const ResolvedGamma& gamma) {
  if (std::holds_alternative<InfiniteHomoscedastic>(gamma)) return d.cwiseAbs2();
  const Vector& g = std::get<Vector>(gamma);
  return d.cwiseAbs2().cwiseQuotient(d + g);
}

// M_k for k = 3..p on d* sorted nonincreasing.
inline Vector m_sequence_from_importance(const Vector& ds) {
  const Index p = ds.size();
  if (p < 3) return Vector();
  Vector m(p - 2);
  double inv_sum = 0.0;
  Vector tail(p + 1);
  tail(p) = 0.0;
  for (Index j = p - 1; j >= 0; --j) tail(j) = tail(j + 1) + ds(j);
  for (Index k = 1; k <= p; ++k) {
    inv_sum += 1.0 / ds(k - 1);
    if (k >= 3) {
      const double km2 = static_cast<double>(k - 2);
      m(k - 3) = km2 * km2 / inv_sum + tail(k);
    }
  }
  return m;
}

inline int cutoff_from_importance(const Vector& ds) {
  const Index p = ds.size();
  if (p < 3) throw Error(ErrorCode::DimensionTooSmall, "cutoff requires p >= 3");
  double inv_sum = 1.0 / ds(0) + 1.0 / ds(1);
  for (Index k = 3; k <= p - 1; ++k) {
    inv_sum += 1.0 / ds(k - 1);
    if (static_cast<double>(k - 2) / inv_sum > ds(k)) return static_cast<int>(k);
  }
  return static_cast<int>(p);
}

}  // namespace detail

/// d*_j = d_j^2 / (d_j + gamma_j) and the stable permutation sorting it
/// nonincreasing.
inline BayesImportance bayes_importance(const Vector& d, const Vector& gamma) {
  detail::require_positive(d, "d");
  detail::require_same_size(d.size(), gamma.size(), "bayes_importance");
  BayesImportance out;
  out.d_star = detail::bayes_importance_of(d, ResolvedGamma{gamma});
  out.perm = detail::sort_descending(out.d_star);
  return out;
}

/// (M_3, ..., M_p) for inputs already sorted by d* nonincreasing.
inline Vector m_sequence(const Vector& d_sorted, const Vector& gamma_sorted) {
  detail::require_same_size(d_sorted.size(), gamma_sorted.size(), "m_sequence");
  return detail::m_sequence_from_importance(
      detail::bayes_importance_of(d_sorted, ResolvedGamma{gamma_sorted}));
}

/// Smallest k in [3, p-1] with (k-2) / sum_{j<=k} 1/d*_j > d*_{k+1}, else p.
inline int find_cutoff(const Vector& d_sorted, const Vector& gamma_sorted) {
  detail::require_same_size(d_sorted.size(), gamma_sorted.size(), "find_cutoff");
  return detail::cutoff_from_importance(
      detail::bayes_importance_of(d_sorted, ResolvedGamma{gamma_sorted}));
}

struct DirectionSolution {
  Vector a_dag;  // input order
  int nu = 0;
  Vector m_seq;  // M_3..M_p
  double c_star = 0.0;
  std::vector<Index> perm;
  Vector d_star;  // input order; d_j^2 for the infinite prior
};

inline DirectionSolution solve_direction(const Vector& d, const PriorSpec& prior) {
  detail::require_positive(d, "d");
  const Index p = d.size();
  if (p < 3) throw Error(ErrorCode::DimensionTooSmall, "direction solver requires p >= 3");

  const ResolvedGamma gamma = effective_gamma(prior, d);
  DirectionSolution sol;
  sol.d_star = detail::bayes_importance_of(d, gamma);
  sol.perm = detail::sort_descending(sol.d_star);
  const Vector ds = detail::permute(sol.d_star, sol.perm);
  const Vector dd = detail::permute(d, sol.perm);

  sol.m_seq = detail::m_sequence_from_importance(ds);
  sol.nu = detail::cutoff_from_importance(ds);

  double inv_sum = 0.0;
  for (Index j = 0; j < sol.nu; ++j) inv_sum += 1.0 / ds(j);
  const double level = static_cast<double>(sol.nu - 2) / inv_sum;

  // Leading block: d_j a_j = level. Tail: a_j = d*_j / d_j = d_j / (d_j + gamma_j).
  Vector a(p);
  for (Index j = 0; j < p; ++j) a(j) = j < sol.nu ? level / dd(j) : ds(j) / dd(j);
  sol.a_dag = detail::unpermute(a, sol.perm);
  sol.c_star = sol.m_seq(sol.nu - 3);
  return sol;
}

/// c*(D, A) = tr(DA) - 2 lambda_max(DA) for diagonal D and A.
inline double c_star_canonical(const Vector& d, const Vector& a) {
  detail::require_same_size(d.size(), a.size(), "c_star_canonical");
  if (d.size() == 0) return 0.0;
  const Vector da = d.cwiseProduct(a);
  return da.sum() - 2.0 * da.maxCoeff();
}

/// Recomputes c*(D, A-dagger) directly from the direction.
inline double max_value_diagnostic(const DirectionSolution& sol, const Vector& d) {
  return c_star_canonical(d, sol.a_dag);
}

}  // namespace hetshrink

#endif  // HETSHRINK_DIRECTION_SOLVER_HPP
