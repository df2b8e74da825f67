#ifndef HETSHRINK_BOUNDS_HPP
#define HETSHRINK_BOUNDS_HPP

#include "hetshrink/direction_solver.hpp"
#include "hetshrink/estimators.hpp"

#include <string>
#include <vector>

// Closed-form risk bounds for delta_A, delta_{A-dagger} and delta^MB2 under a
// N(0, Gamma) prior or over the hyper-rectangle {theta: theta_j^2 <= gamma_j}.
// d* always refers to d_j^2 / (d_j + gamma_j) sorted nonincreasing.

namespace hetshrink {

struct BoundReport {
  std::string name;
  double value = 0.0;
  std::vector<std::string> assumptions;
};

namespace detail {

inline Vector sorted_importance(const Vector& d, const Vector& gamma) {
  const BayesImportance bi = bayes_importance(d, gamma);
  return permute(bi.d_star, bi.perm);
}

inline double weighted_norm2(const Vector& d, const Vector& gamma, const Vector& a) {
  return (d + gamma).cwiseProduct(a.cwiseAbs2()).sum();
}

inline double tail_sum(const Vector& ds, Index from) {
  double s = 0.0;
  for (Index j = from; j < ds.size(); ++j) s += ds(j);
  return s;
}

}  // namespace detail

/// Bayes risk of the Bayes rule: tr(D) - sum_j d*_j.
inline double bayes_rule_risk(const Vector& d, const Vector& gamma) {
  return d.sum() - detail::sorted_importance(d, gamma).sum();
}

/// tr(D) - p/(p-2) c*^2(D,A) / sum_j (d_j + gamma_j) a_j^2, a bound on the
/// Bayes risk of delta_A.
inline BoundReport bayes_upper_bound(const Vector& d, const Vector& gamma, const Vector& a) {
  detail::require_same_size(d.size(), gamma.size(), "bayes_upper_bound");
  const Index p = d.size();
  if (p <= 2) throw Error(ErrorCode::DimensionTooSmall, "bayes_upper_bound requires p > 2");
  const double cs = c_star_canonical(d, a);
  if (cs < 0.0) throw Error(ErrorCode::NegativeCStar, "c*(D,A) < 0");
  const double pd = static_cast<double>(p);
  const double w = detail::weighted_norm2(d, gamma, a);
  const double reduction = w > 0.0 ? pd / (pd - 2.0) * cs * cs / w : 0.0;
  return {"bayes_upper_bound", d.sum() - reduction, {"c*(D,A) >= 0", "p > 2", "Bayes risk of delta_A"}};
}

/// Bayes risk bound for delta_{A-dagger}: tr(D) - p/(p-2) M_nu.
inline BoundReport bayes_upper_bound_dagger(const Vector& d, const Vector& gamma) {
  const DirectionSolution sol = solve_direction(d, PriorSpec::diagonal(gamma));
  const double pd = static_cast<double>(d.size());
  return {"bayes_upper_bound_dagger", d.sum() - pd / (pd - 2.0) * sol.c_star,
          {"A = A-dagger(Gamma)", "Bayes risk of delta_A-dagger", "nu=" + std::to_string(sol.nu)}};
}

struct Theorem3Bounds {
  BoundReport tight;
  BoundReport loose;
  int nu = 0;
};

/// Bayes risk bounds of delta_{A-dagger(Gamma)} with separate nu = 3 and
/// nu >= 4 branches.
inline Theorem3Bounds theorem3_bounds(const Vector& d, const Vector& gamma) {
  const Index p = d.size();
  if (p < 3) throw Error(ErrorCode::DimensionTooSmall, "theorem3_bounds requires p >= 3");
  const DirectionSolution sol = solve_direction(d, PriorSpec::diagonal(gamma));
  const Vector ds = detail::permute(sol.d_star, sol.perm);
  const double pd = static_cast<double>(p);
  const double base = d.sum() - detail::tail_sum(ds, 2);
  Theorem3Bounds out;
  out.nu = sol.nu;
  if (sol.nu == 3) {
    const double tight = base + (ds(2) - 2.0 / (pd - 2.0) * detail::tail_sum(ds, 3) -
                                 pd / (pd - 2.0) * ds(2) / 3.0);
    out.tight = {"theorem3_tight", tight, {"nu=3 branch", "Bayes risk of delta_A-dagger"}};
    out.loose = {"theorem3_loose", base + 2.0 / 3.0 * ds(2), {"nu=3 branch", "Bayes risk of delta_A-dagger"}};
  } else {
    const double nu = static_cast<double>(sol.nu);
    const double tight = base + (ds(2) + ds(3) - 2.0 / (pd - 2.0) * detail::tail_sum(ds, 4) -
                                 4.0 * pd / (pd - 2.0) * ds(sol.nu - 1) / nu);
    out.tight = {"theorem3_tight", tight, {"nu>=4 branch", "Bayes risk of delta_A-dagger"}};
    out.loose = {"theorem3_loose", base + ds(2) + ds(3), {"nu>=4 branch", "Bayes risk of delta_A-dagger"}};
  }
  return out;
}

/// Worst-case risk bounds of delta_{A-dagger(Gamma)} over the hyper-rectangle.
inline Theorem3Bounds theorem4_bounds(const Vector& d, const Vector& gamma) {
  const Index p = d.size();
  if (p < 3) throw Error(ErrorCode::DimensionTooSmall, "theorem4_bounds requires p >= 3");
  const DirectionSolution sol = solve_direction(d, PriorSpec::diagonal(gamma));
  const Vector ds = detail::permute(sol.d_star, sol.perm);
  const double base = d.sum() - detail::tail_sum(ds, 2);
  Theorem3Bounds out;
  out.nu = sol.nu;
  if (sol.nu == 3) {
    const double v = base + 2.0 / 3.0 * ds(2);
    out.tight = {"theorem4_tight", v, {"nu=3 branch", "worst-case risk over H_Gamma"}};
    out.loose = {"theorem4_loose", v, {"nu=3 branch", "worst-case risk over H_Gamma"}};
  } else {
    const double nu = static_cast<double>(sol.nu);
    out.tight = {"theorem4_tight", base + ds(2) + ds(3) - 4.0 * ds(sol.nu - 1) / nu,
                 {"nu>=4 branch", "worst-case risk over H_Gamma"}};
    out.loose = {"theorem4_loose", base + ds(2) + ds(3), {"nu>=4 branch", "worst-case risk over H_Gamma"}};
  }
  return out;
}

/// R(Bayes rule) + d*_1 + d*_2 + d*_3 + d*_4.
inline BoundReport bayes_proximity_bound(const Vector& d, const Vector& gamma) {
  if (d.size() < 4) throw Error(ErrorCode::DimensionTooSmall, "bayes_proximity_bound requires p >= 4");
  const Vector ds = detail::sorted_importance(d, gamma);
  return {"bayes_proximity_bound", d.sum() - ds.sum() + ds.head(4).sum(),
          {"p >= 4", "Bayes and worst-case risk of delta_A-dagger"}};
}

/// tr(D) - c*^2(D,A) / sum_j (d_j + gamma_j) a_j^2, a bound on the worst-case
/// risk of delta_A over the hyper-rectangle.
inline BoundReport worst_case_bound(const Vector& d, const Vector& gamma, const Vector& a) {
  detail::require_same_size(d.size(), gamma.size(), "worst_case_bound");
  const double cs = c_star_canonical(d, a);
  if (!(cs > 0.0)) throw Error(ErrorCode::NegativeCStar, "worst_case_bound requires c*(D,A) > 0");
  const double w = detail::weighted_norm2(d, gamma, a);
  return {"worst_case_bound", d.sum() - cs * cs / w, {"c*(D,A) > 0", "worst-case risk over H_Gamma"}};
}

/// alpha_0 = max_j d_j / (d_j + gamma_j).
inline double alpha_floor(const Vector& d, const Vector& gamma) {
  return d.cwiseQuotient(d + gamma).maxCoeff();
}

/// Gamma_alpha = alpha (D + Gamma) - D.
inline Vector gamma_alpha(const Vector& d, const Vector& gamma, double alpha) {
  return (alpha * (d + gamma) - d).cwiseMax(0.0);
}

/// R(Bayes; Gamma_alpha) + (d*_1 + ... + d*_4) / alpha, bounding the Bayes
/// and worst-case risk of delta_{A-dagger(Gamma)} under Gamma_alpha.
inline BoundReport corollary4_bound(const Vector& d, const Vector& gamma, double alpha) {
  if (d.size() < 4) throw Error(ErrorCode::DimensionTooSmall, "corollary4_bound requires p >= 4");
  const double floor = alpha_floor(d, gamma);
  if (alpha < floor * (1.0 - 1e-12)) {
    throw Error(ErrorCode::AlphaBelowFloor,
                "alpha=" + std::to_string(alpha) + " below alpha_0=" + std::to_string(floor));
  }
  const Vector ds = detail::sorted_importance(d, gamma);
  return {"corollary4_bound", d.sum() - (ds.sum() - ds.head(4).sum()) / alpha,
          {"alpha >= alpha_0", "p >= 4", "risk under Gamma_alpha"}};
}

/// Exact Bayes risk of the simplified minimax estimator delta^MB2.
inline double mb2_bayes_risk(const Vector& d, const Vector& gamma) {
  const Index p = d.size();
  if (p < 3) throw Error(ErrorCode::DimensionTooSmall, "mb2_bayes_risk requires p >= 3");
  const Vector ds = detail::sorted_importance(d, gamma);
  double risk = d.sum();
  double inv_prefix = 1.0 / ds(0) + 1.0 / ds(1);
  for (Index j = 3; j <= p; ++j) {
    const double dj = ds(j - 1);
    const double jd = static_cast<double>(j);
    risk -= dj + 2.0 * dj / jd * (1.0 - dj / (jd - 1.0) * inv_prefix);
    inv_prefix += 1.0 / dj;
  }
  return risk;
}

/// (L_1, ..., L_p) for the two-block estimator, and whether
/// {k/(k-2)} M_k >= L_k holds for all k >= 3.
struct BlockLSequence {
  Vector l;
  Index tau = 1;
  bool cauchy_schwarz_holds = true;
};

inline BlockLSequence block_l_sequence(const Vector& d, const Vector& gamma) {
  const Vector ds = detail::sorted_importance(d, gamma);
  BlockLSequence out;
  out.l = block_l_from_importance(ds);
  for (Index k = 2; k <= ds.size(); ++k) {
    if (out.l(k - 1) > out.l(out.tau - 1)) out.tau = k;
  }
  const Vector m = detail::m_sequence_from_importance(ds);
  for (Index k = 3; k <= ds.size(); ++k) {
    const double kd = static_cast<double>(k);
    const double lhs = kd / (kd - 2.0) * m(k - 3);
    if (lhs - out.l(k - 1) < -1e-12 * std::max(1.0, std::abs(lhs))) out.cauchy_schwarz_holds = false;
  }
  return out;
}

/// p/(p-2) / sum_j (d_j + gamma_j) a_j^2, a lower bound on
/// E{(X^T A^T A X)^{-1}} for X ~ N(0, D + Gamma).
inline double inverse_moment_lower_bound(const Vector& d, const Vector& gamma, const Vector& a) {
  const Index p = d.size();
  if (p <= 2) throw Error(ErrorCode::DimensionTooSmall, "inverse moment bound requires p > 2");
  const double pd = static_cast<double>(p);
  return pd / (pd - 2.0) / detail::weighted_norm2(d, gamma, a);
}

}  // namespace hetshrink

#endif  // HETSHRINK_BOUNDS_HPP
