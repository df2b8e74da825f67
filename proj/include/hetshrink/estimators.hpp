#ifndef HETSHRINK_ESTIMATORS_HPP
#define HETSHRINK_ESTIMATORS_HPP

#include "hetshrink/canonical.hpp"
#include "hetshrink/core.hpp"
#include "hetshrink/direction_solver.hpp"

#include <algorithm>
#include <functional>
#include <limits>

// Shrinkage estimators of a normal mean with known diagonal variance D (or a
// general (Sigma, Q) pair for the linear-form estimators). Each estimator is
// a pure map x -> Estimate. At x = 0, or when the relevant quadratic form is
// zero, the estimators return their zero-shrink limit.

namespace hetshrink {

namespace detail {

inline double positive(double v) { return v > 0.0 ? v : 0.0; }

inline double factor_multiplier(FactorVersion version) {
  return version == FactorVersion::Alternative ? 2.0 : 1.0;
}

inline Estimate identity_estimate(const Vector& x) {
  return Estimate::from_factors(x, Vector::Ones(x.size()));
}

}  // namespace detail

/// (delta)_j = (1 - d_j / (d_j + gamma_j)) x_j.
inline Estimate bayes_rule(const Vector& x, const Vector& d, const Vector& gamma) {
  detail::require_same_size(x.size(), d.size(), "bayes_rule");
  detail::require_same_size(x.size(), gamma.size(), "bayes_rule");
  return Estimate::from_factors(x, gamma.cwiseQuotient(d + gamma));
}

/// (1 - c sigma^2 / ||x||^2) x, optionally clipped at zero.
inline Estimate james_stein(const Vector& x, double sigma2, double c, bool positive_part) {
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::NonPositiveVariance, "sigma2 must be > 0");
  if (!(c >= 0.0)) throw Error(ErrorCode::InvalidArgument, "c must be >= 0");
  const double norm2 = x.squaredNorm();
  if (norm2 == 0.0) return Estimate::from_factors(x, Vector::Zero(x.size()));
  double f = 1.0 - c * sigma2 / norm2;
  if (positive_part) f = detail::positive(f);
  return Estimate::from_factors(x, Vector::Constant(x.size(), f));
}

/// Morris's modified empirical Bayes estimator with the maximum-likelihood
/// fixed-point iteration for the prior variance.
inline Estimate eb_morris(const Vector& x, const Vector& d) {
  detail::require_same_size(x.size(), d.size(), "eb_morris");
  const Index p = x.size();
  const double pd = static_cast<double>(p);
  const Vector resid = x.cwiseAbs2() - d;
  // Iterates live in [-0.99 min d, inf) so (d_j + gamma)^2 stays away from 0.
  const double floor = -0.99 * d.minCoeff();

  double g = detail::positive(resid.sum() / pd);
  bool converged = false;
  int iterations = 0;
  for (int it = 1; it <= 100; ++it) {
    iterations = it;
    const Vector w = (d.array() + g).square().inverse().matrix();
    const double next = std::max(resid.dot(w) / w.sum(), floor);
    const double step = std::abs(next - g);
    g = next;
    if (step <= 1e-4) {
      converged = true;
      break;
    }
  }

  Estimate e;
  if (!converged) {
    e = detail::identity_estimate(x);
    e.meta["gamma_hat"] = std::numeric_limits<double>::infinity();
  } else {
    const double gp = detail::positive(g);
    const double shrink = (pd - 2.0) / pd;
    Vector f(p);
    for (Index j = 0; j < p; ++j) f(j) = 1.0 - shrink * d(j) / (d(j) + gp);
    e = Estimate::from_factors(x, std::move(f));
    e.meta["gamma_hat"] = g;
  }
  e.meta["converged"] = converged ? 1.0 : 0.0;
  e.meta["iterations"] = iterations;
  return e;
}

/// SURE(gamma) = x^T D (D + gamma I)^{-1} x + 2 gamma tr{D (D + gamma I)^{-1}} - tr(D).
/// Infinite gamma gives the limit tr(D).
inline double xkb_sure_objective(const Vector& x, const Vector& d, double gamma) {
  if (std::isinf(gamma)) return d.sum();
  double s = 0.0;
  for (Index j = 0; j < d.size(); ++j) {
    const double denom = d(j) + gamma;
    s += d(j) * x(j) * x(j) / denom + 2.0 * gamma * d(j) / denom - d(j);
  }
  return s;
}

/// Xie-Kou-Brown estimator: Bayes rule with gamma minimizing the SURE
/// objective above over [0, inf]. The search runs in t = gamma/(gamma+m),
/// m = median(d): a 1024-point grid, then golden-section refinement.
inline Estimate xkb_sure(const Vector& x, const Vector& d) {
  detail::require_same_size(x.size(), d.size(), "xkb_sure");
  const Index p = d.size();
  std::vector<double> sorted(d.data(), d.data() + p);
  std::sort(sorted.begin(), sorted.end());
  const double med = p % 2 == 1 ? sorted[static_cast<std::size_t>(p / 2)]
                                 : 0.5 * (sorted[static_cast<std::size_t>(p / 2 - 1)] +
                                          sorted[static_cast<std::size_t>(p / 2)]);
  auto gamma_of = [med](double t) {
    return t >= 1.0 ? std::numeric_limits<double>::infinity() : med * t / (1.0 - t);
  };
  auto objective = [&](double t) { return xkb_sure_objective(x, d, gamma_of(t)); };

  constexpr int kGrid = 1024;
  int best = 0;
  double best_val = objective(0.0);
  for (int i = 1; i < kGrid; ++i) {
    const double v = objective(static_cast<double>(i) / (kGrid - 1));
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }

  double t_best = static_cast<double>(best) / (kGrid - 1);
  if (best < kGrid - 1) {
    double lo = std::max(0.0, static_cast<double>(best - 1) / (kGrid - 1));
    double hi = std::min(static_cast<double>(best + 1) / (kGrid - 1),
                         std::nextafter(1.0, 0.0));
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - ratio * (hi - lo);
    double b = lo + ratio * (hi - lo);
    double fa = objective(a), fb = objective(b);
    while (hi - lo > 1e-10) {
      if (fa <= fb) {
        hi = b;
        b = a;
        fb = fa;
        a = hi - ratio * (hi - lo);
        fa = objective(a);
      } else {
        lo = a;
        a = b;
        fa = fb;
        b = lo + ratio * (hi - lo);
        fb = objective(b);
      }
    }
    const double t_mid = 0.5 * (lo + hi);
    const double v_mid = objective(t_mid);
    if (v_mid < best_val) {
      best_val = v_mid;
      t_best = t_mid;
    }
    // Endpoints win ties against the interior refinement.
    const double v_zero = objective(0.0);
    if (v_zero <= best_val) {
      best_val = v_zero;
      t_best = 0.0;
    }
    const double v_inf = objective(1.0);
    if (v_inf <= best_val) {
      best_val = v_inf;
      t_best = 1.0;
    }
  }

  const double g = gamma_of(t_best);
  Estimate e = std::isinf(g) ? detail::identity_estimate(x)
                             : Estimate::from_factors(x, Vector::Constant(p, g).cwiseQuotient(
                                                             d + Vector::Constant(p, g)));
  e.meta["gamma_tilde"] = g;
  e.meta["sure"] = best_val;
  return e;
}

/// Admissible range [0, 2{tr(D) - 2 lambda_max(D)}] of c for the spherical
/// estimator to be minimax; empty when the upper end is negative.
inline std::optional<std::pair<double, double>> minimax_range_s(const Vector& d) {
  const double upper = 2.0 * (d.sum() - 2.0 * d.maxCoeff());
  if (upper < 0.0) return std::nullopt;
  return std::make_pair(0.0, upper);
}

/// (1 - r(||x||^2) / ||x||^2) x.
inline Estimate spherical_s(const Vector& x, const std::function<double(double)>& r) {
  const double norm2 = x.squaredNorm();
  if (norm2 == 0.0) return Estimate::from_factors(x, Vector::Zero(x.size()));
  return Estimate::from_factors(x, Vector::Constant(x.size(), 1.0 - r(norm2) / norm2));
}

inline Estimate spherical_s(const Vector& x, const Vector& d, double c) {
  detail::require_same_size(x.size(), d.size(), "spherical_s");
  if (!(c >= 0.0)) throw Error(ErrorCode::InvalidArgument, "c must be >= 0");
  return spherical_s(x, [c](double) { return c; });
}

/// Berger's estimator (1 - c d_j^{-1} / (x^T D^{-2} x)) x_j, optionally clipped.
inline Estimate berger_b(const Vector& x, const Vector& d, double c, bool positive_part) {
  detail::require_same_size(x.size(), d.size(), "berger_b");
  if (!(c >= 0.0)) throw Error(ErrorCode::InvalidArgument, "c must be >= 0");
  const double q = x.cwiseQuotient(d).squaredNorm();
  if (q == 0.0) return Estimate::from_factors(x, Vector::Zero(x.size()));
  Vector f(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    f(j) = 1.0 - c / (d(j) * q);
    if (positive_part) f(j) = detail::positive(f(j));
  }
  return Estimate::from_factors(x, std::move(f));
}

/// [I - min{1, f / x^T (D + Gamma)^{-1} x} D (D + Gamma)^{-1}] x with f = p-2
/// or 2(p-2).
inline Estimate robust_rb(const Vector& x, const Vector& d, const Vector& gamma,
                          FactorVersion version) {
  detail::require_same_size(x.size(), d.size(), "robust_rb");
  detail::require_same_size(x.size(), gamma.size(), "robust_rb");
  const double f = detail::factor_multiplier(version) * (static_cast<double>(x.size()) - 2.0);
  const Vector total = d + gamma;
  const double q = x.cwiseAbs2().cwiseQuotient(total).sum();
  const double m = q == 0.0 ? 1.0 : std::min(1.0, detail::positive(f) / q);
  Estimate e = Estimate::from_factors(x, (Vector::Ones(x.size()) - m * d.cwiseQuotient(total)).eval());
  e.meta["min_factor"] = m;
  return e;
}

enum class MbVariant { Standard, Alternative, Simplified };

/// Berger's minimax estimator delta^MB (and its alternative and simplified
/// forms). Coordinates are processed in order of nonincreasing d*, with a
/// stable sort on ties, and returned in input order.
inline Estimate minimax_mb(const Vector& x, const Vector& d, const Vector& gamma, MbVariant variant) {
  detail::require_same_size(x.size(), d.size(), "minimax_mb");
  detail::require_same_size(x.size(), gamma.size(), "minimax_mb");
  const Index p = x.size();
  const BayesImportance bi = bayes_importance(d, gamma);
  const Vector ds = detail::permute(bi.d_star, bi.perm);
  const Vector xs = detail::permute(x, bi.perm);
  const Vector total = detail::permute(d + gamma, bi.perm);
  const Vector ds_sorted_d = detail::permute(d, bi.perm);
  const double mult = variant == MbVariant::Alternative ? 2.0 : 1.0;

  // term(k) = (d*_k - d*_{k+1}) * min{1, mult (k-2)+ / S_k}, S_k = sum_{l<=k} x_l^2/(d_l+gamma_l)
  Vector term(p);
  double s = 0.0;
  for (Index k = 1; k <= p; ++k) {
    s += xs(k - 1) * xs(k - 1) / total(k - 1);
    const double num = mult * detail::positive(static_cast<double>(k - 2));
    double ratio = 0.0;
    if (num > 0.0 && s > 0.0) {
      ratio = num / s;
      if (variant != MbVariant::Simplified) ratio = std::min(1.0, ratio);
    } else if (num > 0.0 && variant != MbVariant::Simplified) {
      ratio = 1.0;
    }
    const double next = k < p ? ds(k) : 0.0;
    term(k - 1) = (ds(k - 1) - next) * ratio;
  }

  Vector f(p);
  double tail = 0.0;
  for (Index j = p - 1; j >= 0; --j) {
    tail += term(j);
    f(j) = 1.0 - tail / ds(j) * ds_sorted_d(j) / total(j);
  }
  return Estimate::from_factors(x, detail::unpermute(f, bi.perm));
}

/// Shrinkage magnitude m in delta = x - m / (x^T A^T Q A x) A x.
struct ConstantMagnitude {
  double c;
};
struct FunctionMagnitude {
  std::function<double(double)> r;
};
struct AutoCStar {};
using Magnitude = std::variant<ConstantMagnitude, FunctionMagnitude, AutoCStar>;

/// delta_{A,c}, delta_{A,r} or delta_A (c = c*(Sigma, Q, A)).
inline Estimate linear_shrink(const Vector& x, const ProblemSpec& problem, const Direction& a,
                              const Magnitude& magnitude) {
  const Index p = problem.dim();
  detail::require_same_size(x.size(), p, "linear_shrink");
  detail::require_same_size(a.dim(), p, "linear_shrink");

  const bool diagonal = problem.mode == ProblemSpec::Mode::Canonical && a.is_diagonal();
  double c_star = 0.0;
  if (diagonal) {
    c_star = c_star_canonical(problem.d, a.diag_a);
  } else {
    const Matrix sigma = problem.sigma_matrix();
    if (!check_condition_a(sigma, a)) {
      throw Error(ErrorCode::ConditionAViolated, "A Sigma must be nonnegative definite");
    }
    c_star = c_star_general(sigma, problem.q_matrix(), a);
  }

  Vector ax;
  double quad = 0.0;
  if (diagonal) {
    ax = a.diag_a.cwiseProduct(x);
    quad = ax.squaredNorm();
  } else {
    ax = a.matrix() * x;
    quad = ax.dot(problem.q_matrix() * ax);
  }

  double m = 0.0;
  if (std::holds_alternative<ConstantMagnitude>(magnitude)) {
    m = std::get<ConstantMagnitude>(magnitude).c;
    if (!(m >= 0.0)) throw Error(ErrorCode::InvalidArgument, "c must be >= 0");
  } else if (std::holds_alternative<FunctionMagnitude>(magnitude)) {
    m = quad > 0.0 ? std::get<FunctionMagnitude>(magnitude).r(quad) : 0.0;
  } else {
    if (c_star < 0.0) throw Error(ErrorCode::NegativeCStar, "c*(Sigma,Q,A) < 0");
    m = c_star;
  }

  const double lambda = quad > 0.0 ? m / quad : 0.0;
  Estimate e;
  if (diagonal) {
    e = Estimate::from_factors(x, (Vector::Ones(p) - lambda * a.diag_a).eval());
  } else {
    e.value = x - lambda * ax;
  }
  e.meta["lambda"] = lambda;
  e.meta["c_star"] = c_star;
  return e;
}

/// Positive-part delta_A^+ for diagonal D and A:
/// {1 - f a_j / (x^T A^T A x)}+ x_j with f = c*(D,A) or 2 c*(D,A).
inline Estimate positive_part_canonical(const Vector& x, const Vector& d, const Vector& a,
                                        FactorVersion version) {
  detail::require_same_size(x.size(), d.size(), "positive_part_canonical");
  detail::require_same_size(x.size(), a.size(), "positive_part_canonical");
  const double c_star = c_star_canonical(d, a);
  if (c_star < 0.0) throw Error(ErrorCode::NegativeCStar, "c*(D,A) < 0");
  const double f = detail::factor_multiplier(version) * c_star;
  const double quad = a.cwiseProduct(x).squaredNorm();
  Vector factors(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    factors(j) = quad > 0.0 ? detail::positive(1.0 - f * a(j) / quad) : 1.0;
  }
  Estimate e = Estimate::from_factors(x, std::move(factors));
  e.meta["c_star"] = c_star;
  return e;
}

/// Positive-part delta_A^+ for a general (Sigma, Q) problem: the canonical
/// clip applied in the coordinates X* = B X where B A B^{-1} is diagonal.
inline Estimate positive_part_general(const Vector& x, const Matrix& sigma, const Matrix& q,
                                      const Direction& a,
                                      FactorVersion version = FactorVersion::Usual) {
  detail::require_same_size(x.size(), sigma.rows(), "positive_part_general");
  const AlignedFactorization aligned = align_direction(sigma, q, a);
  const double c_star = c_star_general(sigma, q, a);
  if (c_star < 0.0) throw Error(ErrorCode::NegativeCStar, "c*(Sigma,Q,A) < 0");
  const double f = detail::factor_multiplier(version) * c_star;
  const Vector ax = a.matrix() * x;
  const double quad = ax.dot(q * ax);
  const Vector xs = aligned.fact.b * x;
  Vector clipped(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    const double fj = quad > 0.0 ? detail::positive(1.0 - f * aligned.a_star(j) / quad) : 1.0;
    clipped(j) = fj * xs(j);
  }
  Estimate e;
  e.value = aligned.fact.b_inv * clipped;
  e.meta["c_star"] = c_star;
  return e;
}

/// Berger's estimator applied on its own to a block of coordinates; blocks of
/// dimension 1 or 2 pass through.
inline Vector berger_block(const Vector& x, const Vector& d) {
  if (x.size() <= 2) return x;
  return berger_b(x, d, static_cast<double>(x.size()) - 2.0, false).value;
}

/// L_k = k(k-2) / sum_{j<=k} 1/d*_j + (p-k)(p-k-2) / sum_{j>k} 1/d*_j, k = 1..p,
/// on d* sorted nonincreasing. Terms with k <= 2 or k >= p-2 are zero.
inline Vector block_l_from_importance(const Vector& ds) {
  const Index p = ds.size();
  Vector prefix(p + 1), suffix(p + 1);
  prefix(0) = 0.0;
  for (Index j = 0; j < p; ++j) prefix(j + 1) = prefix(j) + 1.0 / ds(j);
  suffix(p) = 0.0;
  for (Index j = p - 1; j >= 0; --j) suffix(j) = suffix(j + 1) + 1.0 / ds(j);
  Vector l(p);
  for (Index k = 1; k <= p; ++k) {
    const double kd = static_cast<double>(k);
    const double rest = static_cast<double>(p - k);
    const double first = k <= 2 ? 0.0 : kd * (kd - 2.0) / prefix(k);
    const double second = k >= p - 2 ? 0.0 : rest * (rest - 2.0) / suffix(k);
    l(k - 1) = first + second;
  }
  return l;
}

/// Two-block Berger estimator split at tau, the smallest maximizer of L_k.
inline Estimate block_shrink(const Vector& x, const Vector& d, const Vector& gamma) {
  detail::require_same_size(x.size(), d.size(), "block_shrink");
  const Index p = x.size();
  const BayesImportance bi = bayes_importance(d, gamma);
  const Vector ds = detail::permute(bi.d_star, bi.perm);
  const Vector l = block_l_from_importance(ds);
  Index tau = 1;
  for (Index k = 2; k <= p; ++k) {
    if (l(k - 1) > l(tau - 1)) tau = k;
  }
  const Vector xs = detail::permute(x, bi.perm);
  const Vector dd = detail::permute(d, bi.perm);
  Vector out(p);
  out.head(tau) = berger_block(xs.head(tau), dd.head(tau));
  if (tau < p) out.tail(p - tau) = berger_block(xs.tail(p - tau), dd.tail(p - tau));
  Estimate e;
  e.value = detail::unpermute(out, bi.perm);
  e.meta["tau"] = static_cast<double>(tau);
  return e;
}

}  // namespace hetshrink

#endif  // HETSHRINK_ESTIMATORS_HPP
