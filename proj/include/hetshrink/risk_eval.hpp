#ifndef HETSHRINK_RISK_EVAL_HPP
#define HETSHRINK_RISK_EVAL_HPP

#include "hetshrink/registry.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/normal_distribution.hpp>

#include <functional>
#include <random>
#include <string>
#include <vector>

// Seeded Monte Carlo risk evaluation.
//
// Replication i draws from its own std::mt19937_64 seeded with a SplitMix64
// mix of (seed, i); normals come from Boost.Random's ziggurat
// normal_distribution. Per-replication losses are stored and reduced by
// pairwise summation in index order, so results are bit-identical for a
// given (seed, n_rep) regardless of thread count.

namespace hetshrink {

using Engine = std::mt19937_64;

inline constexpr std::size_t kDefaultReplications = 100000;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

}  // namespace detail

inline Engine replication_engine(std::uint64_t seed, std::uint64_t replication) {
  return Engine(detail::splitmix64(detail::splitmix64(seed) ^ replication));
}

/// Standard normal vector of length p.
inline Vector standard_normal(Engine& engine, Index p) {
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  Vector z(p);
  for (Index j = 0; j < p; ++j) z(j) = normal(engine);
  return z;
}

struct McResult {
  double mean = 0.0;
  double std_err = 0.0;
};

/// Sample mean and standard error (sample sd / sqrt(n)) of per_rep over n_rep
/// replications; per_rep(engine) must consume only the engine it is given.
template <class PerRep>
McResult monte_carlo(std::size_t n_rep, std::uint64_t seed, PerRep&& per_rep) {
  if (n_rep < 2) throw Error(ErrorCode::InvalidArgument, "n_rep must be >= 2");
  std::vector<double> values(n_rep);
  const auto n = static_cast<std::int64_t>(n_rep);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    Engine engine = replication_engine(seed, static_cast<std::uint64_t>(i));
    values[static_cast<std::size_t>(i)] = per_rep(engine);
  }
  McResult r;
  r.mean = detail::pairwise_sum(values.data(), n_rep) / static_cast<double>(n_rep);
  for (double& v : values) v = (v - r.mean) * (v - r.mean);
  const double var = detail::pairwise_sum(values.data(), n_rep) / static_cast<double>(n_rep - 1);
  r.std_err = std::sqrt(var / static_cast<double>(n_rep));
  return r;
}

using EstimatorFn = std::function<Vector(const Vector&)>;

/// R(delta, theta) = E ||delta(X) - theta||^2 with X ~ N(theta, D).
inline McResult pointwise_risk(const EstimatorFn& est, const Vector& theta, const Vector& d,
                               std::size_t n_rep, std::uint64_t seed) {
  detail::require_same_size(theta.size(), d.size(), "pointwise_risk");
  const Vector sd = d.cwiseSqrt();
  return monte_carlo(n_rep, seed, [&](Engine& engine) {
    const Vector x = theta + sd.cwiseProduct(standard_normal(engine, d.size()));
    return (est(x) - theta).squaredNorm();
  });
}

inline McResult pointwise_risk(const EstimatorSpec& spec, const Vector& theta, const Vector& d,
                               std::size_t n_rep, std::uint64_t seed) {
  const Estimator est(spec, d);
  return pointwise_risk([&est](const Vector& x) { return est(x); }, theta, d, n_rep, seed);
}

/// R(delta, pi_Gamma) with theta ~ N(0, Gamma), X | theta ~ N(theta, D).
inline McResult bayes_risk(const EstimatorFn& est, const Vector& gamma, const Vector& d,
                           std::size_t n_rep, std::uint64_t seed) {
  detail::require_same_size(gamma.size(), d.size(), "bayes_risk");
  const Vector sd = d.cwiseSqrt();
  const Vector sg = gamma.cwiseSqrt();
  return monte_carlo(n_rep, seed, [&](Engine& engine) {
    const Vector theta = sg.cwiseProduct(standard_normal(engine, d.size()));
    const Vector x = theta + sd.cwiseProduct(standard_normal(engine, d.size()));
    return (est(x) - theta).squaredNorm();
  });
}

inline McResult bayes_risk(const EstimatorSpec& spec, const Vector& gamma, const Vector& d,
                           std::size_t n_rep, std::uint64_t seed) {
  const Estimator est(spec, d);
  return bayes_risk([&est](const Vector& x) { return est(x); }, gamma, d, n_rep, seed);
}

/// E{(X^T A^T A X)^{-1}} for X ~ N(0, D + Gamma), diagonal A.
inline McResult inverse_moment(const Vector& d, const Vector& gamma, const Vector& a,
                               std::size_t n_rep, std::uint64_t seed) {
  const Vector scale = (d + gamma).cwiseSqrt().cwiseProduct(a);
  return monte_carlo(n_rep, seed, [&](Engine& engine) {
    return 1.0 / scale.cwiseProduct(standard_normal(engine, d.size())).squaredNorm();
  });
}

struct CurveKind {
  enum class Type { HomoscedasticDir, HeteroscedasticDir, Axis, BayesHomoscedastic, BayesHeteroscedastic };

  Type type = Type::HomoscedasticDir;
  Index axis = 0;  // zero-based coordinate for Axis

  static CurveKind homoscedastic() { return {Type::HomoscedasticDir, 0}; }
  static CurveKind heteroscedastic() { return {Type::HeteroscedasticDir, 0}; }
  static CurveKind along_axis(Index j) { return {Type::Axis, j}; }
  static CurveKind bayes_homoscedastic() { return {Type::BayesHomoscedastic, 0}; }
  static CurveKind bayes_heteroscedastic() { return {Type::BayesHeteroscedastic, 0}; }

  bool is_bayes() const { return type == Type::BayesHomoscedastic || type == Type::BayesHeteroscedastic; }

  /// "homoscedastic", "heteroscedastic", "axis<j+1>", "bayes_homoscedastic",
  /// "bayes_heteroscedastic".
  std::string name() const {
    switch (type) {
      case Type::HomoscedasticDir: return "homoscedastic";
      case Type::HeteroscedasticDir: return "heteroscedastic";
      case Type::Axis: return "axis" + std::to_string(axis + 1);
      case Type::BayesHomoscedastic: return "bayes_homoscedastic";
      case Type::BayesHeteroscedastic: return "bayes_heteroscedastic";
    }
    return "?";
  }

  static CurveKind parse(const std::string& s) {
    if (s == "homoscedastic") return homoscedastic();
    if (s == "heteroscedastic") return heteroscedastic();
    if (s == "bayes_homoscedastic") return bayes_homoscedastic();
    if (s == "bayes_heteroscedastic") return bayes_heteroscedastic();
    if (s.rfind("axis", 0) == 0 && s.size() > 4) {
      const long j = std::stol(s.substr(4));
      if (j >= 1) return along_axis(static_cast<Index>(j - 1));
    }
    throw Error(ErrorCode::InvalidArgument, "unknown curve kind '" + s + "'");
  }
};

/// Point at distance eta along one of the experiment directions.
inline Vector theta_path(const CurveKind& kind, const Vector& d, double eta) {
  if (!(eta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "eta must be >= 0");
  const Index p = d.size();
  switch (kind.type) {
    case CurveKind::Type::HomoscedasticDir:
      return Vector::Constant(p, eta / std::sqrt(static_cast<double>(p)));
    case CurveKind::Type::HeteroscedasticDir:
      return eta * d.cwiseSqrt() / std::sqrt(d.sum());
    case CurveKind::Type::Axis: {
      if (kind.axis < 0 || kind.axis >= p) throw Error(ErrorCode::InvalidArgument, "axis out of range");
      Vector t = Vector::Zero(p);
      t(kind.axis) = eta;
      return t;
    }
    default:
      throw Error(ErrorCode::InvalidArgument, "Bayes curve kinds have no theta path");
  }
}

/// Prior variances N(0, eta^2 I/p) or N(0, eta^2 D/tr(D)) for the Bayes kinds.
inline Vector prior_path(const CurveKind& kind, const Vector& d, double eta) {
  switch (kind.type) {
    case CurveKind::Type::BayesHomoscedastic:
      return Vector::Constant(d.size(), eta * eta / static_cast<double>(d.size()));
    case CurveKind::Type::BayesHeteroscedastic:
      return eta * eta * d / d.sum();
    default:
      throw Error(ErrorCode::InvalidArgument, "pointwise curve kinds have no prior path");
  }
}

struct RiskCurve {
  std::string estimator;
  CurveKind kind;
  std::vector<double> eta_grid;
  std::vector<double> risk;
  std::vector<double> std_err;
  std::size_t n_rep = 0;
  std::uint64_t seed = 0;
};

/// Risk at every eta of the grid. Each grid point reuses the same seed, so
/// curves for different estimators share random numbers.
inline RiskCurve risk_curve(const EstimatorSpec& spec, const CurveKind& kind, const Vector& d,
                            const std::vector<double>& eta_grid, std::size_t n_rep, std::uint64_t seed) {
  const Estimator est(spec, d);
  const EstimatorFn fn = [&est](const Vector& x) { return est(x); };
  RiskCurve curve;
  curve.estimator = spec.name();
  curve.kind = kind;
  curve.eta_grid = eta_grid;
  curve.n_rep = n_rep;
  curve.seed = seed;
  for (double eta : eta_grid) {
    const McResult r = kind.is_bayes() ? bayes_risk(fn, prior_path(kind, d, eta), d, n_rep, seed)
                                       : pointwise_risk(fn, theta_path(kind, d, eta), d, n_rep, seed);
    curve.risk.push_back(r.mean);
    curve.std_err.push_back(r.std_err);
  }
  return curve;
}

struct VarianceConfig {
  std::string name;
  Vector d;
};

/// q-quantile of c / chi^2_k, i.e. c over the (1-q)-quantile of chi^2_k.
inline double inverse_chisq_quantile(double c, double k, double q) {
  // chi^2_k upper quantile via the inverse regularized upper incomplete gamma.
  const double chi = 2.0 * boost::math::gamma_q_inv(k / 2.0, q);
  return c / chi;
}

inline VarianceConfig variance_config(const std::string& name) {
  auto quantiles = [](double c, double k) {
    Vector d(10);
    for (int i = 0; i < 10; ++i) d(i) = inverse_chisq_quantile(c, k, 0.05 + 0.1 * i);
    return d;
  };
  if (name == "eq5") {
    Vector d(10);
    d << 40, 20, 10, 1, 1, 1, 1, 1, 1, 1;
    return {name, d};
  }
  if (name == "group3") {
    Vector d(10);
    d << 40, 20, 10, 5, 5, 5, 1, 1, 1, 1;
    return {name, d};
  }
  if (name == "group22") {
    Vector d(10);
    d << 40, 20, 10, 7, 6, 5, 4, 3, 2, 1;
    return {name, d};
  }
  if (name == "invchisq8df3") return {name, quantiles(8.0, 3.0)};
  if (name == "invchisq24df5") return {name, quantiles(24.0, 5.0)};
  throw Error(ErrorCode::UnknownConfig, "unknown variance config '" + name + "'");
}

inline VarianceConfig variance_config(const std::string& name, const Vector& explicit_d) {
  detail::require_positive(explicit_d, "d");
  return {name, explicit_d};
}

/// Vector field with its Jacobian (i, j) = d g_i / d x_j.
struct VectorField {
  std::function<Vector(const Vector&)> g;
  std::function<Matrix(const Vector&)> jacobian;
};

struct SteinCheckReport {
  double lhs = 0.0;        // E{(X - theta)^T g(X)}
  double rhs = 0.0;        // tr[Sigma E{grad g(X)}]
  double discrepancy = 0.0;
  double std_err = 0.0;    // of the paired per-replication difference
  double z = 0.0;          // discrepancy / std_err
  bool passed = false;     // |z| <= 3
};

/// Paired Monte Carlo check of E{(X - theta)^T g(X)} = tr[Sigma E{grad g(X)}]
/// for X ~ N(theta, Sigma).
inline SteinCheckReport stein_identity_check(const VectorField& field, const Matrix& sigma,
                                             const Vector& theta, std::size_t n_rep, std::uint64_t seed) {
  detail::require_spd(sigma, "sigma");
  detail::require_same_size(sigma.rows(), theta.size(), "stein_identity_check");
  const Matrix chol = sigma.llt().matrixL();
  auto draw = [&](Engine& engine) -> Vector { return theta + chol * standard_normal(engine, theta.size()); };
  const McResult lhs = monte_carlo(n_rep, seed, [&](Engine& engine) {
    const Vector x = draw(engine);
    return (x - theta).dot(field.g(x));
  });
  const McResult rhs = monte_carlo(n_rep, seed, [&](Engine& engine) {
    const Vector x = draw(engine);
    return (sigma * field.jacobian(x)).trace();
  });
  const McResult diff = monte_carlo(n_rep, seed, [&](Engine& engine) {
    const Vector x = draw(engine);
    return (x - theta).dot(field.g(x)) - (sigma * field.jacobian(x)).trace();
  });
  SteinCheckReport r;
  r.lhs = lhs.mean;
  r.rhs = rhs.mean;
  r.discrepancy = diff.mean;
  r.std_err = diff.std_err;
  r.z = diff.std_err > 0.0 ? diff.mean / diff.std_err : (diff.mean == 0.0 ? 0.0 : HUGE_VAL);
  r.passed = std::abs(r.z) <= 3.0;
  return r;
}

}  // namespace hetshrink

#endif  // HETSHRINK_RISK_EVAL_HPP
