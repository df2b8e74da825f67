#ifndef HETSHRINK_CORE_HPP
#define HETSHRINK_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace hetshrink {

inline constexpr const char* kVersion = "1.0.0";

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Relative tolerance for symmetry and positive-definiteness checks.
inline constexpr double kMatrixTol = 1e-10;

enum class ErrorCode {
  NonPositiveVariance,
  NegativePriorVariance,
  NegativeDirection,
  NotSymmetric,
  NotPositiveDefinite,
  DimensionMismatch,
  DimensionTooSmall,
  NegativeCStar,
  ConditionAViolated,
  ConditionA2Violated,
  AlphaBelowFloor,
  UnknownConfig,
  UnknownEstimator,
  InvalidArgument,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveVariance: return "NonPositiveVariance";
    case ErrorCode::NegativePriorVariance: return "NegativePriorVariance";
    case ErrorCode::NegativeDirection: return "NegativeDirection";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::NegativeCStar: return "NegativeCStar";
    case ErrorCode::ConditionAViolated: return "ConditionAViolated";
    case ErrorCode::ConditionA2Violated: return "ConditionA2Violated";
    case ErrorCode::AlphaBelowFloor: return "AlphaBelowFloor";
    case ErrorCode::UnknownConfig: return "UnknownConfig";
    case ErrorCode::UnknownEstimator: return "UnknownEstimator";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

namespace detail {

inline void require_same_size(Index a, Index b, const char* where) {
  if (a != b) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(where) + ": sizes " + std::to_string(a) + " and " + std::to_string(b));
  }
}

inline bool is_symmetric(const Matrix& m, double rel_tol = kMatrixTol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(m.norm(), 1e-300);
  return (m - m.transpose()).norm() <= rel_tol * scale;
}

// Throws unless m is square, symmetric and has eigenvalues above rel_tol * ||m||.
inline void require_spd(const Matrix& m, const char* name) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, std::string(name) + " must be a nonempty square matrix");
  }
  if (!is_symmetric(m)) {
    throw Error(ErrorCode::NotSymmetric, std::string(name) + " is not symmetric");
  }
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > kMatrixTol * sym.norm())) {
    throw Error(ErrorCode::NotPositiveDefinite, std::string(name) + " is not positive definite");
  }
}

inline void require_positive(const Vector& d, const char* name) {
  if (d.size() == 0) throw Error(ErrorCode::DimensionTooSmall, std::string(name) + " is empty");
  for (Index j = 0; j < d.size(); ++j) {
    if (!(d(j) > 0.0) || !std::isfinite(d(j))) {
      throw Error(ErrorCode::NonPositiveVariance,
                  std::string(name) + "[" + std::to_string(j) + "] = " + std::to_string(d(j)));
    }
  }
}

}  // namespace detail

/// Known sampling variance of X, either diagonal (canonical) or a general
/// (Sigma, Q) pair where Q is the loss matrix.
struct ProblemSpec {
  enum class Mode { Canonical, General };

  Mode mode = Mode::Canonical;
  Vector d;
  Matrix sigma;
  Matrix q;

  static ProblemSpec canonical(Vector d);
  static ProblemSpec general(Matrix sigma, Matrix q);

  Index dim() const { return mode == Mode::Canonical ? d.size() : sigma.rows(); }

  Matrix sigma_matrix() const { return mode == Mode::Canonical ? Matrix(d.asDiagonal()) : sigma; }
  Matrix q_matrix() const {
    return mode == Mode::Canonical ? Matrix(Matrix::Identity(d.size(), d.size())) : q;
  }
};

struct ValidationReport {
  bool valid = false;
  Index p = 0;
  ProblemSpec::Mode mode = ProblemSpec::Mode::Canonical;
  std::vector<std::string> checks;
};

/// Checks the ProblemSpec invariants. Throws Error on the first violation.
inline ValidationReport validate_problem(const ProblemSpec& spec) {
  ValidationReport report;
  report.mode = spec.mode;
  if (spec.mode == ProblemSpec::Mode::Canonical) {
    detail::require_positive(spec.d, "d");
    report.checks.push_back("all d_j > 0");
  } else {
    detail::require_spd(spec.sigma, "sigma");
    report.checks.push_back("sigma symmetric positive definite");
    detail::require_spd(spec.q, "q");
    report.checks.push_back("q symmetric positive definite");
    detail::require_same_size(spec.sigma.rows(), spec.q.rows(), "validate_problem");
  }
  report.p = spec.dim();
  report.valid = true;
  return report;
}

inline ProblemSpec ProblemSpec::canonical(Vector d) {
  ProblemSpec spec;
  spec.mode = Mode::Canonical;
  spec.d = std::move(d);
  validate_problem(spec);
  return spec;
}

inline ProblemSpec ProblemSpec::general(Matrix sigma, Matrix q) {
  ProblemSpec spec;
  spec.mode = Mode::General;
  spec.sigma = std::move(sigma);
  spec.q = std::move(q);
  validate_problem(spec);
  return spec;
}

/// Diagonal prior variance Gamma for theta ~ N(0, Gamma). The two tags are
/// symbolic: Zero is Gamma = 0, HomoscedasticInfinity is Gamma = gamma*I in
/// the limit gamma -> infinity.
struct PriorSpec {
  enum class Tag { Explicit, Zero, HomoscedasticInfinity };

  Tag tag = Tag::Zero;
  Vector gamma;

  static PriorSpec zero() { return PriorSpec{}; }
  static PriorSpec homoscedastic_infinity() { return PriorSpec{Tag::HomoscedasticInfinity, {}}; }
  static PriorSpec diagonal(Vector gamma) {
    for (Index j = 0; j < gamma.size(); ++j) {
      if (!(gamma(j) >= 0.0) || !std::isfinite(gamma(j))) {
        throw Error(ErrorCode::NegativePriorVariance, "gamma[" + std::to_string(j) + "] must be >= 0");
      }
    }
    return PriorSpec{Tag::Explicit, std::move(gamma)};
  }
  static PriorSpec homoscedastic(double gamma, Index p) {
    return diagonal(Vector::Constant(p, gamma));
  }

  bool is_infinite() const { return tag == Tag::HomoscedasticInfinity; }
};

struct InfiniteHomoscedastic {};

/// Either a concrete prior variance vector or the symbolic infinite limit.
using ResolvedGamma = std::variant<Vector, InfiniteHomoscedastic>;

inline ResolvedGamma effective_gamma(const PriorSpec& prior, const Vector& d) {
  switch (prior.tag) {
    case PriorSpec::Tag::Zero:
      return Vector(Vector::Zero(d.size()));
    case PriorSpec::Tag::HomoscedasticInfinity:
      return InfiniteHomoscedastic{};
    case PriorSpec::Tag::Explicit:
      detail::require_same_size(prior.gamma.size(), d.size(), "effective_gamma");
      return prior.gamma;
  }
  return InfiniteHomoscedastic{};
}

/// Finite prior variances, or throws if the prior is the symbolic infinite tag.
inline Vector finite_gamma(const PriorSpec& prior, const Vector& d) {
  auto resolved = effective_gamma(prior, d);
  if (std::holds_alternative<InfiniteHomoscedastic>(resolved)) {
    throw Error(ErrorCode::InvalidArgument, "prior must be finite here");
  }
  return std::get<Vector>(resolved);
}

/// Shrinkage direction A: diagonal (canonical) or a full matrix.
struct Direction {
  enum class Kind { Diagonal, General };

  Kind kind = Kind::Diagonal;
  Vector diag_a;
  Matrix general_a;

  static Direction diagonal(Vector a) {
    for (Index j = 0; j < a.size(); ++j) {
      if (!(a(j) >= 0.0) || !std::isfinite(a(j))) {
        throw Error(ErrorCode::NegativeDirection, "a[" + std::to_string(j) + "] must be >= 0");
      }
    }
    return Direction{Kind::Diagonal, std::move(a), {}};
  }
  static Direction general(Matrix a) {
    if (a.rows() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "direction must be square");
    return Direction{Kind::General, {}, std::move(a)};
  }

  bool is_diagonal() const { return kind == Kind::Diagonal; }
  Index dim() const { return is_diagonal() ? diag_a.size() : general_a.rows(); }
  Matrix matrix() const { return is_diagonal() ? Matrix(diag_a.asDiagonal()) : general_a; }
};

/// Usual factors (p-2, (k-2)+, c*) or the doubled alternative versions.
enum class FactorVersion { Usual, Alternative };

enum class EstimatorKind {
  Identity,
  Bayes,
  JamesStein,
  JamesSteinPlus,
  Spherical,
  Berger,
  BergerPlus,
  RobustBayes,
  MinimaxBerger,
  MinimaxBergerSimplified,
  LinearADagger,
  PositivePartADagger,
  PositivePartADagger0,
  PositivePartADaggerInf,
  EmpiricalBayes,
  Xkb,
  Block,
};

struct RegistryEntry {
  const char* name;
  EstimatorKind kind;
  bool allows_alternative;
};

inline constexpr RegistryEntry kRegistry[] = {
    {"X", EstimatorKind::Identity, false},
    {"Bayes", EstimatorKind::Bayes, false},
    {"JS", EstimatorKind::JamesStein, false},
    {"JS+", EstimatorKind::JamesSteinPlus, false},
    {"S", EstimatorKind::Spherical, false},
    {"B", EstimatorKind::Berger, false},
    {"B+", EstimatorKind::BergerPlus, true},
    {"RB", EstimatorKind::RobustBayes, true},
    {"MB", EstimatorKind::MinimaxBerger, true},
    {"MB2", EstimatorKind::MinimaxBergerSimplified, false},
    {"Adag", EstimatorKind::LinearADagger, false},
    {"A+dag", EstimatorKind::PositivePartADagger, true},
    {"A+dag0", EstimatorKind::PositivePartADagger0, true},
    {"A+dagInf", EstimatorKind::PositivePartADaggerInf, true},
    {"EB", EstimatorKind::EmpiricalBayes, false},
    {"XKB", EstimatorKind::Xkb, false},
    {"block", EstimatorKind::Block, false},
};

inline EstimatorKind kind_from_name(const std::string& name) {
  for (const auto& e : kRegistry) {
    if (name == e.name) return e.kind;
  }
  throw Error(ErrorCode::UnknownEstimator, "unknown estimator '" + name + "'");
}

inline const char* kind_name(EstimatorKind kind) {
  for (const auto& e : kRegistry) {
    if (e.kind == kind) return e.name;
  }
  return "?";
}

inline bool allows_alternative(EstimatorKind kind) {
  for (const auto& e : kRegistry) {
    if (e.kind == kind) return e.allows_alternative;
  }
  return false;
}

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::Identity;
  std::map<std::string, double> parameters;
  PriorSpec prior;
  FactorVersion factor_version = FactorVersion::Usual;

  static EstimatorSpec make(EstimatorKind kind, FactorVersion version = FactorVersion::Usual,
                            PriorSpec prior = PriorSpec::zero(),
                            std::map<std::string, double> parameters = {}) {
    if (version == FactorVersion::Alternative && !allows_alternative(kind)) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string("alternative factor version not defined for ") + kind_name(kind));
    }
    return EstimatorSpec{kind, std::move(parameters), std::move(prior), version};
  }

  std::string name() const { return kind_name(kind); }

  std::optional<double> parameter(const std::string& key) const {
    auto it = parameters.find(key);
    if (it == parameters.end()) return std::nullopt;
    return it->second;
  }
};

/// Output of an estimator: the estimate, per-coordinate multipliers when the
/// estimator acts coordinatewise, and scalar diagnostics.
struct Estimate {
  Vector value;
  std::optional<Vector> shrink_factors;
  std::map<std::string, double> meta;

  static Estimate from_factors(const Vector& x, Vector factors) {
    Estimate e;
    e.value = factors.cwiseProduct(x);
    e.shrink_factors = std::move(factors);
    return e;
  }
};

inline double trace(const Vector& d) { return d.sum(); }

}  // namespace hetshrink

#endif  // HETSHRINK_CORE_HPP
