#ifndef HETSHRINK_REGISTRY_HPP
#define HETSHRINK_REGISTRY_HPP

#include "hetshrink/estimators.hpp"

namespace hetshrink {

/// An EstimatorSpec bound to a canonical variance vector. Direction-based
/// estimators solve for A-dagger once at construction.
class Estimator {
 public:
  Estimator(EstimatorSpec spec, Vector d) : spec_(std::move(spec)), d_(std::move(d)) {
    detail::require_positive(d_, "d");
    const Index p = d_.size();
    const double pd = static_cast<double>(p);
    if (spec_.factor_version == FactorVersion::Alternative && !allows_alternative(spec_.kind)) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string("alternative factor version not defined for ") + spec_.name());
    }

    switch (spec_.kind) {
      case EstimatorKind::JamesStein:
      case EstimatorKind::JamesSteinPlus: {
        c_ = spec_.parameter("c").value_or(pd - 2.0);
        if (auto s2 = spec_.parameter("sigma2")) {
          sigma2_ = *s2;
        } else if ((d_.array() == d_(0)).all()) {
          sigma2_ = d_(0);
        } else {
          throw Error(ErrorCode::InvalidArgument, "JS needs parameter sigma2 when d is not constant");
        }
        break;
      }
      case EstimatorKind::Spherical:
        c_ = spec_.parameter("c").value_or(0.0);
        break;
      case EstimatorKind::Berger:
      case EstimatorKind::BergerPlus:
        c_ = detail::factor_multiplier(spec_.factor_version) *
             spec_.parameter("c").value_or(detail::positive(pd - 2.0));
        break;
      case EstimatorKind::LinearADagger:
      case EstimatorKind::PositivePartADagger:
      case EstimatorKind::PositivePartADagger0:
      case EstimatorKind::PositivePartADaggerInf: {
        PriorSpec prior = spec_.prior;
        if (spec_.kind == EstimatorKind::PositivePartADagger0) prior = PriorSpec::zero();
        if (spec_.kind == EstimatorKind::PositivePartADaggerInf) prior = PriorSpec::homoscedastic_infinity();
        if (p >= 3) {
          auto sol = solve_direction(d_, prior);
          nu_ = sol.nu;
          a_ = std::move(sol.a_dag);
        }
        break;
      }
      default:
        break;
    }

    switch (spec_.kind) {
      case EstimatorKind::Bayes:
      case EstimatorKind::RobustBayes:
      case EstimatorKind::MinimaxBerger:
      case EstimatorKind::MinimaxBergerSimplified:
      case EstimatorKind::Block: {
        auto resolved = effective_gamma(spec_.prior, d_);
        if (std::holds_alternative<Vector>(resolved)) {
          gamma_ = std::get<Vector>(resolved);
        } else {
          infinite_prior_ = true;
        }
        break;
      }
      default:
        break;
    }
  }

  const EstimatorSpec& spec() const { return spec_; }
  const Vector& variances() const { return d_; }
  /// Direction used by the A-dagger estimators (empty when p < 3).
  const Vector& direction() const { return a_; }
  int cutoff() const { return nu_; }

  Estimate apply(const Vector& x) const {
    detail::require_same_size(x.size(), d_.size(), spec_.name().c_str());
    switch (spec_.kind) {
      case EstimatorKind::Identity:
        return detail::identity_estimate(x);
      case EstimatorKind::Bayes:
        if (infinite_prior_) return detail::identity_estimate(x);
        return bayes_rule(x, d_, gamma_);
      case EstimatorKind::JamesStein:
        return james_stein(x, sigma2_, c_, false);
      case EstimatorKind::JamesSteinPlus:
        return james_stein(x, sigma2_, c_, true);
      case EstimatorKind::Spherical:
        return spherical_s(x, d_, c_);
      case EstimatorKind::Berger:
        return berger_b(x, d_, c_, false);
      case EstimatorKind::BergerPlus:
        return berger_b(x, d_, c_, true);
      case EstimatorKind::RobustBayes:
        if (infinite_prior_) return detail::identity_estimate(x);
        return robust_rb(x, d_, gamma_, spec_.factor_version);
      case EstimatorKind::MinimaxBerger:
        if (infinite_prior_) return detail::identity_estimate(x);
        return minimax_mb(x, d_, gamma_,
                          spec_.factor_version == FactorVersion::Alternative ? MbVariant::Alternative
                                                                             : MbVariant::Standard);
      case EstimatorKind::MinimaxBergerSimplified:
        if (infinite_prior_) return detail::identity_estimate(x);
        return minimax_mb(x, d_, gamma_, MbVariant::Simplified);
      case EstimatorKind::LinearADagger:
        if (a_.size() == 0) return detail::identity_estimate(x);
        return linear_shrink(x, ProblemSpec::canonical(d_), Direction::diagonal(a_), AutoCStar{});
      case EstimatorKind::PositivePartADagger:
      case EstimatorKind::PositivePartADagger0:
      case EstimatorKind::PositivePartADaggerInf:
        if (a_.size() == 0) return detail::identity_estimate(x);
        return positive_part_canonical(x, d_, a_, spec_.factor_version);
      case EstimatorKind::EmpiricalBayes:
        return eb_morris(x, d_);
      case EstimatorKind::Xkb:
        return xkb_sure(x, d_);
      case EstimatorKind::Block:
        return block_shrink(x, d_, infinite_prior_ ? Vector(Vector::Zero(d_.size())) : gamma_);
    }
    return detail::identity_estimate(x);
  }

  Vector operator()(const Vector& x) const { return apply(x).value; }

 private:
  EstimatorSpec spec_;
  Vector d_;
  Vector gamma_;
  bool infinite_prior_ = false;
  Vector a_;
  int nu_ = 0;
  double c_ = 0.0;
  double sigma2_ = 1.0;
};

inline Estimator make_estimator(const EstimatorSpec& spec, const Vector& d) { return Estimator(spec, d); }

}  // namespace hetshrink

#endif  // HETSHRINK_REGISTRY_HPP
