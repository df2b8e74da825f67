#include "hetshrink/direction_solver.hpp"
#include "hetshrink/estimators.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hetshrink;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

const Vector kEq5 = vec({40, 20, 10, 1, 1, 1, 1, 1, 1, 1});
const Vector kGroup3 = vec({40, 20, 10, 5, 5, 5, 1, 1, 1, 1});

struct Instance {
  Vector d, g;
};

Instance random_instance(std::mt19937_64& rng, Index p) {
  std::uniform_real_distribution<double> ud(0.1, 50.0), ug(0.0, 20.0);
  Instance in{Vector(p), Vector(p)};
  for (Index j = 0; j < p; ++j) {
    in.d(j) = ud(rng);
    in.g(j) = ug(rng);
  }
  return in;
}

}  // namespace

TEST(BayesImportance, Examples) {
  const auto zero = bayes_importance(kEq5, Vector::Zero(10));
  EXPECT_EQ(zero.d_star, kEq5);
  for (Index i = 0; i < 10; ++i) EXPECT_EQ(zero.perm[static_cast<std::size_t>(i)], i);

  const auto half = bayes_importance(Vector::Ones(4), Vector::Ones(4));
  EXPECT_EQ(half.d_star, Vector::Constant(4, 0.5));

  const auto mixed = bayes_importance(vec({4, 1}), vec({0, 3}));
  EXPECT_DOUBLE_EQ(mixed.d_star(0), 4.0);
  EXPECT_DOUBLE_EQ(mixed.d_star(1), 0.25);
}

TEST(MSequence, Eq5Values) {
  const Vector m = m_sequence(kEq5, Vector::Zero(10));
  ASSERT_EQ(m.size(), 8);
  EXPECT_NEAR(m(0), 12.714285714285714, 1e-9);
  EXPECT_NEAR(m(1), 9.404255319148936, 1e-9);
}

TEST(MSequence, IdentityClosedForm) {
  const Vector m = m_sequence(Vector::Ones(10), Vector::Zero(10));
  for (int k = 3; k <= 10; ++k) {
    EXPECT_NEAR(m(k - 3), (k - 2.0) * (k - 2.0) / k + (10 - k), 1e-12);
  }
  EXPECT_NEAR(m(0), 7.0 + 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(m(7), 6.4, 1e-12);
}

TEST(MSequence, SingleEntryForP3) {
  EXPECT_EQ(m_sequence(vec({3, 2, 1}), Vector::Zero(3)).size(), 1);
}

TEST(MSequence, MatchesLiteralFormula) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 300; ++t) {
    const Index p = 3 + static_cast<Index>(rng() % 10);
    Instance in = random_instance(rng, p);
    const auto bi = bayes_importance(in.d, in.g);
    const Vector d = detail::permute(in.d, bi.perm), g = detail::permute(in.g, bi.perm);
    const Vector m = m_sequence(d, g);
    const auto expected = oracle::m_values(d, g);
    for (std::size_t i = 0; i < expected.size(); ++i) {
      EXPECT_NEAR(m(static_cast<Index>(i)), expected[i], 1e-10 * std::abs(expected[i]));
    }
  }
}

TEST(FindCutoff, Examples) {
  EXPECT_EQ(find_cutoff(kEq5, Vector::Zero(10)), 3);
  EXPECT_EQ(find_cutoff(kGroup3, Vector::Zero(10)), 3);
  for (int p : {3, 5, 10, 25}) {
    EXPECT_EQ(find_cutoff(Vector::Constant(p, 2.5), Vector::Constant(p, 7.0)), p);
  }
}

TEST(SolveDirection, Eq5) {
  const auto sol = solve_direction(kEq5, PriorSpec::zero());
  EXPECT_EQ(sol.nu, 3);
  EXPECT_NEAR(sol.a_dag(0), 1.0 / 7.0, 1e-12);
  EXPECT_NEAR(sol.a_dag(1), 2.0 / 7.0, 1e-12);
  EXPECT_NEAR(sol.a_dag(2), 4.0 / 7.0, 1e-12);
  for (Index j = 3; j < 10; ++j) EXPECT_DOUBLE_EQ(sol.a_dag(j), 1.0);
  EXPECT_NEAR(sol.c_star, 12.714285714285714, 1e-9);
  EXPECT_NEAR(kEq5.dot(sol.a_dag), 24.142857142857142, 1e-9);
  EXPECT_NEAR(max_value_diagnostic(sol, kEq5), sol.c_star, 1e-10);
}

TEST(SolveDirection, IdentityGivesJamesSteinDirection) {
  const auto sol = solve_direction(Vector::Ones(10), PriorSpec::zero());
  EXPECT_EQ(sol.nu, 10);
  for (Index j = 0; j < 10; ++j) EXPECT_NEAR(sol.a_dag(j), 0.8, 1e-14);
  EXPECT_NEAR(max_value_diagnostic(sol, Vector::Ones(10)), 6.4, 1e-12);
}

TEST(SolveDirection, Group3BothSpecialPriors) {
  const auto s0 = solve_direction(kGroup3, PriorSpec::zero());
  EXPECT_EQ(s0.nu, 3);
  const auto si = solve_direction(kGroup3, PriorSpec::homoscedastic_infinity());
  EXPECT_EQ(si.nu, 3);
  for (Index j = 0; j < 3; ++j) {
    EXPECT_NEAR(si.a_dag(j) * kGroup3(j), si.a_dag(0) * kGroup3(0), 1e-12);
  }
  for (Index j = 3; j < 10; ++j) EXPECT_DOUBLE_EQ(si.a_dag(j), kGroup3(j));
  EXPECT_NEAR(max_value_diagnostic(si, kGroup3), si.c_star, 1e-10 * si.c_star);
}

TEST(SolveDirection, RejectsSmallP) {
  try {
    solve_direction(vec({1, 2}), PriorSpec::zero());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionTooSmall);
  }
}

TEST(SolveDirection, RescaledDirectionSameEstimate) {
  const auto sol = solve_direction(kEq5, PriorSpec::zero());
  const Vector scaled = 7.0 * sol.a_dag;
  EXPECT_NEAR(c_star_canonical(kEq5, scaled), 7.0 * sol.c_star, 1e-9);
  const ProblemSpec prob = ProblemSpec::canonical(kEq5);
  Vector x(10);
  x << 3, -1, 4, 1, -5, 9, 2, -6, 5, 3;
  const Vector a = linear_shrink(x, prob, Direction::diagonal(sol.a_dag), AutoCStar{}).value;
  const Vector b = linear_shrink(x, prob, Direction::diagonal(scaled), AutoCStar{}).value;
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DirectionProperty, MSequenceNonincreasing) {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 1000; ++t) {
    const Index p = 3 + static_cast<Index>(rng() % 10);
    Instance in = random_instance(rng, p);
    const auto sol = solve_direction(in.d, PriorSpec::diagonal(in.g));
    const Vector ds = detail::permute(sol.d_star, sol.perm);
    double inv = 0.0;
    for (Index k = 1; k <= p; ++k) {
      inv += 1.0 / ds(k - 1);
      if (k >= 3 && k < p) {
        const double step = sol.m_seq(k - 2) - sol.m_seq(k - 3);
        EXPECT_LE(step, 1e-10 * sol.m_seq(k - 3));
        // Equality only when the cutoff criterion is an equality.
        if (std::abs(step) <= 1e-12 * sol.m_seq(k - 3)) {
          EXPECT_NEAR((k - 2.0) / inv, ds(k), 1e-9 * ds(k));
        }
      }
    }
  }
}

TEST(DirectionProperty, FeasibilityChain) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 1000; ++t) {
    const Index p = 3 + static_cast<Index>(rng() % 10);
    Instance in = random_instance(rng, p);
    const auto sol = solve_direction(in.d, PriorSpec::diagonal(in.g));
    const Vector da = detail::permute(in.d.cwiseProduct(sol.a_dag), sol.perm);
    const double level = da(0);
    for (Index j = 1; j < sol.nu; ++j) EXPECT_NEAR(da(j), level, 1e-12 * level);
    if (sol.nu < p) EXPECT_GT(level - da(sol.nu), 1e-12 * level);
    for (Index j = sol.nu + 1; j < p; ++j) EXPECT_GE(da(j - 1), da(j) * (1.0 - 1e-12));
    EXPECT_NEAR(max_value_diagnostic(sol, in.d), sol.c_star, 1e-10 * std::max(1.0, sol.c_star));
  }
}

// Gamma_alpha = alpha(D + Gamma) - D scales every d* by 1/alpha.
TEST(DirectionProperty, ScaleClassInvariance) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> ua(1.0, 5.0);
  for (int t = 0; t < 300; ++t) {
    const Index p = 3 + static_cast<Index>(rng() % 8);
    Instance in = random_instance(rng, p);
    const double alpha0 = in.d.cwiseQuotient(in.d + in.g).maxCoeff();
    const double alpha = alpha0 * ua(rng);
    const Vector ga = (alpha * (in.d + in.g) - in.d).cwiseMax(0.0);
    const auto s1 = solve_direction(in.d, PriorSpec::diagonal(in.g));
    const auto s2 = solve_direction(in.d, PriorSpec::diagonal(ga));
    EXPECT_EQ(s1.nu, s2.nu);
    const double ratio = s2.a_dag(0) / s1.a_dag(0);
    for (Index j = 0; j < p; ++j) EXPECT_NEAR(s2.a_dag(j), ratio * s1.a_dag(j), 1e-9 * s2.a_dag(j));
  }
}

TEST(DirectionProperty, TiesPermuteIdentically) {
  Vector d = vec({5, 3, 5, 1, 3, 2});
  const auto s = solve_direction(d, PriorSpec::zero());
  EXPECT_DOUBLE_EQ(s.a_dag(0), s.a_dag(2));
  EXPECT_DOUBLE_EQ(s.a_dag(1), s.a_dag(4));
  Vector swapped = d;
  std::swap(swapped(0), swapped(2));
  std::swap(swapped(1), swapped(4));
  const auto t = solve_direction(swapped, PriorSpec::zero());
  EXPECT_EQ(t.a_dag(2), s.a_dag(0));
  EXPECT_EQ(t.a_dag(4), s.a_dag(1));
  EXPECT_EQ(t.c_star, s.c_star);
}

TEST(DirectionProperty, AgreesWithSearchOracle) {
  std::mt19937_64 rng(25);
  for (int t = 0; t < 60; ++t) {
    const Index p = 4 + static_cast<Index>(t % 3);
    Instance in = random_instance(rng, p);
    const auto sol = solve_direction(in.d, PriorSpec::diagonal(in.g));
    const auto orc = oracle::solve_by_search(in.d, in.g, 2000, rng);
    const Vector w = in.d + in.g;
    const double c = in.d.cwiseAbs2().cwiseQuotient(w).sum();
    const Vector a = sol.a_dag * std::sqrt(c / w.dot(sol.a_dag.cwiseAbs2()));
    EXPECT_GE(c_star_canonical(in.d, a) - std::max(orc.value, orc.best_random), -1e-6);
    EXPECT_LT((a - orc.a).cwiseAbs().maxCoeff(), 1e-4);
  }
}
