// Copyright 2026 The truthmark Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "truthmark/scoring.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "truthmark/errors.hpp"

namespace truthmark {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

TEST(NormalBeliefTest, RejectsInvalidParameters) {
  EXPECT_THROW(NormalBelief(0.0, 0.0), DomainError);
  EXPECT_THROW(NormalBelief(0.0, -1.0), DomainError);
  EXPECT_THROW(NormalBelief(0.0, std::numeric_limits<double>::infinity()),
               DomainError);
  EXPECT_THROW(NormalBelief(std::nan(""), 1.0), DomainError);
  const NormalBelief b(3.0, 4.0);
  EXPECT_DOUBLE_EQ(b.variance(), 0.25);
  EXPECT_DOUBLE_EQ(b.stddev(), 0.5);
}

TEST(DensityTest, KnownValues) {
  EXPECT_NEAR(density(NormalBelief(0, 1), 0.0), 0.3989422804, 1e-10);
  EXPECT_NEAR(density(NormalBelief(3, 4), 3.0), 0.7978845608, 1e-10);
  EXPECT_DOUBLE_EQ(density(NormalBelief(0, 1), 1.0),
                   density(NormalBelief(0, 1), -1.0));
}

TEST(DensityTest, IntegratesToOne) {
  for (double tau : {0.1, 1.0, 7.0, 100.0}) {
    const NormalBelief b(1.5, tau);
    const double mass = oracle::simpson(
        [&](double x) { return density(b, x); }, 1.5 - 12 / std::sqrt(tau),
        1.5 + 12 / std::sqrt(tau));
    EXPECT_NEAR(mass, 1.0, 1e-8) << "tau=" << tau;
  }
}

TEST(ScoreTest, LogScoreValues) {
  const auto log_rule = ScoringRule::logarithmic();
  EXPECT_NEAR(score(log_rule, NormalBelief(0, 1), 0.0), std::log(kInvSqrt2Pi),
              1e-12);
  EXPECT_NEAR(score(log_rule, NormalBelief(0, 1), 0.0), -0.9189385, 1e-7);
  const double far = score(log_rule, NormalBelief(0, 1), 1e200);
  EXPECT_TRUE(std::isinf(far) && far < 0.0);
}

TEST(ScoreTest, QuadraticScoreNonPositiveUpToThreshold) {
  // The peak 2 p(mu) - p.p - 1 = sqrt(tau/pi) (sqrt 2 - 1/2) - 1 crosses zero
  // at tau = pi / (sqrt 2 - 1/2)^2.
  const double threshold =
      std::numbers::pi / std::pow(std::numbers::sqrt2 - 0.5, 2);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mean(-5, 5);
  std::uniform_real_distribution<double> log_tau(std::log(0.01),
                                                 std::log(threshold));
  const auto quad = ScoringRule::quadratic();
  for (int i = 0; i < 2000; ++i) {
    const NormalBelief p(mean(rng), std::exp(log_tau(rng)));
    for (double x : {p.mean(), p.mean() + 0.3, mean(rng)}) {
      EXPECT_LE(score(quad, p, x), 0.0);
    }
  }
  EXPECT_NEAR(score(quad, NormalBelief(0, threshold), 0.0), 0.0, 1e-12);
  EXPECT_GT(score(quad, NormalBelief(0, 1.01 * threshold), 0.0), 0.0);
}

TEST(ScoreTest, QuadraticMatchesDefinition) {
  const NormalBelief p(0.4, 2.5);
  for (double x : {-1.0, 0.4, 2.0}) {
    EXPECT_NEAR(score(ScoringRule::quadratic(), p, x),
                oracle::rule_score(RuleKind::quadratic, 0.4, 2.5, x), 1e-9);
  }
  EXPECT_NEAR(self_dot(p), oracle::self_dot(0.4, 2.5), 1e-10);
}

TEST(ExpectedScoreTest, SpecValues) {
  const auto log_rule = ScoringRule::logarithmic();
  const NormalBelief std_normal(0, 1);
  EXPECT_NEAR(expected_score(log_rule, std_normal, std_normal), -1.4189385,
              1e-7);
  EXPECT_NEAR(expected_score(log_rule, std_normal, std_normal),
              oracle::expected_score(RuleKind::logarithmic, 0, 1, 0, 1), 1e-9);
  const NormalBelief truth(0, 2);
  EXPECT_NEAR(expected_score(log_rule, NormalBelief(1, 2), truth),
              expected_score(log_rule, truth, truth) - 1.0, 1e-10);
}

TEST(ExpectedScoreTest, UnequalPrecisionMatchesOracle) {
  for (auto rule : {RuleKind::logarithmic, RuleKind::quadratic}) {
    const double got = expected_score(ScoringRule{rule}, NormalBelief(0.5, 3.0),
                                      NormalBelief(-0.2, 0.7));
    EXPECT_NEAR(got, oracle::expected_score(rule, 0.5, 3.0, -0.2, 0.7), 1e-8)
        << to_string(rule);
    EXPECT_NEAR(expected_score_quadrature(ScoringRule{rule},
                                          NormalBelief(0.5, 3.0),
                                          NormalBelief(-0.2, 0.7)),
                got, 1e-9);
  }
}

TEST(DivergenceTest, SpecValues) {
  const auto log_rule = ScoringRule::logarithmic();
  const auto quad = ScoringRule::quadratic();
  EXPECT_NEAR(divergence(log_rule, NormalBelief(1, 2), NormalBelief(0, 2)),
              -1.0, 1e-14);
  EXPECT_EQ(divergence(log_rule, NormalBelief(3, 2), NormalBelief(3, 2)), 0.0);
  EXPECT_EQ(divergence(quad, NormalBelief(3, 2), NormalBelief(3, 2)), 0.0);
  const double far = divergence(quad, NormalBelief(10, 1), NormalBelief(0, 1));
  EXPECT_NEAR(far, -0.5642, 1e-4);
  EXPECT_NEAR(far, std::expm1(-25.0) / std::sqrt(std::numbers::pi), 1e-15);
  EXPECT_NEAR(quadratic_divergence_constant(1.0), std::sqrt(1 / std::numbers::pi),
              1e-15);
}

TEST(DivergenceTest, ClosedFormsMatchQuadratureOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> log_tau(std::log(0.1), std::log(100.0));
  std::uniform_real_distribution<double> shift(-20.0, 20.0);
  for (int i = 0; i < 40; ++i) {
    const double tau = std::exp(log_tau(rng));
    const double d = shift(rng);
    for (auto rule : {RuleKind::logarithmic, RuleKind::quadratic}) {
      const double closed =
          divergence(ScoringRule{rule}, NormalBelief(d, tau), NormalBelief(0, tau));
      const double ref = oracle::divergence(rule, d, tau, 0.0, tau);
      EXPECT_NEAR(closed, ref, 1e-8 * std::abs(ref) + 1e-13)
          << to_string(rule) << " tau=" << tau << " d=" << d;
    }
  }
}

TEST(DivergenceTest, UnequalPrecisionFallsBackToQuadrature) {
  const NormalBelief p(0.3, 2.0);
  const NormalBelief q(0.0, 5.0);
  for (auto rule : {RuleKind::logarithmic, RuleKind::quadratic}) {
    EXPECT_NEAR(divergence(ScoringRule{rule}, p, q),
                oracle::divergence(rule, 0.3, 2.0, 0.0, 5.0), 1e-9);
  }
  // Kullback-Leibler divergence KL(q || p) of normals.
  const double kl_exact =
      0.5 * (std::log(5.0 / 2.0) + (1.0 / 5.0 + 0.09) * 2.0 - 1.0);
  EXPECT_NEAR(divergence(ScoringRule::logarithmic(), p, q), -kl_exact, 1e-9);
}

TEST(ProprietyTest, RandomPairsAreStrict) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mean(-3, 3);
  std::uniform_real_distribution<double> log_tau(std::log(0.2), std::log(20.0));
  for (int i = 0; i < 200; ++i) {
    const NormalBelief p(mean(rng), std::exp(log_tau(rng)));
    const NormalBelief q(mean(rng), std::exp(log_tau(rng)));
    for (auto rule : {ScoringRule::logarithmic(), ScoringRule::quadratic()}) {
      EXPECT_LT(divergence(rule, p, q), -1e-9);
      EXPECT_GT(expected_score(rule, q, q), expected_score(rule, p, q));
    }
  }
}

TEST(QuadratureTest, ReportsNonConvergence) {
  EXPECT_THROW(quadrature::integrate(
                   [](double x) { return std::sin(1.0 / x) / x; }, 1e-9, 1.0),
               NumericFailure);
}

TEST(RuleKindTest, ParsesNames) {
  EXPECT_EQ(parse_rule_kind("log"), RuleKind::logarithmic);
  EXPECT_EQ(parse_rule_kind("logarithmic"), RuleKind::logarithmic);
  EXPECT_EQ(parse_rule_kind("quadratic"), RuleKind::quadratic);
  EXPECT_EQ(parse_rule_kind("brier"), RuleKind::quadratic);
  EXPECT_THROW(parse_rule_kind("spherical"), DomainError);
  EXPECT_EQ(to_string(RuleKind::logarithmic), "log");
}

}  // namespace
}  // namespace truthmark
