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

#ifndef TRUTHMARK_SCORING_HPP_
#define TRUTHMARK_SCORING_HPP_

#include <functional>
#include <string_view>

namespace truthmark {

// A normal belief N(mean, 1/precision) over the scalar outcome.
class NormalBelief {
 public:
  // Throws DomainError unless precision is finite and positive and mean is
  // finite.
  NormalBelief(double mean, double precision);

  double mean() const { return mean_; }
  double precision() const { return precision_; }
  double variance() const { return 1.0 / precision_; }
  double stddev() const;

  friend bool operator==(const NormalBelief&, const NormalBelief&) = default;

 private:
  double mean_;
  double precision_;
};

enum class RuleKind { logarithmic, quadratic };

struct ScoringRule {
  RuleKind kind = RuleKind::logarithmic;

  static constexpr ScoringRule logarithmic() { return {RuleKind::logarithmic}; }
  static constexpr ScoringRule quadratic() { return {RuleKind::quadratic}; }
  friend constexpr bool operator==(ScoringRule, ScoringRule) = default;
};

std::string_view to_string(RuleKind kind);
// Accepts "log", "logarithmic", "quadratic", "brier".
RuleKind parse_rule_kind(std::string_view text);

double density(const NormalBelief& belief, double x);
double log_density(const NormalBelief& belief, double x);

// Integral of the squared density, p . p = sqrt(tau / (4 pi)).
double self_dot(const NormalBelief& belief);

// Realized score S(p, x). The log score of an infinitely distant outcome is
// -infinity and is returned as such.
double score(ScoringRule rule, const NormalBelief& predicted, double x);

// E_{x ~ truth}[S(predicted, x)]. Closed form for equal precisions, adaptive
// quadrature over truth.mean +- 10 sd otherwise.
double expected_score(ScoringRule rule, const NormalBelief& predicted,
                      const NormalBelief& truth);

// Always by quadrature; the independent route for the closed forms.
double expected_score_quadrature(ScoringRule rule,
                                 const NormalBelief& predicted,
                                 const NormalBelief& truth);

// S(predicted, truth) - S(truth, truth) <= 0.
//   log:       -tau/2 (dmu)^2
//   quadratic: sqrt(tau/pi) (exp(-tau dmu^2 / 4) - 1)
// for equal precisions; quadrature of the score difference otherwise.
double divergence(ScoringRule rule, const NormalBelief& predicted,
                  const NormalBelief& truth);

// Quadrature of E_truth[S(predicted, x) - S(truth, x)], integrating the
// difference directly so small divergences keep their relative accuracy.
double divergence_quadrature(ScoringRule rule, const NormalBelief& predicted,
                             const NormalBelief& truth);

// Leading constant of the equal-precision quadratic divergence.
double quadratic_divergence_constant(double precision);

namespace quadrature {

inline constexpr double kDefaultTolerance = 1e-10;

// Adaptive Gauss-Kronrod integral of f over [lo, hi]. Throws NumericFailure
// when the error estimate exceeds tolerance * max(1, |result|).
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double tolerance = kDefaultTolerance);

// E_{x ~ belief}[f(x)] over belief.mean +- 10 sd.
double expectation(const std::function<double(double)>& f,
                   const NormalBelief& belief,
                   double tolerance = kDefaultTolerance);

}  // namespace quadrature
}  // namespace truthmark

#endif  // TRUTHMARK_SCORING_HPP_
