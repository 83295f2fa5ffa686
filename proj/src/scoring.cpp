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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "truthmark/errors.hpp"

namespace truthmark {
namespace {

constexpr double kSpanSd = 10.0;

bool equal_precision(const NormalBelief& a, const NormalBelief& b) {
  return a.precision() == b.precision();
}

// Integration limits over `measure`, split at the predicted belief's core
// so a narrow predicted density is never stepped over.
std::vector<double> breakpoints(const NormalBelief& measure,
                                const NormalBelief& predicted) {
  const double lo = measure.mean() - kSpanSd * measure.stddev();
  const double hi = measure.mean() + kSpanSd * measure.stddev();
  std::vector<double> points = {lo, hi};
  for (double sd : {-kSpanSd, -1.0, 1.0, kSpanSd}) {
    const double p = predicted.mean() + sd * predicted.stddev();
    if (p > lo && p < hi) points.push_back(p);
  }
  if (measure.mean() > lo && measure.mean() < hi) {
    points.push_back(measure.mean());
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

double integrate_pieces(const std::function<double(double)>& f,
                        const std::vector<double>& points, double tolerance) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    total += quadrature::integrate(f, points[i], points[i + 1], tolerance);
  }
  return total;
}

}  // namespace

NormalBelief::NormalBelief(double mean, double precision)
    : mean_(mean), precision_(precision) {
  if (!std::isfinite(mean)) {
    throw DomainError("belief mean must be finite");
  }
  if (!(precision > 0.0) || !std::isfinite(precision)) {
    throw DomainError("belief precision must be finite and positive, got " +
                      std::to_string(precision));
  }
}

double NormalBelief::stddev() const { return 1.0 / std::sqrt(precision_); }

std::string_view to_string(RuleKind kind) {
  return kind == RuleKind::logarithmic ? "log" : "quadratic";
}

RuleKind parse_rule_kind(std::string_view text) {
  if (text == "log" || text == "logarithmic") return RuleKind::logarithmic;
  if (text == "quadratic" || text == "brier") return RuleKind::quadratic;
  throw DomainError("unknown scoring rule '" + std::string(text) + "'");
}

double log_density(const NormalBelief& belief, double x) {
  const double z = x - belief.mean();
  return 0.5 * std::log(belief.precision() / (2.0 * std::numbers::pi)) -
         0.5 * belief.precision() * z * z;
}

double density(const NormalBelief& belief, double x) {
  return std::exp(log_density(belief, x));
}

double self_dot(const NormalBelief& belief) {
  return std::sqrt(belief.precision() / (4.0 * std::numbers::pi));
}

double score(ScoringRule rule, const NormalBelief& predicted, double x) {
  if (rule.kind == RuleKind::logarithmic) return log_density(predicted, x);
  return 2.0 * density(predicted, x) - self_dot(predicted) - 1.0;
}

double quadratic_divergence_constant(double precision) {
  return std::sqrt(precision / std::numbers::pi);
}

double expected_score(ScoringRule rule, const NormalBelief& predicted,
                      const NormalBelief& truth) {
  if (!equal_precision(predicted, truth)) {
    return expected_score_quadrature(rule, predicted, truth);
  }
  const double tau = truth.precision();
  if (rule.kind == RuleKind::logarithmic) {
    return 0.5 * std::log(tau / (2.0 * std::numbers::pi)) - 0.5 +
           divergence(rule, predicted, truth);
  }
  // 2 p^.p - p^.p^ - 1 with equal self-dots.
  return self_dot(truth) - 1.0 + divergence(rule, predicted, truth);
}

double expected_score_quadrature(ScoringRule rule,
                                 const NormalBelief& predicted,
                                 const NormalBelief& truth) {
  const auto points = breakpoints(truth, predicted);
  if (rule.kind == RuleKind::logarithmic) {
    return integrate_pieces(
        [&](double x) { return density(truth, x) * log_density(predicted, x); },
        points, quadrature::kDefaultTolerance);
  }
  const double cross = integrate_pieces(
      [&](double x) { return density(truth, x) * density(predicted, x); },
      points, quadrature::kDefaultTolerance);
  return 2.0 * cross - self_dot(predicted) - 1.0;
}

double divergence(ScoringRule rule, const NormalBelief& predicted,
                  const NormalBelief& truth) {
  if (!equal_precision(predicted, truth)) {
    return divergence_quadrature(rule, predicted, truth);
  }
  const double tau = truth.precision();
  const double shift = predicted.mean() - truth.mean();
  if (rule.kind == RuleKind::logarithmic) return -0.5 * tau * shift * shift;
  return quadratic_divergence_constant(tau) *
         std::expm1(-0.25 * tau * shift * shift);
}

double divergence_quadrature(ScoringRule rule, const NormalBelief& predicted,
                             const NormalBelief& truth) {
  const auto points = breakpoints(truth, predicted);
  if (rule.kind == RuleKind::logarithmic) {
    // log p^(x) - log p(x), expanded so the constant cancels exactly.
    const double half_log_ratio =
        0.5 * std::log(predicted.precision() / truth.precision());
    return integrate_pieces(
        [&](double x) {
          const double zp = x - predicted.mean();
          const double zt = x - truth.mean();
          const double diff = half_log_ratio -
                              0.5 * predicted.precision() * zp * zp +
                              0.5 * truth.precision() * zt * zt;
          return density(truth, x) * diff;
        },
        points, quadrature::kDefaultTolerance);
  }
  const double cross = integrate_pieces(
      [&](double x) {
        return density(truth, x) * (density(predicted, x) - density(truth, x));
      },
      points, quadrature::kDefaultTolerance);
  return 2.0 * cross - self_dot(predicted) + self_dot(truth);
}

namespace quadrature {

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double tolerance) {
  if (!(lo < hi)) return 0.0;
  double error = 0.0;
  double l1 = 0.0;
  const double result = boost::math::quadrature::gauss_kronrod<double, 31>::
      integrate(f, lo, hi, 15, tolerance, &error, &l1);
  if (!std::isfinite(result) || error > tolerance * std::max(1.0, l1)) {
    throw NumericFailure("quadrature did not converge on [" +
                         std::to_string(lo) + ", " + std::to_string(hi) +
                         "], error estimate " + std::to_string(error));
  }
  return result;
}

double expectation(const std::function<double(double)>& f,
                   const NormalBelief& belief, double tolerance) {
  const double lo = belief.mean() - kSpanSd * belief.stddev();
  const double hi = belief.mean() + kSpanSd * belief.stddev();
  return integrate([&](double x) { return density(belief, x) * f(x); }, lo,
                   belief.mean(), tolerance) +
         integrate([&](double x) { return density(belief, x) * f(x); },
                   belief.mean(), hi, tolerance);
}

}  // namespace quadrature
}  // namespace truthmark
