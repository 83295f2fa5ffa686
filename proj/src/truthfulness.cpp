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

#include "truthmark/truthfulness.hpp"

#include <cmath>
#include <numbers>

#include "truthmark/errors.hpp"

namespace truthmark {

std::string_view to_string(VerdictFlag flag) {
  switch (flag) {
    case VerdictFlag::none:
      return "none";
    case VerdictFlag::boundary:
      return "boundary";
    case VerdictFlag::perfect_correlation:
      return "perfect_correlation";
  }
  return "none";
}

double delta_log(const SignalModel& model, double c) {
  const AbaGeometry geo = aba_geometry(model);
  const double g = geo.tau_ac * geo.g_shift * geo.g_shift;
  const double h = geo.tau_abc * geo.h_shift * geo.h_shift;
  return 0.5 * c * c * (g - h);
}

double delta_quadratic(const SignalModel& model, double c) {
  const AbaGeometry geo = aba_geometry(model);
  const double dh = c * geo.h_shift;
  const double dg = c * geo.g_shift;
  return std::sqrt(geo.tau_abc / std::numbers::pi) *
             std::expm1(-0.25 * geo.tau_abc * dh * dh) -
         std::sqrt(geo.tau_ac / std::numbers::pi) *
             std::expm1(-0.25 * geo.tau_ac * dg * dg);
}

double delta(ScoringRule rule, const SignalModel& model, double c) {
  return rule.kind == RuleKind::logarithmic ? delta_log(model, c)
                                            : delta_quadratic(model, c);
}

DeviationLosses deviation_losses(ScoringRule rule, const SignalModel& model,
                                 double c) {
  model.require_nondegenerate();
  // Delta is independent of the signals and of C0; evaluating at zero keeps
  // the mean differences free of cancellation.
  SignalModel centred = model;
  centred.c0 = 0.0;
  const NormalBelief g = posterior_single(centred, 0.0);
  const NormalBelief g_lie = posterior_single(centred, c);
  const NormalBelief h = posterior_pair(centred, 0.0, 0.0);
  const NormalBelief h_lie = posterior_pair(centred, c, 0.0);
  return {-divergence(rule, g_lie, g), -divergence(rule, h_lie, h)};
}

double delta_from_posteriors(ScoringRule rule, const SignalModel& model,
                             double c) {
  const DeviationLosses losses = deviation_losses(rule, model, c);
  return losses.first - losses.second;
}

TruthfulnessVerdict classify_log(const SignalModel& model) {
  model.validate();
  const double rho = model.rho;
  const double one_minus_rho2 = 1.0 - rho * rho;
  const double spread = std::sqrt(model.tau_a / model.tau_b) - rho;
  const double lhs =
      one_minus_rho2 * one_minus_rho2 * (1.0 + model.tau_c / model.tau_b);
  const double rhs = (rho * rho + model.tau_c / model.tau_a) * spread * spread;

  TruthfulnessVerdict verdict;
  verdict.margin = lhs - rhs;
  if (model.degenerate()) {
    verdict.flag = VerdictFlag::perfect_correlation;
    return verdict;
  }
  verdict.globally_truthful = verdict.margin >= 0.0;
  // Delta is exactly quadratic in c, so local and global coincide.
  verdict.locally_truthful = verdict.globally_truthful;
  if (verdict.margin == 0.0) verdict.flag = VerdictFlag::boundary;
  return verdict;
}

TruthfulnessVerdict classify_quadratic(const SignalModel& model) {
  model.validate();
  TruthfulnessVerdict verdict;
  if (model.degenerate()) {
    verdict.flag = VerdictFlag::perfect_correlation;
    verdict.margin = -1.0;
    return verdict;
  }
  const AbaGeometry geo = aba_geometry(model);
  const double r = (1.0 - model.rho * std::sqrt(model.tau_b / model.tau_a)) /
                   (1.0 - model.rho * model.rho);
  verdict.margin = 1.0 - r * r * std::sqrt(geo.tau_ac / geo.tau_abc);
  verdict.locally_truthful = verdict.margin > 0.0;
  if (verdict.margin == 0.0) verdict.flag = VerdictFlag::boundary;
  // Bob's posterior ignores Alice's signal: only Alice pays for a lie.
  const double ignores = std::sqrt(model.tau_a) - model.rho * std::sqrt(model.tau_b);
  // Bob's signal is redundant given Alice's: h = g and Delta vanishes.
  const double redundant = std::sqrt(model.tau_b) - model.rho * std::sqrt(model.tau_a);
  if (std::abs(ignores) <= kSignalTieTolerance * std::sqrt(model.tau_a)) {
    verdict.globally_truthful = verdict.locally_truthful = true;
  } else if (std::abs(redundant) <= kSignalTieTolerance * std::sqrt(model.tau_b)) {
    verdict.globally_truthful = verdict.locally_truthful = true;
    verdict.flag = VerdictFlag::boundary;
  }
  return verdict;
}

TruthfulnessVerdict classify(ScoringRule rule, const SignalModel& model) {
  return rule.kind == RuleKind::logarithmic ? classify_log(model)
                                            : classify_quadratic(model);
}

double delta_curvature_fd(ScoringRule rule, const SignalModel& model,
                          double step) {
  auto second = [&](double h) {
    const double f0 = delta_from_posteriors(rule, model, 0.0);
    return (delta_from_posteriors(rule, model, h) - 2.0 * f0 +
            delta_from_posteriors(rule, model, -h)) /
           (h * h);
  };
  const double coarse = second(step);
  const double fine = second(0.5 * step);
  return (4.0 * fine - coarse) / 3.0;
}

bool local_truthfulness_fd(ScoringRule rule, const SignalModel& model) {
  model.require_nondegenerate();
  const double curvature = delta_curvature_fd(rule, model);
  // Curvature of the first-prediction term alone; the natural unit.
  const AbaGeometry geo = aba_geometry(model);
  const double g_term = geo.tau_ac * geo.g_shift * geo.g_shift;
  const double scale = rule.kind == RuleKind::logarithmic
                           ? g_term
                           : 0.5 * std::sqrt(geo.tau_ac / std::numbers::pi) *
                                 g_term;
  if (std::abs(curvature) < 1e-12 * scale) {
    throw NumericFailure(
        "curvature of Delta at c = 0 is numerically zero (boundary case)");
  }
  return curvature > 0.0;
}

}  // namespace truthmark
