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

#include "truthmark/beliefs.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "truthmark/errors.hpp"

namespace truthmark {

void SignalModel::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(tau_a) || !(tau_a > 0.0)) {
    throw DomainError("tau_A must be positive (informative signal)");
  }
  if (!finite(tau_b) || !(tau_b > 0.0)) {
    throw DomainError("tau_B must be positive (informative signal)");
  }
  if (!finite(tau_c) || tau_c < 0.0) {
    throw DomainError("tau_C must be non-negative");
  }
  if (!finite(rho) || rho < -1.0 || rho > 1.0) {
    throw DomainError("rho must lie in [-1, 1]");
  }
  if (!finite(c0)) throw DomainError("C0 must be finite");
}

bool SignalModel::degenerate() const { return std::abs(rho) == 1.0; }

void SignalModel::require_nondegenerate() const {
  validate();
  if (degenerate()) {
    throw DegenerateModelError(
        "degenerate: |rho| = 1, signals reveal the outcome exactly");
  }
}

NormalBelief SignalModel::prior() const {
  if (!(tau_c > 0.0)) {
    throw DomainError("uninformative prior (tau_C = 0) has no density");
  }
  return NormalBelief(c0, tau_c);
}

std::array<std::array<double, 3>, 3> SignalModel::covariance() const {
  validate();
  const double sa = 1.0 / std::sqrt(tau_a);
  const double sb = 1.0 / std::sqrt(tau_b);
  const double vc = tau_c > 0.0 ? 1.0 / tau_c
                                : std::numeric_limits<double>::infinity();
  return {{{sa * sa, rho * sa * sb, 0.0},
           {rho * sa * sb, sb * sb, 0.0},
           {0.0, 0.0, vc}}};
}

PlayerSignal deprior_signal(double prior_mean, double prior_precision,
                            double posterior_mean, double posterior_precision) {
  if (!(prior_precision >= 0.0) || !std::isfinite(posterior_precision)) {
    throw DomainError("precisions must be finite and non-negative");
  }
  if (!(posterior_precision > prior_precision)) {
    throw DomainError(
        "uninformative signal: posterior precision must exceed prior "
        "precision");
  }
  const double precision = posterior_precision - prior_precision;
  const double mean =
      (posterior_precision * posterior_mean - prior_precision * prior_mean) /
      precision;
  return {mean, precision};
}

NormalBelief posterior_single(const SignalModel& model, double a0) {
  model.validate();
  const double precision = model.tau_a + model.tau_c;
  const double mean = (model.tau_a * a0 + model.tau_c * model.c0) / precision;
  return NormalBelief(mean, precision);
}

NormalBelief posterior_pair(const SignalModel& model, double a0, double b0) {
  model.require_nondegenerate();
  const double cross = model.rho * std::sqrt(model.tau_a * model.tau_b);
  const double one_minus_rho2 = 1.0 - model.rho * model.rho;
  const double weight_a = model.tau_a - cross;
  const double weight_b = model.tau_b - cross;
  const double signal_info = model.tau_a - 2.0 * cross + model.tau_b;
  const double denom = signal_info + one_minus_rho2 * model.tau_c;
  const double mean =
      (weight_a * a0 + weight_b * b0 + one_minus_rho2 * model.tau_c * model.c0) /
      denom;
  const double precision = signal_info / one_minus_rho2 + model.tau_c;
  return NormalBelief(mean, precision);
}

std::vector<double> lognormal_to_normal(std::span<const double> observations) {
  std::vector<double> out;
  out.reserve(observations.size());
  for (double y : observations) {
    if (!(y > 0.0)) {
      throw DomainError("lognormal observation must be positive, got " +
                        std::to_string(y));
    }
    out.push_back(std::log(y));
  }
  return out;
}

AbaGeometry aba_geometry(const SignalModel& model) {
  model.require_nondegenerate();
  const double cross = model.rho * std::sqrt(model.tau_a * model.tau_b);
  const double one_minus_rho2 = 1.0 - model.rho * model.rho;
  const double denom = model.tau_a - 2.0 * cross + model.tau_b +
                       one_minus_rho2 * model.tau_c;
  AbaGeometry geo;
  geo.tau_ac = model.tau_a + model.tau_c;
  geo.tau_abc = denom / one_minus_rho2;
  geo.g_shift = model.tau_a / geo.tau_ac;
  geo.h_shift = (model.tau_a - cross) / denom;
  return geo;
}

}  // namespace truthmark
