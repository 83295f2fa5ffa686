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

#ifndef TRUTHMARK_BELIEFS_HPP_
#define TRUTHMARK_BELIEFS_HPP_

#include <array>
#include <span>
#include <vector>

#include "truthmark/scoring.hpp"

namespace truthmark {

// The Alice-Bob-Alice Gaussian setting. Signals are conditionally
// independent of the public prior; their noise has precisions tau_a, tau_b
// and correlation rho. tau_c = 0 is an uninformative prior (c0 ignored).
struct SignalModel {
  double tau_a = 1.0;
  double tau_b = 1.0;
  double tau_c = 0.0;
  double rho = 0.0;
  double c0 = 0.0;

  // Throws DomainError when the parameters are out of range.
  void validate() const;
  // |rho| == 1.
  bool degenerate() const;
  // Throws DegenerateModelError when degenerate, after validate().
  void require_nondegenerate() const;

  NormalBelief prior() const;  // requires tau_c > 0

  // Covariance of (pi_A, pi_B, pi). The prior entry is +inf for tau_c = 0.
  std::array<std::array<double, 3>, 3> covariance() const;

  friend bool operator==(const SignalModel&, const SignalModel&) = default;
};

struct PlayerSignal {
  double mean;
  double precision;
};

// Strip the public prior out of a player's posterior (mean, precision),
// leaving the signal that recombines with the prior to give it back.
PlayerSignal deprior_signal(double prior_mean, double prior_precision,
                            double posterior_mean, double posterior_precision);

// g(a): the public posterior after Alice's signal a0.
NormalBelief posterior_single(const SignalModel& model, double a0);

// h(a, b): the posterior after both signals.
NormalBelief posterior_pair(const SignalModel& model, double a0, double b0);

// Element-wise natural log. Throws DomainError on a non-positive entry.
std::vector<double> lognormal_to_normal(std::span<const double> observations);

// Quantities of the Alice-Bob-Alice game that do not depend on a or b.
struct AbaGeometry {
  double tau_ac;   // precision of g
  double tau_abc;  // precision of h
  double g_shift;  // d mean(g) / d a0
  double h_shift;  // d mean(h) / d a0
};

AbaGeometry aba_geometry(const SignalModel& model);

}  // namespace truthmark

#endif  // TRUTHMARK_BELIEFS_HPP_
