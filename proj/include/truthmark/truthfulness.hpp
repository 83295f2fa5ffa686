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

#ifndef TRUTHMARK_TRUTHFULNESS_HPP_
#define TRUTHMARK_TRUTHFULNESS_HPP_

#include <string_view>

#include "truthmark/beliefs.hpp"
#include "truthmark/scoring.hpp"

namespace truthmark {

enum class VerdictFlag {
  none,
  boundary,        // the governing inequality holds with equality
  perfect_correlation,  // |rho| = 1, untruthful regardless of the margin
};

std::string_view to_string(VerdictFlag flag);

struct TruthfulnessVerdict {
  bool globally_truthful = false;
  bool locally_truthful = false;
  // Signed slack of the governing inequality; >= 0 on the truthful side.
  double margin = 0.0;
  VerdictFlag flag = VerdictFlag::none;
};

// Delta(c) is the change in Bob's expected reward when Alice reports the
// signal a0 + c instead of a0:
//   [S(h^, h) - S(h, h)] - [S(g^, g) - S(g, g)].
// It does not depend on a0 or b0. Alice is promptly truthful iff Delta >= 0
// for every c.

// Log rule: (c^2/2) (tau_AC g_shift^2 - tau_ABC h_shift^2).
double delta_log(const SignalModel& model, double c);

// Quadratic rule:
//   sqrt(tau_ABC/pi) expm1(-tau_ABC (c h_shift)^2 / 4)
//     - sqrt(tau_AC/pi) expm1(-tau_AC (c g_shift)^2 / 4).
double delta_quadratic(const SignalModel& model, double c);

double delta(ScoringRule rule, const SignalModel& model, double c);

// Expected-score losses caused by the deviation, both >= 0:
//   first  = S(g, g) - S(g^, g)   (Alice's first prediction)
//   second = S(h, h) - S(h^, h)   (Bob's prediction)
// assembled from posterior_single/posterior_pair and divergence().
struct DeviationLosses {
  double first = 0.0;
  double second = 0.0;
};

DeviationLosses deviation_losses(ScoringRule rule, const SignalModel& model,
                                 double c);

// first - second. Independent of the closed forms above.
double delta_from_posteriors(ScoringRule rule, const SignalModel& model,
                             double c);

// Log rule: truthful and prompt iff
//   (1-rho^2)^2 (1 + tau_C/tau_B) >= (rho^2 + tau_C/tau_A)(sqrt(tau_A/tau_B) - rho)^2
// and |rho| < 1. Ties are truthful.
TruthfulnessVerdict classify_log(const SignalModel& model);

// Relative tolerance for the two signal ties of the quadratic classifier.
inline constexpr double kSignalTieTolerance = 1e-12;

// Quadratic rule: globally truthful only in two ties. When
// rho = sqrt(tau_A/tau_B) Bob's posterior ignores Alice's signal and Delta > 0;
// when rho = sqrt(tau_B/tau_A) Bob's signal is redundant and Delta = 0
// (flagged boundary). Elsewhere Delta -> sqrt(tau_AC/pi) - sqrt(tau_ABC/pi) < 0
// as c grows. Locally truthful iff the curvature of Delta at c = 0 is positive:
//   margin = 1 - r^2 sqrt(tau_AC / tau_ABC),  r = (1 - rho sqrt(tau_B/tau_A)) / (1 - rho^2).
TruthfulnessVerdict classify_quadratic(const SignalModel& model);

TruthfulnessVerdict classify(ScoringRule rule, const SignalModel& model);

// Sign of d^2 Delta / dc^2 at c = 0 by Richardson-extrapolated central
// differences (h = 1e-4) of delta_from_posteriors. Throws NumericFailure when
// the curvature is below 1e-12 relative to the first-prediction term.
bool local_truthfulness_fd(ScoringRule rule, const SignalModel& model);

// The extrapolated second derivative itself.
double delta_curvature_fd(ScoringRule rule, const SignalModel& model,
                          double step = 1e-4);

}  // namespace truthmark

#endif  // TRUTHMARK_TRUTHFULNESS_HPP_
