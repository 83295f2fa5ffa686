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

#ifndef TRUTHMARK_DISCOUNTING_HPP_
#define TRUTHMARK_DISCOUNTING_HPP_

#include <cstdint>
#include <vector>

#include "truthmark/beliefs.hpp"
#include "truthmark/scoring.hpp"

namespace truthmark {

enum class ScheduleKind { constant, geometric_by_count, piecewise };

std::string_view to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view text);

struct ScheduleReset {
  std::int64_t counter = 0;
  double k = 1.0;
  friend bool operator==(const ScheduleReset&, const ScheduleReset&) = default;
};

// k(t) over the prediction counter t.
//   constant:            k0
//   geometric_by_count:  k_e * decay^(t - t_e) from the latest epoch start
//                        (0, k0) or reset (t_e, k_e)
//   piecewise:           step function; the reset list holds the steps
struct DiscountSchedule {
  static constexpr std::size_t kMaxResets = 1024;

  ScheduleKind kind = ScheduleKind::constant;
  double k0 = 1.0;
  double decay = 1.0;
  std::vector<ScheduleReset> resets;

  static DiscountSchedule constant(double k0);
  static DiscountSchedule geometric(double k0, double decay,
                                    std::vector<ScheduleReset> resets = {});
  static DiscountSchedule piecewise(double k0,
                                    std::vector<ScheduleReset> steps);

  // k0 > 0, decay in (0, 1], resets strictly increasing in counter, at
  // counters > 0, with positive values, at most kMaxResets of them.
  void validate() const;

  // Epoch starts: (0, k0) followed by every reset.
  std::vector<ScheduleReset> epochs() const;

  friend bool operator==(const DiscountSchedule&,
                         const DiscountSchedule&) = default;
};

// Throws DomainError for t < 0.
double schedule_eval(const DiscountSchedule& schedule, std::int64_t t);

// Minimal k(t_A1)/k(t_B) for the discounted log rule:
//   (1 + tau_C/tau_A)/(1 - rho^2) / [1 + (1-rho^2)(tau_B + tau_C)/(sqrt(tau_A) - rho sqrt(tau_B))^2]
// Values <= 1 need no discounting. Throws DiscountIneffective for |rho| = 1.
double required_ratio_log(const SignalModel& model);

struct SearchGrid {
  double c_min = 1e-6;
  double c_max = 1e3;
  int points_per_decade = 10;
};

// Ratio of Bob's loss to Alice's first-prediction loss at deviation c:
//   [S(h,h) - S(h^,h)] / [S(g,g) - S(g^,g)].
double discount_ratio_at(ScoringRule rule, const SignalModel& model, double c);
// c -> 0 limit as the quotient of second derivatives.
double discount_ratio_limit_zero(ScoringRule rule, const SignalModel& model);
// c -> infinity limit, evaluated where both losses have saturated.
double discount_ratio_tail(ScoringRule rule, const SignalModel& model);

struct RatioSearch {
  double ratio = 0.0;      // the supremum
  double argmax_c = 0.0;   // 0 for the c -> 0 limit, +inf for the tail
  double limit_zero = 0.0;
  double tail = 0.0;
};

// Supremum of discount_ratio_at over +-[c_min, c_max] (log grid refined by
// golden section), the c -> 0 limit and the tail. Throws DiscountIneffective
// when the ratio keeps growing without slowing over the last two decades, or
// for |rho| = 1.
RatioSearch search_required_ratio(ScoringRule rule, const SignalModel& model,
                                  const SearchGrid& search = {});

double required_ratio_numeric(ScoringRule rule, const SignalModel& model,
                              const SearchGrid& search = {});

// Offset that makes the log score non-positive for beliefs up to
// max_precision: max(0, log sqrt(max_precision / 2 pi)). Zero for the
// quadratic rule.
double score_ceiling_shift(ScoringRule rule, double max_precision);

// Market-maker expected loss bound for one epoch starting at k:
// -k (S(pi, pi) - shift).
double epoch_loss_bound(double k, const NormalBelief& prior, ScoringRule rule,
                        double shift = 0.0);

// Sum of epoch_loss_bound over schedule.epochs().
double loss_bound(const DiscountSchedule& schedule, const NormalBelief& prior,
                  ScoringRule rule, double shift = 0.0);

}  // namespace truthmark

#endif  // TRUTHMARK_DISCOUNTING_HPP_
