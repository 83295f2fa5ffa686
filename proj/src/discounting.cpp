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

#include "truthmark/discounting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "truthmark/errors.hpp"
#include "truthmark/truthfulness.hpp"

namespace truthmark {
namespace {

void require_discountable(const SignalModel& model) {
  model.validate();
  if (model.degenerate()) {
    throw DiscountIneffective(
        "no finite discount restores truthfulness when |rho| = 1");
  }
}

// Richardson-extrapolated second derivative at 0 of an even function that
// vanishes there.
template <typename F>
double curvature_at_zero(F f, double step) {
  auto second = [&](double h) { return 2.0 * f(h) / (h * h); };
  return (4.0 * second(0.5 * step) - second(step)) / 3.0;
}

}  // namespace

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::constant:
      return "constant";
    case ScheduleKind::geometric_by_count:
      return "geometric_by_count";
    case ScheduleKind::piecewise:
      return "piecewise";
  }
  return "constant";
}

ScheduleKind parse_schedule_kind(std::string_view text) {
  if (text == "constant") return ScheduleKind::constant;
  if (text == "geometric_by_count" || text == "geometric") {
    return ScheduleKind::geometric_by_count;
  }
  if (text == "piecewise") return ScheduleKind::piecewise;
  throw DomainError("unknown schedule kind '" + std::string(text) + "'");
}

DiscountSchedule DiscountSchedule::constant(double k0) {
  DiscountSchedule s;
  s.kind = ScheduleKind::constant;
  s.k0 = k0;
  s.validate();
  return s;
}

DiscountSchedule DiscountSchedule::geometric(double k0, double decay,
                                             std::vector<ScheduleReset> resets) {
  DiscountSchedule s;
  s.kind = ScheduleKind::geometric_by_count;
  s.k0 = k0;
  s.decay = decay;
  s.resets = std::move(resets);
  s.validate();
  return s;
}

DiscountSchedule DiscountSchedule::piecewise(double k0,
                                             std::vector<ScheduleReset> steps) {
  DiscountSchedule s;
  s.kind = ScheduleKind::piecewise;
  s.k0 = k0;
  s.resets = std::move(steps);
  s.validate();
  return s;
}

void DiscountSchedule::validate() const {
  if (!(k0 > 0.0) || !std::isfinite(k0)) {
    throw DomainError("schedule k0 must be finite and positive");
  }
  if (kind == ScheduleKind::geometric_by_count) {
    if (!(decay > 0.0 && decay <= 1.0)) {
      throw DomainError("geometric decay must lie in (0, 1]");
    }
  } else if (decay != 1.0) {
    throw DomainError("decay applies only to geometric_by_count schedules");
  }
  if (kind == ScheduleKind::constant && !resets.empty()) {
    throw DomainError("constant schedules take no resets; use piecewise");
  }
  if (resets.size() > kMaxResets) {
    throw DomainError("too many resets (bound " + std::to_string(kMaxResets) +
                      ")");
  }
  std::int64_t previous = 0;
  for (const auto& r : resets) {
    if (r.counter <= previous) {
      throw DomainError("reset counters must be positive and increasing");
    }
    if (!(r.k > 0.0) || !std::isfinite(r.k)) {
      throw DomainError("reset values must be finite and positive");
    }
    previous = r.counter;
  }
}

std::vector<ScheduleReset> DiscountSchedule::epochs() const {
  std::vector<ScheduleReset> out;
  out.reserve(resets.size() + 1);
  out.push_back({0, k0});
  out.insert(out.end(), resets.begin(), resets.end());
  return out;
}

double schedule_eval(const DiscountSchedule& schedule, std::int64_t t) {
  if (t < 0) {
    throw DomainError("schedule counter must be non-negative, got " +
                      std::to_string(t));
  }
  std::int64_t start = 0;
  double k = schedule.k0;
  for (const auto& r : schedule.resets) {
    if (r.counter > t) break;
    start = r.counter;
    k = r.k;
  }
  if (schedule.kind != ScheduleKind::geometric_by_count) return k;
  return k * std::pow(schedule.decay, static_cast<double>(t - start));
}

double required_ratio_log(const SignalModel& model) {
  require_discountable(model);
  const double rho = model.rho;
  const double one_minus_rho2 = 1.0 - rho * rho;
  const double gap = std::sqrt(model.tau_a) - rho * std::sqrt(model.tau_b);
  const double gap2 = gap * gap;
  // Cleared of the inner fraction so gap = 0 (Bob's prediction ignores
  // Alice's report) gives 0 rather than inf/inf.
  return (model.tau_a + model.tau_c) * gap2 /
         (model.tau_a * one_minus_rho2 *
          (gap2 + one_minus_rho2 * (model.tau_b + model.tau_c)));
}

double discount_ratio_at(ScoringRule rule, const SignalModel& model, double c) {
  require_discountable(model);
  const DeviationLosses losses = deviation_losses(rule, model, c);
  if (!(losses.first > 0.0)) {
    throw NumericFailure("first-prediction loss vanished at c = " +
                         std::to_string(c));
  }
  return losses.second / losses.first;
}

double discount_ratio_limit_zero(ScoringRule rule, const SignalModel& model) {
  require_discountable(model);
  constexpr double kStep = 1e-4;
  const double second = curvature_at_zero(
      [&](double c) { return deviation_losses(rule, model, c).second; }, kStep);
  const double first = curvature_at_zero(
      [&](double c) { return deviation_losses(rule, model, c).first; }, kStep);
  return second / first;
}

double discount_ratio_tail(ScoringRule rule, const SignalModel& model) {
  require_discountable(model);
  if (rule.kind == RuleKind::logarithmic) {
    // Both losses are exactly quadratic in c.
    return discount_ratio_at(rule, model, 1.0);
  }
  // exp(-800) underflows to zero, so both losses sit at their limits.
  const AbaGeometry geo = aba_geometry(model);
  double c = 1.0;
  for (double scale : {geo.tau_ac * geo.g_shift * geo.g_shift,
                       geo.tau_abc * geo.h_shift * geo.h_shift}) {
    if (scale > 0.0) c = std::max(c, std::sqrt(4.0 * 800.0 / scale));
  }
  return discount_ratio_at(rule, model, c);
}

RatioSearch search_required_ratio(ScoringRule rule, const SignalModel& model,
                                  const SearchGrid& search) {
  require_discountable(model);
  if (!(search.c_min > 0.0 && search.c_max > search.c_min &&
        search.points_per_decade > 0)) {
    throw DomainError("invalid search grid");
  }
  const double log_lo = std::log10(search.c_min);
  const double log_hi = std::log10(search.c_max);
  const int n = static_cast<int>(
                    std::ceil((log_hi - log_lo) * search.points_per_decade)) +
                1;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) {
    grid[i] = std::pow(10.0, log_lo + (log_hi - log_lo) * i / (n - 1));
  }

  RatioSearch out;
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (double sign : {1.0, -1.0}) {
      const double value = discount_ratio_at(rule, model, sign * grid[i]);
      if (value > best_value) {
        best_value = value;
        best = i;
      }
    }
  }
  out.ratio = best_value;
  out.argmax_c = grid[best];

  // Golden-section refinement in log c between the neighbours of the best
  // grid point.
  {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::log(grid[std::max(best - 1, 0)]);
    double b = std::log(grid[std::min(best + 1, n - 1)]);
    auto f = [&](double u) { return discount_ratio_at(rule, model, std::exp(u)); };
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int iter = 0; iter < 80 && (b - a) > 1e-12; ++iter) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + invphi * (b - a);
        f2 = f(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - invphi * (b - a);
        f1 = f(x1);
      }
    }
    const double u = 0.5 * (a + b);
    const double refined = f(u);
    if (refined > out.ratio) {
      out.ratio = refined;
      out.argmax_c = std::exp(u);
    }
  }

  // Growth that keeps pace across the last two decades is not a saturating
  // ratio.
  const double r1 = discount_ratio_at(rule, model, search.c_max / 100.0);
  const double r2 = discount_ratio_at(rule, model, search.c_max / 10.0);
  const double r3 = discount_ratio_at(rule, model, search.c_max);
  if (r1 > 0.0 && r2 > 1.01 * r1 && r3 / r2 >= r2 / r1) {
    throw DiscountIneffective(
        "required discount ratio grows without bound in the deviation");
  }

  out.limit_zero = discount_ratio_limit_zero(rule, model);
  out.tail = discount_ratio_tail(rule, model);
  if (out.limit_zero > out.ratio) {
    out.ratio = out.limit_zero;
    out.argmax_c = 0.0;
  }
  if (out.tail > out.ratio) {
    out.ratio = out.tail;
    out.argmax_c = std::numeric_limits<double>::infinity();
  }
  return out;
}

double required_ratio_numeric(ScoringRule rule, const SignalModel& model,
                              const SearchGrid& search) {
  return search_required_ratio(rule, model, search).ratio;
}

double score_ceiling_shift(ScoringRule rule, double max_precision) {
  if (!(max_precision > 0.0)) {
    throw DomainError("max precision must be positive");
  }
  if (rule.kind == RuleKind::quadratic) return 0.0;
  return std::max(0.0,
                  0.5 * std::log(max_precision / (2.0 * std::numbers::pi)));
}

double epoch_loss_bound(double k, const NormalBelief& prior, ScoringRule rule,
                        double shift) {
  if (!(k >= 0.0)) throw DomainError("discount weight must be non-negative");
  if (k == 0.0) return 0.0;
  return -k * (expected_score(rule, prior, prior) - shift);
}

double loss_bound(const DiscountSchedule& schedule, const NormalBelief& prior,
                  ScoringRule rule, double shift) {
  schedule.validate();
  double total = 0.0;
  for (const auto& epoch : schedule.epochs()) {
    total += epoch_loss_bound(epoch.k, prior, rule, shift);
  }
  return total;
}

}  // namespace truthmark
