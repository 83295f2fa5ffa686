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

#include "truthmark/game.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "truthmark/errors.hpp"
#include "truthmark/truthfulness.hpp"

namespace truthmark {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::int64_t kChunk = 4096;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void require_sampleable(const SignalModel& model) {
  model.validate();
  if (!(model.tau_c > 0.0)) {
    throw DomainError("sampling lambda requires tau_C > 0");
  }
}

struct SlotWeights {
  double k0;
  double k1;
  double kb;
  double k2;
};

SlotWeights weights(const DiscountSchedule& schedule, const AbaSlots& slots) {
  slots.validate();
  schedule.validate();
  return {schedule_eval(schedule, 0),
          schedule_eval(schedule, slots.alice_first),
          schedule_eval(schedule, slots.bob),
          schedule_eval(schedule, slots.alice_second)};
}

// Welford accumulator with Chan's pairwise merge.
struct Moments {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  void merge(const Moments& other) {
    if (other.n == 0) return;
    if (n == 0) {
      *this = other;
      return;
    }
    const double total = static_cast<double>(n + other.n);
    const double d = other.mean - mean;
    mean += d * static_cast<double>(other.n) / total;
    m2 += other.m2 + d * d * static_cast<double>(n) *
                         static_cast<double>(other.n) / total;
    n += other.n;
  }
};

double paired_gain(const SignalModel& model, ScoringRule rule,
                   const SlotWeights& k, double c, const AbaDraw& d) {
  const double x = d.lambda;
  const NormalBelief g = posterior_single(model, d.a0);
  const NormalBelief g_lie = posterior_single(model, d.a0 + c);
  const NormalBelief h = posterior_pair(model, d.a0, d.b0);
  const NormalBelief h_lie = posterior_pair(model, d.a0 + c, d.b0);
  return k.k1 * (score(rule, g_lie, x) - score(rule, g, x)) -
         k.kb * (score(rule, h_lie, x) - score(rule, h, x));
}

double golden_max(const std::function<double(double)>& f, double lo,
                  double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < 200 && (b - a) > 1e-12 * std::max(1.0, std::abs(b));
       ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? x1 : x2;
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t index)
    : state_(mix64(seed + kGolden) ^ mix64(index ^ 0x632BE59BD9B4E019ULL)) {}

CounterRng::result_type CounterRng::operator()() {
  state_ += kGolden;
  return mix64(state_);
}

double CounterRng::uniform() {
  return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
}

double CounterRng::standard_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

void AbaSlots::validate() const {
  if (!(0 < alice_first && alice_first < bob && bob < alice_second)) {
    throw DomainError("slots must satisfy 0 < alice_first < bob < alice_second");
  }
}

AbaDraw sample_signals(const SignalModel& model, std::uint64_t seed,
                       std::uint64_t index) {
  require_sampleable(model);
  CounterRng rng(seed, index);
  const double z0 = rng.standard_normal();
  const double z1 = rng.standard_normal();
  const double z2 = rng.standard_normal();
  const double lambda = model.c0 + z0 / std::sqrt(model.tau_c);
  const double rho = model.rho;
  const double eps_a = z1 / std::sqrt(model.tau_a);
  const double eps_b =
      (rho * z1 + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * z2) /
      std::sqrt(model.tau_b);
  return {lambda, lambda + eps_a, lambda + eps_b};
}

GameRollout rollout(const SignalModel& model, ScoringRule rule,
                    const DiscountSchedule& schedule, double c,
                    std::uint64_t seed, std::uint64_t index,
                    const AbaSlots& slots) {
  const SlotWeights k = weights(schedule, slots);
  const AbaDraw d = sample_signals(model, seed, index);
  const double x = d.lambda;
  const NormalBelief prior = model.prior();
  const NormalBelief g_lie = posterior_single(model, d.a0 + c);
  const NormalBelief h = posterior_pair(model, d.a0, d.b0);
  const NormalBelief h_lie = posterior_pair(model, d.a0 + c, d.b0);

  const double s_prior = score(rule, prior, x);
  const double s_g_lie = score(rule, g_lie, x);
  const double s_h = score(rule, h, x);
  const double s_h_lie = score(rule, h_lie, x);

  GameRollout out;
  out.lambda = x;
  out.a0 = d.a0;
  out.b0 = d.b0;
  out.deviation_c = c;
  out.rewards.pi_a =
      (k.k1 * s_g_lie - k.k0 * s_prior) + (k.k2 * s_h - k.kb * s_h_lie);
  out.rewards.pi_b = k.kb * s_h_lie - k.k1 * s_g_lie;
  out.rewards.zero_sum_residual = std::abs(
      out.rewards.pi_a + out.rewards.pi_b - (k.k2 * s_h - k.k0 * s_prior));
  return out;
}

GainEstimate deviation_gain(const SignalModel& model, ScoringRule rule,
                            const DiscountSchedule& schedule, double c,
                            std::int64_t n, std::uint64_t seed,
                            const AbaSlots& slots) {
  if (n < 2) throw DomainError("deviation_gain needs n >= 2");
  require_sampleable(model);
  model.require_nondegenerate();
  const SlotWeights k = weights(schedule, slots);
  if (c == 0.0) return {0.0, 0.0, n};

  const std::int64_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<Moments> partial(static_cast<std::size_t>(chunks));
  std::atomic<std::int64_t> next{0};
  auto work = [&] {
    for (std::int64_t ci = next++; ci < chunks; ci = next++) {
      Moments m;
      const std::int64_t end = std::min(n, (ci + 1) * kChunk);
      for (std::int64_t i = ci * kChunk; i < end; ++i) {
        const AbaDraw d =
            sample_signals(model, seed, static_cast<std::uint64_t>(i));
        m.add(paired_gain(model, rule, k, c, d));
      }
      partial[static_cast<std::size_t>(ci)] = m;
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = static_cast<unsigned>(
      std::min<std::int64_t>(chunks, static_cast<std::int64_t>(hw)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  Moments total;
  for (const auto& m : partial) total.merge(m);
  const double var = total.m2 / static_cast<double>(total.n - 1);
  return {total.mean, std::sqrt(var / static_cast<double>(total.n)), total.n};
}

double analytic_gain(const SignalModel& model, ScoringRule rule,
                     const DiscountSchedule& schedule, double c,
                     const AbaSlots& slots) {
  const SlotWeights k = weights(schedule, slots);
  const DeviationLosses losses = deviation_losses(rule, model, c);
  return k.kb * losses.second - k.k1 * losses.first;
}

BestResponse best_response(const SignalModel& model, ScoringRule rule,
                           const DiscountSchedule& schedule,
                           const SearchBounds& bounds, const AbaSlots& slots) {
  model.validate();
  model.require_nondegenerate();
  const double c_max =
      bounds.c_max > 0.0 ? bounds.c_max : 10.0 / std::sqrt(model.tau_a);
  const SlotWeights k = weights(schedule, slots);

  BestResponse out;
  if (rule.kind == RuleKind::logarithmic) {
    const DeviationLosses unit = deviation_losses(rule, model, 1.0);
    const double coefficient = k.kb * unit.second - k.k1 * unit.first;
    if (coefficient > 1e-9 * k.k1 * unit.first) {
      out.c_star = c_max;
      out.gain = coefficient * c_max * c_max;
      out.hit_bound = true;
    }
    return out;
  }

  if (bounds.grid_points < 3) throw DomainError("grid_points must be >= 3");
  auto gain = [&](double c) {
    const DeviationLosses l = deviation_losses(rule, model, c);
    return k.kb * l.second - k.k1 * l.first;
  };
  // Delta is even in c, so the half-line suffices.
  const int m = bounds.grid_points;
  int best = 0;
  double best_gain = 0.0;
  for (int i = 1; i < m; ++i) {
    const double c = c_max * static_cast<double>(i) / (m - 1);
    const double v = gain(c);
    if (v > best_gain) {
      best_gain = v;
      best = i;
    }
  }
  const DeviationLosses scale_losses = deviation_losses(rule, model, c_max);
  const double scale = std::max(k.k1 * scale_losses.first,
                                k.kb * scale_losses.second);
  if (best == 0 || best_gain <= 1e-9 * scale) return out;

  const double step = c_max / (m - 1);
  const double lo = std::max(0.0, step * (best - 1));
  const double hi = std::min(c_max, step * (best + 1));
  double c_star = golden_max(gain, lo, hi);
  double g_star = gain(c_star);
  if (g_star < best_gain) {
    c_star = step * best;
    g_star = best_gain;
  }
  out.c_star = c_star;
  out.gain = g_star;
  out.hit_bound = best == m - 1;
  return out;
}

double aba_discount_ratio(const DiscountSchedule& schedule,
                          const AbaSlots& slots) {
  const SlotWeights k = weights(schedule, slots);
  return k.k1 / k.kb;
}

DiscountSchedule aba_schedule_with_ratio(double ratio, const AbaSlots& slots) {
  slots.validate();
  return DiscountSchedule::piecewise(ratio, {{slots.bob, 1.0}});
}

void ForumSchedule::validate() const {
  if (slots.empty()) throw DomainError("forum schedule needs a slot");
  std::int64_t previous = -1;
  for (const auto& s : slots) {
    if (s.t <= previous) {
      throw DomainError("forum slot times must be strictly increasing");
    }
    if (s.expert.empty()) throw DomainError("forum slot without an expert");
    previous = s.t;
  }
  if (previous > horizon) {
    throw DomainError("forum slot beyond the horizon");
  }
}

std::vector<AbaSubgame> reduce_schedule(const ForumSchedule& schedule) {
  schedule.validate();
  const auto& slots = schedule.slots;
  std::vector<AbaSubgame> out;
  std::unordered_map<std::string, std::size_t> last_seen;
  // Walk backwards so each slot meets its nearest later repeat.
  std::vector<std::size_t> next(slots.size(), slots.size());
  for (std::size_t i = slots.size(); i-- > 0;) {
    auto it = last_seen.find(slots[i].expert);
    if (it != last_seen.end()) next[i] = it->second;
    last_seen[slots[i].expert] = i;
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const std::size_t j = next[i];
    if (j == slots.size()) continue;
    AbaSubgame sub;
    sub.alice = slots[i].expert;
    sub.first_slot = i;
    sub.second_slot = j;
    sub.t_first = slots[i].t;
    sub.t_second = slots[j].t;
    std::unordered_set<std::string> seen;
    for (std::size_t m = i + 1; m < j; ++m) {
      if (seen.insert(slots[m].expert).second) {
        sub.bob_set.push_back(slots[m].expert);
      }
    }
    if (j > i + 1) sub.t_last_bob = slots[j - 1].t;
    out.push_back(std::move(sub));
  }
  return out;
}

double subgame_discount_ratio(const AbaSubgame& subgame,
                              const DiscountSchedule& discount) {
  if (subgame.t_last_bob < 0) return 1.0;
  return schedule_eval(discount, subgame.t_first) /
         schedule_eval(discount, subgame.t_last_bob);
}

std::string_view to_string(Mechanism mechanism) {
  switch (mechanism) {
    case Mechanism::discounted_msr:
      return "discounted_msr";
    case Mechanism::group:
      return "group";
    case Mechanism::single:
      return "single";
  }
  return "discounted_msr";
}

Mechanism parse_mechanism(std::string_view text) {
  if (text == "discounted_msr" || text == "msr") {
    return Mechanism::discounted_msr;
  }
  if (text == "group") return Mechanism::group;
  if (text == "single") return Mechanism::single;
  throw DomainError("unknown mechanism '" + std::string(text) + "'");
}

std::map<std::string, double> score_mechanism(
    Mechanism mechanism, ScoringRule rule, const DiscountSchedule& schedule,
    const NormalBelief& prior, const std::vector<Prediction>& predictions,
    double outcome) {
  if (predictions.empty()) {
    throw DomainError("mechanism needs at least one prediction");
  }
  schedule.validate();
  std::int64_t previous_t = 0;
  for (const auto& p : predictions) {
    if (p.t <= previous_t) {
      throw DomainError("prediction counters must be positive and increasing");
    }
    previous_t = p.t;
  }

  std::map<std::string, double> payoff;
  switch (mechanism) {
    case Mechanism::group: {
      const double s = score(rule, predictions.back().belief, outcome);
      for (const auto& p : predictions) payoff[p.expert] = s;
      break;
    }
    case Mechanism::single: {
      double s_prev = score(rule, prior, outcome);
      for (const auto& p : predictions) {
        const double s = score(rule, p.belief, outcome);
        const double increment = s - s_prev;
        auto [it, fresh] = payoff.try_emplace(p.expert, increment);
        if (!fresh) it->second = std::min(it->second, increment);
        s_prev = s;
      }
      break;
    }
    case Mechanism::discounted_msr: {
      double weighted_prev =
          schedule_eval(schedule, 0) * score(rule, prior, outcome);
      for (const auto& p : predictions) {
        const double s = score(rule, p.belief, outcome);
        payoff[p.expert] += schedule_eval(schedule, p.t) * s - weighted_prev;
        weighted_prev = schedule_eval(schedule, p.t) * s;
      }
      break;
    }
  }
  return payoff;
}

std::map<std::string, double> run_mechanism(Mechanism mechanism,
                                            const AbaScenario& scenario,
                                            std::uint64_t seed,
                                            std::uint64_t index) {
  const SignalModel& model = scenario.model;
  const AbaDraw d = sample_signals(model, seed, index);
  const std::vector<Prediction> predictions = {
      {"alice", posterior_single(model, d.a0 + scenario.deviation_c),
       scenario.slots.alice_first},
      {"bob", posterior_pair(model, d.a0 + scenario.deviation_c, d.b0),
       scenario.slots.bob},
      {"alice", posterior_pair(model, d.a0, d.b0),
       scenario.slots.alice_second},
  };
  return score_mechanism(mechanism, scenario.rule, scenario.schedule,
                         model.prior(), predictions, d.lambda);
}

}  // namespace truthmark
