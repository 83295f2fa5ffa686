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

#ifndef TRUTHMARK_GAME_HPP_
#define TRUTHMARK_GAME_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "truthmark/beliefs.hpp"
#include "truthmark/discounting.hpp"
#include "truthmark/scoring.hpp"

namespace truthmark {

// Counter-based generator: the stream for (seed, index) is a pure function
// of the pair, so rollouts can be generated in any order or in parallel.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

  // Uniform on (0, 1].
  double uniform();
  // Box-Muller; platform independent.
  double standard_normal();

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Prediction counters of the three moves. The prior is posted at t = 0.
struct AbaSlots {
  std::int64_t alice_first = 1;
  std::int64_t bob = 2;
  std::int64_t alice_second = 3;

  void validate() const;
};

struct RewardBreakdown {
  double pi_a = 0.0;
  double pi_b = 0.0;
  // |pi_a + pi_b - (k(t_A2) S(h, x) - k(0) S(pi, x))|
  double zero_sum_residual = 0.0;
};

struct GameRollout {
  double lambda = 0.0;  // also the revealed outcome
  double a0 = 0.0;
  double b0 = 0.0;
  double deviation_c = 0.0;
  RewardBreakdown rewards;
};

struct AbaDraw {
  double lambda;
  double a0;
  double b0;
};

// lambda ~ N(C0, 1/tau_C); (a0, b0) | lambda jointly normal around lambda
// with precisions (tau_A, tau_B) and correlation rho.
AbaDraw sample_signals(const SignalModel& model, std::uint64_t seed,
                       std::uint64_t index);

// One Alice-Bob-Alice game under the discounted market scoring rule. Alice
// reports the posterior of signal a0 + c, Bob and Alice's correction are
// truthful. Requires tau_C > 0.
GameRollout rollout(const SignalModel& model, ScoringRule rule,
                    const DiscountSchedule& schedule, double c,
                    std::uint64_t seed, std::uint64_t index = 0,
                    const AbaSlots& slots = {});

struct GainEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n = 0;
};

// E[Pi_A(c)] - E[Pi_A(0)] from n paired rollouts sharing (lambda, a0, b0).
GainEstimate deviation_gain(const SignalModel& model, ScoringRule rule,
                            const DiscountSchedule& schedule, double c,
                            std::int64_t n, std::uint64_t seed,
                            const AbaSlots& slots = {});

// The same expectation in closed form:
//   k(t_B) [S(h,h) - S(h^,h)] - k(t_A1) [S(g,g) - S(g^,g)],
// which is -Delta(c) when k is constant.
double analytic_gain(const SignalModel& model, ScoringRule rule,
                     const DiscountSchedule& schedule, double c,
                     const AbaSlots& slots = {});

struct SearchBounds {
  double c_max = 0.0;  // 0 selects 10 / sqrt(tau_A)
  int grid_points = 401;
};

struct BestResponse {
  double c_star = 0.0;
  double gain = 0.0;
  bool hit_bound = false;
};

// Maximizes analytic_gain over [-c_max, c_max]. For the log rule the gain is
// a multiple of c^2, so the answer is 0 or the bound; otherwise a grid scan
// with golden-section refinement. Gains within 1e-9 of the curvature scale
// count as zero and return c* = 0.
BestResponse best_response(const SignalModel& model, ScoringRule rule,
                           const DiscountSchedule& schedule,
                           const SearchBounds& bounds = {},
                           const AbaSlots& slots = {});

// Discount ratio that matters for Alice's first move: k(t_A1) / k(t_B).
double aba_discount_ratio(const DiscountSchedule& schedule,
                          const AbaSlots& slots = {});

// A schedule with k(t_A1) = ratio and k = 1 from Bob's slot on, so the
// ratio to Bob and to Alice's second slot are both `ratio`.
DiscountSchedule aba_schedule_with_ratio(double ratio,
                                         const AbaSlots& slots = {});

// ---- General forums ------------------------------------------------------

struct ForumSlot {
  std::int64_t t = 0;
  std::string expert;
};

struct ForumSchedule {
  std::vector<ForumSlot> slots;
  std::int64_t horizon = 0;

  // At least one slot, strictly increasing times within [0, horizon].
  void validate() const;
};

// One Alice-Bob-Alice subgame: consecutive opportunities of `alice` and the
// experts speaking in between, in order of first appearance.
struct AbaSubgame {
  std::string alice;
  std::size_t first_slot = 0;  // indices into ForumSchedule::slots
  std::size_t second_slot = 0;
  std::int64_t t_first = 0;
  std::int64_t t_second = 0;
  std::vector<std::string> bob_set;
  std::int64_t t_last_bob = -1;  // -1 when nobody speaks in between

  friend bool operator==(const AbaSubgame&, const AbaSubgame&) = default;
};

std::vector<AbaSubgame> reduce_schedule(const ForumSchedule& schedule);

// k(t_first) / k(t_last_bob); 1 when the subgame has no Bob.
double subgame_discount_ratio(const AbaSubgame& subgame,
                              const DiscountSchedule& discount);

// ---- Mechanisms ----------------------------------------------------------

enum class Mechanism { discounted_msr, group, single };

std::string_view to_string(Mechanism mechanism);
Mechanism parse_mechanism(std::string_view text);

struct Prediction {
  std::string expert;
  NormalBelief belief;
  std::int64_t t = 0;
};

// Payoffs per expert once `outcome` is revealed.
//   discounted_msr: sum of k(t_i) S(p_i, x) - k(t_{i-1}) S(p_{i-1}, x)
//   group:          every participant receives S(p_last, x)
//   single:         minimum of the expert's increments S(p_i,x) - S(p_{i-1},x)
// The prior is the prediction replaced first and is posted at t = 0.
// Throws DomainError on an empty sequence.
std::map<std::string, double> score_mechanism(
    Mechanism mechanism, ScoringRule rule, const DiscountSchedule& schedule,
    const NormalBelief& prior, const std::vector<Prediction>& predictions,
    double outcome);

struct AbaScenario {
  SignalModel model;
  ScoringRule rule;
  DiscountSchedule schedule;
  double deviation_c = 0.0;
  AbaSlots slots;
};

// Samples one game and scores it; payoffs keyed "alice" and "bob".
std::map<std::string, double> run_mechanism(Mechanism mechanism,
                                            const AbaScenario& scenario,
                                            std::uint64_t seed,
                                            std::uint64_t index = 0);

}  // namespace truthmark

#endif  // TRUTHMARK_GAME_HPP_
