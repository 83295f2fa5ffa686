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

#ifndef TRUTHMARK_AMM_HPP_
#define TRUTHMARK_AMM_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "truthmark/discounting.hpp"
#include "truthmark/scoring.hpp"

namespace truthmark {

// Uniform partition of [left, left + bins * width).
struct OutcomeGrid {
  double left = -10.0;
  double width = 20.0 / 512.0;
  std::size_t bins = 512;

  // Default market grid: prior mean +- span_sd prior standard deviations.
  static OutcomeGrid around(const NormalBelief& prior, std::size_t bins = 512,
                            double span_sd = 10.0);

  void validate() const;
  double right() const { return left + static_cast<double>(bins) * width; }
  double edge(std::size_t i) const;
  double center(std::size_t i) const;
  // Bin containing x; outcomes outside the grid go to the nearest edge bin
  // and set *clamped.
  std::size_t bin_of(double x, bool* clamped = nullptr) const;

  friend bool operator==(const OutcomeGrid&, const OutcomeGrid&) = default;
};

// Everything a trade log needs to rebuild the market.
struct MarketHeader {
  OutcomeGrid grid;
  DiscountSchedule schedule;
  NormalBelief prior{0.0, 1.0};
  // Subtracted from every log score so that S <= 0 holds on the grid.
  double affine_shift = 0.0;
  double floor_density = 1e-300;

  static MarketHeader standard(const NormalBelief& prior,
                               const DiscountSchedule& schedule,
                               std::size_t bins = 512);
  void validate() const;
};

// Grid density of `belief`: bin masses divided by width, renormalized to
// unit mass on the grid, floored at `floor`. *clipped counts floored bins.
std::vector<double> binned_density(const OutcomeGrid& grid,
                                   const NormalBelief& belief, double floor,
                                   std::size_t* clipped = nullptr);

// log of the binned density at x minus the shift.
double binned_log_score(const MarketHeader& header, const NormalBelief& belief,
                        double x);

// k * (log sum_j w e^{s_j / k} + shift), evaluated with max-subtraction.
double cost_function(std::span<const double> shares, double k,
                     const OutcomeGrid& grid, double shift = 0.0);

// Price densities e^{s_r/k} / sum_j w e^{s_j/k}.
std::vector<double> price_vector(std::span<const double> shares, double k,
                                 const OutcomeGrid& grid);

// Differential entropy of the price density, -sum w m log m.
double price_entropy(std::span<const double> shares, double k,
                     const OutcomeGrid& grid);

// dC/dk at fixed shares; equals price_entropy + shift.
double cost_k_derivative(std::span<const double> shares, double k,
                         const OutcomeGrid& grid, double shift = 0.0);

struct TradeRecord {
  std::string trader;
  std::int64_t t = 0;
  std::int64_t t_pre = 0;
  std::vector<double> pre_shares;
  std::vector<double> post_shares;
  double cost = 0.0;
  std::size_t clipped_bins = 0;
};

struct SettlementReport {
  bool settled = false;
  double outcome = 0.0;
  std::size_t bin = 0;
  bool clamped = false;
  std::size_t trades = 0;
  std::map<std::string, double> payouts;  // net shares in the outcome bin
  std::map<std::string, double> costs;
  std::map<std::string, double> profits;
  double collected = 0.0;
  double paid = 0.0;
  double market_maker_loss = 0.0;
  // -k(0) (S(pi, pi) - shift), continuous log score of the prior.
  double loss_bound = 0.0;
};

// Single-writer market. Each trade is applied atomically: a throwing trade
// leaves the state untouched.
class Market {
 public:
  explicit Market(MarketHeader header);

  const MarketHeader& header() const { return header_; }
  const std::vector<double>& shares() const { return shares_; }
  std::int64_t t() const { return t_; }
  double k() const;
  const std::vector<TradeRecord>& records() const { return records_; }

  double price(std::size_t bin) const;
  std::vector<double> prices() const;
  double cost() const;

  // Adds `delta` to the inventory at counter t_new >= t().
  const TradeRecord& trade_delta(const std::string& trader,
                                 std::span<const double> delta,
                                 std::int64_t t_new);
  // Moves the price curve onto the binned density of `target`.
  const TradeRecord& trade_to_belief(const std::string& trader,
                                     const NormalBelief& target,
                                     std::int64_t t_new);
  // Applies a logged record after checking it against the current state.
  // Throws ConsistencyError(index) on mismatch.
  void apply_record(const TradeRecord& record, std::size_t index);

  SettlementReport settle(double outcome) const;

 private:
  const TradeRecord& commit(TradeRecord record);

  MarketHeader header_;
  std::vector<double> shares_;
  std::int64_t t_ = 0;
  std::vector<TradeRecord> records_;
};

// Relative tolerance on replayed costs.
inline constexpr double kReplayCostTolerance = 1e-10;

// Line-delimited JSON: one header line, one line per trade, an optional
// outcome line.
void write_trade_log(std::ostream& out, const MarketHeader& header,
                     const std::vector<TradeRecord>& records,
                     std::optional<double> outcome);

// Rebuilds the market from a trade log and settles it. An empty log gives
// an empty report. Throws ConsistencyError carrying the 0-based index of
// the first offending trade; header problems report 0.
SettlementReport replay(std::istream& log);

std::string report_to_json(const SettlementReport& report);

struct TruthfulSession {
  Market market;
  double outcome;
};

// One session: the outcome is drawn from the prior, a trader observes it
// with precision signal_precision and moves the market to its posterior at
// t = 1. Deterministic in (seed, index).
TruthfulSession run_truthful_session(const MarketHeader& header,
                                     double signal_precision,
                                     std::uint64_t seed, std::uint64_t index);

struct SessionStats {
  std::int64_t sessions = 0;
  double mean_loss = 0.0;
  double std_error = 0.0;
  double loss_bound = 0.0;
};

// Mean market-maker loss over run_truthful_session(header, ..., seed, i)
// for i < sessions.
SessionStats simulate_truthful_sessions(const MarketHeader& header,
                                        double signal_precision,
                                        std::int64_t sessions,
                                        std::uint64_t seed);

}  // namespace truthmark

#endif  // TRUTHMARK_AMM_HPP_
