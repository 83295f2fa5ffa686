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

#include "truthmark/amm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "truthmark/errors.hpp"
#include "truthmark/game.hpp"
#include "truthmark/serialization.hpp"

namespace truthmark {
namespace {

using nlohmann::json;

// P(Z > z) without cancellation in either tail.
double upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_mass(double lo, double hi) {
  if (lo >= 0.0) return upper_tail(lo) - upper_tail(hi);
  return upper_tail(-hi) - upper_tail(-lo);
}

double log_sum_exp_weighted(std::span<const double> shares, double k,
                            double width) {
  double top = -std::numeric_limits<double>::infinity();
  for (double s : shares) top = std::max(top, s / k);
  double sum = 0.0;
  for (double s : shares) sum += std::exp(s / k - top);
  return top + std::log(sum * width);
}

void require_k(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw DomainError("discount value must be finite and positive");
  }
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + " not finite");
  }
}

double sig12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

json map_json(const std::map<std::string, double>& m) {
  json out = json::object();
  for (const auto& [key, value] : m) out[key] = sig12(value);
  return out;
}

}  // namespace

OutcomeGrid OutcomeGrid::around(const NormalBelief& prior, std::size_t bins,
                                double span_sd) {
  if (!(span_sd > 0.0)) throw DomainError("grid span must be positive");
  OutcomeGrid g;
  g.bins = bins;
  g.left = prior.mean() - span_sd * prior.stddev();
  g.width = 2.0 * span_sd * prior.stddev() / static_cast<double>(bins);
  g.validate();
  return g;
}

void OutcomeGrid::validate() const {
  if (bins < 2) throw DomainError("grid needs at least two bins");
  if (!(width > 0.0) || !std::isfinite(width) || !std::isfinite(left)) {
    throw DomainError("grid edges must be finite with positive width");
  }
}

double OutcomeGrid::edge(std::size_t i) const {
  return left + static_cast<double>(i) * width;
}

double OutcomeGrid::center(std::size_t i) const {
  return left + (static_cast<double>(i) + 0.5) * width;
}

std::size_t OutcomeGrid::bin_of(double x, bool* clamped) const {
  bool outside = false;
  std::size_t bin = 0;
  if (!(x >= left)) {
    outside = true;
  } else if (x >= right()) {
    outside = true;
    bin = bins - 1;
  } else {
    bin = std::min(bins - 1, static_cast<std::size_t>((x - left) / width));
  }
  if (clamped != nullptr) *clamped = outside;
  return bin;
}

MarketHeader MarketHeader::standard(const NormalBelief& prior,
                                    const DiscountSchedule& schedule,
                                    std::size_t bins) {
  MarketHeader h;
  h.prior = prior;
  h.schedule = schedule;
  h.grid = OutcomeGrid::around(prior, bins);
  h.validate();
  return h;
}

void MarketHeader::validate() const {
  grid.validate();
  schedule.validate();
  if (!std::isfinite(affine_shift)) {
    throw DomainError("affine shift must be finite");
  }
  if (!(floor_density > 0.0)) {
    throw DomainError("floor density must be positive");
  }
}

std::vector<double> binned_density(const OutcomeGrid& grid,
                                   const NormalBelief& belief, double floor,
                                   std::size_t* clipped) {
  grid.validate();
  const double sd = belief.stddev();
  std::vector<double> mass(grid.bins);
  double total = 0.0;
  for (std::size_t i = 0; i < grid.bins; ++i) {
    const double lo = (grid.edge(i) - belief.mean()) / sd;
    const double hi = (grid.edge(i + 1) - belief.mean()) / sd;
    mass[i] = normal_mass(lo, hi);
    total += mass[i];
  }
  if (!(total > 0.0)) {
    throw NumericFailure("belief puts no mass on the outcome grid");
  }
  std::size_t floored = 0;
  for (double& m : mass) {
    m /= total * grid.width;
    if (!(m >= floor)) {
      m = floor;
      ++floored;
    }
  }
  if (clipped != nullptr) *clipped = floored;
  return mass;
}

double binned_log_score(const MarketHeader& header, const NormalBelief& belief,
                        double x) {
  const auto d = binned_density(header.grid, belief, header.floor_density);
  return std::log(d[header.grid.bin_of(x)]) - header.affine_shift;
}

double cost_function(std::span<const double> shares, double k,
                     const OutcomeGrid& grid, double shift) {
  require_k(k);
  if (shares.size() != grid.bins) {
    throw DomainError("share vector does not match the grid");
  }
  return k * (log_sum_exp_weighted(shares, k, grid.width) + shift);
}

std::vector<double> price_vector(std::span<const double> shares, double k,
                                 const OutcomeGrid& grid) {
  const double lse = cost_function(shares, k, grid) / k;
  std::vector<double> out(shares.size());
  for (std::size_t i = 0; i < shares.size(); ++i) {
    out[i] = std::exp(shares[i] / k - lse);
  }
  return out;
}

double price_entropy(std::span<const double> shares, double k,
                     const OutcomeGrid& grid) {
  const double lse = cost_function(shares, k, grid) / k;
  double h = 0.0;
  for (double s : shares) {
    const double log_m = s / k - lse;
    h -= grid.width * std::exp(log_m) * log_m;
  }
  return h;
}

double cost_k_derivative(std::span<const double> shares, double k,
                         const OutcomeGrid& grid, double shift) {
  return price_entropy(shares, k, grid) + shift;
}

Market::Market(MarketHeader header) : header_(std::move(header)) {
  header_.validate();
  const double k0 = schedule_eval(header_.schedule, 0);
  auto density =
      binned_density(header_.grid, header_.prior, header_.floor_density);
  shares_.resize(density.size());
  for (std::size_t i = 0; i < density.size(); ++i) {
    shares_[i] = k0 * std::log(density[i]);
  }
}

double Market::k() const { return schedule_eval(header_.schedule, t_); }

double Market::price(std::size_t bin) const {
  if (bin >= shares_.size()) throw DomainError("bin out of range");
  return prices()[bin];
}

std::vector<double> Market::prices() const {
  return price_vector(shares_, k(), header_.grid);
}

double Market::cost() const {
  return cost_function(shares_, k(), header_.grid, header_.affine_shift);
}

const TradeRecord& Market::trade_delta(const std::string& trader,
                                       std::span<const double> delta,
                                       std::int64_t t_new) {
  if (t_new < t_) throw DomainError("trade counter moves backwards");
  if (delta.size() != shares_.size()) {
    throw DomainError("share delta does not match the grid");
  }
  require_finite(delta, "share delta");
  TradeRecord r;
  r.trader = trader;
  r.t = t_new;
  r.t_pre = t_;
  r.pre_shares = shares_;
  r.post_shares = shares_;
  for (std::size_t i = 0; i < delta.size(); ++i) r.post_shares[i] += delta[i];
  r.cost = cost_function(r.post_shares, schedule_eval(header_.schedule, t_new),
                         header_.grid, header_.affine_shift) -
           cost();
  return commit(std::move(r));
}

const TradeRecord& Market::trade_to_belief(const std::string& trader,
                                           const NormalBelief& target,
                                           std::int64_t t_new) {
  if (t_new < t_) throw DomainError("trade counter moves backwards");
  TradeRecord r;
  r.trader = trader;
  r.t = t_new;
  r.t_pre = t_;
  r.pre_shares = shares_;
  const auto density = binned_density(header_.grid, target,
                                      header_.floor_density, &r.clipped_bins);
  // Keep the inventory's offset so the trader is charged only for the
  // change of belief.
  const double offset = cost_function(shares_, k(), header_.grid);
  const double k_new = schedule_eval(header_.schedule, t_new);
  r.post_shares.resize(density.size());
  for (std::size_t i = 0; i < density.size(); ++i) {
    r.post_shares[i] = k_new * std::log(density[i]) + offset;
  }
  r.cost = cost_function(r.post_shares, k_new, header_.grid,
                         header_.affine_shift) -
           cost();
  return commit(std::move(r));
}

void Market::apply_record(const TradeRecord& record, std::size_t index) {
  if (record.t_pre != t_) {
    throw ConsistencyError(index, "t_pre does not match the market counter");
  }
  if (record.t < t_) throw ConsistencyError(index, "counter moves backwards");
  if (record.pre_shares != shares_) {
    throw ConsistencyError(index, "pre_shares differ from the market state");
  }
  if (record.post_shares.size() != shares_.size()) {
    throw ConsistencyError(index, "post_shares do not match the grid");
  }
  for (double s : record.post_shares) {
    if (!std::isfinite(s)) throw ConsistencyError(index, "post_shares not finite");
  }
  const double expected =
      cost_function(record.post_shares,
                    schedule_eval(header_.schedule, record.t), header_.grid,
                    header_.affine_shift) -
      cost();
  if (!(std::abs(expected - record.cost) <=
        kReplayCostTolerance * std::max(1.0, std::abs(expected)))) {
    throw ConsistencyError(index, "cost does not match the cost function");
  }
  commit(record);
}

const TradeRecord& Market::commit(TradeRecord record) {
  shares_ = record.post_shares;
  t_ = record.t;
  records_.push_back(std::move(record));
  return records_.back();
}

SettlementReport Market::settle(double outcome) const {
  if (!std::isfinite(outcome)) throw DomainError("outcome must be finite");
  SettlementReport rep;
  rep.settled = true;
  rep.outcome = outcome;
  rep.bin = header_.grid.bin_of(outcome, &rep.clamped);
  rep.trades = records_.size();
  for (const auto& r : records_) {
    const double pay = r.post_shares[rep.bin] - r.pre_shares[rep.bin];
    rep.payouts[r.trader] += pay;
    rep.costs[r.trader] += r.cost;
    rep.paid += pay;
    rep.collected += r.cost;
  }
  for (const auto& [trader, pay] : rep.payouts) {
    rep.profits[trader] = pay - rep.costs[trader];
  }
  rep.market_maker_loss = rep.paid - rep.collected;
  rep.loss_bound = loss_bound(header_.schedule, header_.prior,
                              ScoringRule::logarithmic(), header_.affine_shift);
  return rep;
}

void write_trade_log(std::ostream& out, const MarketHeader& header,
                     const std::vector<TradeRecord>& records,
                     std::optional<double> outcome) {
  json h = header;
  h["type"] = "header";
  out << h.dump() << '\n';
  for (const auto& r : records) {
    json line = {{"type", "trade"},         {"trader", r.trader},
                 {"t", r.t},                {"t_pre", r.t_pre},
                 {"cost", r.cost},          {"clipped_bins", r.clipped_bins},
                 {"pre_shares", r.pre_shares}, {"post_shares", r.post_shares}};
    out << line.dump() << '\n';
  }
  if (outcome) out << json{{"type", "outcome"}, {"x", *outcome}}.dump() << '\n';
}

SettlementReport replay(std::istream& log) {
  std::string line;
  std::optional<Market> market;
  std::optional<double> outcome;
  std::size_t trade_index = 0;
  while (std::getline(log, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ConsistencyError(trade_index, std::string("malformed line: ") +
                                              e.what());
    }
    const std::string type = j.value("type", "");
    if (!market) {
      if (type != "header") {
        throw ConsistencyError(0, "trade log must start with a header");
      }
      market.emplace(j.get<MarketHeader>());
      continue;
    }
    if (outcome) throw ConsistencyError(trade_index, "record after outcome");
    if (type == "outcome") {
      outcome = j.at("x").get<double>();
      continue;
    }
    if (type != "trade") {
      throw ConsistencyError(trade_index, "unknown record type '" + type + "'");
    }
    TradeRecord r;
    try {
      r.trader = j.at("trader").get<std::string>();
      r.t = j.at("t").get<std::int64_t>();
      r.t_pre = j.at("t_pre").get<std::int64_t>();
      r.cost = j.at("cost").get<double>();
      r.clipped_bins = j.value("clipped_bins", std::size_t{0});
      r.pre_shares = j.at("pre_shares").get<std::vector<double>>();
      r.post_shares = j.at("post_shares").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ConsistencyError(trade_index,
                             std::string("malformed trade: ") + e.what());
    }
    market->apply_record(r, trade_index);
    ++trade_index;
  }
  if (!market) return {};
  if (!outcome) {
    SettlementReport rep;
    rep.trades = market->records().size();
    return rep;
  }
  return market->settle(*outcome);
}

std::string report_to_json(const SettlementReport& rep) {
  if (!rep.settled && rep.trades == 0) return "{}";
  json j = {{"settled", rep.settled}, {"trades", rep.trades}};
  if (rep.settled) {
    j["outcome"] = sig12(rep.outcome);
    j["bin"] = rep.bin;
    j["clamped"] = rep.clamped;
    j["payouts"] = map_json(rep.payouts);
    j["costs"] = map_json(rep.costs);
    j["profits"] = map_json(rep.profits);
    j["collected"] = sig12(rep.collected);
    j["paid"] = sig12(rep.paid);
    j["market_maker_loss"] = sig12(rep.market_maker_loss);
    j["loss_bound"] = sig12(rep.loss_bound);
  }
  return j.dump(2);
}

TruthfulSession run_truthful_session(const MarketHeader& header,
                                     double signal_precision,
                                     std::uint64_t seed, std::uint64_t index) {
  if (!(signal_precision > 0.0) || !std::isfinite(signal_precision)) {
    throw DomainError("signal precision must be finite and positive");
  }
  const NormalBelief& prior = header.prior;
  CounterRng rng(seed, index);
  const double x = prior.mean() + rng.standard_normal() * prior.stddev();
  const double a = x + rng.standard_normal() / std::sqrt(signal_precision);
  const double tau_post = prior.precision() + signal_precision;
  const NormalBelief posterior(
      (prior.precision() * prior.mean() + signal_precision * a) / tau_post,
      tau_post);
  TruthfulSession session{Market(header), x};
  session.market.trade_to_belief("trader", posterior, 1);
  return session;
}

SessionStats simulate_truthful_sessions(const MarketHeader& header,
                                        double signal_precision,
                                        std::int64_t sessions,
                                        std::uint64_t seed) {
  if (sessions < 2) throw DomainError("need at least two sessions");
  header.validate();
  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t i = 0; i < sessions; ++i) {
    const TruthfulSession s = run_truthful_session(
        header, signal_precision, seed, static_cast<std::uint64_t>(i));
    const double loss = s.market.settle(s.outcome).market_maker_loss;
    const double d = loss - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (loss - mean);
  }
  SessionStats out;
  out.sessions = sessions;
  out.mean_loss = mean;
  out.std_error = std::sqrt(m2 / static_cast<double>(sessions - 1) /
                            static_cast<double>(sessions));
  out.loss_bound = loss_bound(header.schedule, header.prior,
                              ScoringRule::logarithmic(), header.affine_shift);
  return out;
}

}  // namespace truthmark
