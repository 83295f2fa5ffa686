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

#include "truthmark/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "truthmark/amm.hpp"
#include "truthmark/beliefs.hpp"
#include "truthmark/discounting.hpp"
#include "truthmark/errors.hpp"
#include "truthmark/game.hpp"
#include "truthmark/serialization.hpp"
#include "truthmark/truthfulness.hpp"

namespace truthmark {
namespace {

using nlohmann::json;

double round12(double x) {
  if (!std::isfinite(x)) return x;
  return std::strtod(format_real(x).c_str(), nullptr);
}

// Non-finite values have no JSON spelling; they are written as null.
json real(double x) {
  if (!std::isfinite(x)) return nullptr;
  return round12(x);
}

double parse_double(std::string_view text, std::string_view field) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw DomainError("grid spec: bad number '" + s + "' in " +
                      std::string(field));
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    out.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<double> parse_list(std::string_view text, std::string_view field) {
  std::vector<double> out;
  for (auto item : split(text, ',')) out.push_back(parse_double(item, field));
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DomainError("cannot write '" + path + "'");
  file << text;
  if (!file) throw DomainError("write to '" + path + "' failed");
}

json parse_json(const std::string& text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(std::string(what) + ": " + e.what());
  }
}

template <typename T>
T get_field(const json& j, const char* key, std::string_view what) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DomainError(std::string(what) + ": field '" + key + "': " +
                      e.what());
  }
}

json verdict_json(const TruthfulnessVerdict& v) {
  return {{"globally_truthful", v.globally_truthful},
          {"locally_truthful", v.locally_truthful},
          {"margin", real(v.margin)},
          {"flag", std::string(to_string(v.flag))}};
}

json model_json(const SignalModel& m) {
  return {{"tau_a", real(m.tau_a)},
          {"tau_b", real(m.tau_b)},
          {"tau_c", real(m.tau_c)},
          {"rho", real(m.rho)},
          {"c0", real(m.c0)}};
}

std::string kmin_cell(RuleKind rule, const SignalModel& model) {
  if (model.degenerate()) return "NA";
  try {
    const double k = rule == RuleKind::logarithmic
                         ? required_ratio_log(model)
                         : required_ratio_numeric(ScoringRule{rule}, model);
    return format_real(k);
  } catch (const NumericFailure&) {
    return "NA";
  }
}

// Mean and standard error of paired differences.
struct PairedMean {
  double mean = 0.0;
  double m2 = 0.0;
  std::int64_t n = 0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double std_error() const {
    return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  }
};

}  // namespace

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void SweepConfig::validate() const {
  if (!(rho_step > 0.0)) throw DomainError("sweep: rho step must be positive");
  if (!(rho_min <= rho_max)) throw DomainError("sweep: empty rho range");
  if (rho_min < -1.0 || rho_max > 1.0) {
    throw DomainError("sweep: rho must lie in [-1, 1]");
  }
  if (ratios.empty() || tau_c.empty()) {
    throw DomainError("sweep: ratio and tau_c sets must be non-empty");
  }
  for (double r : ratios) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw DomainError("sweep: ratios must be positive");
    }
  }
  for (double t : tau_c) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw DomainError("sweep: tau_c must be non-negative");
    }
  }
}

std::vector<double> SweepConfig::rho_values() const {
  validate();
  const auto n = static_cast<std::int64_t>(
      std::floor((rho_max - rho_min) / rho_step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const double v = rho_min + static_cast<double>(i) * rho_step;
    out.push_back(std::round(v * 1e12) / 1e12 + 0.0);
  }
  return out;
}

SweepConfig parse_grid_spec(std::string_view spec) {
  SweepConfig c;
  if (spec.empty()) return c;
  for (auto part : split(spec, ';')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) {
      throw DomainError("grid spec: expected key=value, got '" +
                        std::string(part) + "'");
    }
    const auto key = part.substr(0, eq);
    const auto value = part.substr(eq + 1);
    if (key == "rho") {
      const auto fields = split(value, ':');
      if (fields.size() == 1) {
        c.rho_min = c.rho_max = parse_double(fields[0], key);
        c.rho_step = 1.0;
      } else if (fields.size() == 3) {
        c.rho_min = parse_double(fields[0], key);
        c.rho_max = parse_double(fields[1], key);
        c.rho_step = parse_double(fields[2], key);
      } else {
        throw DomainError("grid spec: rho takes min:max:step or a value");
      }
    } else if (key == "ratio") {
      c.ratios = parse_list(value, key);
    } else if (key == "tau_c") {
      c.tau_c = parse_list(value, key);
    } else if (key == "rule") {
      c.rule = parse_rule_kind(value);
    } else {
      throw DomainError("grid spec: unknown key '" + std::string(key) + "'");
    }
  }
  c.validate();
  return c;
}

SweepConfig parse_sweep_json(const std::string& text) {
  const json j = parse_json(text, "sweep config");
  require_keys(j, "sweep config", {"rho", "ratio", "tau_c", "rule"});
  SweepConfig c;
  if (j.contains("rho")) {
    const json& r = j.at("rho");
    require_keys(r, "sweep config rho", {"min", "max", "step"});
    c.rho_min = get_field<double>(r, "min", "sweep config rho");
    c.rho_max = get_field<double>(r, "max", "sweep config rho");
    c.rho_step = get_field<double>(r, "step", "sweep config rho");
  }
  if (j.contains("ratio")) {
    c.ratios = get_field<std::vector<double>>(j, "ratio", "sweep config");
  }
  if (j.contains("tau_c")) {
    c.tau_c = get_field<std::vector<double>>(j, "tau_c", "sweep config");
  }
  if (j.contains("rule")) {
    c.rule = parse_rule_kind(get_field<std::string>(j, "rule", "sweep config"));
  }
  c.validate();
  return c;
}

std::string classify_csv(const SweepConfig& config) {
  const std::vector<double> rhos = config.rho_values();
  std::vector<double> ratios = config.ratios;
  std::vector<double> tau_cs = config.tau_c;
  std::sort(ratios.begin(), ratios.end());
  std::sort(tau_cs.begin(), tau_cs.end());

  std::ostringstream out;
  out << "# truthmark classify schema=" << kClassifySchemaVersion << '\n';
  out << "rule,rho,tau_a,tau_b,tau_c,globally_truthful,locally_truthful,"
         "margin,flag,k_min\n";
  for (double rho : rhos) {
    for (double ratio : ratios) {
      for (double tc : tau_cs) {
        const SignalModel m{ratio, 1.0, tc, rho, 0.0};
        const TruthfulnessVerdict v = classify(ScoringRule{config.rule}, m);
        out << to_string(config.rule) << ',' << format_real(rho) << ','
            << format_real(m.tau_a) << ',' << format_real(m.tau_b) << ','
            << format_real(tc) << ',' << (v.globally_truthful ? "true" : "false")
            << ',' << (v.locally_truthful ? "true" : "false") << ','
            << format_real(v.margin) << ',' << to_string(v.flag) << ','
            << kmin_cell(config.rule, m) << '\n';
      }
    }
  }
  return out.str();
}

std::string discount_report(const std::string& config_json) {
  const json j = parse_json(config_json, "discount config");
  require_keys(j, "discount config",
               {"model", "rule", "schedule", "slots", "search",
                "affine_shift"});
  const auto model = get_field<SignalModel>(j, "model", "discount config");
  const ScoringRule rule{parse_rule_kind(j.value("rule", "log"))};
  SearchGrid search;
  if (j.contains("search")) {
    const json& s = j.at("search");
    require_keys(s, "search", {"c_min", "c_max", "points_per_decade"});
    search.c_min = s.value("c_min", search.c_min);
    search.c_max = s.value("c_max", search.c_max);
    search.points_per_decade =
        s.value("points_per_decade", search.points_per_decade);
  }

  json report;
  report["rule"] = std::string(to_string(rule.kind));
  report["model"] = model_json(model);
  report["verdict"] = verdict_json(classify(rule, model));
  report["k_min_analytic"] = rule.kind == RuleKind::logarithmic
                                 ? real(required_ratio_log(model))
                                 : json(nullptr);
  const RatioSearch numeric = search_required_ratio(rule, model, search);
  report["numeric"] = {{"ratio", real(numeric.ratio)},
                       {"argmax_c", std::isinf(numeric.argmax_c)
                                        ? json("inf")
                                        : real(numeric.argmax_c)},
                       {"limit_zero", real(numeric.limit_zero)},
                       {"tail", real(numeric.tail)}};
  if (j.contains("schedule")) {
    const auto schedule =
        get_field<DiscountSchedule>(j, "schedule", "discount config");
    const AbaSlots slots = j.contains("slots")
                               ? get_field<AbaSlots>(j, "slots", "discount config")
                               : AbaSlots{};
    const double ratio = aba_discount_ratio(schedule, slots);
    report["schedule_ratio"] = real(ratio);
    report["restores_truthfulness"] = ratio >= numeric.ratio;
    if (model.tau_c > 0.0) {
      report["loss_bound"] = real(loss_bound(schedule, model.prior(), rule,
                                             j.value("affine_shift", 0.0)));
    }
  }
  return report.dump(2) + "\n";
}

std::string simulate_report(const std::string& scenario_json,
                            std::int64_t samples, std::uint64_t seed) {
  if (samples < 2) throw DomainError("--samples must be at least 2");
  const json j = parse_json(scenario_json, "scenario");
  require_keys(j, "scenario",
               {"model", "rule", "schedule", "slots", "c_grid", "mc_tau_c",
                "mechanisms"});
  const auto model = get_field<SignalModel>(j, "model", "scenario");
  const ScoringRule rule{parse_rule_kind(j.value("rule", "log"))};
  const auto schedule =
      j.contains("schedule")
          ? get_field<DiscountSchedule>(j, "schedule", "scenario")
          : DiscountSchedule::constant(1.0);
  const AbaSlots slots = j.contains("slots")
                             ? get_field<AbaSlots>(j, "slots", "scenario")
                             : AbaSlots{};
  const double mc_tau_c = j.value("mc_tau_c", 1e-4);
  if (!(mc_tau_c > 0.0)) throw DomainError("scenario: mc_tau_c must be > 0");
  model.require_nondegenerate();

  // tau_C = 0 cannot be sampled; Monte Carlo runs on a nearby prior.
  SignalModel mc_model = model;
  if (mc_model.tau_c == 0.0) mc_model.tau_c = mc_tau_c;

  const BestResponse br = best_response(model, rule, schedule, {}, slots);
  std::vector<double> c_grid;
  if (j.contains("c_grid")) {
    c_grid = get_field<std::vector<double>>(j, "c_grid", "scenario");
  } else {
    const double sd = 1.0 / std::sqrt(model.tau_a);
    for (double f : {0.25, 0.5, 1.0, 2.0, 4.0}) c_grid.push_back(f * sd);
    if (br.c_star > 0.0) c_grid.push_back(br.c_star);
    std::sort(c_grid.begin(), c_grid.end());
    c_grid.erase(std::unique(c_grid.begin(), c_grid.end()), c_grid.end());
  }

  json curve = json::array();
  bool agreement = true;
  for (double c : c_grid) {
    const GainEstimate mc =
        deviation_gain(mc_model, rule, schedule, c, samples, seed, slots);
    const double analytic = analytic_gain(mc_model, rule, schedule, c, slots);
    const double band = 3.0 * mc.std_error;
    if (analytic <= 0.0 ? mc.mean > band : mc.mean < -band) agreement = false;
    curve.push_back({{"c", real(c)},
                     {"mc_mean", real(mc.mean)},
                     {"mc_std_error", real(mc.std_error)},
                     {"analytic", real(analytic)}});
  }

  json report;
  report["rule"] = std::string(to_string(rule.kind));
  report["model"] = model_json(model);
  report["mc_model"] = model_json(mc_model);
  report["samples"] = samples;
  report["seed"] = seed;
  report["verdict"] = verdict_json(classify(rule, model));
  report["discount_ratio"] = real(aba_discount_ratio(schedule, slots));
  try {
    report["k_min"] =
        real(rule.kind == RuleKind::logarithmic
                 ? required_ratio_log(model)
                 : required_ratio_numeric(rule, model));
  } catch (const NumericFailure&) {
    report["k_min"] = nullptr;
  }
  report["best_response"] = {{"c_star", real(br.c_star)},
                             {"gain", real(br.gain)},
                             {"hit_bound", br.hit_bound}};
  report["gain_curve"] = curve;
  report["agreement"] = agreement;

  if (j.value("mechanisms", true)) {
    const double c_dev = br.c_star > 0.0 ? br.c_star : c_grid.back();
    json mech = json::object();
    for (Mechanism m :
         {Mechanism::discounted_msr, Mechanism::group, Mechanism::single}) {
      AbaScenario lie{mc_model, rule, schedule, c_dev, slots};
      AbaScenario truth = lie;
      truth.deviation_c = 0.0;
      PairedMean alice;
      for (std::int64_t i = 0; i < samples; ++i) {
        const auto idx = static_cast<std::uint64_t>(i);
        alice.add(run_mechanism(m, lie, seed, idx).at("alice") -
                  run_mechanism(m, truth, seed, idx).at("alice"));
      }
      mech[std::string(to_string(m))] = {
          {"deviation_c", real(c_dev)},
          {"alice_gain", real(alice.mean)},
          {"std_error", real(alice.std_error())}};
    }
    report["mechanisms"] = mech;
  }
  return report.dump(2) + "\n";
}

std::string market_simulate_report(const std::string& config_json,
                                   std::int64_t sessions, std::uint64_t seed,
                                   const std::string& trade_log_path) {
  const json j = parse_json(config_json, "market config");
  require_keys(j, "market config",
               {"prior", "schedule", "bins", "span_sd", "affine_shift",
                "floor_density", "signal_precision"});
  MarketHeader header;
  header.prior = get_field<NormalBelief>(j, "prior", "market config");
  header.schedule =
      j.contains("schedule")
          ? get_field<DiscountSchedule>(j, "schedule", "market config")
          : DiscountSchedule::constant(1.0);
  header.grid = OutcomeGrid::around(header.prior, j.value("bins", 512),
                                    j.value("span_sd", 10.0));
  header.affine_shift = j.value("affine_shift", 0.0);
  header.floor_density = j.value("floor_density", 1e-300);
  header.validate();
  const double signal_precision = j.value("signal_precision", 1.0);

  const SessionStats stats =
      simulate_truthful_sessions(header, signal_precision, sessions, seed);
  if (!trade_log_path.empty()) {
    const TruthfulSession s =
        run_truthful_session(header, signal_precision, seed, 0);
    std::ostringstream log;
    write_trade_log(log, header, s.market.records(), s.outcome);
    emit(log.str(), trade_log_path, std::cout);
  }
  json report = {{"sessions", stats.sessions},
                 {"seed", seed},
                 {"mean_loss", real(stats.mean_loss)},
                 {"std_error", real(stats.std_error)},
                 {"loss_bound", real(stats.loss_bound)},
                 {"within_bound", stats.mean_loss <= stats.loss_bound}};
  return report.dump(2) + "\n";
}

std::string market_replay_report(std::istream& log) {
  return report_to_json(replay(log)) + "\n";
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Strategy-proof prediction mechanisms: classification, "
               "discounting, simulation and a discounted LMSR market."};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string grid_spec;
  std::string rule_name;
  std::int64_t samples = 100000;
  std::uint64_t seed = 1;
  std::string trade_log;
  std::string log_path;

  auto* classify_cmd = app.add_subcommand("classify", "Sweep the verdicts");
  classify_cmd->add_option("--grid", grid_spec,
                           "rho=min:max:step;ratio=a,b;tau_c=x,y;rule=log");
  classify_cmd->add_option("--config", config_path, "Sweep config (JSON)");
  classify_cmd->add_option("--rule", rule_name, "log or quadratic");
  classify_cmd->add_option("--out", out_path, "CSV output path");

  auto* discount_cmd =
      app.add_subcommand("discount", "Minimal discount ratio for a model");
  discount_cmd->add_option("--config", config_path, "Model config (JSON)")
      ->required();
  discount_cmd->add_option("--out", out_path, "Report path");

  auto* simulate_cmd =
      app.add_subcommand("simulate", "Monte-Carlo Alice-Bob-Alice game");
  simulate_cmd->add_option("--config", config_path, "Scenario (JSON)")
      ->required();
  simulate_cmd->add_option("--samples", samples, "Rollouts per point");
  simulate_cmd->add_option("--seed", seed, "Random seed");
  simulate_cmd->add_option("--out", out_path, "Report path");

  auto* market_cmd = app.add_subcommand("market", "Discounted LMSR market");
  market_cmd->require_subcommand(1);
  auto* market_sim =
      market_cmd->add_subcommand("simulate", "Simulate truthful sessions");
  std::int64_t sessions = 10000;
  market_sim->add_option("--config", config_path, "Market config (JSON)")
      ->required();
  market_sim->add_option("--samples", sessions, "Number of sessions");
  market_sim->add_option("--seed", seed, "Random seed");
  market_sim->add_option("--out", out_path, "Report path");
  market_sim->add_option("--trade-log", trade_log,
                         "Write the first session's trade log here");
  auto* market_replay =
      market_cmd->add_subcommand("replay", "Replay and settle a trade log");
  market_replay->add_option("log", log_path, "Trade log (JSONL)")->required();
  market_replay->add_option("--out", out_path, "Report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*classify_cmd) {
      SweepConfig config = config_path.empty()
                               ? parse_grid_spec(grid_spec)
                               : parse_sweep_json(read_file(config_path));
      if (!config_path.empty() && !grid_spec.empty()) {
        throw DomainError("--grid and --config are exclusive");
      }
      if (!rule_name.empty()) config.rule = parse_rule_kind(rule_name);
      emit(classify_csv(config), out_path, out);
    } else if (*discount_cmd) {
      emit(discount_report(read_file(config_path)), out_path, out);
    } else if (*simulate_cmd) {
      emit(simulate_report(read_file(config_path), samples, seed), out_path,
           out);
    } else if (*market_sim) {
      emit(market_simulate_report(read_file(config_path), sessions, seed,
                                  trade_log),
           out_path, out);
    } else if (*market_replay) {
      std::ifstream in(log_path, std::ios::binary);
      if (!in) throw DomainError("cannot read '" + log_path + "'");
      emit(market_replay_report(in), out_path, out);
    }
  } catch (const ConsistencyError& e) {
    err << "consistency error: " << e.what() << '\n';
    return kExitConsistency;
  } catch (const NumericFailure& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}

}  // namespace truthmark
