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

#ifndef TRUTHMARK_CLI_HPP_
#define TRUTHMARK_CLI_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "truthmark/scoring.hpp"

namespace truthmark {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitConsistency = 4;

inline constexpr int kClassifySchemaVersion = 1;

struct SweepConfig {
  double rho_min = -0.95;
  double rho_max = 0.95;
  double rho_step = 0.05;
  std::vector<double> ratios = {0.25, 1.0, 4.0};  // tau_A / tau_B, tau_B = 1
  std::vector<double> tau_c = {0.0, 0.5, 2.0};
  RuleKind rule = RuleKind::logarithmic;

  void validate() const;
  // rho values rounded to 1e-12 so that decimal grid points are exact.
  std::vector<double> rho_values() const;
};

// "rho=-0.95:0.95:0.05;ratio=0.25,1,4;tau_c=0,0.5,2;rule=log". Keys may be
// omitted and keep their defaults.
SweepConfig parse_grid_spec(std::string_view spec);
SweepConfig parse_sweep_json(const std::string& text);

// CSV with a schema comment line, header, one row per grid point ordered by
// (rho, tau_A, tau_C).
std::string classify_csv(const SweepConfig& config);

// JSON reports. Inputs are JSON documents; see README for the fields.
std::string discount_report(const std::string& config_json);
std::string simulate_report(const std::string& scenario_json,
                            std::int64_t samples, std::uint64_t seed);
std::string market_simulate_report(const std::string& config_json,
                                   std::int64_t sessions, std::uint64_t seed,
                                   const std::string& trade_log_path);
std::string market_replay_report(std::istream& log);

// %.12g
std::string format_real(double x);

// Entry point of the truthmark binary. Returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace truthmark

#endif  // TRUTHMARK_CLI_HPP_
