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

#ifndef TRUTHMARK_SERIALIZATION_HPP_
#define TRUTHMARK_SERIALIZATION_HPP_

// nlohmann::json adapters for the domain types. Readers reject unknown keys
// so that typos in config files surface as errors.

#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"
#include "truthmark/amm.hpp"
#include "truthmark/beliefs.hpp"
#include "truthmark/discounting.hpp"
#include "truthmark/errors.hpp"
#include "truthmark/game.hpp"
#include "truthmark/scoring.hpp"

namespace truthmark {

inline void require_keys(const nlohmann::json& j, std::string_view what,
                         std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) {
    throw DomainError(std::string(what) + ": expected an object");
  }
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) {
      throw DomainError(std::string(what) + ": unknown field '" + key + "'");
    }
  }
}

}  // namespace truthmark

namespace nlohmann {

// NormalBelief has no default state, so it needs the non-default form.
template <>
struct adl_serializer<truthmark::NormalBelief> {
  static truthmark::NormalBelief from_json(const json& j) {
    truthmark::require_keys(j, "belief", {"mean", "precision"});
    return {j.at("mean").get<double>(), j.at("precision").get<double>()};
  }
  static void to_json(json& j, const truthmark::NormalBelief& b) {
    j = {{"mean", b.mean()}, {"precision", b.precision()}};
  }
};

}  // namespace nlohmann

namespace truthmark {

template <typename T>
T field_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline void to_json(nlohmann::json& j, const SignalModel& m) {
  j = {{"tau_a", m.tau_a}, {"tau_b", m.tau_b}, {"tau_c", m.tau_c},
       {"rho", m.rho},     {"c0", m.c0}};
}

inline void from_json(const nlohmann::json& j, SignalModel& m) {
  require_keys(j, "model", {"tau_a", "tau_b", "tau_c", "rho", "c0"});
  SignalModel d;
  m.tau_a = field_or(j, "tau_a", d.tau_a);
  m.tau_b = field_or(j, "tau_b", d.tau_b);
  m.tau_c = field_or(j, "tau_c", d.tau_c);
  m.rho = field_or(j, "rho", d.rho);
  m.c0 = field_or(j, "c0", d.c0);
  m.validate();
}

inline void to_json(nlohmann::json& j, const DiscountSchedule& s) {
  nlohmann::json resets = nlohmann::json::array();
  for (const auto& r : s.resets) {
    resets.push_back({{"counter", r.counter}, {"k", r.k}});
  }
  j = {{"kind", std::string(to_string(s.kind))},
       {"k0", s.k0},
       {"decay", s.decay},
       {"resets", resets}};
}

inline void from_json(const nlohmann::json& j, DiscountSchedule& s) {
  require_keys(j, "schedule", {"kind", "k0", "decay", "resets"});
  s.kind = parse_schedule_kind(j.at("kind").get<std::string>());
  s.k0 = field_or(j, "k0", 1.0);
  s.decay = field_or(j, "decay", 1.0);
  s.resets.clear();
  if (j.contains("resets")) {
    for (const auto& r : j.at("resets")) {
      require_keys(r, "reset", {"counter", "k"});
      s.resets.push_back(
          {r.at("counter").get<std::int64_t>(), r.at("k").get<double>()});
    }
  }
  s.validate();
}

inline void to_json(nlohmann::json& j, const OutcomeGrid& g) {
  j = {{"left", g.left}, {"width", g.width}, {"bins", g.bins}};
}

inline void from_json(const nlohmann::json& j, OutcomeGrid& g) {
  require_keys(j, "grid", {"left", "width", "bins"});
  g.left = j.at("left").get<double>();
  g.width = j.at("width").get<double>();
  g.bins = j.at("bins").get<std::size_t>();
  g.validate();
}

inline void to_json(nlohmann::json& j, const MarketHeader& h) {
  j = {{"grid", h.grid},
       {"schedule", h.schedule},
       {"prior", h.prior},
       {"affine_shift", h.affine_shift},
       {"floor_density", h.floor_density}};
}

inline void from_json(const nlohmann::json& j, MarketHeader& h) {
  require_keys(j, "market header",
               {"type", "grid", "schedule", "prior", "affine_shift",
                "floor_density"});
  h.prior = j.at("prior").get<NormalBelief>();
  h.schedule = j.at("schedule").get<DiscountSchedule>();
  h.grid = j.contains("grid") ? j.at("grid").get<OutcomeGrid>()
                              : OutcomeGrid::around(h.prior);
  h.affine_shift = field_or(j, "affine_shift", 0.0);
  h.floor_density = field_or(j, "floor_density", 1e-300);
  h.validate();
}

inline void to_json(nlohmann::json& j, const AbaSlots& s) {
  j = {{"alice_first", s.alice_first},
       {"bob", s.bob},
       {"alice_second", s.alice_second}};
}

inline void from_json(const nlohmann::json& j, AbaSlots& s) {
  require_keys(j, "slots", {"alice_first", "bob", "alice_second"});
  AbaSlots d;
  s.alice_first = field_or(j, "alice_first", d.alice_first);
  s.bob = field_or(j, "bob", d.bob);
  s.alice_second = field_or(j, "alice_second", d.alice_second);
  s.validate();
}

}  // namespace truthmark

#endif  // TRUTHMARK_SERIALIZATION_HPP_
