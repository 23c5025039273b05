#include "bess/config.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bess/errors.hpp"
#include "bess/scenario.hpp"

namespace bess {

void BessConfig::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!(p_max > 0.0) || !finite(p_max)) throw ValidationError("config: p_max must be > 0");
  if (!(e_spot > 0.0) || !finite(e_spot)) throw ValidationError("config: e_spot must be > 0");
  if (!(0.0 <= e_min && e_min <= m_0 && m_0 <= e_max) || !finite(e_max)) {
    throw ValidationError("config: need 0 <= e_min <= m_0 <= e_max");
  }
  if (!(bid_min >= 0.0) || !finite(bid_min)) throw ValidationError("config: bid_min must be >= 0");
  if (bid_max && (!(*bid_max >= bid_min) || !finite(*bid_max))) {
    throw ValidationError("config: bid_max must be >= bid_min");
  }
  if (!(c_deg >= 0.0) || !finite(c_deg)) throw ValidationError("config: c_deg must be >= 0");
  if (step_minutes <= 0 || 60 % step_minutes != 0) {
    throw ValidationError("config: step_minutes must divide 60");
  }
}

double resolved_bid_max(const BessConfig& config, const ScenarioSet& scenarios) {
  if (config.bid_max) return *config.bid_max;
  double largest = 0.0;
  for (const Scenario& sc : scenarios.scenarios()) {
    for (const auto& hour : sc.prices.threshold) {
      for (double p : hour) largest = std::max(largest, p);
    }
  }
  return std::max(config.bid_min, 2.0 * largest);
}

BessConfig config_from_json(const nlohmann::json& j, BessConfig base) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  auto read = [&](const char* key, double& field) {
    if (auto it = j.find(key); it != j.end()) {
      if (!it->is_number()) throw ValidationError(std::string("config: '") + key + "' must be a number");
      field = it->get<double>();
    }
  };
  read("p_max", base.p_max);
  read("e_spot", base.e_spot);
  read("e_min", base.e_min);
  read("e_max", base.e_max);
  read("m_0", base.m_0);
  read("bid_min", base.bid_min);
  read("c_deg", base.c_deg);
  if (auto it = j.find("bid_max"); it != j.end()) {
    if (it->is_null()) {
      base.bid_max.reset();
    } else if (it->is_number()) {
      base.bid_max = it->get<double>();
    } else {
      throw ValidationError("config: 'bid_max' must be a number or null");
    }
  }
  if (auto it = j.find("step_minutes"); it != j.end()) {
    if (!it->is_number_integer()) throw ValidationError("config: 'step_minutes' must be an integer");
    base.step_minutes = it->get<int>();
  }
  for (const auto& [key, value] : j.items()) {
    static constexpr const char* kKnown[] = {"p_max",   "e_spot",  "e_min", "e_max",       "m_0",
                                             "bid_min", "bid_max", "c_deg", "step_minutes"};
    if (std::none_of(std::begin(kKnown), std::end(kKnown), [&](const char* k) { return key == k; })) {
      throw ValidationError("config: unknown key '" + key + "'");
    }
  }
  return base;
}

nlohmann::json to_json(const BessConfig& config) {
  nlohmann::json j{{"p_max", config.p_max},
                   {"e_spot", config.e_spot},
                   {"e_min", config.e_min},
                   {"e_max", config.e_max},
                   {"m_0", config.m_0},
                   {"bid_min", config.bid_min},
                   {"c_deg", config.c_deg},
                   {"step_minutes", config.step_minutes}};
  j["bid_max"] = config.bid_max ? nlohmann::json(*config.bid_max) : nlohmann::json(nullptr);
  return j;
}

}  // namespace bess
