#pragma once

#include <optional>

#include <json.hpp>

namespace bess {

class ScenarioSet;

/// Battery and bidding parameters. JSON keys mirror the member names.
struct BessConfig {
  double p_max = 0.9;   ///< MW offered in every frequency bid
  double e_spot = 0.4;  ///< MWh offered in every spot bid
  double e_min = 0.1;   ///< MWh
  double e_max = 1.0;   ///< MWh
  double m_0 = 0.5;     ///< MWh at the start of the day
  double bid_min = 0.0;
  /// Unset means twice the largest threshold price in the scenario set.
  std::optional<double> bid_max;
  double c_deg = 20.0;  ///< EUR per MWh of throughput
  int step_minutes = 1;

  void validate() const;
};

/// bid_max, or its data-driven default.
double resolved_bid_max(const BessConfig& config, const ScenarioSet& scenarios);

/// Reads every present key; absent keys keep the values already in `base`.
BessConfig config_from_json(const nlohmann::json& j, BessConfig base = {});
nlohmann::json to_json(const BessConfig& config);

}  // namespace bess
