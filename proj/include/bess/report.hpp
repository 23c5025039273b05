#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "bess/config.hpp"
#include "bess/droop.hpp"
#include "bess/formulation.hpp"
#include "bess/scenario.hpp"
#include "bess/solver.hpp"

namespace bess {

/// EUR amounts of one scenario-hour. Costs and penalties are positive numbers.
struct HourSettlement {
  double availability_won = 0.0;
  double availability_lost = 0.0;
  double spot_dch_won = 0.0;
  double spot_dch_penalty = 0.0;
  double spot_ch_cost = 0.0;
  double spot_ch_penalty = 0.0;
  double energy_settlement = 0.0;
  double degradation_cost = 0.0;
  double soc_target_penalty = 0.0;

  double total() const;
  HourSettlement& operator+=(const HourSettlement& o);
};

struct DispatchStep {
  int minute = 0;
  double charge = 0.0;     ///< MWh
  double discharge = 0.0;  ///< MWh
  double soc = 0.0;        ///< MWh after the step
};

struct SettlementReport {
  std::vector<std::string> scenario_ids;
  std::vector<double> probabilities;
  std::vector<std::vector<HourSettlement>> hours;  ///< [s][h]
  /// [s][m], percent of planning hours
  std::vector<std::array<double, kMarketCount>> pct_hours_bid;
  std::vector<std::array<double, kMarketCount>> pct_hours_accepted;
  std::vector<std::vector<DispatchStep>> dispatch;  ///< [s][t]
  std::vector<HourSettlement> scenario_totals;
  HourSettlement expected;  ///< probability-weighted

  double expected_total() const { return expected.total(); }
  /// 100 minus the bid shares of scenario s.
  double pct_idle(std::size_t s) const;
};

/// Recomputes every cash flow from prices, decisions and obligations, and
/// throws ConsistencyError when one differs from the matching solver
/// variable by more than `tol`.
SettlementReport settle(const Solution& solution, const MilpModel& model, const ScenarioSet& scenarios,
                        const EnergyRequirement& req, const BessConfig& config, double tol = 1e-6);

/// participation.csv, earnings.csv, dispatch.csv and summary.json.
void emit(const SettlementReport& report, const std::filesystem::path& dir);

nlohmann::json report_json(const SettlementReport& report);

}  // namespace bess
