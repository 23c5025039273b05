#pragma once

#include <vector>

#include "bess/config.hpp"
#include "bess/droop.hpp"
#include "bess/formulation.hpp"
#include "bess/market_model.hpp"
#include "bess/scenario.hpp"
#include "bess/solver.hpp"

namespace bess {

/// Size limits of the enumeration oracle.
struct OracleLimits {
  int max_hours = 4;
  int max_scenarios = 2;
  int min_step_minutes = 15;
};

/// Maximiser found by exhaustive enumeration. Market indices are positions
/// in kAllMarkets; -1 means idle / not accepted.
struct OracleSolution {
  double objective = 0.0;
  std::vector<int> bid;                     ///< [h]
  std::vector<double> price;                ///< [h]
  std::vector<std::vector<int>> accepted;   ///< [s][h]
  std::vector<std::vector<int>> fulfilled;  ///< [s][h] 0/1
  std::vector<std::vector<double>> discharge;  ///< [s][t * kMarketCount + m] MWh delivered
  std::vector<std::vector<double>> charge;     ///< [s][t * kMarketCount + m]
  long first_stage_evaluated = 0;

  /// Full variable vector of `model` realising this schedule, so the MILP
  /// rows can be checked against it.
  Solution to_solution(const MilpModel& model, const ScenarioSet& scenarios, const EnergyRequirement& req,
                       const BessConfig& config) const;
};

/// Bid prices worth trying in hour h (0-based) for market m: bid_min, every
/// scenario threshold inside [bid_min, bid_max], and bid_max when some
/// threshold lies above it. Sorted, without duplicates.
std::vector<double> candidate_prices(const ScenarioSet& scenarios, int hour, Market m, double bid_min,
                                     double bid_max);

/// Enumerates every bid pattern and candidate price, derives acceptance by
/// threshold comparison (both outcomes on exact ties), every fulfilment
/// pattern, and the best SOC-feasible dispatch by an exact piecewise-linear
/// dynamic program. Settlement is plain arithmetic. Throws OracleRefusal
/// above `limits` or for options it does not model.
OracleSolution brute_force(const ScenarioSet& scenarios, const EnergyRequirement& req,
                           const DegradationSchedule& deg, const BessConfig& config,
                           const FormulationOptions& options = {}, const OracleLimits& limits = {});

}  // namespace bess
