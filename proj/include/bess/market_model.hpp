#pragma once

#include <vector>

#include "bess/config.hpp"
#include "bess/droop.hpp"
#include "bess/scenario.hpp"

namespace bess {

/// Wear cost of honouring an accepted bid: c_deg times the energy the
/// market asks the battery to cycle in each step.
class DegradationSchedule {
 public:
  DegradationSchedule(int scenarios, int steps, int step_minutes);

  int scenarios() const { return scenarios_; }
  int steps() const { return steps_; }

  /// EUR charged in step t (0-based) if market m's bid of that hour is accepted.
  double step_cost(int s, int t, Market m) const { return cost_[offset(s, t, m)]; }
  /// Sum of step costs over hour h (0-based).
  double hourly_cost(int s, int h, Market m) const;

  void set(int s, int t, Market m, double eur) { cost_[offset(s, t, m)] = eur; }

 private:
  std::size_t offset(int s, int t, Market m) const {
    return (static_cast<std::size_t>(s) * steps_ + t) * kMarketCount + index(m);
  }

  int scenarios_;
  int steps_;
  int step_minutes_;
  std::vector<double> cost_;
};

DegradationSchedule degradation_costs(const EnergyRequirement& req, const BessConfig& config);

/// Big-M constants, one per constraint family.
struct BigM {
  double avail = 0.0;   ///< availability payment, P_max * Bid_max
  double spot = 0.0;    ///< spot payment, E_spot * largest spot threshold
  double pen_up = 0.0;  ///< discharge penalty, E_spot * largest C_up
  double pen_dn = 0.0;  ///< charge penalty, E_spot * largest C_down
  double price = 0.0;   ///< bid price vs threshold comparisons
  double slack = 0.0;   ///< hourly undelivered energy
};

BigM tight_big_m(const BessConfig& config, const ScenarioSet& scenarios, const EnergyRequirement& req);

}  // namespace bess
