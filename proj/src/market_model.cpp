#include "bess/market_model.hpp"

#include <algorithm>

#include "bess/errors.hpp"

namespace bess {

DegradationSchedule::DegradationSchedule(int scenarios, int steps, int step_minutes)
    : scenarios_(scenarios),
      steps_(steps),
      step_minutes_(step_minutes),
      cost_(static_cast<std::size_t>(scenarios) * steps * kMarketCount, 0.0) {}

double DegradationSchedule::hourly_cost(int s, int h, Market m) const {
  const int per_hour = 60 / step_minutes_;
  double total = 0.0;
  for (int t = h * per_hour; t < (h + 1) * per_hour; ++t) total += step_cost(s, t, m);
  return total;
}

DegradationSchedule degradation_costs(const EnergyRequirement& req, const BessConfig& config) {
  DegradationSchedule schedule(req.scenarios(), req.steps(), req.step_minutes());
  for (int s = 0; s < req.scenarios(); ++s) {
    for (int t = 0; t < req.steps(); ++t) {
      for (Market m : kAllMarkets) {
        schedule.set(s, t, m, config.c_deg * (req.discharge(s, t, m) + req.charge(s, t, m)));
      }
    }
  }
  return schedule;
}

BigM tight_big_m(const BessConfig& config, const ScenarioSet& scenarios, const EnergyRequirement& req) {
  if (scenarios.size() == 0) throw ValidationError("big-M sizing needs at least one scenario");
  const double bid_max = resolved_bid_max(config, scenarios);
  const int hours = scenarios.horizon_hours();

  double max_threshold = 0.0;
  double max_spot = 0.0;
  double max_up = 0.0;
  double max_down = 0.0;
  for (const Scenario& sc : scenarios.scenarios()) {
    for (int h = 0; h < hours; ++h) {
      for (Market m : kAllMarkets) {
        const double p = sc.prices.threshold_price(h, m);
        max_threshold = std::max(max_threshold, p);
        if (is_spot(m)) max_spot = std::max(max_spot, p);
      }
      max_up = std::max(max_up, sc.prices.balancing_up[h]);
      max_down = std::max(max_down, sc.prices.balancing_down[h]);
    }
  }

  // At most one market is accepted per hour, so the hourly shortfall is
  // bounded by the largest single-market hourly obligation.
  double max_hourly = 0.0;
  for (int s = 0; s < req.scenarios(); ++s) {
    for (int h = 0; h < hours; ++h) {
      for (Market m : kAllMarkets) max_hourly = std::max(max_hourly, req.hourly_throughput(s, h, m));
    }
  }

  BigM m;
  m.avail = config.p_max * bid_max;
  m.spot = config.e_spot * max_spot;
  m.pen_up = config.e_spot * max_up;
  m.pen_dn = config.e_spot * max_down;
  m.price = bid_max + max_threshold;
  m.slack = max_hourly;
  return m;
}

}  // namespace bess
