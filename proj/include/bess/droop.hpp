#pragma once

#include <filesystem>
#include <vector>

#include "bess/config.hpp"
#include "bess/market.hpp"
#include "bess/scenario.hpp"

namespace bess {

/// Piecewise-linear droop characteristic through (f1, +p_max), (f2, 0),
/// (f3, 0), (f4, -p_max). Frequencies in Hz, power in MW.
struct DroopCurve {
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
  double f4 = 0.0;
  double p_max = 0.0;
  /// Only the under-frequency (discharge) side is procured.
  bool upward_only = false;

  void validate() const;

  static DroopCurve fcr_n(double p_max) { return {49.9, 50.0, 50.0, 50.1, p_max, false}; }
  static DroopCurve fcr_d(double p_max) { return {49.5, 49.9, 50.1, 50.5, p_max, true}; }
};

/// What happens outside the outer breakpoints. The curve anchors
/// (f1, p_max) and (f4, -p_max) imply full activation; StrictZero
/// reproduces the literal "0 for f < f1" case split instead.
enum class OutOfBandRule { FullActivation, StrictZero };

/// Energy owed during one step, MWh. At most one side is nonzero.
struct StepEnergy {
  double discharge = 0.0;
  double charge = 0.0;
};

StepEnergy fcr_requirement(double f, const DroopCurve& curve, int step_minutes,
                           OutOfBandRule rule = OutOfBandRule::FullActivation);

/// Spot bids deliver e_spot evenly over the hour.
StepEnergy spot_requirement(Market market, double e_spot, int step_minutes);

/// Per scenario, step and market charge/discharge obligations over the
/// planning horizon. Steps are 0-based.
class EnergyRequirement {
 public:
  EnergyRequirement(int scenarios, int steps, int step_minutes);

  int scenarios() const { return scenarios_; }
  int steps() const { return steps_; }
  int step_minutes() const { return step_minutes_; }

  double discharge(int s, int t, Market m) const { return discharge_[offset(s, t, m)]; }
  double charge(int s, int t, Market m) const { return charge_[offset(s, t, m)]; }
  void set(int s, int t, Market m, StepEnergy e);

  /// Sum of discharge + charge obligations of market m over hour h (0-based).
  double hourly_throughput(int s, int h, Market m) const;

 private:
  std::size_t offset(int s, int t, Market m) const {
    return (static_cast<std::size_t>(s) * steps_ + t) * kMarketCount + index(m);
  }

  int scenarios_;
  int steps_;
  int step_minutes_;
  std::vector<double> discharge_;
  std::vector<double> charge_;
};

EnergyRequirement build_requirements(const ScenarioSet& scenarios, const BessConfig& config,
                                     OutOfBandRule rule = OutOfBandRule::FullActivation);

/// `scenario_id,minute,market,e_dch_mwh,e_ch_mwh`
void write_requirements_csv(const EnergyRequirement& req, const ScenarioSet& scenarios,
                            const std::filesystem::path& path);

}  // namespace bess
