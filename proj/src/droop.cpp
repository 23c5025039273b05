#include "bess/droop.hpp"

#include <cmath>
#include <string>

#include "bess/errors.hpp"
#include "csv.hpp"

namespace bess {

void DroopCurve::validate() const {
  if (!(f1 <= f2 && f2 <= f3 && f3 <= f4)) {
    throw ValidationError("droop curve breakpoints must be ordered f1 <= f2 <= f3 <= f4");
  }
  if (!(p_max > 0.0) || !std::isfinite(p_max)) throw ValidationError("droop curve needs p_max > 0");
}

StepEnergy fcr_requirement(double f, const DroopCurve& curve, int step_minutes, OutOfBandRule rule) {
  const double hours = step_minutes / 60.0;
  const double full = rule == OutOfBandRule::FullActivation ? curve.p_max : 0.0;

  double up = 0.0;
  if (f < curve.f1) {
    up = full;
  } else if (f <= curve.f2) {
    // A zero-width ramp acts as a step.
    up = curve.f2 > curve.f1 ? curve.p_max * (curve.f2 - f) / (curve.f2 - curve.f1) : curve.p_max;
  }

  double down = 0.0;
  if (!curve.upward_only && up == 0.0) {
    if (f > curve.f4) {
      down = full;
    } else if (f >= curve.f3) {
      down = curve.f4 > curve.f3 ? curve.p_max * (f - curve.f3) / (curve.f4 - curve.f3) : curve.p_max;
    }
  }
  return {up * hours, down * hours};
}

StepEnergy spot_requirement(Market market, double e_spot, int step_minutes) {
  const double per_step = e_spot * step_minutes / 60.0;
  switch (market) {
    case Market::SpotDischarge:
      return {per_step, 0.0};
    case Market::SpotCharge:
      return {0.0, per_step};
    default:
      throw ValidationError("spot_requirement called for a frequency market");
  }
}

EnergyRequirement::EnergyRequirement(int scenarios, int steps, int step_minutes)
    : scenarios_(scenarios),
      steps_(steps),
      step_minutes_(step_minutes),
      discharge_(static_cast<std::size_t>(scenarios) * steps * kMarketCount, 0.0),
      charge_(discharge_.size(), 0.0) {}

void EnergyRequirement::set(int s, int t, Market m, StepEnergy e) {
  discharge_[offset(s, t, m)] = e.discharge;
  charge_[offset(s, t, m)] = e.charge;
}

double EnergyRequirement::hourly_throughput(int s, int h, Market m) const {
  const int per_hour = 60 / step_minutes_;
  double total = 0.0;
  for (int t = h * per_hour; t < (h + 1) * per_hour; ++t) total += discharge(s, t, m) + charge(s, t, m);
  return total;
}

EnergyRequirement build_requirements(const ScenarioSet& scenarios, const BessConfig& config,
                                     OutOfBandRule rule) {
  config.validate();
  if (config.step_minutes != scenarios.step_minutes()) {
    throw ValidationError("config step_minutes " + std::to_string(config.step_minutes) +
                          " does not match the scenario resolution " +
                          std::to_string(scenarios.step_minutes()));
  }
  const DroopCurve fcr_n = DroopCurve::fcr_n(config.p_max);
  const DroopCurve fcr_d = DroopCurve::fcr_d(config.p_max);
  const int step = scenarios.step_minutes();
  const StepEnergy sell = spot_requirement(Market::SpotDischarge, config.e_spot, step);
  const StepEnergy buy = spot_requirement(Market::SpotCharge, config.e_spot, step);

  EnergyRequirement req(static_cast<int>(scenarios.size()), scenarios.steps(), step);
  for (int s = 0; s < req.scenarios(); ++s) {
    const auto& samples = scenarios[s].frequency.samples;
    for (int t = 0; t < req.steps(); ++t) {
      req.set(s, t, Market::FcrN, fcr_requirement(samples[t], fcr_n, step, rule));
      req.set(s, t, Market::FcrD, fcr_requirement(samples[t], fcr_d, step, rule));
      req.set(s, t, Market::SpotDischarge, sell);
      req.set(s, t, Market::SpotCharge, buy);
    }
  }
  return req;
}

void write_requirements_csv(const EnergyRequirement& req, const ScenarioSet& scenarios,
                            const std::filesystem::path& path) {
  auto out = csv::open_out(path.string());
  out << "scenario_id,minute,market,e_dch_mwh,e_ch_mwh\n";
  for (int s = 0; s < req.scenarios(); ++s) {
    for (int t = 0; t < req.steps(); ++t) {
      for (Market m : kAllMarkets) {
        out << scenarios[s].id << ',' << 1 + t * req.step_minutes() << ',' << market_code(m) << ','
            << csv::format_double(req.discharge(s, t, m)) << ',' << csv::format_double(req.charge(s, t, m))
            << '\n';
      }
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace bess
