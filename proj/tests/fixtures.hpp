#pragma once

// Small instances shared by the unit and acceptance tests.

#include <cstdint>
#include <optional>
#include <random>

#include "bess/brute_force.hpp"
#include "bess/config.hpp"
#include "bess/droop.hpp"
#include "bess/formulation.hpp"
#include "bess/market_model.hpp"
#include "bess/scenario.hpp"

namespace fixtures {

struct Instance {
  bess::ScenarioSet scenarios;
  bess::BessConfig config;
  bess::EnergyRequirement req;
  bess::DegradationSchedule deg;
  bess::MilpModel model;

  Instance(bess::ScenarioSet sc, bess::BessConfig cfg, bess::FormulationOptions opt = {})
      : scenarios(std::move(sc)),
        config(cfg),
        req(bess::build_requirements(scenarios, config)),
        deg(bess::degradation_costs(req, config)),
        model(bess::build_model(scenarios, req, deg, config, opt)) {}

  bess::OracleSolution oracle(const bess::FormulationOptions& opt = {}) const {
    return bess::brute_force(scenarios, req, deg, config, opt);
  }
};

/// One scenario with a flat frequency and the given prices in every hour.
inline bess::Scenario flat_scenario(std::string id, double probability, double hz, int step_minutes,
                                    std::array<double, bess::kMarketCount> thresholds, double up,
                                    double down) {
  bess::Scenario s;
  s.id = std::move(id);
  s.probability = probability;
  s.frequency.scenario_id = s.id;
  s.frequency.step_minutes = step_minutes;
  s.frequency.samples.assign(bess::kMinutesPerDay / step_minutes, hz);
  for (int h = 0; h < bess::kHoursPerDay; ++h) {
    s.prices.threshold[h] = thresholds;
    s.prices.balancing_up[h] = up;
    s.prices.balancing_down[h] = down;
  }
  return s;
}

/// Random tiny instance: frequencies anywhere in [49.3, 50.4] Hz, prices
/// spread so that every market is sometimes attractive.
inline bess::ScenarioSet random_scenarios(std::uint64_t seed, int scenarios, int hours, int step_minutes) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> hz(49.3, 50.4);
  std::uniform_int_distribution<int> coarse(0, 8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<bess::Scenario> out;
  for (int s = 0; s < scenarios; ++s) {
    bess::Scenario sc;
    sc.id = "r" + std::to_string(s + 1);
    sc.probability = 1.0 / scenarios;
    sc.frequency.scenario_id = sc.id;
    sc.frequency.step_minutes = step_minutes;
    for (int t = 0; t < bess::kMinutesPerDay / step_minutes; ++t) {
      // a third of the steps sit exactly on 50 Hz
      sc.frequency.samples.push_back(u(rng) < 0.3 ? 50.0 : std::round(hz(rng) * 100.0) / 100.0);
    }
    for (int h = 0; h < bess::kHoursPerDay; ++h) {
      // integer-valued prices make exact ties between scenarios likely
      sc.prices.threshold[h] = {5.0 * coarse(rng), 2.5 * coarse(rng), 10.0 * coarse(rng), 10.0 * coarse(rng)};
      sc.prices.balancing_up[h] = 10.0 * coarse(rng) + 20.0;
      sc.prices.balancing_down[h] = 5.0 * coarse(rng);
    }
    out.push_back(std::move(sc));
  }
  if (scenarios > 1) {
    // unequal weights
    out[0].probability = 0.6;
    for (int s = 1; s < scenarios; ++s) out[s].probability = 0.4 / (scenarios - 1);
  }
  return bess::ScenarioSet(std::move(out), hours);
}

inline bess::BessConfig config_for(int step_minutes, double c_deg, std::uint64_t seed = 0) {
  bess::BessConfig c;
  c.step_minutes = step_minutes;
  c.c_deg = c_deg;
  if (seed % 3 == 1) {
    c.m_0 = 0.2;
    c.e_max = 0.6;
  } else if (seed % 3 == 2) {
    c.m_0 = 0.9;
  }
  return c;
}

}  // namespace fixtures
