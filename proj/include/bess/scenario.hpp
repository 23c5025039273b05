#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bess/market.hpp"

namespace bess {

inline constexpr int kMinutesPerDay = 1440;
inline constexpr int kHoursPerDay = 24;

/// Sanity band for recorded grid frequency, Hz.
inline constexpr double kFrequencyFloorHz = 47.0;
inline constexpr double kFrequencyCeilingHz = 53.0;

/// One day of grid frequency, one sample per step. The same trace drives
/// every market's droop curve.
struct FrequencyTrace {
  std::string scenario_id;
  std::vector<double> samples;
  int step_minutes = 1;

  int steps() const { return static_cast<int>(samples.size()); }
  void validate() const;
};

/// Hourly prices of one scenario. Thresholds are EUR/MW for the frequency
/// markets and EUR/MWh for spot; balancing prices are EUR/MWh.
struct PriceSet {
  std::array<std::array<double, kMarketCount>, kHoursPerDay> threshold{};
  std::array<double, kHoursPerDay> balancing_up{};
  std::array<double, kHoursPerDay> balancing_down{};

  /// `hour` is 0-based.
  double threshold_price(int hour, Market m) const { return threshold.at(hour)[index(m)]; }
  void validate(const std::string& scenario_id) const;
};

struct Scenario {
  std::string id;
  double probability = 1.0;
  FrequencyTrace frequency;
  PriceSet prices;
};

/// Immutable, validated collection of equally-resolved scenarios.
class ScenarioSet {
 public:
  explicit ScenarioSet(std::vector<Scenario> scenarios, int horizon_hours = kHoursPerDay);

  std::span<const Scenario> scenarios() const { return scenarios_; }
  const Scenario& operator[](std::size_t s) const { return scenarios_.at(s); }
  std::size_t size() const { return scenarios_.size(); }

  int horizon_hours() const { return horizon_hours_; }
  int step_minutes() const { return step_minutes_; }
  int steps_per_hour() const { return 60 / step_minutes_; }
  /// Number of dispatch steps inside the planning horizon.
  int steps() const { return horizon_hours_ * steps_per_hour(); }

  /// Same scenarios, planning only the first `hours` hours of each day.
  ScenarioSet with_horizon(int hours) const;
  /// Block means of the frequency trace at a coarser step that is a
  /// multiple of the current one. Prices are hourly and unchanged.
  ScenarioSet coarsened(int step_minutes) const;

 private:
  std::vector<Scenario> scenarios_;
  int horizon_hours_;
  int step_minutes_;
};

/// Hour containing step `t` (both 1-based).
int hour_of(int t, int step_minutes);

/// 0-based hour of the 0-based step `t`.
inline int hour_index(int t, int step_minutes) { return t * step_minutes / 60; }

ScenarioSet load_scenarios(const std::filesystem::path& frequency_csv,
                           const std::filesystem::path& prices_csv,
                           const std::optional<std::filesystem::path>& probability_csv = std::nullopt);

/// Writes the three CSV files. Values round-trip bit-exactly through
/// load_scenarios.
void save_scenarios(const ScenarioSet& set, const std::filesystem::path& frequency_csv,
                    const std::filesystem::path& prices_csv,
                    const std::filesystem::path& probability_csv);

struct PriceShape {
  double base = 0.0;
  /// Relative swing of the two daily peaks around `base`.
  double amplitude = 0.0;
  /// Standard deviation of the additive hourly noise.
  double noise = 0.0;
};

struct SynthesisParams {
  int step_minutes = 1;
  /// Ornstein-Uhlenbeck pull towards 50 Hz, per minute.
  double mean_reversion = 0.05;
  /// Diffusion of the frequency process, Hz per sqrt(minute).
  double noise_scale = 0.01;
  double clip_low_hz = 49.0;
  double clip_high_hz = 50.5;

  PriceShape fcr_n{28.0, 0.35, 4.0};
  PriceShape fcr_d{14.0, 0.30, 2.0};
  PriceShape spot{65.0, 0.45, 8.0};
  /// Up/down regulation prices relative to the spot price.
  double balancing_up_factor = 1.25;
  double balancing_down_factor = 0.75;
  double balancing_noise = 5.0;

  void validate() const;
};

/// Deterministic synthetic week: frequency follows a mean-reverting walk
/// around 50 Hz, prices follow day-shaped curves plus noise. Each day gets
/// probability 1/days.
ScenarioSet synthesize_scenarios(std::uint64_t seed, int days, const SynthesisParams& params = {});

}  // namespace bess
