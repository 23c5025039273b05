#include "bess/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "bess/errors.hpp"
#include "csv.hpp"

namespace bess {

namespace {

constexpr std::string_view kFrequencyHeader = "scenario_id,minute,freq_hz";
constexpr std::string_view kPricesHeader =
    "scenario_id,hour,market,threshold_price,balancing_up,balancing_down";
constexpr std::string_view kProbabilityHeader = "scenario_id,probability";

constexpr double kProbabilityTolerance = 1e-9;

}  // namespace

void FrequencyTrace::validate() const {
  if (step_minutes <= 0 || kMinutesPerDay % step_minutes != 0 || 60 % step_minutes != 0) {
    throw ValidationError("scenario '" + scenario_id + "': step_minutes " +
                          std::to_string(step_minutes) + " must divide 60");
  }
  if (static_cast<long>(samples.size()) * step_minutes != kMinutesPerDay) {
    throw ValidationError("scenario '" + scenario_id + "': incomplete day (" +
                          std::to_string(samples.size()) + " samples at " +
                          std::to_string(step_minutes) + " min)");
  }
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double f = samples[k];
    if (!std::isfinite(f) || f < kFrequencyFloorHz || f > kFrequencyCeilingHz) {
      throw ValidationError("scenario '" + scenario_id + "': freq_hz at step " +
                            std::to_string(k + 1) + " outside [47, 53] Hz");
    }
  }
}

void PriceSet::validate(const std::string& scenario_id) const {
  for (int h = 0; h < kHoursPerDay; ++h) {
    for (Market m : kAllMarkets) {
      const double p = threshold[h][index(m)];
      if (!std::isfinite(p)) {
        throw ValidationError("scenario '" + scenario_id + "': threshold_price not finite at hour " +
                              std::to_string(h + 1) + " " + std::string(market_code(m)));
      }
      if (p < 0.0) {
        throw ValidationError("scenario '" + scenario_id + "': negative threshold_price at hour " +
                              std::to_string(h + 1) + " " + std::string(market_code(m)));
      }
    }
    if (!std::isfinite(balancing_up[h]) || balancing_up[h] < 0.0) {
      throw ValidationError("scenario '" + scenario_id + "': balancing_up must be finite and >= 0 at hour " +
                            std::to_string(h + 1));
    }
    if (!std::isfinite(balancing_down[h]) || balancing_down[h] < 0.0) {
      throw ValidationError("scenario '" + scenario_id +
                            "': balancing_down must be finite and >= 0 at hour " + std::to_string(h + 1));
    }
  }
}

ScenarioSet::ScenarioSet(std::vector<Scenario> scenarios, int horizon_hours)
    : scenarios_(std::move(scenarios)), horizon_hours_(horizon_hours), step_minutes_(1) {
  if (scenarios_.empty()) throw ValidationError("scenario set is empty");
  if (horizon_hours_ < 1 || horizon_hours_ > kHoursPerDay) {
    throw ValidationError("horizon must be within 1..24 hours");
  }
  step_minutes_ = scenarios_.front().frequency.step_minutes;
  std::set<std::string> ids;
  double total = 0.0;
  for (const Scenario& s : scenarios_) {
    if (!ids.insert(s.id).second) throw ValidationError("duplicate scenario id '" + s.id + "'");
    if (s.frequency.scenario_id != s.id) {
      throw ValidationError("scenario '" + s.id + "': frequency trace belongs to '" +
                            s.frequency.scenario_id + "'");
    }
    s.frequency.validate();
    if (s.frequency.step_minutes != step_minutes_) {
      throw ValidationError("scenario '" + s.id + "': step_minutes differs from the rest of the set");
    }
    s.prices.validate(s.id);
    if (!(s.probability > 0.0 && s.probability <= 1.0)) {
      throw ValidationError("scenario '" + s.id + "': probability must lie in (0, 1]");
    }
    total += s.probability;
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    throw ValidationError("scenario probabilities sum to " + csv::format_double(total) + ", not 1");
  }
}

ScenarioSet ScenarioSet::with_horizon(int hours) const {
  return ScenarioSet(scenarios_, hours);
}

ScenarioSet ScenarioSet::coarsened(int step_minutes) const {
  if (step_minutes <= 0 || 60 % step_minutes != 0 || step_minutes % step_minutes_ != 0) {
    throw ValidationError("cannot resample " + std::to_string(step_minutes_) + "-minute data to " +
                          std::to_string(step_minutes) + " minutes");
  }
  const int k = step_minutes / step_minutes_;
  std::vector<Scenario> out = scenarios_;
  for (Scenario& sc : out) {
    std::vector<double> merged;
    merged.reserve(sc.frequency.samples.size() / k);
    for (std::size_t i = 0; i < sc.frequency.samples.size(); i += k) {
      double sum = 0.0;
      for (int j = 0; j < k; ++j) sum += sc.frequency.samples[i + j];
      merged.push_back(sum / k);
    }
    sc.frequency.samples = std::move(merged);
    sc.frequency.step_minutes = step_minutes;
  }
  return ScenarioSet(std::move(out), horizon_hours_);
}

int hour_of(int t, int step_minutes) {
  if (step_minutes <= 0 || kMinutesPerDay % step_minutes != 0) {
    throw RangeError("step_minutes must divide 1440");
  }
  const int last = kMinutesPerDay / step_minutes;
  if (t < 1 || t > last) {
    throw RangeError("step " + std::to_string(t) + " outside 1.." + std::to_string(last));
  }
  return (t - 1) * step_minutes / 60 + 1;
}

ScenarioSet load_scenarios(const std::filesystem::path& frequency_csv,
                           const std::filesystem::path& prices_csv,
                           const std::optional<std::filesystem::path>& probability_csv) {
  // Frequency traces, in order of first appearance.
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::pair<long, double>>> rows;
  {
    const std::string file = frequency_csv.string();
    const auto lines = csv::read_lines(file);
    csv::expect_header(lines, kFrequencyHeader, file);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const long ln = static_cast<long>(i) + 1;
      if (lines[i].empty()) continue;
      const auto cells = csv::split(lines[i]);
      if (cells.size() != 3) throw ParseError(file, ln, "expected 3 columns");
      std::string id(cells[0]);
      if (id.empty()) throw ParseError(file, ln, "empty scenario_id");
      const long minute = csv::parse_int(cells[1], file, ln);
      if (minute < 1 || minute > kMinutesPerDay) throw ParseError(file, ln, "minute outside 1..1440");
      const double f = csv::parse_double(cells[2], file, ln);
      auto [it, fresh] = rows.try_emplace(id);
      if (fresh) order.push_back(id);
      it->second.emplace_back(minute, f);
    }
  }
  if (order.empty()) throw ValidationError(frequency_csv.string() + ": no frequency rows");

  std::vector<Scenario> scenarios;
  scenarios.reserve(order.size());
  for (const std::string& id : order) {
    auto& samples = rows[id];
    std::sort(samples.begin(), samples.end());
    Scenario sc;
    sc.id = id;
    sc.frequency.scenario_id = id;
    const long step = samples.size() > 1 ? samples[1].first - samples[0].first : kMinutesPerDay;
    bool complete = step > 0 && static_cast<long>(samples.size()) * step == kMinutesPerDay;
    for (std::size_t k = 0; complete && k < samples.size(); ++k) {
      complete = samples[k].first == 1 + static_cast<long>(k) * step;
    }
    if (!complete) {
      throw ValidationError("scenario '" + id + "': incomplete day (" + std::to_string(samples.size()) +
                            " frequency rows)");
    }
    sc.frequency.step_minutes = static_cast<int>(step);
    sc.frequency.samples.reserve(samples.size());
    for (const auto& [minute, f] : samples) sc.frequency.samples.push_back(f);
    scenarios.push_back(std::move(sc));
  }

  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t s = 0; s < order.size(); ++s) position[order[s]] = s;

  {
    const std::string file = prices_csv.string();
    const auto lines = csv::read_lines(file);
    csv::expect_header(lines, kPricesHeader, file);
    // seen[s][h] has a bit per market.
    std::vector<std::array<unsigned, kHoursPerDay>> seen(scenarios.size());
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const long ln = static_cast<long>(i) + 1;
      if (lines[i].empty()) continue;
      const auto cells = csv::split(lines[i]);
      if (cells.size() != 6) throw ParseError(file, ln, "expected 6 columns");
      const auto it = position.find(std::string(cells[0]));
      if (it == position.end()) {
        throw ValidationError(file + ":" + std::to_string(ln) + ": scenario '" + std::string(cells[0]) +
                              "' has no frequency trace");
      }
      const long hour = csv::parse_int(cells[1], file, ln);
      if (hour < 1 || hour > kHoursPerDay) throw ParseError(file, ln, "hour outside 1..24");
      Market m{};
      try {
        m = parse_market(cells[2]);
      } catch (const ValidationError& e) {
        throw ParseError(file, ln, e.what());
      }
      const double threshold = csv::parse_double(cells[3], file, ln);
      const double up = csv::parse_double(cells[4], file, ln);
      const double down = csv::parse_double(cells[5], file, ln);
      const std::size_t s = it->second;
      const int h = static_cast<int>(hour) - 1;
      unsigned& mask = seen[s][h];
      if (mask & (1U << index(m))) throw ParseError(file, ln, "duplicate (scenario, hour, market) row");
      PriceSet& prices = scenarios[s].prices;
      if (mask != 0 && (prices.balancing_up[h] != up || prices.balancing_down[h] != down)) {
        throw ParseError(file, ln, "balancing prices differ between markets of the same hour");
      }
      mask |= 1U << index(m);
      prices.threshold[h][index(m)] = threshold;
      prices.balancing_up[h] = up;
      prices.balancing_down[h] = down;
    }
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
      for (int h = 0; h < kHoursPerDay; ++h) {
        if (seen[s][h] != 0xFU) {
          throw ValidationError("scenario '" + scenarios[s].id + "': prices missing for hour " +
                                std::to_string(h + 1));
        }
      }
    }
  }

  if (probability_csv) {
    const std::string file = probability_csv->string();
    const auto lines = csv::read_lines(file);
    csv::expect_header(lines, kProbabilityHeader, file);
    std::vector<bool> given(scenarios.size(), false);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const long ln = static_cast<long>(i) + 1;
      if (lines[i].empty()) continue;
      const auto cells = csv::split(lines[i]);
      if (cells.size() != 2) throw ParseError(file, ln, "expected 2 columns");
      const auto it = position.find(std::string(cells[0]));
      if (it == position.end()) {
        throw ValidationError(file + ":" + std::to_string(ln) + ": unknown scenario '" +
                              std::string(cells[0]) + "'");
      }
      if (given[it->second]) throw ParseError(file, ln, "duplicate scenario probability");
      given[it->second] = true;
      scenarios[it->second].probability = csv::parse_double(cells[1], file, ln);
    }
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
      if (!given[s]) throw ValidationError("scenario '" + scenarios[s].id + "': probability missing");
    }
  } else {
    const double p = 1.0 / static_cast<double>(scenarios.size());
    for (Scenario& sc : scenarios) sc.probability = p;
  }

  return ScenarioSet(std::move(scenarios));
}

void save_scenarios(const ScenarioSet& set, const std::filesystem::path& frequency_csv,
                    const std::filesystem::path& prices_csv,
                    const std::filesystem::path& probability_csv) {
  {
    auto out = csv::open_out(frequency_csv.string());
    out << kFrequencyHeader << '\n';
    for (const Scenario& sc : set.scenarios()) {
      const int step = sc.frequency.step_minutes;
      for (int k = 0; k < sc.frequency.steps(); ++k) {
        out << sc.id << ',' << 1 + k * step << ',' << csv::format_double(sc.frequency.samples[k]) << '\n';
      }
    }
    if (!out) throw IoError("write failed: " + frequency_csv.string());
  }
  {
    auto out = csv::open_out(prices_csv.string());
    out << kPricesHeader << '\n';
    for (const Scenario& sc : set.scenarios()) {
      for (int h = 0; h < kHoursPerDay; ++h) {
        for (Market m : kAllMarkets) {
          out << sc.id << ',' << h + 1 << ',' << market_code(m) << ','
              << csv::format_double(sc.prices.threshold_price(h, m)) << ','
              << csv::format_double(sc.prices.balancing_up[h]) << ','
              << csv::format_double(sc.prices.balancing_down[h]) << '\n';
        }
      }
    }
    if (!out) throw IoError("write failed: " + prices_csv.string());
  }
  {
    auto out = csv::open_out(probability_csv.string());
    out << kProbabilityHeader << '\n';
    for (const Scenario& sc : set.scenarios()) {
      out << sc.id << ',' << csv::format_double(sc.probability) << '\n';
    }
    if (!out) throw IoError("write failed: " + probability_csv.string());
  }
}

void SynthesisParams::validate() const {
  if (step_minutes <= 0 || 60 % step_minutes != 0) {
    throw ValidationError("synthesis: step_minutes must divide 60");
  }
  if (!(mean_reversion >= 0.0) || !std::isfinite(mean_reversion)) {
    throw ValidationError("synthesis: mean_reversion must be >= 0");
  }
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw ValidationError("synthesis: noise_scale must be >= 0");
  }
  if (!(clip_low_hz <= 50.0 && 50.0 <= clip_high_hz) || clip_low_hz < kFrequencyFloorHz ||
      clip_high_hz > kFrequencyCeilingHz) {
    throw ValidationError("synthesis: clip band must contain 50 Hz and lie within [47, 53]");
  }
  for (const PriceShape* shape : {&fcr_n, &fcr_d, &spot}) {
    if (!(shape->base >= 0.0) || !(shape->noise >= 0.0) || !std::isfinite(shape->amplitude)) {
      throw ValidationError("synthesis: price shapes need base >= 0 and noise >= 0");
    }
  }
  if (!(balancing_up_factor >= 0.0) || !(balancing_down_factor >= 0.0) || !(balancing_noise >= 0.0)) {
    throw ValidationError("synthesis: balancing factors and noise must be >= 0");
  }
}

namespace {

// Morning and evening peaks, normalised to [0, 1].
double daily_shape(int hour) {
  const double x = hour + 0.5;
  const double morning = std::exp(-(x - 8.5) * (x - 8.5) / 8.0);
  const double evening = std::exp(-(x - 19.0) * (x - 19.0) / 8.0);
  return std::min(1.0, morning + evening);
}

}  // namespace

ScenarioSet synthesize_scenarios(std::uint64_t seed, int days, const SynthesisParams& params) {
  if (days < 1) throw ValidationError("synthesis: days must be >= 1");
  params.validate();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const int step = params.step_minutes;
  const int steps = kMinutesPerDay / step;
  const double dt = step;
  const double theta = params.mean_reversion;
  // Exact discretisation of the OU process over one step.
  const double decay = std::exp(-theta * dt);
  const double step_sd = theta > 0.0
                             ? params.noise_scale * std::sqrt((1.0 - std::exp(-2.0 * theta * dt)) / (2.0 * theta))
                             : params.noise_scale * std::sqrt(dt);

  std::vector<Scenario> scenarios;
  scenarios.reserve(days);
  for (int d = 0; d < days; ++d) {
    Scenario sc;
    sc.id = "day" + std::to_string(d + 1);
    sc.probability = 1.0 / days;
    sc.frequency.scenario_id = sc.id;
    sc.frequency.step_minutes = step;
    sc.frequency.samples.resize(steps);
    double deviation = 0.0;
    for (int k = 0; k < steps; ++k) {
      if (k > 0) deviation = deviation * decay + step_sd * gauss(rng);
      const double f = std::clamp(50.0 + deviation, params.clip_low_hz, params.clip_high_hz);
      deviation = f - 50.0;
      sc.frequency.samples[k] = f;
    }

    const double day_level = std::max(0.5, 1.0 + 0.12 * gauss(rng));
    auto draw = [&](const PriceShape& shape, int h) {
      const double curve = shape.base * day_level * (1.0 + shape.amplitude * (daily_shape(h) - 0.5));
      return std::max(0.0, curve + shape.noise * gauss(rng));
    };
    for (int h = 0; h < kHoursPerDay; ++h) {
      const double fcr_n = draw(params.fcr_n, h);
      const double fcr_d = draw(params.fcr_d, h);
      const double spot = draw(params.spot, h);
      // Buying spot energy clears at the same price as selling.
      sc.prices.threshold[h] = {fcr_n, fcr_d, spot, spot};
      sc.prices.balancing_up[h] =
          std::max(0.0, spot * params.balancing_up_factor + params.balancing_noise * gauss(rng));
      sc.prices.balancing_down[h] =
          std::max(0.0, spot * params.balancing_down_factor + params.balancing_noise * gauss(rng));
    }
    scenarios.push_back(std::move(sc));
  }
  return ScenarioSet(std::move(scenarios));
}

}  // namespace bess
