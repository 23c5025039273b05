#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bess/errors.hpp"
#include "bess/scenario.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;
using namespace bess;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("bess_scenario_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes a frequency file with `rows` minutes per scenario and a full price file.
void write_day_files(const fs::path& dir, const std::vector<std::string>& ids, int rows) {
  std::ofstream f(dir / "frequency.csv");
  f << "scenario_id,minute,freq_hz\n";
  for (const auto& id : ids)
    for (int m = 1; m <= rows; ++m) f << id << ',' << m << ",50.01\n";
  std::ofstream p(dir / "prices.csv");
  p << "scenario_id,hour,market,threshold_price,balancing_up,balancing_down\n";
  for (const auto& id : ids)
    for (int h = 1; h <= 24; ++h)
      for (const char* m : {"FCRN", "FCRD", "SDCH", "SCH"}) p << id << ',' << h << ',' << m << ",12.5,60,30\n";
}

}  // namespace

TEST_CASE("hour_of maps steps to 1-based hours") {
  CHECK(hour_of(1, 1) == 1);
  CHECK(hour_of(61, 1) == 2);
  CHECK(hour_of(1440, 1) == 24);
  CHECK(hour_of(60, 1) == 1);
  CHECK(hour_of(24, 60) == 24);
  CHECK_THROWS_AS(hour_of(0, 1), RangeError);
  CHECK_THROWS_AS(hour_of(1441, 1), RangeError);
}

TEST_CASE("hour_of partitions the day into 24 equal blocks") {
  for (int step : {1, 5, 15, 60}) {
    std::array<int, 24> count{};
    const int T = kMinutesPerDay / step;
    for (int t = 1; t <= T; ++t) ++count[hour_of(t, step) - 1];
    for (int c : count) CHECK(c == 60 / step);
  }
}

TEST_CASE("load: uniform weights without a probability file") {
  const fs::path dir = scratch("uniform");
  write_day_files(dir, {"d1", "d2", "d3", "d4", "d5", "d6", "d7"}, 1440);
  const ScenarioSet set = load_scenarios(dir / "frequency.csv", dir / "prices.csv");
  REQUIRE(set.size() == 7);
  for (const Scenario& s : set.scenarios()) CHECK(s.probability == doctest::Approx(1.0 / 7).epsilon(1e-15));
  CHECK(set.step_minutes() == 1);
  CHECK(set[0].prices.threshold_price(3, Market::SpotCharge) == 12.5);
}

TEST_CASE("load: a single scenario gets probability one") {
  const fs::path dir = scratch("single");
  write_day_files(dir, {"only"}, 1440);
  const ScenarioSet set = load_scenarios(dir / "frequency.csv", dir / "prices.csv");
  CHECK(set.size() == 1);
  CHECK(set[0].probability == 1.0);
}

TEST_CASE("load: a day with 1439 minutes is incomplete") {
  const fs::path dir = scratch("short");
  write_day_files(dir, {"d1"}, 1439);
  try {
    load_scenarios(dir / "frequency.csv", dir / "prices.csv");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("incomplete day") != std::string::npos);
  }
}

TEST_CASE("load: malformed rows report their line") {
  const fs::path dir = scratch("malformed");
  write_day_files(dir, {"d1"}, 1440);
  {
    std::ofstream f(dir / "frequency.csv", std::ios::app);
    f << "d1,abc,50.0\n";
  }
  try {
    load_scenarios(dir / "frequency.csv", dir / "prices.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1442);
  }
}

TEST_CASE("load: probabilities must sum to one") {
  const fs::path dir = scratch("probs");
  write_day_files(dir, {"a", "b"}, 1440);
  {
    std::ofstream p(dir / "probabilities.csv");
    p << "scenario_id,probability\na,0.5\nb,0.4\n";
  }
  CHECK_THROWS_AS(load_scenarios(dir / "frequency.csv", dir / "prices.csv", dir / "probabilities.csv"),
                  ValidationError);
  {
    std::ofstream p(dir / "probabilities.csv");
    p << "scenario_id,probability\na,0.25\nb,0.75\n";
  }
  const ScenarioSet set = load_scenarios(dir / "frequency.csv", dir / "prices.csv", dir / "probabilities.csv");
  CHECK(set[0].probability == 0.25);
  CHECK(set[1].probability == 0.75);
}

TEST_CASE("save and load round-trip bit-exactly") {
  const ScenarioSet a = fixtures::random_scenarios(11, 2, 24, 15);
  const ScenarioSet b = synthesize_scenarios(5, 2);
  for (const ScenarioSet* set : {&a, &b}) {
    const fs::path dir = scratch("roundtrip");
    save_scenarios(*set, dir / "f.csv", dir / "p.csv", dir / "q.csv");
    const ScenarioSet back = load_scenarios(dir / "f.csv", dir / "p.csv", dir / "q.csv");
    REQUIRE(back.size() == set->size());
    for (std::size_t s = 0; s < set->size(); ++s) {
      CHECK(back[s].id == (*set)[s].id);
      CHECK(back[s].probability == (*set)[s].probability);
      CHECK(back[s].frequency.samples == (*set)[s].frequency.samples);
      CHECK(back[s].frequency.step_minutes == (*set)[s].frequency.step_minutes);
      CHECK(back[s].prices.threshold == (*set)[s].prices.threshold);
      CHECK(back[s].prices.balancing_up == (*set)[s].prices.balancing_up);
      CHECK(back[s].prices.balancing_down == (*set)[s].prices.balancing_down);
    }
  }
}

TEST_CASE("synthesis with zero noise stays at 50 Hz") {
  SynthesisParams p;
  p.noise_scale = 0.0;
  const ScenarioSet set = synthesize_scenarios(3, 2, p);
  for (const Scenario& s : set.scenarios())
    for (double f : s.frequency.samples) CHECK(f == 50.0);
}

TEST_CASE("synthesis is deterministic per seed") {
  const ScenarioSet a = synthesize_scenarios(42, 3);
  const ScenarioSet b = synthesize_scenarios(42, 3);
  const ScenarioSet c = synthesize_scenarios(43, 3);
  for (std::size_t s = 0; s < 3; ++s) {
    CHECK(a[s].frequency.samples == b[s].frequency.samples);
    CHECK(a[s].prices.threshold == b[s].prices.threshold);
  }
  CHECK(a[0].frequency.samples != c[0].frequency.samples);
}

TEST_CASE("seed 1, 7 days: invariants hold") {
  const ScenarioSet set = synthesize_scenarios(1, 7);
  CHECK(set.size() == 7);
  double total = 0.0;
  for (const Scenario& s : set.scenarios()) {
    total += s.probability;
    CHECK(s.frequency.steps() == 1440);
    CHECK_NOTHROW(s.frequency.validate());
    CHECK_NOTHROW(s.prices.validate(s.id));
  }
  CHECK(std::abs(total - 1.0) <= 1e-9);
  CHECK_THROWS_AS(synthesize_scenarios(1, 0), ValidationError);
  SynthesisParams bad;
  bad.noise_scale = -1.0;
  CHECK_THROWS_AS(synthesize_scenarios(1, 1, bad), ValidationError);
}

TEST_CASE("synthesized frequencies stay inside the clip band") {
  SynthesisParams p;
  p.noise_scale = 0.05;
  p.step_minutes = 15;
  p.clip_low_hz = 49.95;  // narrow enough to hit both clips
  p.clip_high_hz = 50.05;
  bool hit_low = false, hit_high = false;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ScenarioSet set = synthesize_scenarios(seed, 1, p);
    for (double f : set[0].frequency.samples) {
      CHECK(f >= p.clip_low_hz);
      CHECK(f <= p.clip_high_hz);
      hit_low = hit_low || f == p.clip_low_hz;
      hit_high = hit_high || f == p.clip_high_hz;
    }
  }
  CHECK(hit_low);
  CHECK(hit_high);
}

TEST_CASE("coarsening averages blocks of samples") {
  std::vector<Scenario> v{fixtures::flat_scenario("a", 1.0, 50.0, 1, {1, 2, 3, 4}, 5, 6)};
  for (int k = 0; k < 1440; ++k) v[0].frequency.samples[k] = 49.9 + 0.001 * (k % 60);
  const ScenarioSet fine(std::move(v));
  const ScenarioSet coarse = fine.coarsened(60);
  REQUIRE(coarse.step_minutes() == 60);
  REQUIRE(coarse[0].frequency.steps() == 24);
  double mean = 0.0;
  for (int k = 0; k < 60; ++k) mean += 49.9 + 0.001 * k;
  mean /= 60;
  for (double f : coarse[0].frequency.samples) CHECK(f == doctest::Approx(mean).epsilon(1e-14));
  CHECK_THROWS_AS(coarse.coarsened(7), ValidationError);
}
