#include <doctest.h>

#include "bess/config.hpp"
#include "bess/errors.hpp"
#include "bess/market.hpp"
#include "bess/market_model.hpp"
#include "fixtures.hpp"

using namespace bess;

TEST_CASE("market classification and codes") {
  int freq = 0, spot = 0;
  for (Market m : kAllMarkets) {
    CHECK(is_frequency(m) != is_spot(m));
    freq += is_frequency(m);
    spot += is_spot(m);
    CHECK(parse_market(market_code(m)) == m);
  }
  CHECK(freq == 2);
  CHECK(spot == 2);
  CHECK(parse_market("N") == Market::FcrN);
  CHECK(parse_market("D") == Market::FcrD);
  CHECK_THROWS_AS(parse_market("X"), ValidationError);
}

TEST_CASE("market sets") {
  CHECK(MarketSet::parse("N,D,SDCH,SCH") == MarketSet::all());
  CHECK(MarketSet::parse("NDS") == MarketSet::all());
  CHECK(MarketSet::parse("ND") == MarketSet::of({Market::FcrN, Market::FcrD}));
  CHECK(MarketSet::parse("S") == MarketSet::of({Market::SpotDischarge, Market::SpotCharge}));
  CHECK(MarketSet::parse("SCH") == MarketSet::of({Market::SpotCharge}));
  CHECK(MarketSet::parse("idle").empty());
  CHECK_THROWS_AS(MarketSet::parse(""), ValidationError);
  CHECK_THROWS_AS(MarketSet::parse("N,,D"), ValidationError);
}

TEST_CASE("config validation and JSON") {
  BessConfig c;
  CHECK_NOTHROW(c.validate());
  BessConfig bad = c;
  bad.m_0 = 2.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.c_deg = -1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.step_minutes = 7;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  c.c_deg = 50.0;
  c.bid_max = 120.0;
  const BessConfig back = config_from_json(to_json(c));
  CHECK(back.c_deg == 50.0);
  CHECK(back.bid_max.value() == 120.0);
  CHECK(back.p_max == c.p_max);
  const BessConfig partial = config_from_json(nlohmann::json{{"e_max", 2.0}}, c);
  CHECK(partial.e_max == 2.0);
  CHECK(partial.c_deg == 50.0);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"p_maxx", 1.0}}), ValidationError);
}

TEST_CASE("degradation schedule") {
  BessConfig cfg;
  cfg.step_minutes = 1;
  const ScenarioSet sc = fixtures::random_scenarios(2, 1, 24, 1);
  const EnergyRequirement req = build_requirements(sc, cfg);

  cfg.c_deg = 0.0;
  const DegradationSchedule zero = degradation_costs(req, cfg);
  cfg.c_deg = 50.0;
  const DegradationSchedule fifty = degradation_costs(req, cfg);
  cfg.c_deg = 100.0;
  const DegradationSchedule hundred = degradation_costs(req, cfg);
  bool some_idle_fcr_d = false;
  for (int t = 0; t < req.steps(); ++t)
    for (Market m : kAllMarkets) {
      CHECK(zero.step_cost(0, t, m) == 0.0);
      CHECK(fifty.step_cost(0, t, m) >= 0.0);
      CHECK(hundred.step_cost(0, t, m) == doctest::Approx(2 * fifty.step_cost(0, t, m)));
      if (m == Market::FcrD && req.discharge(0, t, m) == 0.0) {
        some_idle_fcr_d = true;
        CHECK(fifty.step_cost(0, t, m) == 0.0);
      }
    }
  CHECK(some_idle_fcr_d);
  CHECK(fifty.step_cost(0, 0, Market::SpotDischarge) == doctest::Approx(50.0 * 0.4 / 60));
  CHECK(std::abs(fifty.step_cost(0, 0, Market::SpotDischarge) - 0.3333) < 1e-4);
  double hour = 0.0;
  for (int t = 60; t < 120; ++t) hour += fifty.step_cost(0, t, Market::FcrN);
  CHECK(fifty.hourly_cost(0, 1, Market::FcrN) == doctest::Approx(hour));
}

TEST_CASE("big-M sizing") {
  BessConfig cfg;
  cfg.step_minutes = 60;
  cfg.bid_max = 100.0;
  std::vector<Scenario> v{fixtures::flat_scenario("a", 1.0, 50.0, 60, {30, 20, 80, 70}, 90, 40)};
  v[0].prices.threshold[5][2] = 55;
  const ScenarioSet sc(std::move(v));
  const EnergyRequirement req = build_requirements(sc, cfg);
  const BigM m = tight_big_m(cfg, sc, req);
  CHECK(m.avail == doctest::Approx(90.0));
  CHECK(m.spot == doctest::Approx(32.0));
  CHECK(m.pen_up == doctest::Approx(0.4 * 90));
  CHECK(m.pen_dn == doctest::Approx(0.4 * 40));
  CHECK(m.price == doctest::Approx(100.0 + 80.0));
  CHECK(m.slack == doctest::Approx(0.4));

  cfg.bid_max = 0.0;
  CHECK(tight_big_m(cfg, sc, req).avail == 0.0);

  BessConfig dflt;
  dflt.step_minutes = 60;
  CHECK(resolved_bid_max(dflt, sc) == doctest::Approx(160.0));
}
