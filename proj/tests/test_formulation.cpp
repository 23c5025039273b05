#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bess/errors.hpp"
#include "bess/formulation.hpp"
#include "bess/solver.hpp"
#include "external.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;
using namespace bess;

namespace {

// Closed-form counts of every family, written out from the model definition.
void check_census(const fixtures::Instance& in) {
  const int S = static_cast<int>(in.scenarios.size());
  const int H = in.scenarios.horizon_hours();
  const int T = in.scenarios.steps();
  const int M = 4;
  const Census c = census(in.model);

  CHECK(c.variables.at(VarKind::XBid) == H * M);
  CHECK(c.variables.at(VarKind::XPrice) == H);
  CHECK(c.variables.at(VarKind::XAcc) == S * H * M);
  CHECK(c.variables.at(VarKind::ZSoc) == S * T);
  for (VarKind k : {VarKind::ZDch, VarKind::ZCh, VarKind::ZNet, VarKind::SDch, VarKind::SCh})
    CHECK(c.variables.at(k) == S * T * M);
  CHECK(c.variables.at(VarKind::WOk) == S * H);
  for (VarKind k : {VarKind::WAvail, VarKind::WSpotDch, VarKind::WSpotCh, VarKind::WWonAvail, VarKind::WLostAvail,
                    VarKind::WWonSpotDch, VarKind::WLostSpotDch, VarKind::WLostSpotCh, VarKind::WPaidSpotCh,
                    VarKind::WEnergy})
    CHECK(c.variables.at(k) == S * H);
  CHECK(c.total_variables == H * M + H + S * H * M + S * T + 5 * S * T * M + S * H + 10 * S * H);
  CHECK(c.binaries == H * M + S * H * M + S * H);

  int above = 0;
  for (int s = 0; s < S; ++s)
    for (int t = 0; t < T; ++t) {
      const double f = in.scenarios[s].frequency.samples[t];
      above += (f > 50.0) + (f > 49.9);
    }
  CHECK(c.constraints.at(Family::OneBid) == H);
  CHECK(c.constraints.at(Family::AcceptImpliesBid) == S * H * M);
  CHECK(c.constraints.at(Family::ForcedAcceptance) == S * H);
  CHECK(c.constraints.at(Family::AcceptanceThreshold) == S * H * M);
  CHECK(c.constraints.at(Family::BidPriceMax) == H);
  CHECK(c.constraints.at(Family::BidPriceMin) == H);
  CHECK(c.constraints.at(Family::ConditionalZero) == above);
  CHECK(c.constraints.at(Family::DispatchDischarge) + c.constraints.at(Family::DispatchCharge) == 2 * S * T * M);
  CHECK(c.constraints.at(Family::NetDispatch) == S * T * M);
  CHECK(c.constraints.at(Family::SocBalance) == S * T);
  CHECK(c.constraints.at(Family::Fulfilment) == S * H);
  for (Family f : {Family::Availability, Family::SpotDischarge, Family::SpotCharge, Family::WonAvailability,
                   Family::LostAvailability, Family::WonSpotDischarge, Family::LostSpotDischarge,
                   Family::LostSpotCharge, Family::PaidSpotCharge})
    CHECK(c.constraints.at(f) == 3 * S * H);
  CHECK(c.constraints.at(Family::EnergySettlement) == S * H);
  CHECK(c.constraints.count(Family::SocTarget) == 0);
}

std::string mps_text(const MilpModel& m) {
  std::ostringstream out;
  write_mps(m, out);
  return out.str();
}

}  // namespace

TEST_CASE("census matches the closed-form counts") {
  fixtures::Instance one(fixtures::random_scenarios(1, 1, 2, 60), fixtures::config_for(60, 10));
  check_census(one);
  fixtures::Instance two(fixtures::random_scenarios(2, 2, 3, 15), fixtures::config_for(15, 10));
  check_census(two);
  // S=1, H=2, M=4, step=60 example: hand count of the fixed part
  const Census c = census(one.model);
  CHECK(c.variables.at(VarKind::XBid) + c.variables.at(VarKind::XPrice) + c.variables.at(VarKind::XAcc) == 18);
}

TEST_CASE("variable domains and names") {
  fixtures::Instance in(fixtures::random_scenarios(4, 2, 3, 60), fixtures::config_for(60, 5));
  for (const Variable& v : in.model.variables()) {
    const VarKind k = v.id.kind;
    const bool binary = k == VarKind::XBid || k == VarKind::XAcc || k == VarKind::WOk;
    CHECK((v.domain == Domain::Binary) == binary);
    if (k == VarKind::ZNet || k == VarKind::WEnergy) CHECK(v.domain == Domain::Free);
    CHECK(v.name.size() <= 255);
    CHECK(v.name == v.id.name());
  }
  CHECK(VariableId{VarKind::XAcc, 0, 2, -1, 0}.name() == "xacc_s1_h3_FCRN");
}

TEST_CASE("zero degradation leaves no acceptance cost in the objective") {
  fixtures::Instance in(fixtures::random_scenarios(5, 2, 3, 60), fixtures::config_for(60, 0));
  for (const Variable& v : in.model.variables()) {
    if (v.id.kind == VarKind::XAcc) CHECK(in.model.objective()[in.model.at(v.id)] == 0.0);
  }
  fixtures::Instance wear(fixtures::random_scenarios(5, 2, 3, 60), fixtures::config_for(60, 50));
  int negative = 0;
  for (const Variable& v : wear.model.variables()) {
    if (v.id.kind == VarKind::XAcc) negative += wear.model.objective()[wear.model.at(v.id)] < 0.0;
  }
  CHECK(negative > 0);
}

TEST_CASE("the no-bid point is feasible with objective zero") {
  for (std::uint64_t seed : {1, 2, 3}) {
    fixtures::Instance in(fixtures::random_scenarios(seed, 2, 3, 60), fixtures::config_for(60, 20, seed));
    const int S = 2, H = 3, T = 3;
    Solution sol;
    sol.values.assign(in.model.variables().size(), 0.0);
    for (int s = 0; s < S; ++s) {
      for (int h = 0; h < H; ++h) sol.values[in.model.at({VarKind::WOk, s, h})] = 1.0;
      for (int t = 0; t < T; ++t) sol.values[in.model.at({VarKind::ZSoc, s, -1, t})] = in.config.m_0;
    }
    sol.objective = in.model.evaluate_objective(sol.values);
    sol.status = SolveStatus::Optimal;
    CHECK(sol.objective == 0.0);
    CHECK(validate(sol, in.model).empty());
  }
}

TEST_CASE("flat frequency with spot disabled forces zero dispatch") {
  std::vector<Scenario> v{fixtures::flat_scenario("f", 1.0, 50.0, 60, {10, 10, 50, 50}, 60, 30)};
  FormulationOptions opt;
  opt.markets = MarketSet::of({Market::FcrN, Market::FcrD});
  fixtures::Instance in(ScenarioSet(std::move(v), 2), fixtures::config_for(60, 0), opt);
  for (const LinearConstraint& r : in.model.constraints()) {
    if (r.family != Family::DispatchDischarge && r.family != Family::DispatchCharge) continue;
    // only the z and s columns remain, with rhs zero
    const int market = in.model.variables()[r.terms[0].var].id.m;
    if (is_frequency(market_at(market))) {
      CHECK(r.terms.size() == 2);
      CHECK(r.rhs == 0.0);
    }
  }
  const Solution sol = solve_bb(in.model);
  CHECK(sol.objective == doctest::Approx(2 * 0.9 * 10).epsilon(1e-9));
  for (const Variable& v2 : in.model.variables()) {
    const VarKind k = v2.id.kind;
    if (k == VarKind::ZDch || k == VarKind::ZCh || k == VarKind::SDch || k == VarKind::SCh)
      CHECK(std::abs(sol.values[in.model.at(v2.id)]) < 1e-9);
    if (k == VarKind::XBid && is_spot(market_at(v2.id.m))) CHECK(sol.values[in.model.at(v2.id)] == 0.0);
  }
}

TEST_CASE("compatibility switches") {
  const ScenarioSet sc = fixtures::random_scenarios(6, 1, 2, 60);
  FormulationOptions strict;
  strict.strict_conditional_zero = true;
  fixtures::Instance loose(sc, fixtures::config_for(60, 0));
  fixtures::Instance tight(sc, fixtures::config_for(60, 0), strict);
  CHECK(census(tight.model).constraints[Family::ConditionalZero] ==
        3 * census(loose.model).constraints[Family::ConditionalZero]);

  FormulationOptions target;
  target.soc_target = SocTargetOption{0.5, 2.0};
  fixtures::Instance soft(sc, fixtures::config_for(60, 0), target);
  CHECK(census(soft.model).constraints[Family::SocTarget] == 1);
  CHECK(census(soft.model).variables.at(VarKind::SocTargetPlus) == 1);

  FormulationOptions nonneg;
  nonneg.nonnegative_energy_settlement = true;
  fixtures::Instance pos(sc, fixtures::config_for(60, 0), nonneg);
  CHECK(pos.model.variables()[pos.model.at({VarKind::WEnergy, 0, 0})].domain == Domain::NonNegative);
}

TEST_CASE("dimension mismatches are build errors") {
  fixtures::Instance in(fixtures::random_scenarios(7, 2, 2, 60), fixtures::config_for(60, 0));
  const ScenarioSet other = fixtures::random_scenarios(7, 1, 2, 60);
  CHECK_THROWS_AS(build_model(other, in.req, in.deg, in.config), BuildError);
}

TEST_CASE("MPS and LP exports are canonical") {
  fixtures::Instance in(fixtures::random_scenarios(8, 2, 2, 60), fixtures::config_for(60, 20));
  fixtures::Instance again(fixtures::random_scenarios(8, 2, 2, 60), fixtures::config_for(60, 20));
  const std::string a = mps_text(in.model);
  CHECK(a == mps_text(again.model));
  CHECK(a.find("OBJSENSE") != std::string::npos);
  CHECK(a.find("xacc_s1_h2_FCRN") != std::string::npos);
  std::ostringstream lp1, lp2;
  write_lp(in.model, lp1);
  write_lp(again.model, lp2);
  CHECK(lp1.str() == lp2.str());
  CHECK(lp1.str().find("\nMaximize\n") != std::string::npos);

  MilpModel empty;
  std::ostringstream e;
  write_mps(empty, e);
  CHECK(e.str().find("OBJSENSE") != std::string::npos);

  CHECK_THROWS_AS(export_model(in.model, ExportFormat::Mps, "/nonexistent_dir/x.mps"), IoError);
}

TEST_CASE("an external reader sees the census dimensions") {
  if (!external::python_available()) {
    MESSAGE("highspy not importable; skipping");
    return;
  }
  fixtures::Instance in(fixtures::random_scenarios(9, 2, 2, 60), fixtures::config_for(60, 20));
  const Census c = census(in.model);
  for (auto [format, ext] : {std::pair{ExportFormat::Mps, ".mps"}, std::pair{ExportFormat::Lp, ".lp"}}) {
    const fs::path path = fs::temp_directory_path() / (std::string("bess_formulation") + ext);
    export_model(in.model, format, path);
    const auto info = external::read_model(path.string(), false);
    REQUIRE(info.has_value());
    CHECK((*info)["rows"].get<int>() == c.total_constraints);
    CHECK((*info)["cols"].get<int>() == c.total_variables);
    CHECK((*info)["integers"].get<int>() == c.binaries);
  }
}
