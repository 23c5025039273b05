#include "bess/report.hpp"

#include <cmath>
#include <fstream>

#include "bess/errors.hpp"
#include "csv.hpp"

namespace bess {

double HourSettlement::total() const {
  return availability_won - availability_lost + spot_dch_won - spot_dch_penalty - spot_ch_cost - spot_ch_penalty +
         energy_settlement - degradation_cost - soc_target_penalty;
}

HourSettlement& HourSettlement::operator+=(const HourSettlement& o) {
  availability_won += o.availability_won;
  availability_lost += o.availability_lost;
  spot_dch_won += o.spot_dch_won;
  spot_dch_penalty += o.spot_dch_penalty;
  spot_ch_cost += o.spot_ch_cost;
  spot_ch_penalty += o.spot_ch_penalty;
  energy_settlement += o.energy_settlement;
  degradation_cost += o.degradation_cost;
  soc_target_penalty += o.soc_target_penalty;
  return *this;
}

double SettlementReport::pct_idle(std::size_t s) const {
  double bid = 0.0;
  for (double p : pct_hours_bid.at(s)) bid += p;
  return 100.0 - bid;
}

namespace {

HourSettlement scaled(const HourSettlement& h, double k) {
  HourSettlement out;
  out.availability_won = k * h.availability_won;
  out.availability_lost = k * h.availability_lost;
  out.spot_dch_won = k * h.spot_dch_won;
  out.spot_dch_penalty = k * h.spot_dch_penalty;
  out.spot_ch_cost = k * h.spot_ch_cost;
  out.spot_ch_penalty = k * h.spot_ch_penalty;
  out.energy_settlement = k * h.energy_settlement;
  out.degradation_cost = k * h.degradation_cost;
  out.soc_target_penalty = k * h.soc_target_penalty;
  return out;
}

}  // namespace

SettlementReport settle(const Solution& solution, const MilpModel& model, const ScenarioSet& scenarios,
                        const EnergyRequirement& req, const BessConfig& config, double tol) {
  if (solution.values.size() != model.variables().size()) {
    throw ConsistencyError("settlement: solution does not belong to this model");
  }
  const int S = static_cast<int>(scenarios.size());
  const int H = scenarios.horizon_hours();
  const int per_hour = scenarios.steps_per_hour();
  const int M = static_cast<int>(kMarketCount);
  auto val = [&](VarKind k, int s, int h, int t, int m) { return solution.value(model, VariableId{k, s, h, t, m}); };
  auto on = [&](VarKind k, int s, int h, int m) { return val(k, s, h, -1, m) > 0.5; };

  std::vector<std::string> mismatches;
  auto check = [&](const char* what, int s, int h, double mine, double solver) {
    if (std::abs(mine - solver) > tol) {
      mismatches.push_back(std::string(what) + " s" + std::to_string(s + 1) + " h" + std::to_string(h + 1) + ": " +
                           csv::format_double(mine) + " vs " + csv::format_double(solver));
    }
  };

  SettlementReport rep;
  rep.hours.assign(S, std::vector<HourSettlement>(H));
  rep.pct_hours_bid.assign(S, {});
  rep.pct_hours_accepted.assign(S, {});
  rep.dispatch.assign(S, {});
  rep.scenario_totals.assign(S, {});

  std::array<int, kMarketCount> bid_hours{};
  for (int h = 0; h < H; ++h)
    for (int m = 0; m < M; ++m)
      if (on(VarKind::XBid, -1, h, m)) ++bid_hours[m];

  for (int s = 0; s < S; ++s) {
    const Scenario& sc = scenarios[s];
    rep.scenario_ids.push_back(sc.id);
    rep.probabilities.push_back(sc.probability);
    std::array<int, kMarketCount> acc_hours{};

    for (int h = 0; h < H; ++h) {
      HourSettlement& out = rep.hours[s][h];
      const double price = val(VarKind::XPrice, -1, h, -1, -1);
      const bool ok = val(VarKind::WOk, s, h, -1, -1) > 0.5;
      const double up = sc.prices.balancing_up[h];
      const double down = sc.prices.balancing_down[h];
      for (int m = 0; m < M; ++m) {
        if (!on(VarKind::XAcc, s, h, m)) continue;
        ++acc_hours[m];
        const Market mk = market_at(m);
        double throughput = 0.0;
        for (int t = h * per_hour; t < (h + 1) * per_hour; ++t) throughput += req.discharge(s, t, mk) + req.charge(s, t, mk);
        out.degradation_cost += config.c_deg * throughput;
        switch (mk) {
          case Market::FcrN:
          case Market::FcrD:
            (ok ? out.availability_won : out.availability_lost) += config.p_max * price;
            break;
          case Market::SpotDischarge:
            if (ok) out.spot_dch_won += config.e_spot * sc.prices.threshold_price(h, mk);
            else out.spot_dch_penalty += config.e_spot * up;
            break;
          case Market::SpotCharge:
            if (ok) out.spot_ch_cost += config.e_spot * sc.prices.threshold_price(h, mk);
            else out.spot_ch_penalty += config.e_spot * down;
            break;
        }
      }
      for (int t = h * per_hour; t < (h + 1) * per_hour; ++t) {
        DispatchStep step;
        step.minute = 1 + t * scenarios.step_minutes();
        for (int m = 0; m < M; ++m) {
          const double dch = val(VarKind::ZDch, s, -1, t, m);
          const double ch = val(VarKind::ZCh, s, -1, t, m);
          step.discharge += dch;
          step.charge += ch;
          if (is_frequency(market_at(m))) out.energy_settlement += up * dch - down * ch;
        }
        step.soc = val(VarKind::ZSoc, s, -1, t, -1);
        rep.dispatch[s].push_back(step);
      }
      if (model.options.soc_target && model.options.soc_target->weight > 0.0 && h + 1 < H) {
        const auto& tgt = *model.options.soc_target;
        out.soc_target_penalty = tgt.weight * std::abs(rep.dispatch[s].back().soc - tgt.target_mwh);
      }

      check("won availability", s, h, out.availability_won, val(VarKind::WWonAvail, s, h, -1, -1));
      check("lost availability", s, h, out.availability_lost, val(VarKind::WLostAvail, s, h, -1, -1));
      check("spot sale", s, h, out.spot_dch_won, val(VarKind::WWonSpotDch, s, h, -1, -1));
      check("spot sale penalty", s, h, out.spot_dch_penalty, val(VarKind::WLostSpotDch, s, h, -1, -1));
      check("spot purchase", s, h, out.spot_ch_cost, val(VarKind::WPaidSpotCh, s, h, -1, -1));
      check("spot purchase penalty", s, h, out.spot_ch_penalty, val(VarKind::WLostSpotCh, s, h, -1, -1));
      check("energy settlement", s, h, out.energy_settlement, val(VarKind::WEnergy, s, h, -1, -1));
      rep.scenario_totals[s] += out;
    }
    for (int m = 0; m < M; ++m) {
      rep.pct_hours_bid[s][m] = 100.0 * bid_hours[m] / H;
      rep.pct_hours_accepted[s][m] = 100.0 * acc_hours[m] / H;
    }
    rep.expected += scaled(rep.scenario_totals[s], sc.probability);
  }

  if (!mismatches.empty()) {
    std::string msg = "settlement disagrees with the solver on " + std::to_string(mismatches.size()) + " item(s): ";
    for (std::size_t i = 0; i < mismatches.size() && i < 5; ++i) msg += (i ? "; " : "") + mismatches[i];
    throw ConsistencyError(msg);
  }
  return rep;
}

namespace {

nlohmann::json to_json(const HourSettlement& h) {
  return {{"availability_won", h.availability_won},
          {"availability_lost", h.availability_lost},
          {"spot_dch_won", h.spot_dch_won},
          {"spot_dch_penalty", h.spot_dch_penalty},
          {"spot_ch_cost", h.spot_ch_cost},
          {"spot_ch_penalty", h.spot_ch_penalty},
          {"energy_settlement", h.energy_settlement},
          {"degradation_cost", h.degradation_cost},
          {"soc_target_penalty", h.soc_target_penalty},
          {"total", h.total()}};
}

}  // namespace

nlohmann::json report_json(const SettlementReport& report) {
  nlohmann::json scen = nlohmann::json::array();
  for (std::size_t s = 0; s < report.scenario_ids.size(); ++s) {
    nlohmann::json part = nlohmann::json::object();
    for (Market m : kAllMarkets) {
      part[std::string(market_code(m))] = {{"pct_bid", report.pct_hours_bid[s][index(m)]},
                                          {"pct_accepted", report.pct_hours_accepted[s][index(m)]}};
    }
    scen.push_back({{"id", report.scenario_ids[s]},
                    {"probability", report.probabilities[s]},
                    {"totals", to_json(report.scenario_totals[s])},
                    {"participation", part},
                    {"pct_idle", report.pct_idle(s)}});
  }
  return {{"expected", to_json(report.expected)}, {"scenarios", scen}};
}

void emit(const SettlementReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  using csv::format_double;
  using csv::format_fixed;

  {
    auto out = csv::open_out((dir / "participation.csv").string());
    out << "market,scenario,pct_bid,pct_accepted\n";
    for (Market m : kAllMarkets)
      for (std::size_t s = 0; s < report.scenario_ids.size(); ++s)
        out << market_code(m) << ',' << report.scenario_ids[s] << ',' << format_fixed(report.pct_hours_bid[s][index(m)], 1)
            << ',' << format_fixed(report.pct_hours_accepted[s][index(m)], 1) << '\n';
    for (std::size_t s = 0; s < report.scenario_ids.size(); ++s)
      out << "idle," << report.scenario_ids[s] << ',' << format_fixed(report.pct_idle(s), 1) << ",\n";
  }
  {
    auto out = csv::open_out((dir / "earnings.csv").string());
    out << "scenario,hour,availability_won,availability_lost,spot_dch_won,spot_dch_penalty,spot_ch_cost,"
           "spot_ch_penalty,energy_settlement,degradation_cost,soc_target_penalty,total\n";
    for (std::size_t s = 0; s < report.scenario_ids.size(); ++s)
      for (std::size_t h = 0; h < report.hours[s].size(); ++h) {
        const HourSettlement& x = report.hours[s][h];
        out << report.scenario_ids[s] << ',' << h + 1 << ',' << format_double(x.availability_won) << ','
            << format_double(x.availability_lost) << ',' << format_double(x.spot_dch_won) << ','
            << format_double(x.spot_dch_penalty) << ',' << format_double(x.spot_ch_cost) << ','
            << format_double(x.spot_ch_penalty) << ',' << format_double(x.energy_settlement) << ','
            << format_double(x.degradation_cost) << ',' << format_double(x.soc_target_penalty) << ','
            << format_double(x.total()) << '\n';
      }
  }
  {
    auto out = csv::open_out((dir / "dispatch.csv").string());
    out << "scenario,minute,charge_mwh,discharge_mwh,soc_mwh\n";
    for (std::size_t s = 0; s < report.scenario_ids.size(); ++s)
      for (const DispatchStep& d : report.dispatch[s])
        out << report.scenario_ids[s] << ',' << d.minute << ',' << format_double(d.charge) << ','
            << format_double(d.discharge) << ',' << format_double(d.soc) << '\n';
  }
  {
    auto out = csv::open_out((dir / "summary.json").string());
    out << report_json(report).dump(2) << '\n';
  }
}

}  // namespace bess
