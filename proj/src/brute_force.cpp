#include "bess/brute_force.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>

#include "bess/errors.hpp"

namespace bess {

namespace {

constexpr int kM = static_cast<int>(kMarketCount);
constexpr double kEps = 1e-12;

// One linear piece of a concave function: `len` units of SOC change at
// `slope` EUR per unit. tag >= 0 identifies a dispatch choice of the step,
// -1 a piece inherited from earlier steps.
struct Piece {
  double len = 0.0;
  double slope = 0.0;
  int tag = -1;
};

// Concave piecewise-linear value over an interval [x0, x0 + Σ len], pieces in
// decreasing slope order.
struct Concave {
  double x0 = 0.0;
  double v0 = 0.0;
  std::vector<Piece> pieces;

  double end() const {
    double e = x0;
    for (const Piece& p : pieces) e += p.len;
    return e;
  }
};

// Hypograph sum: pieces merged by slope, inherited pieces first on ties.
Concave convolve(const Concave& f, const Concave& g) {
  Concave out{f.x0 + g.x0, f.v0 + g.v0, {}};
  out.pieces.reserve(f.pieces.size() + g.pieces.size());
  std::size_t i = 0, j = 0;
  while (i < f.pieces.size() || j < g.pieces.size()) {
    if (j == g.pieces.size() || (i < f.pieces.size() && f.pieces[i].slope >= g.pieces[j].slope)) {
      out.pieces.push_back(f.pieces[i++]);
    } else {
      out.pieces.push_back(g.pieces[j++]);
    }
  }
  return out;
}

std::optional<Concave> clip(const Concave& f, double lo, double hi) {
  const double a = std::max(f.x0, lo);
  const double b = std::min(f.end(), hi);
  if (a > b + kEps) return std::nullopt;
  Concave out{a, f.v0, {}};
  double x = f.x0;
  for (const Piece& p : f.pieces) {
    const double s = std::max(x, a), e = std::min(x + p.len, b);
    if (x < a) out.v0 += p.slope * (std::min(x + p.len, a) - x);
    if (e > s) out.pieces.push_back({e - s, p.slope, -1});
    x += p.len;
  }
  return out;
}

// Argmax and value of a concave function: walk while slopes are positive.
std::pair<double, double> maximise(const Concave& f) {
  double x = f.x0, v = f.v0;
  for (const Piece& p : f.pieces) {
    if (p.slope <= 0.0) break;
    x += p.len;
    v += p.slope * p.len;
  }
  return {x, v};
}

struct StepChoice {
  int market = 0;
  bool discharge = true;
  double amount = 0.0;
};

struct DispatchResult {
  bool feasible = false;
  double value = 0.0;
  std::vector<double> discharge;  // [t * kM + m]
  std::vector<double> charge;
};

// Best energy settlement of one scenario for a fixed acceptance/fulfilment
// pattern. Accepted markets of fulfilled hours deliver in full; in failed
// hours every delivery between zero and the obligation is allowed.
class DispatchProgram {
 public:
  DispatchProgram(const Scenario& sc, int s, const EnergyRequirement& req, const BessConfig& cfg, int hours)
      : sc_(sc), s_(s), req_(req), cfg_(cfg), hours_(hours), per_hour_(60 / req.step_minutes()) {}

  DispatchResult solve(const std::vector<int>& accepted, const std::vector<int>& fulfilled, bool trace) const {
    DispatchResult out;
    const int steps = hours_ * per_hour_;
    std::vector<Concave> merged;     // before clipping, per step
    std::vector<std::vector<StepChoice>> choices(steps);
    std::vector<Concave> before(steps);  // value before step t
    Concave f{cfg_.m_0, 0.0, {}};
    for (int t = 0; t < steps; ++t) {
      const int h = t / per_hour_;
      const int m = accepted[h];
      Concave g;
      if (m >= 0) {
        const Market mk = market_at(m);
        const double a = req_.discharge(s_, t, mk);
        const double b = req_.charge(s_, t, mk);
        const double up = is_frequency(mk) ? sc_.prices.balancing_up[h] : 0.0;
        const double down = is_frequency(mk) ? sc_.prices.balancing_down[h] : 0.0;
        if (fulfilled[h]) {
          g.x0 = b - a;
          g.v0 = up * a - down * b;
        } else {
          // start from full discharge and no charge; pieces move towards
          // less discharge and more charge
          g.x0 = -a;
          g.v0 = up * a;
          std::vector<std::pair<Piece, StepChoice>> raw;
          if (a > 0.0) raw.push_back({{a, -up, 0}, {m, true, a}});
          if (b > 0.0) raw.push_back({{b, -down, 0}, {m, false, b}});
          std::stable_sort(raw.begin(), raw.end(),
                           [](const auto& l, const auto& r) { return l.first.slope > r.first.slope; });
          for (auto& [piece, choice] : raw) {
            piece.tag = static_cast<int>(choices[t].size());
            choices[t].push_back(choice);
            g.pieces.push_back(piece);
          }
        }
      }
      before[t] = f;
      Concave h_t = convolve(f, g);
      auto clipped = clip(h_t, cfg_.e_min, cfg_.e_max);
      if (!clipped) return out;
      if (trace) merged.push_back(std::move(h_t));
      f = std::move(*clipped);
    }
    auto [x_end, value] = maximise(f);
    out.feasible = true;
    out.value = value;
    if (!trace) return out;

    out.discharge.assign(static_cast<std::size_t>(steps) * kM, 0.0);
    out.charge.assign(out.discharge.size(), 0.0);
    double y = x_end;
    for (int t = steps - 1; t >= 0; --t) {
      const int h = t / per_hour_;
      const int m = accepted[h];
      const Concave& ht = merged[t];
      double remaining = y - ht.x0;
      double used_inherited = 0.0;
      std::vector<double> used(choices[t].size(), 0.0);
      for (const Piece& p : ht.pieces) {
        if (remaining <= 0.0) break;
        const double take = std::min(p.len, remaining);
        if (p.tag < 0) used_inherited += take; else used[p.tag] += take;
        remaining -= take;
      }
      if (m >= 0) {
        const Market mk = market_at(m);
        const std::size_t k = static_cast<std::size_t>(t) * kM + m;
        if (fulfilled[h]) {
          out.discharge[k] = req_.discharge(s_, t, mk);
          out.charge[k] = req_.charge(s_, t, mk);
        } else {
          for (std::size_t c = 0; c < choices[t].size(); ++c) {
            const StepChoice& ch = choices[t][c];
            if (ch.discharge) out.discharge[k] = ch.amount - used[c];
            else out.charge[k] = used[c];
          }
        }
      }
      y = before[t].x0 + used_inherited;
    }
    return out;
  }

 private:
  const Scenario& sc_;
  int s_;
  const EnergyRequirement& req_;
  const BessConfig& cfg_;
  int hours_;
  int per_hour_;
};

struct ScenarioBest {
  double value = -std::numeric_limits<double>::infinity();
  std::vector<int> accepted;
  std::vector<int> fulfilled;
};

class Enumerator {
 public:
  Enumerator(const ScenarioSet& sc, const EnergyRequirement& req, const DegradationSchedule& deg,
             const BessConfig& cfg, const FormulationOptions& opt)
      : sc_(sc), req_(req), deg_(deg), cfg_(cfg), opt_(opt), H_(sc.horizon_hours()), S_(static_cast<int>(sc.size())) {
    bid_max_ = resolved_bid_max(cfg, sc);
    for (int s = 0; s < S_; ++s) programs_.emplace_back(sc[s], s, req, cfg, H_);
    memo_.resize(S_);
    for (int h = 0; h < H_; ++h) {
      std::vector<std::pair<int, double>> opts{{-1, 0.0}};
      for (int m = 0; m < kM; ++m) {
        if (!opt.markets.contains(market_at(m))) continue;
        for (double p : candidate_prices(sc, h, market_at(m), cfg.bid_min, bid_max_)) opts.push_back({m, p});
      }
      options_.push_back(std::move(opts));
    }
  }

  OracleSolution run() {
    std::vector<int> bid(H_, -1);
    std::vector<double> price(H_, 0.0);
    first_stage(0, bid, price);

    OracleSolution out = best_;
    out.first_stage_evaluated = evaluated_;
    out.discharge.resize(S_);
    out.charge.resize(S_);
    for (int s = 0; s < S_; ++s) {
      DispatchResult d = programs_[s].solve(out.accepted[s], out.fulfilled[s], true);
      if (!d.feasible) throw ConsistencyError("oracle: chosen dispatch pattern became infeasible");
      out.discharge[s] = std::move(d.discharge);
      out.charge[s] = std::move(d.charge);
    }
    return out;
  }

 private:
  void first_stage(int h, std::vector<int>& bid, std::vector<double>& price) {
    if (h == H_) {
      evaluate(bid, price);
      return;
    }
    for (const auto& [m, p] : options_[h]) {
      bid[h] = m;
      price[h] = p;
      first_stage(h + 1, bid, price);
    }
  }

  void evaluate(const std::vector<int>& bid, const std::vector<double>& price) {
    ++evaluated_;
    double total = 0.0;
    std::vector<ScenarioBest> per(S_);
    for (int s = 0; s < S_; ++s) {
      std::vector<int> acc(H_, -1), ok(H_, 1);
      second_stage(s, 0, bid, price, acc, ok, 0.0, per[s]);
      total += sc_[s].probability * per[s].value;
    }
    if (!found_ || total > best_.objective + kEps) {
      found_ = true;
      best_.objective = total;
      best_.bid = bid;
      best_.price = price;
      best_.accepted.clear();
      best_.fulfilled.clear();
      for (const ScenarioBest& b : per) {
        best_.accepted.push_back(b.accepted);
        best_.fulfilled.push_back(b.fulfilled);
      }
    }
  }

  // Settlement of one scenario-hour apart from the energy term.
  double hourly(int s, int h, int m, bool ok, double price) const {
    if (m < 0) return 0.0;
    const Market mk = market_at(m);
    const PriceSet& pr = sc_[s].prices;
    double v = -deg_.hourly_cost(s, h, mk);
    switch (mk) {
      case Market::FcrN:
      case Market::FcrD:
        v += ok ? cfg_.p_max * price : -cfg_.p_max * price;
        break;
      case Market::SpotDischarge:
        v += ok ? cfg_.e_spot * pr.threshold_price(h, mk) : -cfg_.e_spot * pr.balancing_up[h];
        break;
      case Market::SpotCharge:
        v += ok ? -cfg_.e_spot * pr.threshold_price(h, mk) : -cfg_.e_spot * pr.balancing_down[h];
        break;
    }
    return v;
  }

  void second_stage(int s, int h, const std::vector<int>& bid, const std::vector<double>& price,
                    std::vector<int>& acc, std::vector<int>& ok, double partial, ScenarioBest& best) {
    if (h == H_) {
      const auto [feasible, energy] = dispatch_value(s, acc, ok);
      if (!feasible) return;
      const double v = partial + energy;
      if (v > best.value + kEps || best.accepted.empty()) {
        best.value = v;
        best.accepted = acc;
        best.fulfilled = ok;
      }
      return;
    }
    const int m = bid[h];
    bool may_reject = true, may_accept = false;
    if (m >= 0) {
      const double thr = sc_[s].prices.threshold_price(h, market_at(m));
      may_accept = price[h] <= thr;
      may_reject = price[h] >= thr;
    }
    if (may_reject) {
      acc[h] = -1;
      ok[h] = 1;
      second_stage(s, h + 1, bid, price, acc, ok, partial, best);
    }
    if (may_accept) {
      for (int w : {1, 0}) {
        acc[h] = m;
        ok[h] = w;
        second_stage(s, h + 1, bid, price, acc, ok, partial + hourly(s, h, m, w == 1, price[h]), best);
      }
    }
    acc[h] = -1;
    ok[h] = 1;
  }

  std::pair<bool, double> dispatch_value(int s, const std::vector<int>& acc, const std::vector<int>& ok) {
    long key = 0;
    for (int h = 0; h < H_; ++h) key = key * (2 * kM + 1) + (acc[h] < 0 ? 0 : 1 + 2 * acc[h] + ok[h]);
    auto it = memo_[s].find(key);
    if (it != memo_[s].end()) return it->second;
    const DispatchResult d = programs_[s].solve(acc, ok, false);
    return memo_[s][key] = {d.feasible, d.value};
  }

  const ScenarioSet& sc_;
  const EnergyRequirement& req_;
  const DegradationSchedule& deg_;
  const BessConfig& cfg_;
  const FormulationOptions& opt_;
  int H_, S_;
  double bid_max_ = 0.0;
  std::vector<DispatchProgram> programs_;
  std::vector<std::vector<std::pair<int, double>>> options_;
  std::vector<std::map<long, std::pair<bool, double>>> memo_;
  OracleSolution best_;
  bool found_ = false;
  long evaluated_ = 0;
};

}  // namespace

std::vector<double> candidate_prices(const ScenarioSet& scenarios, int hour, Market m, double bid_min,
                                     double bid_max) {
  std::vector<double> out{bid_min};
  bool above = false;
  for (const Scenario& sc : scenarios.scenarios()) {
    const double thr = sc.prices.threshold_price(hour, m);
    if (thr >= bid_min && thr <= bid_max) out.push_back(thr);
    if (thr > bid_max) above = true;
  }
  if (above) out.push_back(bid_max);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

OracleSolution brute_force(const ScenarioSet& scenarios, const EnergyRequirement& req,
                           const DegradationSchedule& deg, const BessConfig& config,
                           const FormulationOptions& options, const OracleLimits& limits) {
  if (scenarios.horizon_hours() > limits.max_hours || static_cast<int>(scenarios.size()) > limits.max_scenarios ||
      scenarios.step_minutes() < limits.min_step_minutes) {
    throw OracleRefusal("brute force handles at most " + std::to_string(limits.max_hours) + " hours, " +
                        std::to_string(limits.max_scenarios) + " scenarios and steps of at least " +
                        std::to_string(limits.min_step_minutes) + " minutes");
  }
  if (options.strict_conditional_zero || options.nonnegative_energy_settlement ||
      (options.soc_target && options.soc_target->weight > 0.0)) {
    throw OracleRefusal("brute force models only the default formulation options");
  }
  config.validate();
  if (req.scenarios() != static_cast<int>(scenarios.size()) || req.steps() != scenarios.steps() ||
      deg.scenarios() != req.scenarios() || deg.steps() != req.steps()) {
    throw OracleRefusal("brute force: requirement and degradation tables do not match the scenarios");
  }
  return Enumerator(scenarios, req, deg, config, options).run();
}

Solution OracleSolution::to_solution(const MilpModel& model, const ScenarioSet& scenarios,
                                     const EnergyRequirement& req, const BessConfig& config) const {
  const Dimensions& d = model.dims;
  const int per_hour = 60 / d.step_minutes;
  std::vector<double> x(model.variables().size(), 0.0);
  auto set = [&](VarKind k, int s, int h, int t, int m, double v) { x[model.at(VariableId{k, s, h, t, m})] = v; };

  for (int h = 0; h < d.hours; ++h) {
    if (bid[h] >= 0) set(VarKind::XBid, -1, h, -1, bid[h], 1.0);
    set(VarKind::XPrice, -1, h, -1, -1, bid[h] >= 0 ? price[h] : 0.0);
  }
  for (int s = 0; s < d.scenarios; ++s) {
    const PriceSet& pr = scenarios[s].prices;
    double soc = config.m_0;
    for (int t = 0; t < d.steps; ++t) {
      const int h = t / per_hour;
      for (int m = 0; m < kM; ++m) {
        const std::size_t k = static_cast<std::size_t>(t) * kM + m;
        const bool acc = accepted[s][h] == m;
        const double zd = discharge[s][k], zc = charge[s][k];
        set(VarKind::ZDch, s, -1, t, m, zd);
        set(VarKind::ZCh, s, -1, t, m, zc);
        set(VarKind::ZNet, s, -1, t, m, zd - zc);
        set(VarKind::SDch, s, -1, t, m, acc ? req.discharge(s, t, market_at(m)) - zd : 0.0);
        set(VarKind::SCh, s, -1, t, m, acc ? req.charge(s, t, market_at(m)) - zc : 0.0);
        soc -= zd - zc;
      }
      set(VarKind::ZSoc, s, -1, t, -1, soc);
    }
    for (int h = 0; h < d.hours; ++h) {
      const int m = accepted[s][h];
      const bool ok = m < 0 || fulfilled[s][h] == 1;
      if (m >= 0) set(VarKind::XAcc, s, h, -1, m, 1.0);
      set(VarKind::WOk, s, h, -1, -1, ok ? 1.0 : 0.0);
      const double avail = (m == 0 || m == 1) ? config.p_max * price[h] : 0.0;
      const double spot_dch = m == 2 ? config.e_spot * pr.threshold_price(h, Market::SpotDischarge) : 0.0;
      const double spot_ch = m == 3 ? config.e_spot * pr.threshold_price(h, Market::SpotCharge) : 0.0;
      set(VarKind::WAvail, s, h, -1, -1, avail);
      set(VarKind::WSpotDch, s, h, -1, -1, spot_dch);
      set(VarKind::WSpotCh, s, h, -1, -1, spot_ch);
      set(VarKind::WWonAvail, s, h, -1, -1, ok ? avail : 0.0);
      set(VarKind::WLostAvail, s, h, -1, -1, ok ? 0.0 : avail);
      set(VarKind::WWonSpotDch, s, h, -1, -1, ok ? spot_dch : 0.0);
      set(VarKind::WPaidSpotCh, s, h, -1, -1, ok ? spot_ch : 0.0);
      set(VarKind::WLostSpotDch, s, h, -1, -1, !ok && m == 2 ? config.e_spot * pr.balancing_up[h] : 0.0);
      set(VarKind::WLostSpotCh, s, h, -1, -1, !ok && m == 3 ? config.e_spot * pr.balancing_down[h] : 0.0);
      double energy = 0.0;
      for (int t = h * per_hour; t < (h + 1) * per_hour; ++t) {
        for (int f = 0; f < 2; ++f) {
          const std::size_t k = static_cast<std::size_t>(t) * kM + f;
          energy += pr.balancing_up[h] * discharge[s][k] - pr.balancing_down[h] * charge[s][k];
        }
      }
      set(VarKind::WEnergy, s, h, -1, -1, energy);
    }
  }
  Solution sol;
  sol.objective = model.evaluate_objective(x);
  sol.values = std::move(x);
  sol.status = SolveStatus::Optimal;
  return sol;
}

}  // namespace bess
