#include "bess/formulation.hpp"

#include <cmath>
#include <limits>

#include "bess/errors.hpp"

namespace bess {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxNameLength = 255;

struct KindInfo {
  std::string_view name;
  std::string_view prefix;
};

constexpr KindInfo kKinds[kVarKindCount] = {
    {"x_bid", "xbid"},
    {"x_price", "xprice"},
    {"x_acc", "xacc"},
    {"z_soc", "zsoc"},
    {"z_dch", "zdch"},
    {"z_ch", "zch"},
    {"z_net", "znet"},
    {"s_dch", "slackdch"},
    {"s_ch", "slackch"},
    {"w_ok", "wok"},
    {"w_avail", "wavail"},
    {"w_spot_dch", "wspotdch"},
    {"w_spot_ch", "wspotch"},
    {"w_won_avail", "wwonavail"},
    {"w_lost_avail", "wlostavail"},
    {"w_won_spot_dch", "wwonspotdch"},
    {"w_lost_spot_dch", "wlostspotdch"},
    {"w_lost_spot_ch", "wlostspotch"},
    {"w_paid_spot_ch", "wpaidspotch"},
    {"w_energy", "wenergy"},
    {"s_soc_target_plus", "ssoctgtp"},
    {"s_soc_target_minus", "ssoctgtm"},
};

constexpr std::string_view kFamilies[kFamilyCount] = {
    "one_bid",
    "accept_implies_bid",
    "forced_acceptance",
    "acceptance_threshold",
    "bid_price_max",
    "bid_price_min",
    "conditional_zero",
    "dispatch_discharge",
    "dispatch_charge",
    "net_dispatch",
    "soc_balance",
    "fulfilment",
    "availability",
    "spot_discharge",
    "spot_charge",
    "won_availability",
    "lost_availability",
    "won_spot_discharge",
    "lost_spot_discharge",
    "lost_spot_charge",
    "paid_spot_charge",
    "energy_settlement",
    "soc_target",
};

std::string index_suffix(int s, int h, int t, int m) {
  std::string out;
  if (s >= 0) out += "_s" + std::to_string(s + 1);
  if (h >= 0) out += "_h" + std::to_string(h + 1);
  if (t >= 0) out += "_t" + std::to_string(t + 1);
  if (m >= 0) out += "_" + std::string(market_code(market_at(static_cast<std::size_t>(m))));
  return out;
}

}  // namespace

std::string_view var_kind_name(VarKind kind) { return kKinds[static_cast<int>(kind)].name; }

std::string_view family_name(Family f) { return kFamilies[static_cast<int>(f)]; }

std::string VariableId::name() const {
  return std::string(kKinds[static_cast<int>(kind)].prefix) + index_suffix(s, h, t, m);
}

int MilpModel::add_variable(const VariableId& id, Domain domain, double lb, double ub) {
  Variable v{id, domain, lb, ub, id.name()};
  if (v.name.size() > kMaxNameLength) throw BuildError("variable name too long: " + v.name);
  if (domain == Domain::Binary && !(lb >= 0.0 && ub <= 1.0 && lb == std::floor(lb) && ub == std::floor(ub))) {
    throw BuildError("binary " + v.name + " has fractional bounds");
  }
  if (lb > ub) throw BuildError("variable " + v.name + " has empty domain");
  const int idx = static_cast<int>(variables_.size());
  if (!index_.emplace(id, idx).second) throw BuildError("duplicate variable " + v.name);
  variables_.push_back(std::move(v));
  objective_.push_back(0.0);
  return idx;
}

void MilpModel::add_constraint(LinearConstraint c) {
  if (c.name.size() > kMaxNameLength) throw BuildError("constraint name too long: " + c.name);
  if (c.terms.empty()) throw BuildError("constraint " + c.name + " has no terms");
  for (const Term& term : c.terms) {
    if (term.var < 0 || term.var >= static_cast<int>(variables_.size())) {
      throw BuildError("constraint " + c.name + " references an undeclared variable");
    }
    if (!std::isfinite(term.coef)) throw BuildError("constraint " + c.name + " has a non-finite coefficient");
  }
  if (!std::isfinite(c.rhs)) throw BuildError("constraint " + c.name + " has a non-finite right-hand side");
  constraints_.push_back(std::move(c));
}

std::optional<int> MilpModel::find(const VariableId& id) const {
  if (auto it = index_.find(id); it != index_.end()) return it->second;
  return std::nullopt;
}

int MilpModel::at(const VariableId& id) const {
  if (auto idx = find(id)) return *idx;
  throw BuildError("undeclared variable " + id.name());
}

double MilpModel::evaluate_objective(std::span<const double> x) const {
  double total = 0.0;
  for (std::size_t j = 0; j < objective_.size(); ++j) total += objective_[j] * x[j];
  return total;
}

double MilpModel::activity(const LinearConstraint& c, std::span<const double> x) {
  double total = 0.0;
  for (const Term& term : c.terms) total += term.coef * x[term.var];
  return total;
}

namespace {

// Collects the model in canonical order: variables grouped by kind, then
// constraints grouped by family, each in lexicographic index order.
class Builder {
 public:
  Builder(const ScenarioSet& scenarios, const EnergyRequirement& req, const DegradationSchedule& deg,
          const BessConfig& config, const FormulationOptions& options)
      : sc_(scenarios), req_(req), deg_(deg), cfg_(config), opt_(options) {
    S_ = static_cast<int>(scenarios.size());
    H_ = scenarios.horizon_hours();
    T_ = scenarios.steps();
    per_hour_ = scenarios.steps_per_hour();
  }

  MilpModel build() {
    check_dimensions();
    model_.dims = {S_, H_, T_, static_cast<int>(kMarketCount), sc_.step_minutes()};
    model_.bid_max = resolved_bid_max(cfg_, sc_);
    model_.big_m = tight_big_m(cfg_, sc_, req_);
    model_.options = opt_;
    for (const Scenario& s : sc_.scenarios()) model_.probabilities.push_back(s.probability);
    declare_variables();
    bidding_constraints();
    dispatch_constraints();
    payment_constraints();
    objective();
    return std::move(model_);
  }

 private:
  static constexpr int M_ = static_cast<int>(kMarketCount);

  void check_dimensions() const {
    cfg_.validate();
    if (cfg_.step_minutes != sc_.step_minutes()) {
      throw BuildError("dispatch families: config step_minutes " + std::to_string(cfg_.step_minutes) +
                       " differs from scenario resolution " + std::to_string(sc_.step_minutes()));
    }
    if (req_.scenarios() != S_ || req_.steps() != T_ || req_.step_minutes() != sc_.step_minutes()) {
      throw BuildError("dispatch families: energy requirement dimensions do not match the scenario set");
    }
    if (deg_.scenarios() != S_ || deg_.steps() != T_) {
      throw BuildError("objective degradation terms: schedule dimensions do not match the scenario set");
    }
    if (opt_.soc_target) {
      const auto& tgt = *opt_.soc_target;
      if (!(tgt.weight >= 0.0) || !(tgt.target_mwh >= cfg_.e_min && tgt.target_mwh <= cfg_.e_max)) {
        throw BuildError("soc_target: target must lie in [e_min, e_max] with weight >= 0");
      }
    }
  }

  int var(VarKind k, int s = -1, int h = -1, int t = -1, int m = -1) const {
    return model_.at(VariableId{k, s, h, t, m});
  }
  int add(VarKind k, Domain d, double lb, double ub, int s = -1, int h = -1, int t = -1, int m = -1) {
    return model_.add_variable(VariableId{k, s, h, t, m}, d, lb, ub);
  }
  void row(Family f, std::string name, std::vector<Term> terms, Sense sense, double rhs) {
    model_.add_constraint(LinearConstraint{std::move(terms), sense, rhs, f, std::move(name)});
  }

  double threshold(int s, int h, Market m) const { return sc_[s].prices.threshold_price(h, m); }

  bool soc_target_enabled() const { return opt_.soc_target && opt_.soc_target->weight > 0.0; }

  void declare_variables() {
    for (int h = 0; h < H_; ++h) {
      for (int m = 0; m < M_; ++m) {
        const bool enabled = opt_.markets.contains(market_at(m));
        add(VarKind::XBid, Domain::Binary, 0.0, enabled ? 1.0 : 0.0, -1, h, -1, m);
      }
    }
    for (int h = 0; h < H_; ++h) add(VarKind::XPrice, Domain::NonNegative, 0.0, kInf, -1, h);

    for (int s = 0; s < S_; ++s)
      for (int h = 0; h < H_; ++h)
        for (int m = 0; m < M_; ++m) add(VarKind::XAcc, Domain::Binary, 0.0, 1.0, s, h, -1, m);
    for (int s = 0; s < S_; ++s)
      for (int t = 0; t < T_; ++t)
        add(VarKind::ZSoc, Domain::NonNegative, cfg_.e_min, cfg_.e_max, s, -1, t);

    const VarKind per_step[] = {VarKind::ZDch, VarKind::ZCh, VarKind::ZNet, VarKind::SDch, VarKind::SCh};
    for (VarKind k : per_step) {
      const bool free = k == VarKind::ZNet;
      for (int s = 0; s < S_; ++s)
        for (int t = 0; t < T_; ++t)
          for (int m = 0; m < M_; ++m)
            add(k, free ? Domain::Free : Domain::NonNegative, free ? -kInf : 0.0, kInf, s, -1, t, m);
    }

    for (int s = 0; s < S_; ++s)
      for (int h = 0; h < H_; ++h) add(VarKind::WOk, Domain::Binary, 0.0, 1.0, s, h);

    const VarKind hourly[] = {VarKind::WAvail,      VarKind::WSpotDch,     VarKind::WSpotCh,
                              VarKind::WWonAvail,   VarKind::WLostAvail,   VarKind::WWonSpotDch,
                              VarKind::WLostSpotDch, VarKind::WLostSpotCh, VarKind::WPaidSpotCh,
                              VarKind::WEnergy};
    for (VarKind k : hourly) {
      const bool free = k == VarKind::WEnergy && !opt_.nonnegative_energy_settlement;
      const double ub = (k == VarKind::WAvail && model_.big_m.avail == 0.0) ? 0.0 : kInf;
      for (int s = 0; s < S_; ++s)
        for (int h = 0; h < H_; ++h)
          add(k, free ? Domain::Free : Domain::NonNegative, free ? -kInf : 0.0, ub, s, h);
    }

    if (soc_target_enabled()) {
      for (VarKind k : {VarKind::SocTargetPlus, VarKind::SocTargetMinus})
        for (int s = 0; s < S_; ++s)
          for (int h = 0; h + 1 < H_; ++h)
            add(k, Domain::NonNegative, 0.0, kInf, s, -1, last_step(h));
    }
  }

  int last_step(int h) const { return (h + 1) * per_hour_ - 1; }

  void bidding_constraints() {
    const double big = model_.big_m.price;
    for (int h = 0; h < H_; ++h) {
      std::vector<Term> terms;
      for (int m = 0; m < M_; ++m) terms.push_back({var(VarKind::XBid, -1, h, -1, m), 1.0});
      row(Family::OneBid, "onebid" + index_suffix(-1, h, -1, -1), std::move(terms), Sense::LessEqual, 1.0);
    }
    for (int s = 0; s < S_; ++s)
      for (int h = 0; h < H_; ++h)
        for (int m = 0; m < M_; ++m)
          row(Family::AcceptImpliesBid, "accbid" + index_suffix(s, h, -1, m),
              {{var(VarKind::XAcc, s, h, -1, m), 1.0}, {var(VarKind::XBid, -1, h, -1, m), -1.0}},
              Sense::LessEqual, 0.0);
    for (int s = 0; s < S_; ++s)
      for (int h = 0; h < H_; ++h) {
        std::vector<Term> terms;
        for (int m = 0; m < M_; ++m) {
          const double p = threshold(s, h, market_at(m));
          if (p != 0.0) terms.push_back({var(VarKind::XBid, -1, h, -1, m), p});
        }
        terms.push_back({var(VarKind::XPrice, -1, h), -1.0});
        for (int m = 0; m < M_; ++m) terms.push_back({var(VarKind::XAcc, s, h, -1, m), -big});
        row(Family::ForcedAcceptance, "forceacc" + index_suffix(s, h, -1, -1), std::move(terms),
            Sense::LessEqual, 0.0);
      }
    for (int s = 0; s < S_; ++s)
      for (int h = 0; h < H_; ++h)
        for (int m = 0; m < M_; ++m)
          row(Family::AcceptanceThreshold, "accthr" + index_suffix(s, h, -1, m),
              {{var(VarKind::XPrice, -1, h), 1.0}, {var(VarKind::XAcc, s, h, -1, m), big}}, Sense::LessEqual,
              threshold(s, h, market_at(m)) + big);
    for (int h = 0; h < H_; ++h)
      row(Family::BidPriceMax, "pricemax" + index_suffix(-1, h, -1, -1), {{var(VarKind::XPrice, -1, h), 1.0}},
          Sense::LessEqual, model_.bid_max);
    for (int h = 0; h < H_; ++h) {
      std::vector<Term> terms{{var(VarKind::XPrice, -1, h), 1.0}};
      if (cfg_.bid_min != 0.0)
        for (int m = 0; m < M_; ++m) terms.push_back({var(VarKind::XBid, -1, h, -1, m), -cfg_.bid_min});
      row(Family::BidPriceMin, "pricemin" + index_suffix(-1, h, -1, -1), std::move(terms), Sense::GreaterEqual,
          0.0);
    }
  }

  void dispatch_constraints() {
    const DroopCurve curves[2] = {DroopCurve::fcr_n(cfg_.p_max), DroopCurve::fcr_d(cfg_.p_max)};
    for (int s = 0; s < S_; ++s)
      for (int t = 0; t < T_; ++t)
        for (int m = 0; m < 2; ++m) {
          if (!(sc_[s].frequency.samples[t] > curves[m].f2)) continue;
          const std::string suffix = index_suffix(s, -1, t, m);
          row(Family::ConditionalZero, "condzero" + suffix, {{var(VarKind::ZDch, s, -1, t, m), 1.0}}, Sense::Equal,
              0.0);
          if (opt_.strict_conditional_zero) {
            row(Family::ConditionalZero, "condzeroch" + suffix, {{var(VarKind::ZCh, s, -1, t, m), 1.0}},
                Sense::Equal, 0.0);
            row(Family::ConditionalZero, "condzeronet" + suffix, {{var(VarKind::ZNet, s, -1, t, m), 1.0}},
                Sense::Equal, 0.0);
          }
        }

    for (int s = 0; s < S_; ++s)
      for (int t = 0; t < T_; ++t)
        for (int m = 0; m < M_; ++m) {
          const int h = hour_index(t, sc_.step_minutes());
          const double e = req_.discharge(s, t, market_at(m));
          std::vector<Term> terms{{var(VarKind::ZDch, s, -1, t, m), 1.0}, {var(VarKind::SDch, s, -1, t, m), 1.0}};
          if (e != 0.0) terms.push_back({var(VarKind::XAcc, s, h, -1, m), -e});
          row(Family::DispatchDischarge, "dispdch" + index_suffix(s, -1, t, m), std::move(terms), Sense::Equal,
              0.0);
        }
    for (int s = 0; s < S_; ++s)
      for (int t = 0; t < T_; ++t)
        for (int m = 0; m < M_; ++m) {
          const int h = hour_index(t, sc_.step_minutes());
          const double e = req_.charge(s, t, market_at(m));
          std::vector<Term> terms{{var(VarKind::ZCh, s, -1, t, m), 1.0}, {var(VarKind::SCh, s, -1, t, m), 1.0}};
          if (e != 0.0) terms.push_back({var(VarKind::XAcc, s, h, -1, m), -e});
          row(Family::DispatchCharge, "dispch" + index_suffix(s, -1, t, m), std::move(terms), Sense::Equal, 0.0);
        }
    for (int s = 0; s < S_; ++s)
      for (int t = 0; t < T_; ++t)
        for (int m = 0; m < M_; ++m)
          row(Family::NetDispatch, "net" + index_suffix(s, -1, t, m),
              {{var(VarKind::ZNet, s, -1, t, m), 1.0},
               {var(VarKind::ZDch, s, -1, t, m), -1.0},
               {var(VarKind::ZCh, s, -1, t, m), 1.0}},
              Sense::Equal, 0.0);

    // SOC after step t; the level before the first step is the constant M_0.
    for (int s = 0; s < S_; ++s)
      for (int t = 0; t < T_; ++t) {
        std::vector<Term> terms{{var(VarKind::ZSoc, s, -1, t), 1.0}};
        if (t > 0) terms.push_back({var(VarKind::ZSoc, s, -1, t - 1), -1.0});
        for (int m = 0; m < M_; ++m) terms.push_back({var(VarKind::ZNet, s, -1, t, m), 1.0});
        row(Family::SocBalance, "soc" + index_suffix(s, -1, t, -1), std::move(terms), Sense::Equal,
            t == 0 ? cfg_.m_0 : 0.0);
      }

    const double big = model_.big_m.slack;
    for (int s = 0; s < S_; ++s)
      for (int h = 0; h < H_; ++h) {
        std::vector<Term> terms;
        for (int m = 0; m < M_; ++m)
          for (int t = h * per_hour_; t < (h + 1) * per_hour_; ++t) {
            terms.push_back({var(VarKind::SDch, s, -1, t, m), 1.0});
            terms.push_back({var(VarKind::SCh, s, -1, t, m), 1.0});
          }
        terms.push_back({var(VarKind::WOk, s, h), big});
        row(Family::Fulfilment, "fulfil" + index_suffix(s, h, -1, -1), std::move(terms), Sense::LessEqual, big);
      }
  }

  // Three-inequality envelope of w = (constant + expr) * factor, where factor
  // is a sum of binaries or its complement.
  void envelope(Family f, const std::string& stem, int s, int h, int w, double constant,
                const std::vector<Term>& expr, const std::vector<int>& factor, bool complement, double big) {
    const std::string suffix = index_suffix(s, h, -1, -1);
    // w <= constant + expr
    {
      std::vector<Term> terms{{w, 1.0}};
      for (const Term& e : expr) terms.push_back({e.var, -e.coef});
      row(f, stem + "1" + suffix, std::move(terms), Sense::LessEqual, constant);
    }
    // w <= M * factor
    {
      std::vector<Term> terms{{w, 1.0}};
      for (int b : factor) terms.push_back({b, complement ? big : -big});
      row(f, stem + "2" + suffix, std::move(terms), Sense::LessEqual, complement ? big : 0.0);
    }
    // w >= constant + expr - M * (1 - factor)
    {
      std::vector<Term> terms{{w, 1.0}};
      for (const Term& e : expr) terms.push_back({e.var, -e.coef});
      for (int b : factor) terms.push_back({b, complement ? big : -big});
      row(f, stem + "3" + suffix, std::move(terms), Sense::GreaterEqual, constant + (complement ? 0.0 : -big));
    }
    model_.add_product(LinearizedProduct{w, constant, expr, factor, complement});
  }

  void payment_constraints() {
    const BigM& big = model_.big_m;
    const int sdch = static_cast<int>(index(Market::SpotDischarge));
    const int sch = static_cast<int>(index(Market::SpotCharge));

    auto freq_acceptance = [&](int s, int h) {
      return std::vector<int>{var(VarKind::XAcc, s, h, -1, 0), var(VarKind::XAcc, s, h, -1, 1)};
    };

    for (int s = 0; s < S_; ++s)
      for (int h = 0; h < H_; ++h)
        envelope(Family::Availability, "avail", s, h, var(VarKind::WAvail, s, h), 0.0,
                 {{var(VarKind::XPrice, -1, h), cfg_.p_max}}, freq_acceptance(s, h), false, big.avail);
    for (int s = 0; s < S_; ++s)
      for (int h = 0; h < H_; ++h)
        envelope(Family::SpotDischarge, "spotdch", s, h, var(VarKind::WSpotDch, s, h),
                 cfg_.e_spot * threshold(s, h, Market::SpotDischarge), {}, {var(VarKind::XAcc, s, h, -1, sdch)},
                 false, big.spot);
    for (int s = 0; s < S_; ++s)
      for (int h = 0; h < H_; ++h)
        envelope(Family::SpotCharge, "spotch", s, h, var(VarKind::WSpotCh, s, h),
                 cfg_.e_spot * threshold(s, h, Market::SpotCharge), {}, {var(VarKind::XAcc, s, h, -1, sch)}, false,
                 big.spot);

    for (int s = 0; s < S_; ++s)
      for (int h = 0; h < H_; ++h)
        envelope(Family::WonAvailability, "wonavail", s, h, var(VarKind::WWonAvail, s, h), 0.0,
                 {{var(VarKind::WAvail, s, h), 1.0}}, {var(VarKind::WOk, s, h)}, false, big.avail);
    for (int s = 0; s < S_; ++s)
      for (int h = 0; h < H_; ++h)
        envelope(Family::LostAvailability, "lostavail", s, h, var(VarKind::WLostAvail, s, h), 0.0,
                 {{var(VarKind::WAvail, s, h), 1.0}}, {var(VarKind::WOk, s, h)}, true, big.avail);
    for (int s = 0; s < S_; ++s)
      for (int h = 0; h < H_; ++h)
        envelope(Family::WonSpotDischarge, "wonspotdch", s, h, var(VarKind::WWonSpotDch, s, h), 0.0,
                 {{var(VarKind::WSpotDch, s, h), 1.0}}, {var(VarKind::WOk, s, h)}, false, big.spot);
    for (int s = 0; s < S_; ++s)
      for (int h = 0; h < H_; ++h)
        envelope(Family::LostSpotDischarge, "lostspotdch", s, h, var(VarKind::WLostSpotDch, s, h), 0.0,
                 {{var(VarKind::XAcc, s, h, -1, sdch), cfg_.e_spot * sc_[s].prices.balancing_up[h]}},
                 {var(VarKind::WOk, s, h)}, true, big.pen_up);
    for (int s = 0; s < S_; ++s)
      for (int h = 0; h < H_; ++h)
        envelope(Family::LostSpotCharge, "lostspotch", s, h, var(VarKind::WLostSpotCh, s, h), 0.0,
                 {{var(VarKind::XAcc, s, h, -1, sch), cfg_.e_spot * sc_[s].prices.balancing_down[h]}},
                 {var(VarKind::WOk, s, h)}, true, big.pen_dn);
    for (int s = 0; s < S_; ++s)
      for (int h = 0; h < H_; ++h)
        envelope(Family::PaidSpotCharge, "paidspotch", s, h, var(VarKind::WPaidSpotCh, s, h), 0.0,
                 {{var(VarKind::WSpotCh, s, h), 1.0}}, {var(VarKind::WOk, s, h)}, false, big.spot);

    for (int s = 0; s < S_; ++s)
      for (int h = 0; h < H_; ++h) {
        std::vector<Term> terms{{var(VarKind::WEnergy, s, h), 1.0}};
        const double up = sc_[s].prices.balancing_up[h];
        const double down = sc_[s].prices.balancing_down[h];
        for (int m = 0; m < 2; ++m)
          for (int t = h * per_hour_; t < (h + 1) * per_hour_; ++t) {
            if (up != 0.0) terms.push_back({var(VarKind::ZDch, s, -1, t, m), -up});
            if (down != 0.0) terms.push_back({var(VarKind::ZCh, s, -1, t, m), down});
          }
        row(Family::EnergySettlement, "energy" + index_suffix(s, h, -1, -1), std::move(terms), Sense::Equal, 0.0);
      }

    if (soc_target_enabled()) {
      for (int s = 0; s < S_; ++s)
        for (int h = 0; h + 1 < H_; ++h) {
          const int t = last_step(h);
          row(Family::SocTarget, "soctarget" + index_suffix(s, -1, t, -1),
              {{var(VarKind::ZSoc, s, -1, t), 1.0},
               {var(VarKind::SocTargetPlus, s, -1, t), -1.0},
               {var(VarKind::SocTargetMinus, s, -1, t), 1.0}},
              Sense::Equal, opt_.soc_target->target_mwh);
        }
    }
  }

  void objective() {
    for (int s = 0; s < S_; ++s) {
      const double p = sc_[s].probability;
      for (int h = 0; h < H_; ++h) {
        model_.add_objective(var(VarKind::WWonAvail, s, h), p);
        model_.add_objective(var(VarKind::WWonSpotDch, s, h), p);
        model_.add_objective(var(VarKind::WPaidSpotCh, s, h), -p);
        model_.add_objective(var(VarKind::WLostAvail, s, h), -p);
        model_.add_objective(var(VarKind::WLostSpotDch, s, h), -p);
        model_.add_objective(var(VarKind::WLostSpotCh, s, h), -p);
        model_.add_objective(var(VarKind::WEnergy, s, h), p);
        for (int m = 0; m < M_; ++m) {
          const double cost = deg_.hourly_cost(s, h, market_at(m));
          if (cost != 0.0) model_.add_objective(var(VarKind::XAcc, s, h, -1, m), -p * cost);
        }
      }
      if (soc_target_enabled()) {
        const double w = opt_.soc_target->weight;
        for (int h = 0; h + 1 < H_; ++h) {
          model_.add_objective(var(VarKind::SocTargetPlus, s, -1, last_step(h)), -p * w);
          model_.add_objective(var(VarKind::SocTargetMinus, s, -1, last_step(h)), -p * w);
        }
      }
    }
  }

  const ScenarioSet& sc_;
  const EnergyRequirement& req_;
  const DegradationSchedule& deg_;
  const BessConfig& cfg_;
  const FormulationOptions& opt_;
  int S_ = 0, H_ = 0, T_ = 0, per_hour_ = 1;
  MilpModel model_;
};

}  // namespace

MilpModel build_model(const ScenarioSet& scenarios, const EnergyRequirement& req, const DegradationSchedule& deg,
                      const BessConfig& config, const FormulationOptions& options) {
  return Builder(scenarios, req, deg, config, options).build();
}

Census census(const MilpModel& model) {
  Census c;
  for (const Variable& v : model.variables()) {
    ++c.variables[v.id.kind];
    if (v.domain == Domain::Binary) ++c.binaries;
  }
  for (const LinearConstraint& row : model.constraints()) {
    ++c.constraints[row.family];
    c.nonzeros += static_cast<int>(row.terms.size());
  }
  c.total_variables = static_cast<int>(model.variables().size());
  c.total_constraints = static_cast<int>(model.constraints().size());
  return c;
}

nlohmann::json model_summary(const MilpModel& model) {
  const Census c = census(model);
  nlohmann::json vars = nlohmann::json::object();
  for (const auto& [kind, n] : c.variables) vars[std::string(var_kind_name(kind))] = n;
  nlohmann::json rows = nlohmann::json::object();
  for (const auto& [family, n] : c.constraints) rows[std::string(family_name(family))] = n;
  return {
      {"dimensions",
       {{"scenarios", model.dims.scenarios},
        {"hours", model.dims.hours},
        {"steps", model.dims.steps},
        {"markets", model.dims.markets},
        {"step_minutes", model.dims.step_minutes}}},
      {"big_m",
       {{"avail", model.big_m.avail},
        {"spot", model.big_m.spot},
        {"pen_up", model.big_m.pen_up},
        {"pen_dn", model.big_m.pen_dn},
        {"price", model.big_m.price},
        {"slack", model.big_m.slack}}},
      {"bid_max", model.bid_max},
      {"markets", model.options.markets.to_string()},
      {"census",
       {{"variables", vars},
        {"constraints", rows},
        {"total_variables", c.total_variables},
        {"total_constraints", c.total_constraints},
        {"binaries", c.binaries},
        {"nonzeros", c.nonzeros}}},
  };
}

}  // namespace bess
