#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bess/config.hpp"
#include "bess/droop.hpp"
#include "bess/market.hpp"
#include "bess/market_model.hpp"
#include "bess/scenario.hpp"

namespace bess {

/// Every variable family of the bidding MILP.
enum class VarKind : std::uint8_t {
  XBid,          ///< [h][m] submit a bid
  XPrice,        ///< [h] bid price shared by the hour's bid
  XAcc,          ///< [s][h][m] bid accepted
  ZSoc,          ///< [s][t] state of charge after step t
  ZDch,          ///< [s][t][m] delivered discharge
  ZCh,           ///< [s][t][m] delivered charge
  ZNet,          ///< [s][t][m] net discharge
  SDch,          ///< [s][t][m] undelivered discharge
  SCh,           ///< [s][t][m] undelivered charge
  WOk,           ///< [s][h] obligation fulfilled
  WAvail,        ///< [s][h] availability payment
  WSpotDch,      ///< [s][h] spot sale revenue
  WSpotCh,       ///< [s][h] spot purchase cost
  WWonAvail,     ///< [s][h] availability payment kept
  WLostAvail,    ///< [s][h] availability payment forfeited
  WWonSpotDch,   ///< [s][h] spot sale revenue kept
  WLostSpotDch,  ///< [s][h] penalty for an undelivered sale
  WLostSpotCh,   ///< [s][h] penalty for an undelivered purchase
  WPaidSpotCh,   ///< [s][h] spot purchase cost paid on delivery
  WEnergy,       ///< [s][h] balancing settlement of activated energy
  SocTargetPlus,   ///< [s][t] end-of-hour SOC above target
  SocTargetMinus,  ///< [s][t] end-of-hour SOC below target
};

inline constexpr int kVarKindCount = 22;

std::string_view var_kind_name(VarKind kind);

enum class Domain : std::uint8_t { Binary, NonNegative, Free };

/// Kind plus 0-based indices; unused indices stay -1.
struct VariableId {
  VarKind kind{};
  int s = -1;
  int h = -1;
  int t = -1;
  int m = -1;

  /// Solver-safe name such as `xacc_s1_h3_FCRN` (1-based indices).
  std::string name() const;

  auto operator<=>(const VariableId&) const = default;
};

/// Constraint families, in canonical emission order.
enum class Family : std::uint8_t {
  OneBid,
  AcceptImpliesBid,
  ForcedAcceptance,
  AcceptanceThreshold,
  BidPriceMax,
  BidPriceMin,
  ConditionalZero,
  DispatchDischarge,
  DispatchCharge,
  NetDispatch,
  SocBalance,
  Fulfilment,
  Availability,
  SpotDischarge,
  SpotCharge,
  WonAvailability,
  LostAvailability,
  WonSpotDischarge,
  LostSpotDischarge,
  LostSpotCharge,
  PaidSpotCharge,
  EnergySettlement,
  SocTarget,
};

inline constexpr int kFamilyCount = 23;

std::string_view family_name(Family f);

enum class Sense : std::uint8_t { LessEqual, Equal, GreaterEqual };

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct LinearConstraint {
  std::vector<Term> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
  Family family{};
  std::string name;
};

struct Variable {
  VariableId id;
  Domain domain = Domain::NonNegative;
  double lb = 0.0;
  double ub = 0.0;
  std::string name;
};

/// w = (constant + Σ expr) · factor, where factor is Σ factor_vars or
/// 1 − Σ factor_vars. Recorded for every Big-M linearised variable.
struct LinearizedProduct {
  int result = 0;
  double constant = 0.0;
  std::vector<Term> expr;
  std::vector<int> factor_vars;
  bool complement = false;
};

struct Dimensions {
  int scenarios = 0;
  int hours = 0;
  int steps = 0;
  int markets = static_cast<int>(kMarketCount);
  int step_minutes = 0;
};

struct SocTargetOption {
  double target_mwh = 0.0;
  double weight = 0.0;  ///< EUR per MWh of deviation
};

struct FormulationOptions {
  /// Bids in other markets are fixed to zero.
  MarketSet markets = MarketSet::all();
  /// Also zero charge and net dispatch above f2, as written in the
  /// original constraint block. Forces every down-activation to fail.
  bool strict_conditional_zero = false;
  /// Declare the balancing settlement variable nonnegative.
  bool nonnegative_energy_settlement = false;
  std::optional<SocTargetOption> soc_target;
};

/// Solver-agnostic maximisation MILP.
class MilpModel {
 public:
  int add_variable(const VariableId& id, Domain domain, double lb, double ub);
  void add_constraint(LinearConstraint c);
  void add_objective(int var, double coef) { objective_.at(var) += coef; }
  void add_product(LinearizedProduct p) { products_.push_back(std::move(p)); }

  std::span<const Variable> variables() const { return variables_; }
  std::span<const LinearConstraint> constraints() const { return constraints_; }
  std::span<const double> objective() const { return objective_; }
  std::span<const LinearizedProduct> products() const { return products_; }

  std::optional<int> find(const VariableId& id) const;
  /// Throws BuildError for undeclared ids.
  int at(const VariableId& id) const;

  double evaluate_objective(std::span<const double> x) const;
  static double activity(const LinearConstraint& c, std::span<const double> x);

  Dimensions dims;
  BigM big_m;
  double bid_max = 0.0;
  FormulationOptions options;
  std::vector<double> probabilities;

 private:
  std::vector<Variable> variables_;
  std::vector<LinearConstraint> constraints_;
  std::vector<double> objective_;
  std::vector<LinearizedProduct> products_;
  std::map<VariableId, int> index_;
};

MilpModel build_model(const ScenarioSet& scenarios, const EnergyRequirement& req,
                      const DegradationSchedule& deg, const BessConfig& config,
                      const FormulationOptions& options = {});

struct Census {
  std::map<VarKind, int> variables;
  std::map<Family, int> constraints;
  int total_variables = 0;
  int total_constraints = 0;
  int binaries = 0;
  int nonzeros = 0;
};

Census census(const MilpModel& model);

/// Census, Big-M values and dimensions.
nlohmann::json model_summary(const MilpModel& model);

enum class ExportFormat { Mps, Lp };

/// Fixed-column MPS (maximisation declared in OBJSENSE) or CPLEX LP text.
void write_mps(const MilpModel& model, std::ostream& out);
void write_lp(const MilpModel& model, std::ostream& out);
void export_model(const MilpModel& model, ExportFormat format, const std::filesystem::path& path);

}  // namespace bess
