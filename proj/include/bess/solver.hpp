#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bess/formulation.hpp"

namespace bess {

enum class SolveStatus : std::uint8_t { Optimal, Infeasible, BoundLimit };

std::string_view to_string(SolveStatus s);

enum class BranchingRule : std::uint8_t {
  MostFractional,  ///< cascade x_bid, x_acc, w_ok; most fractional inside a class
  FirstFractional  ///< lowest-index fractional binary
};

struct SolverOptions {
  double abs_gap = 1e-6;
  double integrality_tol = 1e-6;
  long node_limit = 2'000'000;
  double time_limit_seconds = 3600.0;
  BranchingRule branching = BranchingRule::MostFractional;
  bool deterministic = true;
  /// Domain propagation of binary fixings through the rows at every node.
  bool propagate = true;
  /// Rounds of Gomory cuts added to the root relaxation; 0 disables them.
  int cut_rounds = 30;
  /// Called after every improved incumbent with (objective, bound, nodes).
  std::function<void(double, double, long)> on_incumbent;

  void validate() const;
};

struct Solution {
  std::vector<double> values;  ///< indexed like MilpModel::variables()
  double objective = 0.0;
  SolveStatus status = SolveStatus::Infeasible;
  double gap = 0.0;         ///< best bound minus incumbent
  double root_bound = 0.0;  ///< root LP relaxation value
  long node_count = 0;
  long lp_iterations = 0;
  double wall_time = 0.0;  ///< seconds

  double value(const MilpModel& model, const VariableId& id) const { return values.at(model.at(id)); }
};

/// Best-first branch-and-bound with plunging over the bounded simplex.
Solution solve_bb(const MilpModel& model, const SolverOptions& options = {});

struct Violation {
  std::string what;  ///< row, variable, or product name
  std::string family;
  double amount = 0.0;
};

/// Every bound, integrality, row, or linearised-product violation beyond tol.
std::vector<Violation> validate(const Solution& solution, const MilpModel& model, double tol = 1e-6);

/// Objective, status, per-hour decisions, per-step dispatch and SOC.
nlohmann::json solution_json(const Solution& solution, const MilpModel& model);

}  // namespace bess
