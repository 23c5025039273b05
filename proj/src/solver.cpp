#include "bess/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <span>

#include "bess/errors.hpp"
#include "bess/lp.hpp"
#include "cuts.hpp"
#include "presolve.hpp"

namespace bess {

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::BoundLimit:
      return "bound-limit";
  }
  return "?";
}

void SolverOptions::validate() const {
  if (!(abs_gap > 0.0) || !(integrality_tol > 0.0) || integrality_tol >= 0.5) {
    throw ValidationError("solver options: tolerances must be positive");
  }
  if (node_limit <= 0 || !(time_limit_seconds > 0.0)) {
    throw ValidationError("solver options: node and time limits must be positive");
  }
}

namespace {

using detail::kInf;
using detail::Row;
constexpr int kWarnBinaries = 5000;
constexpr int kProbingRounds = 2;

std::vector<Row> model_rows(const MilpModel& model) {
  std::vector<Row> rows;
  for (const LinearConstraint& c : model.constraints()) {
    Row r;
    r.terms = c.terms;
    if (c.sense != Sense::GreaterEqual) r.upper = c.rhs;
    if (c.sense != Sense::LessEqual) r.lower = c.rhs;
    std::vector<int> seen;
    for (const Term& t : c.terms) seen.push_back(t.var);
    std::sort(seen.begin(), seen.end());
    // each variable may appear once per row
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
      throw BuildError("row " + c.name + " lists a variable twice");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

int branch_class(VarKind k) {
  switch (k) {
    case VarKind::XBid:
      return 0;
    case VarKind::XAcc:
      return 1;
    case VarKind::WOk:
      return 2;
    default:
      return 3;
  }
}

// A block of the model that shares no row with any other block once the
// presolved fixings are substituted. Indices are local.
struct Block {
  std::vector<int> cols;  // local -> model column
  std::vector<Row> rows;
  std::vector<double> lo, up;            // bounds handed to the LP
  std::vector<double> glob_lo, glob_up;  // after root propagation
  std::vector<double> cost;              // maximised
  std::vector<char> binary;
  std::vector<int> cls;
  std::vector<double> idle;  // value of each binary in the no-bid schedule
};

lp::Problem to_lp(const Block& b) {
  const int n = static_cast<int>(b.cols.size());
  const int m = static_cast<int>(b.rows.size());
  lp::Problem p;
  p.a.rows = m;
  p.a.cols = n;
  for (double c : b.cost) p.cost.push_back(-c);  // the simplex minimises
  p.col_lower = b.lo;
  p.col_upper = b.up;
  std::vector<int> count(n + 1, 0);
  for (const Row& r : b.rows) {
    p.row_lower.push_back(r.lower);
    p.row_upper.push_back(r.upper);
    for (const Term& t : r.terms) ++count[t.var + 1];
  }
  for (int j = 0; j < n; ++j) count[j + 1] += count[j];
  p.a.start = count;
  p.a.index.assign(count[n], 0);
  p.a.value.assign(count[n], 0.0);
  std::vector<int> fill(count.begin(), count.end() - 1);
  for (int i = 0; i < m; ++i) {
    for (const Term& t : b.rows[i].terms) {
      p.a.index[fill[t.var]] = i;
      p.a.value[fill[t.var]++] = t.coef;
    }
  }
  return p;
}

struct Presolved {
  bool infeasible = false;
  std::vector<double> fixed;  // model column -> value, NaN when free
  std::vector<Block> blocks;
};

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

Presolved presolve(const MilpModel& model, const SolverOptions& opt) {
  const auto vars = model.variables();
  const int n = static_cast<int>(vars.size());
  std::vector<Row> rows = model_rows(model);
  std::vector<char> binary(n);
  std::vector<double> lo(n), up(n);
  for (int j = 0; j < n; ++j) {
    binary[j] = vars[j].domain == Domain::Binary;
    lo[j] = vars[j].lb;
    up[j] = vars[j].ub;
  }
  Presolved out;
  if (opt.propagate) {
    detail::Propagator prop(rows, binary);
    out.infeasible = !prop.run(lo, up, {});
    if (!out.infeasible) out.infeasible = detail::tighten_big_m(rows, prop, lo, up, kProbingRounds).infeasible;
    if (out.infeasible) return out;
  }

  out.fixed.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (int j = 0; j < n; ++j) {
    if (lo[j] == up[j]) out.fixed[j] = lo[j];
  }
  auto is_fixed = [&](int j) { return !std::isnan(out.fixed[j]); };

  std::vector<int> parent(n);
  for (int j = 0; j < n; ++j) parent[j] = j;
  for (const Row& r : rows) {
    int first = -1;
    for (const Term& t : r.terms) {
      if (is_fixed(t.var)) continue;
      if (first < 0) first = find_root(parent, t.var);
      else parent[find_root(parent, t.var)] = first;
    }
  }

  std::vector<int> block_of(n, -1), local(n, -1);
  const auto obj = model.objective();
  for (int j = 0; j < n; ++j) {
    if (is_fixed(j)) continue;
    const int root = find_root(parent, j);
    if (block_of[root] < 0) {
      block_of[root] = static_cast<int>(out.blocks.size());
      out.blocks.emplace_back();
    }
    Block& b = out.blocks[block_of[root]];
    local[j] = static_cast<int>(b.cols.size());
    b.cols.push_back(j);
    b.glob_lo.push_back(lo[j]);
    b.glob_up.push_back(up[j]);
    // only binary fixings reach the LP; continuous bounds stay the model's
    b.lo.push_back(binary[j] ? lo[j] : vars[j].lb);
    b.up.push_back(binary[j] ? up[j] : vars[j].ub);
    b.cost.push_back(obj[j]);
    b.binary.push_back(binary[j]);
    b.cls.push_back(branch_class(vars[j].id.kind));
    b.idle.push_back(std::clamp(vars[j].id.kind == VarKind::WOk ? 1.0 : 0.0, lo[j], up[j]));
  }

  for (const Row& r : rows) {
    Row sub;
    sub.lower = r.lower;
    sub.upper = r.upper;
    double shift = 0.0;
    int block = -1;
    for (const Term& t : r.terms) {
      if (is_fixed(t.var)) {
        shift += t.coef * out.fixed[t.var];
      } else {
        sub.terms.push_back({local[t.var], t.coef});
        block = block_of[find_root(parent, t.var)];
      }
    }
    sub.lower -= shift;
    sub.upper -= shift;
    if (block < 0) {
      const double tol = 1e-6 * (1.0 + std::abs(shift));
      if (shift > r.upper + tol || shift < r.lower - tol) {
        out.infeasible = true;
        return out;
      }
      continue;
    }
    out.blocks[block].rows.push_back(std::move(sub));
  }
  return out;
}

struct Fixing {
  int var;
  bool one;
};

struct Node {
  double bound = kInf;  // parent LP value (maximisation)
  long seq = 0;
  std::vector<Fixing> fixings;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.seq > b.seq;
  }
};

using Clock = std::chrono::steady_clock;

class BranchAndBound {
 public:
  BranchAndBound(Block& block, const SolverOptions& opt, Clock::time_point deadline)
      : b_(block),
        opt_(opt),
        deadline_(deadline),
        prop_(std::make_unique<detail::Propagator>(block.rows, block.binary)),
        n_(static_cast<int>(block.cols.size())),
        applied_lo_(block.lo),
        applied_up_(block.up),
        simplex_(to_lp(block)) {
    for (int j = 0; j < n_; ++j)
      if (b_.binary[j]) binaries_.push_back(j);
  }

  // The idle schedule is always feasible: no bids, nothing accepted, every
  // hour trivially fulfilled.
  void seed_no_bid() {
    std::vector<double> lo = b_.lo, up = b_.up;
    for (int j : binaries_) lo[j] = up[j] = b_.idle[j];
    polish(lo, up);
    simplex_.reset_basis();
  }

  bool has_incumbent() const { return has_incumbent_; }
  double incumbent_value() const { return incumbent_obj_; }
  const std::vector<double>& incumbent() const { return incumbent_; }
  double best_bound() const { return best_bound_; }
  double root_bound() const { return root_bound_; }
  bool limit_hit() const { return limit_hit_; }
  long nodes() const { return nodes_; }
  long iterations() const { return simplex_.iterations(); }

  void set_incumbent_listener(std::function<void()> f) { listener_ = std::move(f); }

  void run(long node_budget) {
    if (!add_root_cuts()) {
      best_bound_ = incumbent_obj_;
      return;
    }
    Node root;
    root.seq = seq_++;
    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    bool root_done = false;

    std::optional<Node> next = std::move(root);
    while (true) {
      if (!next) {
        // drop nodes that cannot improve
        while (!open.empty() && open.top().bound <= incumbent_obj_ + opt_.abs_gap) open.pop();
        if (open.empty()) break;
        next = open.top();
        open.pop();
      }
      if (nodes_ >= node_budget || Clock::now() > deadline_) {
        open.push(std::move(*next));
        limit_hit_ = true;
        break;
      }
      Node node = std::move(*next);
      next.reset();
      ++nodes_;

      double value = 0.0;
      const NodeResult res = evaluate(node, value);
      if (!root_done) {
        root_done = true;
        if (res == NodeResult::Infeasible) root_bound_ = -kInf;
      }
      if (res != NodeResult::Open) continue;

      const auto x = simplex_.primal();
      const int j = select_branch(x);
      if (j < 0) {
        accept_integral();
        continue;
      }
      Node down{value, seq_++, node.fixings};
      down.fixings.push_back({j, false});
      Node up{value, seq_++, std::move(node.fixings)};
      up.fixings.push_back({j, true});
      // plunge into the child the relaxation leans towards
      if (x[j] >= 0.5) {
        open.push(std::move(down));
        next = std::move(up);
      } else {
        open.push(std::move(up));
        next = std::move(down);
      }
    }
    best_bound_ = incumbent_obj_;
    if (limit_hit_ && !open.empty()) best_bound_ = std::max(best_bound_, open.top().bound);
  }

 private:
  enum class NodeResult { Open, Pruned, Infeasible };

  // Cut-and-branch: strengthens the root relaxation with rounds of Gomory
  // cuts, then rebuilds the LP with them as ordinary rows. Returns false
  // when the root is already settled.
  bool add_root_cuts() {
    apply_bounds(b_.glob_lo, b_.glob_up);
    if (solve_lp() == lp::Status::Infeasible) {
      root_bound_ = -kInf;
      return false;
    }
    root_bound_ = -simplex_.objective();
    const int per_round = std::max(20, static_cast<int>(b_.rows.size()) / 20);
    const std::size_t cap = b_.rows.size() + std::max<std::size_t>(200, b_.rows.size() / 2);
    double last = root_bound_;
    int stalled = 0;
    for (int round = 0; round < opt_.cut_rounds && Clock::now() < deadline_; ++round) {
      if (last <= incumbent_obj_ + opt_.abs_gap) break;
      std::vector<Row> cuts = detail::gomory_cuts(simplex_, b_.rows, b_.binary, per_round);
      if (cuts.empty() || b_.rows.size() + cuts.size() > cap) break;
      lp::Basis basis = simplex_.basis();
      for (Row& c : cuts) {
        b_.rows.push_back(std::move(c));
        basis.state.push_back(lp::VarState::Basic);
      }
      simplex_ = lp::Simplex(to_lp(b_));
      for (int j : binaries_) simplex_.set_col_bounds(j, applied_lo_[j], applied_up_[j]);
      simplex_.set_basis(basis);
      if (solve_lp() == lp::Status::Infeasible) {
        best_bound_ = incumbent_obj_;
        return false;
      }
      const double value = -simplex_.objective();
      const double progress = std::max(1e-4 * (1.0 + std::abs(value)), 5e-3 * (value - incumbent_obj_));
      stalled = last - value < progress ? stalled + 1 : 0;
      last = value;
      if (stalled >= 3) break;
    }
    prop_ = std::make_unique<detail::Propagator>(b_.rows, b_.binary);
    return true;
  }

  void apply_bounds(const std::vector<double>& lo, const std::vector<double>& up) {
    for (int j : binaries_) {
      if (applied_lo_[j] != lo[j] || applied_up_[j] != up[j]) {
        simplex_.set_col_bounds(j, lo[j], up[j]);
        applied_lo_[j] = lo[j];
        applied_up_[j] = up[j];
      }
    }
  }

  lp::Status solve_lp() {
    lp::Status st = simplex_.solve();
    if (st == lp::Status::Numerical || st == lp::Status::IterationLimit) {
      simplex_.reset_basis();
      st = simplex_.solve();
    }
    if (st == lp::Status::Numerical || st == lp::Status::IterationLimit) {
      throw Error(std::string("LP relaxation failed: ") + lp::to_string(st));
    }
    if (st == lp::Status::Unbounded) throw Error("LP relaxation unbounded; the bidding model is malformed");
    return st;
  }

  bool node_bounds(const Node& node, std::vector<double>& lo, std::vector<double>& up) const {
    lo = b_.glob_lo;
    up = b_.glob_up;
    std::vector<int> seeds;
    for (const Fixing& f : node.fixings) {
      const double v = f.one ? 1.0 : 0.0;
      if (v < lo[f.var] || v > up[f.var]) return false;
      lo[f.var] = up[f.var] = v;
      seeds.push_back(f.var);
    }
    if (opt_.propagate && !seeds.empty() && !prop_->run(lo, up, seeds)) return false;
    return true;
  }

  NodeResult evaluate(const Node& node, double& value) {
    std::vector<double> lo, up;
    if (!node_bounds(node, lo, up)) return NodeResult::Infeasible;
    apply_bounds(lo, up);
    if (solve_lp() == lp::Status::Infeasible) return NodeResult::Infeasible;
    value = -simplex_.objective();
    if (has_incumbent_ && value <= incumbent_obj_ + opt_.abs_gap) return NodeResult::Pruned;
    return NodeResult::Open;
  }

  int select_branch(std::span<const double> x) const {
    int best = -1;
    int best_class = 4;
    double best_frac = 0.0;
    for (int j : binaries_) {
      const double frac = std::abs(x[j] - std::round(x[j]));
      if (frac <= opt_.integrality_tol) continue;
      if (opt_.branching == BranchingRule::FirstFractional) return j;
      if (b_.cls[j] < best_class || (b_.cls[j] == best_class && frac > best_frac + 1e-12)) {
        best = j;
        best_class = b_.cls[j];
        best_frac = frac;
      }
    }
    return best;
  }

  // Re-solves with every binary fixed at its rounded value so the continuous
  // part is exact, then records the incumbent if it improves.
  void accept_integral() {
    const auto x = simplex_.primal();
    std::vector<double> lo = applied_lo_, up = applied_up_;
    for (int j : binaries_) lo[j] = up[j] = std::round(x[j]);
    polish(lo, up);
  }

  void polish(const std::vector<double>& lo, const std::vector<double>& up) {
    const auto saved = simplex_.basis();
    const std::vector<double> keep_lo = applied_lo_, keep_up = applied_up_;
    apply_bounds(lo, up);
    if (solve_lp() == lp::Status::Optimal) {
      const auto x = simplex_.primal();
      std::vector<double> values(x.begin(), x.end());
      for (int j : binaries_) values[j] = lo[j];
      double obj = 0.0;
      for (int j = 0; j < n_; ++j) obj += b_.cost[j] * values[j];
      if (!has_incumbent_ || obj > incumbent_obj_) {
        incumbent_ = std::move(values);
        incumbent_obj_ = obj;
        has_incumbent_ = true;
        if (listener_) listener_();
      }
    }
    apply_bounds(keep_lo, keep_up);
    simplex_.set_basis(saved);
  }

  Block& b_;
  const SolverOptions& opt_;
  Clock::time_point deadline_;
  std::unique_ptr<detail::Propagator> prop_;
  int n_ = 0;
  std::vector<double> applied_lo_, applied_up_;
  std::vector<int> binaries_;
  lp::Simplex simplex_;
  std::function<void()> listener_;

  bool has_incumbent_ = false;
  double incumbent_obj_ = -kInf;
  std::vector<double> incumbent_;
  double best_bound_ = kInf;
  double root_bound_ = kInf;
  bool limit_hit_ = false;
  long nodes_ = 0;
  long seq_ = 0;
};

}  // namespace

Solution solve_bb(const MilpModel& model, const SolverOptions& options) {
  options.validate();
  const auto start = Clock::now();
  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(
                                    std::chrono::duration<double>(options.time_limit_seconds));
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  Solution sol;
  long binaries = 0;
  for (const Variable& v : model.variables()) binaries += v.domain == Domain::Binary;
  if (binaries > kWarnBinaries) {
    std::cerr << "warning: " << binaries
              << " binaries exceed the built-in solver's comfort zone; consider exporting the model\n";
  }

  Presolved pre = presolve(model, options);
  if (pre.infeasible) {
    sol.status = SolveStatus::Infeasible;
    sol.root_bound = -kInf;
    sol.wall_time = elapsed();
    std::cerr << "error: the bidding model is infeasible; the formulation is inconsistent\n";
    return sol;
  }

  // Solve the biggest blocks last so the cheap ones are never starved.
  std::vector<BranchAndBound> solvers;
  solvers.reserve(pre.blocks.size());
  for (Block& b : pre.blocks) solvers.emplace_back(b, options, deadline);
  std::vector<int> order(pre.blocks.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return pre.blocks[a].cols.size() < pre.blocks[b].cols.size(); });

  auto assemble = [&] {
    std::vector<double> x = pre.fixed;
    for (std::size_t k = 0; k < solvers.size(); ++k) {
      const auto& inc = solvers[k].incumbent();
      for (std::size_t j = 0; j < inc.size(); ++j) x[pre.blocks[k].cols[j]] = inc[j];
    }
    return x;
  };
  long nodes = 0;
  for (auto& s : solvers) {
    s.seed_no_bid();
    if (!s.has_incumbent()) {
      sol.status = SolveStatus::Infeasible;
      sol.root_bound = -kInf;
      sol.wall_time = elapsed();
      std::cerr << "error: the bidding model is infeasible; the formulation is inconsistent\n";
      return sol;
    }
  }
  if (options.on_incumbent) {
    for (auto& s : solvers)
      s.set_incumbent_listener([&] { options.on_incumbent(model.evaluate_objective(assemble()), kInf, nodes); });
  }

  double root_bound = 0.0, best_bound = 0.0;
  bool limited = false;
  for (int k : order) {
    BranchAndBound& s = solvers[k];
    s.run(std::max(1L, options.node_limit - nodes));
    nodes += s.nodes();
    root_bound += s.root_bound();
    best_bound += s.best_bound();
    limited = limited || s.limit_hit();
  }
  const double constant = [&] {
    double c = 0.0;
    const auto obj = model.objective();
    for (std::size_t j = 0; j < pre.fixed.size(); ++j)
      if (!std::isnan(pre.fixed[j])) c += obj[j] * pre.fixed[j];
    return c;
  }();

  sol.values = assemble();
  sol.objective = model.evaluate_objective(sol.values);
  sol.root_bound = root_bound + constant;
  sol.node_count = nodes;
  for (auto& s : solvers) sol.lp_iterations += s.iterations();
  sol.wall_time = elapsed();
  sol.gap = std::max(0.0, best_bound + constant - sol.objective);
  sol.status = (limited && sol.gap > options.abs_gap) ? SolveStatus::BoundLimit : SolveStatus::Optimal;
  return sol;
}

std::vector<Violation> validate(const Solution& solution, const MilpModel& model, double tol) {
  std::vector<Violation> out;
  const auto vars = model.variables();
  const auto& x = solution.values;
  if (x.size() != vars.size()) {
    out.push_back({"solution", "size", std::abs(static_cast<double>(x.size()) - static_cast<double>(vars.size()))});
    return out;
  }
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const Variable& v = vars[j];
    const std::string kind(var_kind_name(v.id.kind));
    if (!std::isfinite(x[j])) {
      out.push_back({v.name, kind, kInf});
      continue;
    }
    if (x[j] < v.lb - tol) out.push_back({v.name, kind, v.lb - x[j]});
    if (x[j] > v.ub + tol) out.push_back({v.name, kind, x[j] - v.ub});
    if (v.domain == Domain::Binary) {
      const double frac = std::abs(x[j] - std::round(x[j]));
      if (frac > tol) out.push_back({v.name, kind, frac});
    }
  }
  for (const LinearConstraint& c : model.constraints()) {
    const double act = MilpModel::activity(c, x);
    double viol = 0.0;
    if (c.sense != Sense::GreaterEqual) viol = std::max(viol, act - c.rhs);
    if (c.sense != Sense::LessEqual) viol = std::max(viol, c.rhs - act);
    if (viol > tol) out.push_back({c.name, std::string(family_name(c.family)), viol});
  }
  for (const LinearizedProduct& p : model.products()) {
    double expr = p.constant;
    for (const Term& t : p.expr) expr += t.coef * x[t.var];
    double factor = 0.0;
    for (int b : p.factor_vars) factor += x[b];
    if (p.complement) factor = 1.0 - factor;
    const double diff = std::abs(x[p.result] - expr * factor);
    if (diff > tol) out.push_back({vars[p.result].name, "product", diff});
  }
  const double obj = model.evaluate_objective(x);
  if (std::abs(obj - solution.objective) > tol) out.push_back({"objective", "objective", std::abs(obj - solution.objective)});
  return out;
}

nlohmann::json solution_json(const Solution& solution, const MilpModel& model) {
  using nlohmann::json;
  const Dimensions& d = model.dims;
  json out;
  out["objective"] = solution.objective;
  out["status"] = std::string(to_string(solution.status));
  out["gap"] = solution.gap;
  out["root_bound"] = solution.root_bound;
  out["node_count"] = solution.node_count;
  out["wall_time"] = solution.wall_time;
  if (solution.values.empty()) return out;
  auto val = [&](VarKind k, int s, int h, int t, int m) { return solution.value(model, VariableId{k, s, h, t, m}); };

  json hours = json::array();
  for (int h = 0; h < d.hours; ++h) {
    std::string bid = "idle";
    for (int m = 0; m < d.markets; ++m)
      if (val(VarKind::XBid, -1, h, -1, m) > 0.5) bid = std::string(market_code(market_at(m)));
    json scen = json::array();
    for (int s = 0; s < d.scenarios; ++s) {
      bool accepted = false;
      for (int m = 0; m < d.markets; ++m) accepted = accepted || val(VarKind::XAcc, s, h, -1, m) > 0.5;
      scen.push_back({{"accepted", accepted}, {"fulfilled", val(VarKind::WOk, s, h, -1, -1) > 0.5}});
    }
    hours.push_back({{"hour", h + 1}, {"bid", bid}, {"price", val(VarKind::XPrice, -1, h, -1, -1)}, {"scenarios", scen}});
  }
  out["hours"] = std::move(hours);

  json dispatch = json::array();
  for (int s = 0; s < d.scenarios; ++s) {
    json steps = json::array();
    for (int t = 0; t < d.steps; ++t) {
      double dch = 0.0, ch = 0.0;
      for (int m = 0; m < d.markets; ++m) {
        dch += val(VarKind::ZDch, s, -1, t, m);
        ch += val(VarKind::ZCh, s, -1, t, m);
      }
      steps.push_back({{"minute", 1 + t * d.step_minutes},
                       {"discharge", dch},
                       {"charge", ch},
                       {"soc", val(VarKind::ZSoc, s, -1, t, -1)}});
    }
    dispatch.push_back({{"scenario", s + 1}, {"steps", std::move(steps)}});
  }
  out["dispatch"] = std::move(dispatch);
  return out;
}

}  // namespace bess
