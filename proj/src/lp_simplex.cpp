#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "bess/lp.hpp"

namespace bess::lp {

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal:
      return "optimal";
    case Status::Infeasible:
      return "infeasible";
    case Status::Unbounded:
      return "unbounded";
    case Status::IterationLimit:
      return "iteration-limit";
    case Status::Numerical:
      return "numerical";
  }
  return "?";
}

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

// Elementary update B_new = B_old * E, where E is the identity with column r
// replaced by the FTRAN'd entering column alpha.
struct Eta {
  int r = 0;
  double pivot = 0.0;
  std::vector<std::pair<int, double>> off;  // (i, alpha_i), i != r
};

class NumericalTrouble : public std::runtime_error {
 public:
  NumericalTrouble() : std::runtime_error("numerical trouble") {}
};

}  // namespace

struct Simplex::Impl {
  Problem p;
  Options opt;
  int n = 0;  // structurals
  int m = 0;  // rows / logicals
  int total = 0;

  std::vector<double> lo, up, cost;
  std::vector<double> x;
  std::vector<VarState> state;
  std::vector<int> head;  // basic variable at each position
  std::vector<int> pos;   // position of a basic variable, -1 otherwise

  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  std::vector<Eta> etas;
  bool factored = false;
  bool values_dirty = true;

  Status last = Status::Numerical;
  double obj = 0.0;
  long iters = 0;

  // scratch
  Eigen::VectorXd work;
  std::vector<double> dvec;

  explicit Impl(Problem prob, Options o) : p(std::move(prob)), opt(o) {
    n = p.a.cols;
    m = p.a.rows;
    total = n + m;
    if (static_cast<int>(p.cost.size()) != n || static_cast<int>(p.col_lower.size()) != n ||
        static_cast<int>(p.col_upper.size()) != n || static_cast<int>(p.row_lower.size()) != m ||
        static_cast<int>(p.row_upper.size()) != m || static_cast<int>(p.a.start.size()) != n + 1) {
      throw std::invalid_argument("lp::Problem dimensions are inconsistent");
    }
    lo.resize(total);
    up.resize(total);
    cost.assign(total, 0.0);
    for (int j = 0; j < n; ++j) {
      lo[j] = p.col_lower[j];
      up[j] = p.col_upper[j];
      cost[j] = p.cost[j];
    }
    for (int i = 0; i < m; ++i) {
      lo[n + i] = p.row_lower[i];
      up[n + i] = p.row_upper[i];
    }
    x.assign(total, 0.0);
    slack_basis();
  }

  // ---- basis bookkeeping ---------------------------------------------------

  VarState resting_state(int j) const {
    if (std::isfinite(lo[j])) return VarState::AtLower;
    if (std::isfinite(up[j])) return VarState::AtUpper;
    return VarState::AtZero;
  }

  void place_nonbasic(int j) {
    switch (state[j]) {
      case VarState::AtLower:
        if (!std::isfinite(lo[j])) state[j] = resting_state(j);
        break;
      case VarState::AtUpper:
        if (!std::isfinite(up[j])) state[j] = resting_state(j);
        break;
      case VarState::AtZero:
        if (std::isfinite(lo[j]) || std::isfinite(up[j])) state[j] = resting_state(j);
        break;
      case VarState::Basic:
        return;
    }
    x[j] = state[j] == VarState::AtLower ? lo[j] : state[j] == VarState::AtUpper ? up[j] : 0.0;
  }

  void slack_basis() {
    state.assign(total, VarState::AtLower);
    head.assign(m, 0);
    pos.assign(total, -1);
    for (int j = 0; j < n; ++j) {
      state[j] = resting_state(j);
      place_nonbasic(j);
    }
    for (int i = 0; i < m; ++i) {
      state[n + i] = VarState::Basic;
      head[i] = n + i;
      pos[n + i] = i;
    }
    factored = false;
    values_dirty = true;
  }

  bool install(const Basis& b) {
    if (static_cast<int>(b.state.size()) != total) return false;
    int basics = 0;
    for (VarState s : b.state) basics += s == VarState::Basic;
    if (basics != m) return false;
    state = b.state;
    pos.assign(total, -1);
    int r = 0;
    for (int j = 0; j < total; ++j) {
      if (state[j] == VarState::Basic) {
        head[r] = j;
        pos[j] = r++;
      } else {
        place_nonbasic(j);
      }
    }
    factored = false;
    values_dirty = true;
    return true;
  }

  // ---- linear algebra ------------------------------------------------------

  template <class F>
  void for_column(int j, F&& f) const {
    if (j < n) {
      for (int k = p.a.start[j]; k < p.a.start[j + 1]; ++k) f(p.a.index[k], p.a.value[k]);
    } else {
      f(j - n, -1.0);
    }
  }

  double dot_column(const std::vector<double>& y, int j) const {
    if (j >= n) return -y[j - n];
    double s = 0.0;
    for (int k = p.a.start[j]; k < p.a.start[j + 1]; ++k) s += y[p.a.index[k]] * p.a.value[k];
    return s;
  }

  bool refactor() {
    std::vector<Eigen::Triplet<double, int>> trip;
    trip.reserve(static_cast<std::size_t>(m) * 3);
    for (int r = 0; r < m; ++r) {
      for_column(head[r], [&](int i, double v) { trip.emplace_back(i, r, v); });
    }
    SpMat b(m, m);
    b.setFromTriplets(trip.begin(), trip.end());
    b.makeCompressed();
    etas.clear();
    if (m == 0) {
      factored = true;
      return true;
    }
    lu.analyzePattern(b);
    lu.factorize(b);
    factored = lu.info() == Eigen::Success;
    if (factored) {
      // SparseLU reports success for some numerically singular matrices.
      const double logdet = lu.logAbsDeterminant();
      if (!std::isfinite(logdet)) factored = false;
    }
    return factored;
  }

  // v := B^{-1} v
  void ftran(std::vector<double>& v) {
    if (m == 0) return;
    work = Eigen::Map<const Eigen::VectorXd>(v.data(), m);
    Eigen::VectorXd sol = lu.solve(work);
    for (int i = 0; i < m; ++i) v[i] = sol[i];
    for (const Eta& e : etas) {
      const double vr = v[e.r] / e.pivot;
      v[e.r] = vr;
      if (vr != 0.0)
        for (const auto& [i, a] : e.off) v[i] -= a * vr;
    }
  }

  // v := B^{-T} v
  void btran(std::vector<double>& v) {
    if (m == 0) return;
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      double s = v[it->r];
      for (const auto& [i, a] : it->off) s -= v[i] * a;
      v[it->r] = s / it->pivot;
    }
    work = Eigen::Map<const Eigen::VectorXd>(v.data(), m);
    Eigen::VectorXd sol = lu.transpose().solve(work);
    for (int i = 0; i < m; ++i) v[i] = sol[i];
  }

  void column(int j, std::vector<double>& out) const {
    out.assign(m, 0.0);
    for_column(j, [&](int i, double v) { out[i] += v; });
  }

  void compute_basic_values() {
    std::vector<double> rhs(m, 0.0);
    for (int j = 0; j < total; ++j) {
      if (state[j] == VarState::Basic || x[j] == 0.0) continue;
      const double xj = x[j];
      for_column(j, [&](int i, double v) { rhs[i] -= v * xj; });
    }
    ftran(rhs);
    for (int r = 0; r < m; ++r) x[head[r]] = rhs[r];
    values_dirty = false;
  }

  void update_basis(int r, int entering, const std::vector<double>& alpha) {
    Eta e;
    e.r = r;
    e.pivot = alpha[r];
    for (int i = 0; i < m; ++i) {
      if (i != r && alpha[i] != 0.0) e.off.emplace_back(i, alpha[i]);
    }
    const int leaving = head[r];
    pos[leaving] = -1;
    head[r] = entering;
    pos[entering] = r;
    state[entering] = VarState::Basic;
    etas.push_back(std::move(e));
    if (static_cast<int>(etas.size()) >= opt.refactor_interval) {
      if (!refactor()) throw NumericalTrouble();
      compute_basic_values();
    }
  }

  // ---- feasibility helpers -------------------------------------------------

  double infeasibility(int j) const {
    if (x[j] < lo[j] - opt.primal_tol) return lo[j] - x[j];
    if (x[j] > up[j] + opt.primal_tol) return x[j] - up[j];
    return 0.0;
  }

  bool primal_feasible() const {
    for (int r = 0; r < m; ++r)
      if (infeasibility(head[r]) > 0.0) return false;
    return true;
  }

  void duals(const std::vector<double>& cb, std::vector<double>& y) {
    y = cb;
    btran(y);
  }

  double reduced_cost(const std::vector<double>& y, int j) const { return cost[j] - dot_column(y, j); }

  bool is_fixed(int j) const { return lo[j] == up[j]; }

  // Nonbasic j can improve the objective at reduced cost d.
  bool attractive(int j, double d) const {
    switch (state[j]) {
      case VarState::AtLower:
        return d < -opt.dual_tol && !is_fixed(j);
      case VarState::AtUpper:
        return d > opt.dual_tol && !is_fixed(j);
      case VarState::AtZero:
        return std::abs(d) > opt.dual_tol;
      case VarState::Basic:
        return false;
    }
    return false;
  }

  // ---- primal simplex ------------------------------------------------------

  Status primal() {
    std::vector<double> cb(m), y, alpha;
    long degenerate = 0;
    bool bland = false;
    while (true) {
      if (iters >= opt.max_iterations) return Status::IterationLimit;
      if (values_dirty) compute_basic_values();

      bool phase1 = false;
      for (int r = 0; r < m; ++r) {
        const int k = head[r];
        if (x[k] < lo[k] - opt.primal_tol) {
          cb[r] = -1.0;
          phase1 = true;
        } else if (x[k] > up[k] + opt.primal_tol) {
          cb[r] = 1.0;
          phase1 = true;
        } else {
          cb[r] = 0.0;
        }
      }
      if (!phase1)
        for (int r = 0; r < m; ++r) cb[r] = cost[head[r]];
      duals(cb, y);

      int q = -1;
      double best = 0.0;
      double dq = 0.0;
      for (int j = 0; j < total; ++j) {
        if (state[j] == VarState::Basic) continue;
        const double d = (phase1 ? 0.0 : cost[j]) - dot_column(y, j);
        if (!attractive(j, d)) continue;
        if (bland) {
          q = j;
          dq = d;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          q = j;
          dq = d;
        }
      }
      if (q < 0) {
        if (phase1) return Status::Infeasible;
        return Status::Optimal;
      }
      const double dir = dq < 0.0 ? 1.0 : -1.0;

      column(q, alpha);
      ftran(alpha);

      // Harris two-pass ratio test.
      double theta_max = kInf;
      for (int r = 0; r < m; ++r) {
        const double a = alpha[r];
        if (std::abs(a) <= opt.pivot_tol) continue;
        const int k = head[r];
        const double rate = -dir * a;
        double bound;
        if (rate > 0.0) {
          if (phase1 && x[k] > up[k] + opt.primal_tol) continue;
          bound = (phase1 && x[k] < lo[k] - opt.primal_tol) ? lo[k] : up[k];
          if (!std::isfinite(bound)) continue;
          theta_max = std::min(theta_max, (bound + opt.primal_tol - x[k]) / rate);
        } else {
          if (phase1 && x[k] < lo[k] - opt.primal_tol) continue;
          bound = (phase1 && x[k] > up[k] + opt.primal_tol) ? up[k] : lo[k];
          if (!std::isfinite(bound)) continue;
          theta_max = std::min(theta_max, (bound - opt.primal_tol - x[k]) / rate);
        }
      }
      int leave = -1;
      double theta = kInf;
      double leave_bound = 0.0;
      double best_pivot = 0.0;
      for (int r = 0; r < m; ++r) {
        const double a = alpha[r];
        if (std::abs(a) <= opt.pivot_tol) continue;
        const int k = head[r];
        const double rate = -dir * a;
        double bound;
        if (rate > 0.0) {
          if (phase1 && x[k] > up[k] + opt.primal_tol) continue;
          bound = (phase1 && x[k] < lo[k] - opt.primal_tol) ? lo[k] : up[k];
        } else {
          if (phase1 && x[k] < lo[k] - opt.primal_tol) continue;
          bound = (phase1 && x[k] > up[k] + opt.primal_tol) ? up[k] : lo[k];
        }
        if (!std::isfinite(bound)) continue;
        const double ratio = (bound - x[k]) / rate;
        if (ratio > theta_max) continue;
        const bool better = bland ? (leave < 0 || k < head[leave]) : std::abs(a) > best_pivot;
        if (better) {
          best_pivot = std::abs(a);
          leave = r;
          theta = std::max(ratio, 0.0);
          leave_bound = bound;
        }
      }

      const double own = dir > 0.0 ? up[q] - x[q] : x[q] - lo[q];
      ++iters;
      if (leave < 0 && !std::isfinite(own)) {
        if (phase1) throw NumericalTrouble();
        return Status::Unbounded;
      }
      if (leave < 0 || own <= theta) {
        // bound flip
        const double step = own;
        x[q] += dir * step;
        for (int r = 0; r < m; ++r) x[head[r]] -= dir * alpha[r] * step;
        state[q] = dir > 0.0 ? VarState::AtUpper : VarState::AtLower;
        x[q] = dir > 0.0 ? up[q] : lo[q];
        degenerate = 0;
        bland = false;
        continue;
      }

      x[q] += dir * theta;
      for (int r = 0; r < m; ++r) x[head[r]] -= dir * alpha[r] * theta;
      const int k = head[leave];
      x[k] = leave_bound;
      state[k] = leave_bound == lo[k] ? VarState::AtLower : VarState::AtUpper;
      update_basis(leave, q, alpha);

      if (theta <= 1e-12) {
        if (++degenerate > 50) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }
    }
  }

  // ---- dual simplex --------------------------------------------------------

  // Makes nonbasic reduced costs sign-correct by bound flips; false when a
  // variable without the opposite bound has the wrong sign.
  bool make_dual_feasible(const std::vector<double>& y) {
    bool flipped = false;
    for (int j = 0; j < total; ++j) {
      if (state[j] == VarState::Basic || is_fixed(j)) continue;
      const double d = reduced_cost(y, j);
      if (!attractive(j, d)) continue;
      if (state[j] == VarState::AtLower && std::isfinite(up[j])) {
        state[j] = VarState::AtUpper;
        x[j] = up[j];
        flipped = true;
      } else if (state[j] == VarState::AtUpper && std::isfinite(lo[j])) {
        state[j] = VarState::AtLower;
        x[j] = lo[j];
        flipped = true;
      } else {
        return false;
      }
    }
    if (flipped) values_dirty = true;
    return true;
  }

  Status dual() {
    std::vector<double> cb(m), y, rho, alpha;
    std::vector<double> row_alpha(total, 0.0);
    long stall = 0;
    long steps = 0;
    while (true) {
      if (iters >= opt.max_iterations) return Status::IterationLimit;
      if (values_dirty) compute_basic_values();

      int r = -1;
      double worst = 0.0;
      for (int i = 0; i < m; ++i) {
        const double inf = infeasibility(head[i]);
        if (inf <= 0.0) continue;
        if (stall > 50 ? (r < 0 || head[i] < head[r]) : inf > worst) {
          worst = inf;
          r = i;
        }
      }
      if (r < 0) return Status::Optimal;

      for (int i = 0; i < m; ++i) cb[i] = cost[head[i]];
      duals(cb, y);

      const int leaving = head[r];
      const bool increase = x[leaving] < lo[leaving];
      const double target = increase ? lo[leaving] : up[leaving];

      rho.assign(m, 0.0);
      rho[r] = 1.0;
      btran(rho);

      // Harris two-pass dual ratio test.
      double theta_max = kInf;
      for (int j = 0; j < total; ++j) {
        row_alpha[j] = 0.0;
        if (state[j] == VarState::Basic || is_fixed(j)) continue;
        const double a = dot_column(rho, j);
        row_alpha[j] = a;
        if (std::abs(a) <= opt.pivot_tol) continue;
        // x_leaving changes by -a * delta_j
        const bool moves_up = state[j] == VarState::AtLower || (state[j] == VarState::AtZero && (increase ? a < 0 : a > 0));
        const bool moves_down = state[j] == VarState::AtUpper || (state[j] == VarState::AtZero && !moves_up);
        const bool helps = increase ? ((moves_up && a < 0) || (moves_down && a > 0))
                                    : ((moves_up && a > 0) || (moves_down && a < 0));
        if (!helps) continue;
        const double d = reduced_cost(y, j);
        theta_max = std::min(theta_max, (std::abs(d) + opt.dual_tol) / std::abs(a));
      }
      // Past the stall limit: exact minimum ratio, smallest index (Bland).
      const bool bland = stall > 50;
      int q = -1;
      double best_pivot = 0.0;
      double best_ratio = kInf;
      for (int j = 0; j < total; ++j) {
        const double a = row_alpha[j];
        if (state[j] == VarState::Basic || is_fixed(j) || std::abs(a) <= opt.pivot_tol) continue;
        const bool moves_up = state[j] == VarState::AtLower || (state[j] == VarState::AtZero && (increase ? a < 0 : a > 0));
        const bool moves_down = state[j] == VarState::AtUpper || (state[j] == VarState::AtZero && !moves_up);
        const bool helps = increase ? ((moves_up && a < 0) || (moves_down && a > 0))
                                    : ((moves_up && a > 0) || (moves_down && a < 0));
        if (!helps) continue;
        const double ratio = std::abs(reduced_cost(y, j)) / std::abs(a);
        if (bland) {
          if (ratio < best_ratio - 1e-12) {
            best_ratio = ratio;
            q = j;
          }
          continue;
        }
        if (ratio > theta_max) continue;
        if (std::abs(a) > best_pivot) {
          best_pivot = std::abs(a);
          best_ratio = ratio;
          q = j;
        }
      }
      ++iters;
      if (q < 0) return Status::Infeasible;

      column(q, alpha);
      ftran(alpha);
      const double pivot = alpha[r];
      if (std::abs(pivot) <= opt.pivot_tol ||
          std::abs(pivot - row_alpha[q]) > 1e-6 * (1.0 + std::abs(pivot))) {
        if (!etas.empty()) {
          if (!refactor()) throw NumericalTrouble();
          compute_basic_values();
          continue;
        }
        throw NumericalTrouble();
      }
      const double delta = (x[leaving] - target) / pivot;
      x[q] += delta;
      for (int i = 0; i < m; ++i) x[head[i]] -= alpha[i] * delta;
      x[leaving] = target;
      state[leaving] = increase ? VarState::AtLower : VarState::AtUpper;
      if (lo[leaving] == up[leaving]) state[leaving] = VarState::AtLower;
      update_basis(r, q, alpha);
      // a zero dual step leaves the dual objective unchanged
      stall = best_ratio <= 1e-12 ? stall + 1 : 0;
      if (++steps > 20 * (static_cast<long>(total) + 1000)) return Status::IterationLimit;
    }
  }

  // ---- driver --------------------------------------------------------------

  Status run() {
    if (!factored && !refactor()) {
      slack_basis();
      if (!refactor()) return Status::Numerical;
    }
    compute_basic_values();

    for (int attempt = 0; attempt < 4; ++attempt) {
      Status st;
      if (primal_feasible()) {
        st = primal();
      } else {
        std::vector<double> cb(m), y;
        for (int i = 0; i < m; ++i) cb[i] = cost[head[i]];
        duals(cb, y);
        if (make_dual_feasible(y)) {
          st = dual();
          if (st == Status::Optimal) st = primal();  // clears any residual dual infeasibility
        } else {
          st = primal();
        }
      }
      if (st != Status::Optimal) return st;

      // Verify on a fresh factorisation.
      if (!refactor()) {
        slack_basis();
        refactor();
        compute_basic_values();
        continue;
      }
      compute_basic_values();
      if (!primal_feasible()) continue;
      std::vector<double> cb(m), y;
      for (int i = 0; i < m; ++i) cb[i] = cost[head[i]];
      duals(cb, y);
      bool dual_ok = true;
      for (int j = 0; j < total && dual_ok; ++j) {
        if (state[j] != VarState::Basic && attractive(j, reduced_cost(y, j))) dual_ok = false;
      }
      if (dual_ok) return Status::Optimal;
    }
    return Status::Numerical;
  }

  Status solve() {
    try {
      last = run();
    } catch (const NumericalTrouble&) {
      try {
        slack_basis();
        last = run();
      } catch (const NumericalTrouble&) {
        last = Status::Numerical;
      }
    }
    obj = 0.0;
    for (int j = 0; j < n; ++j) obj += cost[j] * x[j];
    return last;
  }
};

Simplex::Simplex(Problem problem, Options options)
    : impl_(std::make_unique<Impl>(std::move(problem), options)) {}
Simplex::~Simplex() = default;
Simplex::Simplex(Simplex&&) noexcept = default;
Simplex& Simplex::operator=(Simplex&&) noexcept = default;

int Simplex::num_cols() const { return impl_->n; }
int Simplex::num_rows() const { return impl_->m; }

void Simplex::set_col_bounds(int j, double lower, double upper) {
  Impl& s = *impl_;
  if (s.lo[j] == lower && s.up[j] == upper) return;
  s.lo[j] = lower;
  s.up[j] = upper;
  if (s.state[j] != VarState::Basic) {
    s.place_nonbasic(j);
    s.values_dirty = true;
  }
}

double Simplex::col_lower(int j) const { return impl_->lo[j]; }
double Simplex::col_upper(int j) const { return impl_->up[j]; }

Status Simplex::solve() { return impl_->solve(); }
Status Simplex::status() const { return impl_->last; }
double Simplex::objective() const { return impl_->obj; }
std::span<const double> Simplex::primal() const { return {impl_->x.data(), static_cast<std::size_t>(impl_->n)}; }
double Simplex::row_activity(int i) const { return impl_->x[impl_->n + i]; }
long Simplex::iterations() const { return impl_->iters; }

Basis Simplex::basis() const { return Basis{impl_->state}; }

void Simplex::set_basis(const Basis& basis) {
  if (!impl_->install(basis)) impl_->slack_basis();
}

void Simplex::reset_basis() { impl_->slack_basis(); }

int Simplex::basic_column(int r) const { return impl_->head.at(r); }

void Simplex::tableau_row(int r, std::vector<double>& out) {
  Impl& s = *impl_;
  if (!s.factored && !s.refactor()) throw std::runtime_error("tableau row: singular basis");
  std::vector<double> rho(s.m, 0.0);
  rho.at(r) = 1.0;
  s.btran(rho);
  out.assign(s.total, 0.0);
  for (int j = 0; j < s.total; ++j) {
    if (s.state[j] != VarState::Basic) out[j] = s.dot_column(rho, j);
  }
}

}  // namespace bess::lp
