#include "presolve.hpp"

#include <algorithm>
#include <cmath>

namespace bess::detail {

Propagator::Propagator(std::vector<Row>& rows, std::vector<char> binary)
    : rows_(rows), binary_(std::move(binary)), col_rows_(binary_.size()) {
  for (int i = 0; i < static_cast<int>(rows_.size()); ++i)
    for (const Term& t : rows_[i].terms) col_rows_[t.var].push_back(i);
}

namespace {

struct Activity {
  double min = 0.0, max = 0.0;
  int min_inf = 0, max_inf = 0;

  void add(double a, double l, double u, int sign) {
    const double lo_part = a > 0 ? l : u;
    const double hi_part = a > 0 ? u : l;
    if (std::isfinite(lo_part)) min += sign * a * lo_part; else min_inf += sign;
    if (std::isfinite(hi_part)) max += sign * a * hi_part; else max_inf += sign;
  }
};

Activity activity(const Row& r, const std::vector<double>& lo, const std::vector<double>& up) {
  Activity act;
  for (const Term& t : r.terms) act.add(t.coef, lo[t.var], up[t.var], 1);
  return act;
}

// Largest value of the row without variable `skip`.
double max_rest(const Row& r, int skip, const std::vector<double>& lo, const std::vector<double>& up) {
  double total = 0.0;
  for (const Term& t : r.terms) {
    if (t.var == skip) continue;
    const double b = t.coef > 0 ? up[t.var] : lo[t.var];
    if (!std::isfinite(b)) return kInf;
    total += t.coef * b;
  }
  return total;
}

double min_rest(const Row& r, int skip, const std::vector<double>& lo, const std::vector<double>& up) {
  double total = 0.0;
  for (const Term& t : r.terms) {
    if (t.var == skip) continue;
    const double b = t.coef > 0 ? lo[t.var] : up[t.var];
    if (!std::isfinite(b)) return -kInf;
    total += t.coef * b;
  }
  return total;
}

}  // namespace

bool Propagator::run(std::vector<double>& lo, std::vector<double>& up, const std::vector<int>& seeds) const {
  const std::size_t m = rows_.size();
  std::vector<int> queue;
  std::vector<char> queued(m, 0);
  auto push = [&](int i) {
    if (!queued[i]) {
      queued[i] = 1;
      queue.push_back(i);
    }
  };
  if (seeds.empty()) {
    for (std::size_t i = 0; i < m; ++i) push(static_cast<int>(i));
  } else {
    for (int j : seeds)
      for (int i : col_rows_[j]) push(i);
  }

  // Bounded effort: continuous bounds may creep towards a limit forever.
  const std::size_t budget = 30 * m + 1000;
  std::size_t visits = 0;
  std::size_t head = 0;
  while (head < queue.size()) {
    if (++visits > budget) break;
    const int i = queue[head++];
    queued[i] = 0;
    if (head > 4096 && head * 2 > queue.size()) {
      queue.erase(queue.begin(), queue.begin() + static_cast<long>(head));
      head = 0;
    }
    const Row& r = rows_[i];
    Activity act = activity(r, lo, up);
    const double scale = 1.0 + std::max(std::isfinite(r.upper) ? std::abs(r.upper) : 0.0,
                                        std::isfinite(r.lower) ? std::abs(r.lower) : 0.0);
    if (act.min_inf == 0 && act.min > r.upper + 1e-7 * scale) return false;
    if (act.max_inf == 0 && act.max < r.lower - 1e-7 * scale) return false;

    for (const Term& t : r.terms) {
      const double a = t.coef;
      const int j = t.var;
      if (std::abs(a) < 1e-9) continue;
      const double l = lo[j], u = up[j];
      double new_lo = l, new_up = u;
      const bool j_min_inf = !std::isfinite(a > 0 ? l : u);
      const bool j_max_inf = !std::isfinite(a > 0 ? u : l);
      if (std::isfinite(r.upper) && act.min_inf - (j_min_inf ? 1 : 0) == 0) {
        const double rest = act.min - (j_min_inf ? 0.0 : a * (a > 0 ? l : u));
        const double bound = (r.upper - rest) / a;
        if (a > 0) new_up = std::min(new_up, bound); else new_lo = std::max(new_lo, bound);
      }
      if (std::isfinite(r.lower) && act.max_inf - (j_max_inf ? 1 : 0) == 0) {
        const double rest = act.max - (j_max_inf ? 0.0 : a * (a > 0 ? u : l));
        const double bound = (r.lower - rest) / a;
        if (a > 0) new_lo = std::max(new_lo, bound); else new_up = std::min(new_up, bound);
      }
      if (binary_[j]) {
        new_lo = new_lo > 1e-6 ? 1.0 : l;
        new_up = new_up < 1.0 - 1e-6 ? 0.0 : u;
        if (new_lo > new_up) return false;
      } else {
        const double tol = 1e-6 * (1.0 + std::min(std::abs(std::isfinite(l) ? l : 0.0) + std::abs(std::isfinite(u) ? u : 0.0), 1e6));
        if (!(new_lo > l + tol)) new_lo = l;
        if (!(new_up < u - tol)) new_up = u;
        if (new_lo > new_up + 1e-6 * (1.0 + std::abs(new_lo))) return false;
        if (new_lo > new_up) new_lo = new_up = 0.5 * (new_lo + new_up);
      }
      if (new_lo == l && new_up == u) continue;
      act.add(a, l, u, -1);
      lo[j] = new_lo;
      up[j] = new_up;
      act.add(a, new_lo, new_up, 1);
      for (int k : col_rows_[j])
        if (k != i) push(k);
    }
  }
  return true;
}

TighteningStats tighten_big_m(std::vector<Row>& rows, const Propagator& prop, std::vector<double>& lo,
                              std::vector<double>& up, int rounds) {
  TighteningStats stats;
  const int n = prop.num_cols();
  std::vector<double> lo0, up0, lo1, up1;
  for (int round = 0; round < rounds; ++round) {
    int changed = 0;
    for (int y = 0; y < n; ++y) {
      if (!prop.binary(y) || lo[y] == up[y]) continue;
      lo0 = lo, up0 = up, lo1 = lo, up1 = up;
      up0[y] = 0.0;
      lo1[y] = 1.0;
      const bool ok0 = prop.run(lo0, up0, {y});
      const bool ok1 = prop.run(lo1, up1, {y});
      if (!ok0 && !ok1) {
        stats.infeasible = true;
        return stats;
      }
      if (!ok0 || !ok1) {
        lo[y] = up[y] = ok1 ? 1.0 : 0.0;
        ++stats.fixed;
        if (!prop.run(lo, up, {y})) {
          stats.infeasible = true;
          return stats;
        }
        continue;
      }
      for (int i : prop.col_rows()[y]) {
        Row& r = rows[i];
        const bool upper_side = std::isfinite(r.upper);
        if (upper_side == std::isfinite(r.lower)) continue;  // equality or free
        auto it = std::find_if(r.terms.begin(), r.terms.end(), [&](const Term& t) { return t.var == y; });
        // Write the row as  sign * (rest + a y) <= rhs.
        const double sign = upper_side ? 1.0 : -1.0;
        const double rhs = upper_side ? r.upper : -r.lower;
        const double a = sign * it->coef;
        const double tol = 1e-6 * (1.0 + std::abs(rhs));
        if (a > 0) {
          const double rest = upper_side ? max_rest(r, y, lo0, up0) : -min_rest(r, y, lo0, up0);
          if (!(rest < rhs - tol)) continue;
          // y = 0: rest <= rest_max (redundant); y = 1 keeps rest <= rhs - a
          const double new_a = a - (rhs - rest);
          it->coef = sign * new_a;
          if (upper_side) r.upper = rest; else r.lower = -rest;
        } else if (a < 0) {
          const double rest = upper_side ? max_rest(r, y, lo1, up1) : -min_rest(r, y, lo1, up1);
          if (!(rest < rhs - a - tol)) continue;
          const double new_a = std::min(0.0, rhs - rest);
          it->coef = sign * new_a;
        } else {
          continue;
        }
        ++changed;
      }
    }
    stats.coefficients += changed;
    if (changed == 0) break;
    if (!prop.run(lo, up, {})) {
      stats.infeasible = true;
      return stats;
    }
  }
  // drop zero coefficients left behind
  for (Row& r : rows) {
    r.terms.erase(std::remove_if(r.terms.begin(), r.terms.end(), [](const Term& t) { return t.coef == 0.0; }),
                  r.terms.end());
  }
  return stats;
}

}  // namespace bess::detail
