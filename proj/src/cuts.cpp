#include "cuts.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bess::detail {

namespace {

constexpr double kMinFraction = 1e-3;
constexpr double kMaxDynamism = 1e6;
constexpr double kMinEfficacy = 1e-4;
constexpr double kMaxParallelism = 0.98;
constexpr std::size_t kMaxSupport = 1000;

struct Candidate {
  Row row;
  double efficacy = 0.0;
  double norm = 0.0;
};

double frac(double v) { return v - std::floor(v); }

}  // namespace

std::vector<Row> gomory_cuts(lp::Simplex& lp, const std::vector<Row>& rows, const std::vector<char>& binary,
                             int max_cuts) {
  const int n = lp.num_cols();
  const int m = lp.num_rows();
  const auto x = lp.primal();
  const lp::Basis basis = lp.basis();
  auto lower = [&](int j) { return j < n ? lp.col_lower(j) : rows[j - n].lower; };
  auto upper = [&](int j) { return j < n ? lp.col_upper(j) : rows[j - n].upper; };

  std::vector<Candidate> found;
  std::vector<double> alpha;
  std::vector<double> coef(n, 0.0);
  std::vector<int> touched;
  for (int r = 0; r < m; ++r) {
    const int k = lp.basic_column(r);
    if (k >= n || !binary[k]) continue;
    const double f0 = frac(x[k]);
    if (f0 < kMinFraction || f0 > 1.0 - kMinFraction) continue;
    lp.tableau_row(r, alpha);

    double rhs = 1.0;
    bool usable = true;
    touched.clear();
    auto add = [&](int t, double c) {
      if (coef[t] == 0.0) touched.push_back(t);
      coef[t] += c;
      if (coef[t] == 0.0) coef[t] = 1e-300;  // keep it listed
    };
    for (int j = 0; j < n + m && usable; ++j) {
      const double a = alpha[j];
      if (std::abs(a) < 1e-11 || basis.state[j] == lp::VarState::Basic) continue;
      const double l = lower(j), u = upper(j);
      if (l == u) continue;
      double sigma, bound;
      if (basis.state[j] == lp::VarState::AtLower) {
        sigma = 1.0;
        bound = l;
      } else if (basis.state[j] == lp::VarState::AtUpper) {
        sigma = -1.0;
        bound = u;
      } else {
        usable = false;
        break;
      }
      const double ap = a * sigma;
      double g;
      if (j < n && binary[j]) {
        const double f = frac(ap);
        g = f <= f0 ? f / f0 : (1.0 - f) / (1.0 - f0);
      } else {
        g = ap >= 0.0 ? ap / f0 : -ap / (1.0 - f0);
      }
      if (g == 0.0) continue;
      // g * s_j with s_j = sigma * (x_j - bound)
      rhs += g * sigma * bound;
      if (j < n) {
        add(j, g * sigma);
      } else {
        for (const Term& t : rows[j - n].terms) add(t.var, g * sigma * t.coef);
      }
    }
    if (!usable || touched.empty() || touched.size() > kMaxSupport) {
      for (int t : touched) coef[t] = 0.0;
      continue;
    }

    double biggest = 0.0;
    for (int t : touched) biggest = std::max(biggest, std::abs(coef[t]));
    Candidate c;
    c.row.lower = rhs;
    for (int t : touched) {
      const double v = coef[t];
      coef[t] = 0.0;
      if (std::abs(v) >= biggest / kMaxDynamism) {
        c.row.terms.push_back({t, v});
        continue;
      }
      if (std::abs(v) < 1e-11 * std::max(1.0, biggest)) continue;  // cancellation noise
      // drop a negligible term by relaxing with the column's bounds
      const double hi = std::max(v * lp.col_lower(t), v * lp.col_upper(t));
      if (!std::isfinite(hi)) {
        usable = false;
        continue;
      }
      c.row.lower -= hi;
    }
    if (!usable || c.row.terms.empty()) continue;
    c.row.lower -= 1e-9 * (1.0 + std::abs(c.row.lower));

    double act = 0.0, norm = 0.0;
    for (const Term& t : c.row.terms) {
      act += t.coef * x[t.var];
      norm += t.coef * t.coef;
    }
    c.norm = std::sqrt(norm);
    c.efficacy = (c.row.lower - act) / c.norm;
    if (c.efficacy < kMinEfficacy) continue;
    std::sort(c.row.terms.begin(), c.row.terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
    found.push_back(std::move(c));
  }

  std::vector<int> order(found.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return found[a].efficacy > found[b].efficacy; });
  auto cosine = [](const Candidate& a, const Candidate& b) {
    double dot = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.row.terms.size() && j < b.row.terms.size()) {
      if (a.row.terms[i].var == b.row.terms[j].var) dot += a.row.terms[i++].coef * b.row.terms[j++].coef;
      else if (a.row.terms[i].var < b.row.terms[j].var) ++i;
      else ++j;
    }
    return dot / (a.norm * b.norm);
  };
  std::vector<int> chosen;
  for (int k : order) {
    if (static_cast<int>(chosen.size()) >= max_cuts) break;
    bool parallel = false;
    for (int c : chosen) {
      if (cosine(found[k], found[c]) > kMaxParallelism) {
        parallel = true;
        break;
      }
    }
    if (!parallel) chosen.push_back(k);
  }
  std::vector<Row> out;
  for (int k : chosen) out.push_back(std::move(found[k].row));
  return out;
}

}  // namespace bess::detail
