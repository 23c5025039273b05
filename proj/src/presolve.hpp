#pragma once

// Bound propagation and Big-M coefficient tightening used inside the
// branch-and-bound. Operates on the solver's private copy of the rows; the
// model itself is never modified.

#include <limits>
#include <vector>

#include "bess/formulation.hpp"

namespace bess::detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Row {
  std::vector<Term> terms;
  double lower = -kInf;
  double upper = kInf;
};

class Propagator {
 public:
  Propagator(std::vector<Row>& rows, std::vector<char> binary);

  /// Tightens lo/up to a fixpoint (bounded work). Starts from the rows
  /// touching `seeds`, or from every row when `seeds` is empty. Returns
  /// false when the bounds are proven infeasible.
  bool run(std::vector<double>& lo, std::vector<double>& up, const std::vector<int>& seeds) const;

  const std::vector<std::vector<int>>& col_rows() const { return col_rows_; }
  bool binary(int j) const { return binary_[j] != 0; }
  int num_cols() const { return static_cast<int>(binary_.size()); }

 private:
  std::vector<Row>& rows_;
  std::vector<char> binary_;
  std::vector<std::vector<int>> col_rows_;
};

struct TighteningStats {
  int coefficients = 0;  ///< Big-M coefficients reduced
  int fixed = 0;         ///< binaries fixed by probing
  bool infeasible = false;
};

/// Probes every free binary at 0 and 1 and, for each one-sided row holding
/// it, shrinks its coefficient to the largest activity the rest of the row
/// can reach under that probe. Integer-feasible points are unchanged; the LP
/// relaxation gets tighter. lo/up hold globally valid bounds on entry and
/// receive any probing fixings.
TighteningStats tighten_big_m(std::vector<Row>& rows, const Propagator& prop, std::vector<double>& lo,
                              std::vector<double>& up, int rounds);

}  // namespace bess::detail
