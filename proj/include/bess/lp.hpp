#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace bess::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Compressed sparse column storage.
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> start;  ///< size cols + 1
  std::vector<int> index;
  std::vector<double> value;
};

/// minimise cost·x  s.t.  row_lower <= A x <= row_upper,  col_lower <= x <= col_upper
struct Problem {
  SparseMatrix a;
  std::vector<double> cost;
  std::vector<double> col_lower;
  std::vector<double> col_upper;
  std::vector<double> row_lower;
  std::vector<double> row_upper;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit, Numerical };

const char* to_string(Status s);

enum class VarState : std::uint8_t { Basic, AtLower, AtUpper, AtZero };

/// One state per structural column followed by one per row.
struct Basis {
  std::vector<VarState> state;
};

struct Options {
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-9;
  long max_iterations = 2'000'000;
  int refactor_interval = 100;
};

/// Bounded revised simplex over [A | -I] with a sparse LU of the basis and
/// product-form updates. Keeps its basis between solves, so re-solving after
/// bound changes starts from the previous optimum (dual simplex).
class Simplex {
 public:
  explicit Simplex(Problem problem, Options options = {});
  ~Simplex();
  Simplex(Simplex&&) noexcept;
  Simplex& operator=(Simplex&&) noexcept;

  int num_cols() const;
  int num_rows() const;

  void set_col_bounds(int j, double lower, double upper);
  double col_lower(int j) const;
  double col_upper(int j) const;

  Status solve();

  Status status() const;
  double objective() const;
  /// Structural values of the last solve.
  std::span<const double> primal() const;
  double row_activity(int i) const;
  long iterations() const;

  Basis basis() const;
  /// Installs a basis (e.g. a parent node's). Invalid bases fall back to
  /// the all-logical basis at the next solve.
  void set_basis(const Basis& basis);
  void reset_basis();

  /// Structural or logical column basic in position r (logicals are n + i).
  int basic_column(int r) const;
  /// Row r of B^-1 [A | -I] for the current basis, over all n + m columns.
  void tableau_row(int r, std::vector<double>& out);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace bess::lp
