#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace crowdship {

namespace detail {
class DenseSimplex;
}

// Maximization over variables y >= 0 with rows a.y <= b. Optional finite
// variable upper bounds are handled as extra rows.
struct SparseColumn {
  std::vector<std::pair<int, double>> entries;  // (row, coefficient)
};

struct LinearProgram {
  std::vector<double> objective_coeffs;
  std::vector<SparseColumn> columns;
  std::vector<double> row_bounds;
  std::vector<double> variable_upper_bounds;  // +inf when unbounded above

  int num_rows() const { return static_cast<int>(row_bounds.size()); }
  int num_vars() const { return static_cast<int>(objective_coeffs.size()); }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::optimal;
  std::vector<double> primal;
  double objective = 0.0;
  std::vector<double> row_duals;
};

enum class MilpStatus { optimal, feasible, infeasible };

struct MilpResult {
  MilpStatus status = MilpStatus::optimal;
  std::vector<double> primal;
  double objective = 0.0;
  double bound = 0.0;
};

// Incremental primal simplex with an explicit basis inverse. Columns may be
// added between solves; the basis is kept so column generation re-solves warm.
class SimplexSolver {
 public:
  explicit SimplexSolver(int num_rows, std::vector<double> row_bounds);
  ~SimplexSolver();

  // Returns the new variable's index.
  int add_column(double objective_coeff, const SparseColumn& column);

  LpStatus solve();

  double objective() const { return objective_; }
  const std::vector<double>& primal() const { return primal_; }
  // Duals of the <= rows; >= 0 at optimality of a maximization.
  const std::vector<double>& row_duals() const { return duals_; }
  int num_vars() const { return static_cast<int>(obj_.size()); }

 private:
  void impl_rebuild();

  int m_;
  std::vector<double> rhs_;
  std::vector<double> obj_;
  std::vector<SparseColumn> cols_;
  std::unique_ptr<detail::DenseSimplex> engine_;
  std::vector<double> primal_;
  std::vector<double> duals_;
  double objective_ = 0.0;
};

LpResult solve_lp(const LinearProgram& lp);

// Best-first branch and bound on the flagged binaries; branches on the most
// fractional variable, ties by lowest index. time_limit_seconds <= 0 returns
// the all-zero incumbent with the root relaxation as bound.
MilpResult solve_milp(const LinearProgram& lp, const std::vector<bool>& binary_mask,
                      double time_limit_seconds = std::numeric_limits<double>::infinity());

// Plain-text dump for debugging golden tests.
std::string dump_lp(const LinearProgram& lp);

}  // namespace crowdship
