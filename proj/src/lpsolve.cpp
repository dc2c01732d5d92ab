#include "crowdship/lpsolve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace crowdship {

namespace detail {

constexpr double kPivotEps = 1e-9;
constexpr double kFeasEps = 1e-7;
constexpr std::int64_t kBlandThreshold = 10'000;

// Revised primal simplex with an explicit basis inverse. Columns are kept in
// their original sparse form (in tableau sign space), so pivots cost
// O(m^2 + n*nnz) instead of updating a dense n x m tableau; adding columns
// mid-solve (column generation) is free.
class DenseSimplex {
 public:
  explicit DenseSimplex(std::vector<double> row_bounds) : m_(static_cast<int>(row_bounds.size())) {
    base_rhs_ = std::move(row_bounds);
    negated_.assign(m_, false);
    // Negative right-hand sides get a negated row plus an artificial basic.
    for (int i = 0; i < m_; ++i)
      if (base_rhs_[i] < 0.0) {
        negated_[i] = true;
        base_rhs_[i] = -base_rhs_[i];
      }
    rhs_ = base_rhs_;
    basis_.resize(m_);
    binv_.assign(m_, std::vector<double>(m_, 0.0));
    for (int i = 0; i < m_; ++i) binv_[i][i] = 1.0;

    slack_index_.resize(m_);
    for (int i = 0; i < m_; ++i)
      slack_index_[i] = add_raw_column(0.0, {{{i, negated_[i] ? -1.0 : 1.0}}}, false);
    for (int i = 0; i < m_; ++i) {
      if (negated_[i]) {
        basis_[i] = add_raw_column(0.0, {{{i, 1.0}}}, true);
        has_artificials_ = true;
      } else {
        basis_[i] = slack_index_[i];
      }
    }
    in_basis_.assign(cols_.size(), false);
    for (int i = 0; i < m_; ++i) in_basis_[basis_[i]] = true;
  }

  // Structural column in original row space; returns its structural index.
  // The stored form carries the row negation signs so all later algebra is
  // uniform.
  int add_structural(double obj, const SparseColumn& col) {
    SparseColumn t;
    t.entries.reserve(col.entries.size());
    for (auto [row, v] : col.entries) {
      if (row < 0 || row >= m_) throw std::out_of_range("column entry row out of range");
      if (v != 0.0) t.entries.push_back({row, negated_[row] ? -v : v});
    }
    int idx = add_raw_column(obj, std::move(t), false);
    in_basis_.push_back(false);
    structural_.push_back(idx);
    return static_cast<int>(structural_.size()) - 1;
  }

  LpStatus solve() {
    if (has_artificials_) {
      // Phase 1: drive artificials to zero.
      std::vector<double> saved_obj = obj_;
      for (std::size_t j = 0; j < obj_.size(); ++j) obj_[j] = artificial_[j] ? -1.0 : 0.0;
      phase1_ = true;
      LpStatus s = primal();
      phase1_ = false;
      double infeas = objective_value();
      obj_ = std::move(saved_obj);
      if (s == LpStatus::unbounded) return LpStatus::infeasible;  // cannot happen: obj <= 0
      if (infeas < -kFeasEps) return LpStatus::infeasible;
      pivot_out_artificials();
      has_artificials_ = false;  // columns remain but are barred from entering
    }
    return primal();
  }

  double objective_value() const {
    double z = 0.0;
    for (int i = 0; i < m_; ++i) z += obj_[basis_[i]] * rhs_[i];
    return z;
  }

  double structural_value(int j) const {
    int c = structural_[j];
    if (!in_basis_[c]) return 0.0;
    for (int i = 0; i < m_; ++i)
      if (basis_[i] == c) return rhs_[i];
    return 0.0;
  }

  // Dual of original row i. The tableau dual is c_B B^{-1} e_i = s_i(c_B .
  // binv_i); converting back to the original (un-negated) row multiplies by
  // s_i again, so the plain product is already the answer... except the
  // stored binv_ column IS B^{-1} e_i directly, so apply the sign once.
  double row_dual(int i) const {
    double y = 0.0;
    for (int r = 0; r < m_; ++r) y += obj_[basis_[r]] * binv_[i][r];
    return negated_[i] ? -y : y;
  }

  int num_structural() const { return static_cast<int>(structural_.size()); }

 private:
  int add_raw_column(double obj, SparseColumn col, bool artificial) {
    cols_.push_back(std::move(col));
    obj_.push_back(obj);
    artificial_.push_back(artificial);
    return static_cast<int>(cols_.size()) - 1;
  }

  // Tableau column B^{-1} a_j.
  void ftran(int j, std::vector<double>& t) const {
    std::fill(t.begin(), t.end(), 0.0);
    for (auto [row, v] : cols_[j].entries) {
      const std::vector<double>& bc = binv_[row];
      for (int i = 0; i < m_; ++i) t[i] += v * bc[i];
    }
  }

  void compute_duals(std::vector<double>& y) const {
    for (int i = 0; i < m_; ++i) {
      double s = 0.0;
      for (int r = 0; r < m_; ++r) s += obj_[basis_[r]] * binv_[i][r];
      y[i] = s;
    }
  }

  double reduced_cost(int j, const std::vector<double>& y) const {
    double rc = obj_[j];
    for (auto [row, v] : cols_[j].entries) rc -= y[row] * v;
    return rc;
  }

  bool may_enter(int j) const { return !(artificial_[j] && !phase1_) && !in_basis_[j]; }

  void pivot(int row, int col, const std::vector<double>& t) {
    double piv = t[row];
    for (int i = 0; i < m_; ++i) {
      std::vector<double>& bc = binv_[i];
      double cr = bc[row] / piv;
      if (cr == 0.0) continue;
      for (int r = 0; r < m_; ++r) bc[r] -= t[r] * cr;
      bc[row] = cr;
    }
    double br = rhs_[row] / piv;
    for (int i = 0; i < m_; ++i) rhs_[i] -= t[i] * br;
    rhs_[row] = br;
    for (int i = 0; i < m_; ++i)
      if (rhs_[i] < 0.0 && rhs_[i] > -kFeasEps) rhs_[i] = 0.0;
    in_basis_[basis_[row]] = false;
    in_basis_[col] = true;
    basis_[row] = col;
  }

  // Rebuilds B^{-1} and the basic values from scratch (Gauss-Jordan with
  // partial pivoting) to shed accumulated floating-point error.
  void refactorize() {
    std::vector<std::vector<double>> b(m_, std::vector<double>(m_, 0.0));
    for (int i = 0; i < m_; ++i)
      for (auto [row, v] : cols_[basis_[i]].entries) b[row][i] = v;
    std::vector<std::vector<double>> inv(m_, std::vector<double>(m_, 0.0));
    for (int i = 0; i < m_; ++i) inv[i][i] = 1.0;
    for (int c = 0; c < m_; ++c) {
      int p = c;
      for (int r = c + 1; r < m_; ++r)
        if (std::abs(b[r][c]) > std::abs(b[p][c])) p = r;
      if (std::abs(b[p][c]) < 1e-12) return;  // singular: keep the running inverse
      std::swap(b[p], b[c]);
      std::swap(inv[p], inv[c]);
      double d = b[c][c];
      for (int k = 0; k < m_; ++k) {
        b[c][k] /= d;
        inv[c][k] /= d;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == c) continue;
        double f = b[r][c];
        if (f == 0.0) continue;
        for (int k = 0; k < m_; ++k) {
          b[r][k] -= f * b[c][k];
          inv[r][k] -= f * inv[c][k];
        }
      }
    }
    // inv holds rows of B^{-1}; binv_ stores columns.
    for (int i = 0; i < m_; ++i)
      for (int r = 0; r < m_; ++r) binv_[i][r] = inv[r][i];
    for (int i = 0; i < m_; ++i) {
      double s = 0.0;
      for (int r = 0; r < m_; ++r) s += binv_[r][i] * base_rhs_[r];
      rhs_[i] = s < 0.0 && s > -kFeasEps ? 0.0 : s;
    }
  }

  LpStatus primal() {
    std::int64_t degenerate = 0;
    std::int64_t pivots = 0;
    std::vector<double> y(m_), t(m_);
    for (;;) {
      compute_duals(y);
      bool bland = degenerate >= kBlandThreshold;
      int enter = -1;
      double best = kPivotEps;
      for (int j = 0; j < static_cast<int>(cols_.size()); ++j) {
        if (!may_enter(j)) continue;
        double rc = reduced_cost(j, y);
        if (rc > best) {
          enter = j;
          if (bland) break;
          best = rc;
        }
      }
      if (enter < 0) return LpStatus::optimal;

      ftran(enter, t);
      int leave = -1;
      double best_ratio = 0.0;
      for (int i = 0; i < m_; ++i) {
        double a = t[i];
        if (a <= kPivotEps) continue;
        double ratio = rhs_[i] / a;
        if (leave < 0 || ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 && basis_[i] < basis_[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave < 0) return LpStatus::unbounded;
      if (best_ratio <= 1e-12)
        ++degenerate;
      else
        degenerate = 0;
      pivot(leave, enter, t);
      if (++pivots % 256 == 0) refactorize();
    }
  }

  void pivot_out_artificials() {
    std::vector<double> t(m_);
    for (int i = 0; i < m_; ++i) {
      if (!artificial_[basis_[i]]) continue;
      int col = -1;
      for (int j = 0; j < static_cast<int>(cols_.size()); ++j) {
        if (artificial_[j] || in_basis_[j]) continue;
        ftran(j, t);
        if (std::abs(t[i]) > kFeasEps) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        ftran(col, t);
        pivot(i, col, t);
      }
      // else: redundant row, artificial stays basic at value zero
    }
  }

  int m_;
  std::vector<double> base_rhs_;  // tableau-space b (after negation)
  std::vector<double> rhs_;       // current basic values B^{-1} b
  std::vector<bool> negated_;
  std::vector<int> slack_index_;
  std::vector<SparseColumn> cols_;  // tableau sign space
  std::vector<double> obj_;
  std::vector<bool> artificial_;
  std::vector<bool> in_basis_;
  std::vector<int> structural_;
  std::vector<int> basis_;
  std::vector<std::vector<double>> binv_;  // binv_[i] = B^{-1} e_i
  bool has_artificials_ = false;
  bool phase1_ = false;
};

}  // namespace detail

using detail::DenseSimplex;

namespace {

// LinearProgram with finite variable upper bounds folded into extra rows.
LinearProgram expand_upper_bounds(const LinearProgram& lp) {
  LinearProgram out = lp;
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (j < static_cast<int>(lp.variable_upper_bounds.size()) &&
        std::isfinite(lp.variable_upper_bounds[j])) {
      int row = out.num_rows();
      out.row_bounds.push_back(lp.variable_upper_bounds[j]);
      out.columns[j].entries.emplace_back(row, 1.0);
    }
  }
  return out;
}

}  // namespace

SimplexSolver::SimplexSolver(int num_rows, std::vector<double> row_bounds)
    : m_(num_rows), rhs_(std::move(row_bounds)) {
  if (static_cast<int>(rhs_.size()) != m_) throw std::invalid_argument("row bound count mismatch");
  impl_rebuild();
}

SimplexSolver::~SimplexSolver() = default;

void SimplexSolver::impl_rebuild() {
  engine_ = std::make_unique<DenseSimplex>(rhs_);
  for (std::size_t j = 0; j < cols_.size(); ++j) engine_->add_structural(obj_[j], cols_[j]);
}

int SimplexSolver::add_column(double objective_coeff, const SparseColumn& column) {
  obj_.push_back(objective_coeff);
  cols_.push_back(column);
  engine_->add_structural(objective_coeff, column);
  return static_cast<int>(obj_.size()) - 1;
}

LpStatus SimplexSolver::solve() {
  LpStatus s = engine_->solve();
  objective_ = engine_->objective_value();
  primal_.resize(obj_.size());
  for (std::size_t j = 0; j < obj_.size(); ++j) primal_[j] = engine_->structural_value(static_cast<int>(j));
  duals_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    double y = engine_->row_dual(i);
    duals_[i] = y < 0.0 ? 0.0 : y;
  }
  return s;
}

namespace {

LpResult solve_lp_direct(const LinearProgram& lp) {
  LinearProgram ex = expand_upper_bounds(lp);
  DenseSimplex s(ex.row_bounds);
  for (int j = 0; j < ex.num_vars(); ++j) s.add_structural(ex.objective_coeffs[j], ex.columns[j]);
  LpResult res;
  res.status = s.solve();
  if (res.status == LpStatus::optimal) {
    res.objective = s.objective_value();
    res.primal.resize(ex.num_vars());
    for (int j = 0; j < ex.num_vars(); ++j) res.primal[j] = s.structural_value(j);
    res.row_duals.resize(lp.num_rows());
    for (int i = 0; i < lp.num_rows(); ++i) {
      double y = s.row_dual(i);
      res.row_duals[i] = y < 0.0 ? 0.0 : y;
    }
  }
  return res;
}

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
  const int m = lp.num_rows();
  const int n = lp.num_vars();
  const int working = std::max(200, 8 * m);

  // Sifting applies to pure <=-with-nonnegative-rhs programs, where y = 0 is
  // feasible and optimal duals are nonnegative; everything else solves whole.
  bool plain = true;
  for (double b : lp.row_bounds)
    if (b < 0.0) plain = false;
  for (double u : lp.variable_upper_bounds)
    if (std::isfinite(u)) plain = false;
  if (!plain || n <= 2 * working) return solve_lp_direct(lp);

  // Work on a subset, price the rest against its duals, pull in violated
  // columns, repeat; at termination the subset optimum is the full optimum.
  std::vector<int> order(n);
  for (int j = 0; j < n; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (lp.objective_coeffs[a] != lp.objective_coeffs[b])
      return lp.objective_coeffs[a] > lp.objective_coeffs[b];
    return a < b;
  });
  std::vector<bool> in_set(n, false);
  std::vector<int> members(order.begin(), order.begin() + working);
  for (int j : members) in_set[j] = true;

  SimplexSolver solver(m, lp.row_bounds);
  for (int j : members) solver.add_column(lp.objective_coeffs[j], lp.columns[j]);

  for (;;) {
    LpStatus st = solver.solve();
    if (st != LpStatus::optimal) {  // unbounded subset => unbounded whole
      LpResult res;
      res.status = st;
      return res;
    }
    const std::vector<double>& y = solver.row_duals();

    std::vector<std::pair<double, int>> violated;
    for (int j = 0; j < n; ++j) {
      if (in_set[j]) continue;
      double rc = lp.objective_coeffs[j];
      for (auto [row, v] : lp.columns[j].entries) rc -= y[row] * v;
      if (rc > 1e-9) violated.push_back({-rc, j});
    }
    if (violated.empty()) {
      LpResult res;
      res.status = LpStatus::optimal;
      res.objective = solver.objective();
      res.row_duals = y;
      res.primal.assign(n, 0.0);
      for (std::size_t k = 0; k < members.size(); ++k)
        res.primal[members[k]] = solver.primal()[k];
      return res;
    }
    std::sort(violated.begin(), violated.end());
    int take = std::min<int>(working, static_cast<int>(violated.size()));
    for (int k = 0; k < take; ++k) {
      int j = violated[k].second;
      in_set[j] = true;
      members.push_back(j);
      solver.add_column(lp.objective_coeffs[j], lp.columns[j]);
    }
  }
}

namespace {

struct BnbNode {
  double bound;
  std::int64_t order;
  std::vector<std::pair<int, int>> fixings;  // (var, value)
};

struct NodeCompare {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;  // best bound first
    return a.order > b.order;
  }
};

struct NodeLp {
  LinearProgram lp;
  std::vector<int> orig;  // reduced column index -> original index
  double fixed_obj = 0.0;
  bool infeasible = false;
};

// Shrinks the LP under 0/1 fixings: fixed-zero columns vanish and fixed-one
// columns move into the rhs. When every matrix entry is nonnegative, a binary
// column that no longer fits inside the remaining row capacity is forced to
// zero and vanishes as well, which guts the node LPs of packing masters.
NodeLp reduce_for_node(const LinearProgram& lp, const std::vector<bool>& binary_mask,
                       const std::vector<std::pair<int, int>>& fixings, bool all_nonneg) {
  NodeLp out;
  std::vector<double> bounds = lp.row_bounds;
  std::vector<char> drop(lp.num_vars(), 0);
  for (auto [var, val] : fixings) {
    drop[var] = 1;
    if (val == 0) continue;
    out.fixed_obj += lp.objective_coeffs[var];
    for (auto [row, a] : lp.columns[var].entries) bounds[row] -= a;
  }
  if (all_nonneg)
    for (double b : bounds)
      if (b < -1e-9) {
        out.infeasible = true;
        return out;
      }
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (drop[j]) continue;
    if (all_nonneg && j < static_cast<int>(binary_mask.size()) && binary_mask[j]) {
      bool fits = true;
      for (auto [row, a] : lp.columns[j].entries)
        if (a > bounds[row] + 1e-12) {
          fits = false;
          break;
        }
      if (!fits) continue;
    }
    out.orig.push_back(j);
    out.lp.objective_coeffs.push_back(lp.objective_coeffs[j]);
    out.lp.columns.push_back(lp.columns[j]);
    out.lp.variable_upper_bounds.push_back(lp.variable_upper_bounds[j]);
  }
  out.lp.row_bounds = std::move(bounds);
  return out;
}

}  // namespace

MilpResult solve_milp(const LinearProgram& lp, const std::vector<bool>& binary_mask,
                      double time_limit_seconds) {
  constexpr double kIntEps = 1e-6;
  auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  MilpResult result;
  result.primal.assign(lp.num_vars(), 0.0);
  result.objective = 0.0;

  LpResult root = solve_lp(lp);
  if (root.status == LpStatus::infeasible) {
    result.status = MilpStatus::infeasible;
    return result;
  }
  if (root.status == LpStatus::unbounded) {
    result.status = MilpStatus::feasible;
    result.bound = std::numeric_limits<double>::infinity();
    return result;
  }
  result.bound = root.objective;
  if (time_limit_seconds <= 0.0) {
    result.status = MilpStatus::feasible;
    return result;
  }

  bool have_incumbent = false;
  double incumbent = -std::numeric_limits<double>::infinity();

  // Greedy warm incumbent: set binaries to 1 in descending objective order
  // while all rows stay satisfied. Gives best-bound search something to prune
  // against from the first node.
  {
    std::vector<int> by_obj;
    for (int j = 0; j < lp.num_vars(); ++j)
      if (j < static_cast<int>(binary_mask.size()) && binary_mask[j] &&
          lp.objective_coeffs[j] > 0.0)
        by_obj.push_back(j);
    std::sort(by_obj.begin(), by_obj.end(), [&](int a, int b) {
      if (lp.objective_coeffs[a] != lp.objective_coeffs[b])
        return lp.objective_coeffs[a] > lp.objective_coeffs[b];
      return a < b;
    });
    std::vector<double> usage(lp.num_rows(), 0.0);
    std::vector<double> greedy(lp.num_vars(), 0.0);
    double value = 0.0;
    for (int j : by_obj) {
      bool fits = true;
      for (auto [row, v] : lp.columns[j].entries)
        if (usage[row] + v > lp.row_bounds[row] + 1e-12) {
          fits = false;
          break;
        }
      if (!fits) continue;
      for (auto [row, v] : lp.columns[j].entries) usage[row] += v;
      greedy[j] = 1.0;
      value += lp.objective_coeffs[j];
    }
    bool feasible = value > 0.0;
    for (int i = 0; feasible && i < lp.num_rows(); ++i)
      if (usage[i] > lp.row_bounds[i] + 1e-12) feasible = false;
    if (feasible) {
      have_incumbent = true;
      incumbent = value;
      result.primal = greedy;
      result.objective = value;
    }
  }

  bool all_nonneg = true;
  for (const SparseColumn& c : lp.columns)
    for (auto [row, a] : c.entries)
      if (a < 0.0) {
        all_nonneg = false;
        break;
      }

  std::priority_queue<BnbNode, std::vector<BnbNode>, NodeCompare> queue;
  std::int64_t order = 0;
  queue.push({root.objective, order++, {}});

  bool timed_out = false;
  double best_open_bound = root.objective;
  while (!queue.empty()) {
    if (elapsed() > time_limit_seconds) {
      timed_out = true;
      best_open_bound = queue.top().bound;
      break;
    }
    BnbNode node = queue.top();
    queue.pop();
    if (have_incumbent && node.bound <= incumbent + 1e-9) continue;

    // Solve the node on a shrunken LP and map the point back to full space.
    std::vector<double> primal(lp.num_vars(), 0.0);
    double node_obj;
    if (node.fixings.empty()) {
      if (root.status != LpStatus::optimal) continue;
      primal = root.primal;
      primal.resize(lp.num_vars());
      node_obj = root.objective;
    } else {
      NodeLp nl = reduce_for_node(lp, binary_mask, node.fixings, all_nonneg);
      if (nl.infeasible) continue;
      LpResult lr = solve_lp(nl.lp);
      if (lr.status != LpStatus::optimal) continue;
      node_obj = lr.objective + nl.fixed_obj;
      for (std::size_t r = 0; r < nl.orig.size(); ++r) primal[nl.orig[r]] = lr.primal[r];
      for (auto [var, val] : node.fixings) primal[var] = val;
    }
    if (have_incumbent && node_obj <= incumbent + 1e-9) continue;

    // Most fractional binary, ties by lowest index.
    int branch_var = -1;
    double best_frac_dist = 0.5;
    for (int j = 0; j < lp.num_vars(); ++j) {
      if (j < static_cast<int>(binary_mask.size()) && !binary_mask[j]) continue;
      double v = primal[j];
      double frac = v - std::floor(v);
      double dist = std::abs(frac - 0.5);
      double int_dist = std::min(frac, 1.0 - frac);
      if (int_dist <= kIntEps) continue;
      if (dist < best_frac_dist - 1e-12) {
        best_frac_dist = dist;
        branch_var = j;
      }
    }
    if (branch_var < 0) {
      // Integral: new incumbent.
      if (!have_incumbent || node_obj > incumbent) {
        have_incumbent = true;
        incumbent = node_obj;
        result.primal = primal;
        for (int j = 0; j < lp.num_vars(); ++j)
          if (j < static_cast<int>(binary_mask.size()) && binary_mask[j])
            result.primal[j] = std::round(result.primal[j]);
        result.objective = node_obj;
      }
      continue;
    }
    for (int val : {0, 1}) {
      BnbNode child{node_obj, order++, node.fixings};
      child.fixings.emplace_back(branch_var, val);
      queue.push(std::move(child));
    }
  }

  if (timed_out) {
    result.status = MilpStatus::feasible;
    result.bound = std::max(best_open_bound, have_incumbent ? incumbent : 0.0);
  } else {
    result.status = MilpStatus::optimal;
    result.bound = have_incumbent ? incumbent : 0.0;
    if (!have_incumbent) {
      // No integral point found while exhausting the tree: with packing-style
      // programs the all-zero point is feasible and optimal at 0.
      result.objective = 0.0;
    }
  }
  return result;
}

std::string dump_lp(const LinearProgram& lp) {
  std::ostringstream out;
  out << "max";
  for (int j = 0; j < lp.num_vars(); ++j) out << " " << lp.objective_coeffs[j];
  out << "\n";
  for (int i = 0; i < lp.num_rows(); ++i) {
    out << "row " << i << ":";
    for (int j = 0; j < lp.num_vars(); ++j)
      for (auto [r, v] : lp.columns[j].entries)
        if (r == i) out << " " << j << ":" << v;
    out << " <= " << lp.row_bounds[i] << "\n";
  }
  return out.str();
}

}  // namespace crowdship
