#pragma once

#include <Eigen/Dense>

#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sbc/geometry.hpp"

namespace sbc {

/// A family of inequality rows sharing one dense coefficient pattern:
///   coef * M(row, :) . x[offset : offset + M.cols()] + sum_k extra_k x[k] <= rhs
/// for every `row` in `rows`.
struct RowBlock {
  std::string name;
  std::shared_ptr<const Matrix> dense;
  std::vector<Eigen::Index> rows;
  double coef = 1.0;
  Eigen::Index offset = 0;
  std::vector<std::pair<Eigen::Index, double>> extra;
  double rhs = 0.0;
};

/// One explicit sparse row: sum_k coef_k x[k] <= rhs.
struct SparseRow {
  std::string name;
  std::vector<std::pair<Eigen::Index, double>> terms;
  double rhs = 0.0;
};

/// min objective . x  subject to block rows, sparse rows and variable bounds.
struct LPProblem {
  std::vector<std::string> variable_names;
  Vector objective;
  Vector lower;  // -inf allowed
  Vector upper;  // +inf allowed
  std::vector<RowBlock> blocks;
  std::vector<SparseRow> sparse_rows;

  static constexpr double infinity = std::numeric_limits<double>::infinity();

  /// Appends a free variable and returns its index.
  Eigen::Index add_variable(std::string name, double cost = 0.0, double lo = -infinity, double hi = infinity);

  [[nodiscard]] Eigen::Index num_variables() const noexcept { return objective.size(); }
  /// Inequality rows, bounds excluded.
  [[nodiscard]] Eigen::Index num_rows() const noexcept;

  /// a_i . x - rhs_i for every inequality row, in block order then sparse rows.
  [[nodiscard]] Vector row_activity(const Eigen::Ref<const Vector>& x) const;

  /// Largest violation of any row or bound at x (0 when feasible).
  [[nodiscard]] double max_violation(const Eigen::Ref<const Vector>& x) const;

  /// Throws if a row references an undeclared variable or dimensions disagree.
  void validate() const;
};

enum class LPStatus { optimal, infeasible, unbounded, iteration_limit };

std::string to_string(LPStatus status);

struct LPSolution {
  LPStatus status = LPStatus::iteration_limit;
  Vector x;
  double objective = 0.0;
  double max_residual = 0.0;
  /// Multipliers of the inequality rows (same order as row_activity), >= 0.
  Vector duals;
  int iterations = 0;
};

struct SimplexOptions {
  int max_iterations = 200000;
  double feasibility_tolerance = 1e-10;
  double pivot_tolerance = 1e-9;
  int refactor_interval = 64;
  /// Magnitude of the artificial box placed on unbounded variables.
  double box = 1e6;
  /// Relative size of the cost perturbation used against dual degeneracy; 0 disables it.
  double perturbation = 1e-7;
  /// Initial pricing set holds about this many problem rows per variable.
  int working_set_factor = 20;
};

/// Built-in dense revised simplex, run on the dual of the inequality form.
LPSolution solve_simplex(const LPProblem& problem, const SimplexOptions& options = {});

/// Dispatch on an optimiser name; only the built-in backend is linked.
LPSolution solve_lp(const LPProblem& problem, const std::string& backend = "SimplexOptimiser");

/// CPLEX LP text with 17 significant digits.
std::string export_lp(const LPProblem& problem);

}  // namespace sbc
