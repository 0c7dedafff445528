#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sbc/estimator.hpp"

namespace sbc {

struct TunerReport {
  KernelParams params;
  double objective = 0.0;
  int evaluations = 0;
  std::string method;
};

/// sigma_l = median pairwise Euclidean distance between inputs (all dimensions share it),
/// sigma_f = 1, lambda = `lambda`.
KernelParams median_heuristic(const Dataset& data, double lambda = 1e-5);

/// Highest mean k-fold cross-validated R^2 over `grid`; ties go to the earliest entry.
/// Folds are the residue classes of the sample index modulo `folds`.
TunerReport grid_search(const Dataset& data, const std::vector<KernelParams>& grid, int folds = 5);

/// Cross-validated R^2 of a single candidate; -inf when a fold cannot be fitted.
double cross_validated_r2(const Dataset& data, const KernelParams& params, int folds);

struct LbfgsOptions {
  int memory = 10;
  int max_iterations = 200;
  double gradient_tolerance = 1e-6;
};

struct LbfgsResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
};

/// Objective returning f(x) and writing its gradient.
using Objective = std::function<double(const Vector& x, Vector& gradient)>;

/// Box-constrained minimization by projected L-BFGS with a backtracking line search.
LbfgsResult lbfgs_minimize(const Objective& f, Vector x0, const Vector& lower, const Vector& upper,
                           const LbfgsOptions& options = {});

/// Maximize the log marginal likelihood over log(sigma_f, sigma_l, lambda) within [lower, upper].
/// A parameter whose lower and upper bounds coincide is held fixed.
TunerReport lbfgs_tune(const Dataset& data, const KernelParams& lower, const KernelParams& upper,
                       const KernelParams& init, const LbfgsOptions& options = {});

}  // namespace sbc
