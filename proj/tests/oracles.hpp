#pragma once

// Reference computations shared by the unit tests and the acceptance run. They are
// deliberately naive and do not call the library routine under test.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sbc/estimator.hpp"
#include "sbc/solve.hpp"
#include "sbc/spectral.hpp"

namespace oracle {

using sbc::Matrix;
using sbc::Vector;

/// min c.x over {a x <= b}, by trying every basic solution. +inf when infeasible.
inline double enumerate_vertices(const Matrix& a, const Vector& b, const Vector& c) {
  const auto m = a.rows(), n = a.cols();
  std::vector<Eigen::Index> pick(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) pick[static_cast<std::size_t>(i)] = i;
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    Matrix sub(n, n);
    Vector rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      sub.row(i) = a.row(pick[static_cast<std::size_t>(i)]);
      rhs[i] = b[pick[static_cast<std::size_t>(i)]];
    }
    Eigen::FullPivLU<Matrix> lu(sub);
    if (lu.isInvertible()) {
      const Vector x = lu.solve(rhs);
      if (((a * x - b).array() <= 1e-9).all()) best = std::min(best, c.dot(x));
    }
    Eigen::Index k = n - 1;
    while (k >= 0 && pick[static_cast<std::size_t>(k)] == m - n + k) --k;
    if (k < 0) break;
    ++pick[static_cast<std::size_t>(k)];
    for (Eigen::Index j = k + 1; j < n; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  return best;
}

/// Average of the Dirichlet kernels of orders a..b-1, as an explicit cosine sum.
inline double dirichlet_average(double z, int a, int b) {
  double s = 0.0;
  for (int m = a; m < b; ++m) {
    s += 1.0;
    for (int k = 1; k <= m; ++k) s += 2.0 * std::cos(k * z);
  }
  return s / (b - a);
}

/// E[B(x+) | x] for B = phi^T b, from the kernel form with a fresh dense solve.
inline Vector kernel_form_expectation(const sbc::FittedEstimator& est, const sbc::FeatureMap& map, const Matrix& x,
                                      const Vector& b) {
  const sbc::Dataset& d = est.data();
  Vector targets(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) targets[i] = map.features(d.xp.row(i).transpose()).dot(b);
  const Matrix k = sbc::kernel_matrix(est.params(), x, d.x);
  Matrix g = sbc::gram_matrix(est.params(), d.x);
  g.diagonal().array() += static_cast<double>(d.size()) * est.params().lambda;
  return k * g.ldlt().solve(targets);
}

/// Largest violation of any row or bound, recomputed row by row from the raw blocks.
inline double recheck_rows(const sbc::LPProblem& p, const Vector& x) {
  double worst = 0.0;
  for (const auto& blk : p.blocks) {
    for (auto r : blk.rows) {
      double lhs = 0.0;
      for (Eigen::Index c = 0; c < blk.dense->cols(); ++c) lhs += blk.coef * (*blk.dense)(r, c) * x[blk.offset + c];
      for (const auto& [k, v] : blk.extra) lhs += v * x[k];
      worst = std::max(worst, lhs - blk.rhs);
    }
  }
  for (const auto& row : p.sparse_rows) {
    double lhs = 0.0;
    for (const auto& [k, v] : row.terms) lhs += v * x[k];
    worst = std::max(worst, lhs - row.rhs);
  }
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    worst = std::max({worst, p.lower[k] - x[k], x[k] - p.upper[k]});
  }
  return worst;
}

}  // namespace oracle
