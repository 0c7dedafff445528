#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "sbc/data.hpp"
#include "sbc/geometry.hpp"

namespace sbc {

/// Gaussian kernel k(x, x') = sigma_f^2 exp(-1/2 sum ((x - x') / sigma_l)^2) plus ridge weight.
struct KernelParams {
  double sigma_f = 1.0;
  Vector sigma_l;
  double lambda = 1e-5;

  /// Throws unless sigma_f > 0, sigma_l > 0 and lambda >= 0.
  void validate() const;
};

double kernel_eval(const KernelParams& params, const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& xp);

/// Cross kernel matrix k(a_i, b_j).
Matrix kernel_matrix(const KernelParams& params, const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b);

Matrix gram_matrix(const KernelParams& params, const Eigen::Ref<const Matrix>& x);

/// Kernel ridge (empirical conditional mean) estimator with a factorized
/// system K + N lambda I.
class FittedEstimator {
 public:
  FittedEstimator(KernelParams params, Dataset data);

  [[nodiscard]] const KernelParams& params() const noexcept { return params_; }
  [[nodiscard]] const Dataset& data() const noexcept { return data_; }
  /// (K + N lambda I)^{-1} X+.
  [[nodiscard]] const Matrix& weights() const noexcept { return weights_; }
  /// Jitter added to the diagonal, zero unless the first factorization failed.
  [[nodiscard]] double jitter() const noexcept { return jitter_; }

  /// (K + N lambda I)^{-1} rhs for any number of columns.
  [[nodiscard]] Matrix solve(const Eigen::Ref<const Matrix>& rhs) const;

  [[nodiscard]] Vector predict(const Eigen::Ref<const Vector>& x) const;
  /// One prediction per row of `x`.
  [[nodiscard]] Matrix predict_rows(const Eigen::Ref<const Matrix>& x) const;

  /// k(x)^T (K + N lambda I)^{-1} Y for arbitrary training-aligned targets Y.
  [[nodiscard]] Matrix apply(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& targets) const;

  /// Residual ||(K + N lambda I) W - X+|| relative to ||X+||.
  [[nodiscard]] double relative_residual() const;

 private:
  KernelParams params_;
  Dataset data_;
  Eigen::LLT<Matrix> llt_;
  Matrix weights_;
  double jitter_ = 0.0;
};

/// Throws SingularSystemError when the system cannot be factorized.
FittedEstimator fit(const KernelParams& params, const Dataset& data);

/// Mean over output columns of 1 - SSE / SST.
double r2_score(const Eigen::Ref<const Matrix>& truth, const Eigen::Ref<const Matrix>& predicted);
double r2_score(const FittedEstimator& est, const Dataset& holdout);

/// Gaussian log marginal likelihood summed over output columns.
double log_marginal_likelihood(const KernelParams& params, const Dataset& data);

/// Same value plus its gradient with respect to
/// (log sigma_f, log sigma_l_1 .. log sigma_l_n, log lambda).
double log_marginal_likelihood(const KernelParams& params, const Dataset& data, Vector& gradient);

}  // namespace sbc
