#include "sbc/estimator.hpp"

#include <cmath>
#include <numbers>

#include "sbc/errors.hpp"

namespace sbc {

void KernelParams::validate() const {
  if (!(sigma_f > 0.0) || !std::isfinite(sigma_f)) throw Error("sigma_f must be positive");
  if (sigma_l.size() == 0) throw Error("sigma_l is empty");
  if (!(sigma_l.array() > 0.0).all() || !sigma_l.allFinite()) throw Error("sigma_l must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error("lambda must be non-negative");
}

double kernel_eval(const KernelParams& p, const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& xp) {
  if (x.size() != xp.size() || x.size() != p.sigma_l.size()) throw DimensionError("kernel arguments differ in dimension");
  const double r2 = ((x - xp).array() / p.sigma_l.array()).square().sum();
  return p.sigma_f * p.sigma_f * std::exp(-0.5 * r2);
}

Matrix kernel_matrix(const KernelParams& p, const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) {
  if (a.cols() != p.sigma_l.size() || b.cols() != p.sigma_l.size()) throw DimensionError("kernel inputs differ in dimension");
  const Eigen::ArrayXd inv = p.sigma_l.array().inverse();
  const Matrix as = a * inv.matrix().asDiagonal();
  const Matrix bs = b * inv.matrix().asDiagonal();
  const Vector an = as.rowwise().squaredNorm();
  const Vector bn = bs.rowwise().squaredNorm();
  Matrix d2 = -2.0 * as * bs.transpose();
  d2.colwise() += an;
  d2.rowwise() += bn.transpose();
  const double s2 = p.sigma_f * p.sigma_f;
  return (-0.5 * d2.array().max(0.0)).exp() * s2;
}

Matrix gram_matrix(const KernelParams& p, const Eigen::Ref<const Matrix>& x) {
  Matrix k = kernel_matrix(p, x, x);
  // exact symmetry and diagonal
  const double s2 = p.sigma_f * p.sigma_f;
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    k(i, i) = s2;
    for (Eigen::Index j = 0; j < i; ++j) k(i, j) = k(j, i);
  }
  return k;
}

namespace {

Matrix regularized_gram(const KernelParams& p, const Matrix& x) {
  Matrix a = gram_matrix(p, x);
  a.diagonal().array() += static_cast<double>(x.rows()) * p.lambda;
  return a;
}

bool well_conditioned(const Eigen::LLT<Matrix>& llt, const Matrix& a) {
  if (llt.info() != Eigen::Success) return false;
  const Vector d = llt.matrixLLT().diagonal();
  const double floor = static_cast<double>(a.rows()) * std::numeric_limits<double>::epsilon() * a.diagonal().maxCoeff();
  return (d.array().square() > floor).all();
}

}  // namespace

FittedEstimator::FittedEstimator(KernelParams params, Dataset data) : params_(std::move(params)), data_(std::move(data)) {
  params_.validate();
  data_.validate();
  if (data_.dimension() != params_.sigma_l.size()) {
    throw DimensionError("sigma_l has " + std::to_string(params_.sigma_l.size()) + " entries for " +
                         std::to_string(data_.dimension()) + "-dimensional data");
  }
  Matrix a = regularized_gram(params_, data_.x);
  llt_.compute(a);
  if (!well_conditioned(llt_, a)) {
    if (params_.lambda == 0.0) throw SingularSystemError("K is singular (lambda = 0 with repeated or near-repeated inputs)");
    jitter_ = 1e-12 * a.trace();
    a.diagonal().array() += jitter_;
    llt_.compute(a);
    if (llt_.info() != Eigen::Success) throw SingularSystemError("K + N lambda I is not positive definite");
  }
  weights_ = llt_.solve(data_.xp);
}

Matrix FittedEstimator::solve(const Eigen::Ref<const Matrix>& rhs) const { return llt_.solve(rhs); }

Vector FittedEstimator::predict(const Eigen::Ref<const Vector>& x) const {
  const Matrix row = x.transpose();
  return predict_rows(row).row(0).transpose();
}

Matrix FittedEstimator::predict_rows(const Eigen::Ref<const Matrix>& x) const {
  return kernel_matrix(params_, x, data_.x) * weights_;
}

Matrix FittedEstimator::apply(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& targets) const {
  if (targets.rows() != data_.size()) throw DimensionError("targets must have one row per training sample");
  return kernel_matrix(params_, x, data_.x) * llt_.solve(targets);
}

double FittedEstimator::relative_residual() const {
  const Matrix a = regularized_gram(params_, data_.x);
  const double scale = std::max(data_.xp.norm(), std::numeric_limits<double>::min());
  return (a * weights_ - data_.xp).norm() / scale;
}

FittedEstimator fit(const KernelParams& params, const Dataset& data) { return FittedEstimator(params, data); }

double r2_score(const Eigen::Ref<const Matrix>& truth, const Eigen::Ref<const Matrix>& predicted) {
  if (truth.rows() != predicted.rows() || truth.cols() != predicted.cols()) throw DimensionError("r2_score shape mismatch");
  if (truth.rows() < 1) throw DataError("r2_score needs at least one sample");
  double total = 0.0;
  for (Eigen::Index c = 0; c < truth.cols(); ++c) {
    const double mean = truth.col(c).mean();
    const double sst = (truth.col(c).array() - mean).square().sum();
    if (!(sst > 0.0)) throw DataError("r2_score: target column " + std::to_string(c) + " has zero variance");
    const double sse = (truth.col(c) - predicted.col(c)).squaredNorm();
    total += 1.0 - sse / sst;
  }
  return total / static_cast<double>(truth.cols());
}

double r2_score(const FittedEstimator& est, const Dataset& holdout) {
  return r2_score(holdout.xp, est.predict_rows(holdout.x));
}

double log_marginal_likelihood(const KernelParams& params, const Dataset& data) {
  Vector unused;
  return log_marginal_likelihood(params, data, unused);
}

double log_marginal_likelihood(const KernelParams& params, const Dataset& data, Vector& gradient) {
  params.validate();
  data.validate();
  const Eigen::Index n = data.size();
  const Eigen::Index d = data.dimension();
  if (params.sigma_l.size() != d) throw DimensionError("sigma_l does not match the data dimension");

  const Matrix k = gram_matrix(params, data.x);
  Matrix a = k;
  a.diagonal().array() += static_cast<double>(n) * params.lambda;
  const Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw SingularSystemError("K + N lambda I is not positive definite");

  const Matrix alpha = llt.solve(data.xp);
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double cols = static_cast<double>(data.xp.cols());
  const double value = -0.5 * (data.xp.array() * alpha.array()).sum() - 0.5 * cols * logdet -
                       0.5 * cols * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

  // d/dtheta = 1/2 tr((alpha alpha^T - cols A^{-1}) dA/dtheta)
  const Matrix inner = alpha * alpha.transpose() - cols * llt.solve(Matrix::Identity(n, n));
  gradient.resize(d + 2);
  gradient[0] = 0.5 * (inner.array() * (2.0 * k).array()).sum();
  for (Eigen::Index j = 0; j < d; ++j) {
    const Eigen::ArrayXd col = data.x.col(j).array();
    Matrix dist2(n, n);
    for (Eigen::Index c = 0; c < n; ++c) dist2.col(c) = (col - col[c]).square().matrix();
    const double l = params.sigma_l[j];
    gradient[1 + j] = 0.5 * (inner.array() * k.array() * dist2.array()).sum() / (l * l);
  }
  gradient[d + 1] = 0.5 * inner.trace() * static_cast<double>(n) * params.lambda;
  return value;
}

}  // namespace sbc
