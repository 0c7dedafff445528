#include "sbc/spectral.hpp"

#include <cmath>
#include <numbers>

#include "sbc/errors.hpp"

namespace sbc {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

Vector band_masses_1d(double sigma, int degree) {
  if (degree < 1) throw Error("spectral degree must be at least 1");
  if (!(sigma > 0.0)) throw Error("feature lengthscale must be positive");
  Vector m(2 * degree + 1);
  for (int k = -degree; k <= degree; ++k) {
    const double hi = (k == degree) ? 1.0 : normal_cdf((kTwoPi * k + std::numbers::pi) * sigma);
    const double lo = (k == -degree) ? 0.0 : normal_cdf((kTwoPi * k - std::numbers::pi) * sigma);
    m[k + degree] = hi - lo;
  }
  // symmetric by construction; enforce it exactly and use the upper tail for accuracy
  for (int k = 1; k <= degree; ++k) {
    const double tail_hi = (k == degree) ? 0.0 : normal_cdf(-(kTwoPi * k + std::numbers::pi) * sigma);
    const double tail_lo = normal_cdf(-(kTwoPi * k - std::numbers::pi) * sigma);
    m[degree + k] = m[degree - k] = tail_lo - tail_hi;
  }
  m[degree] = 1.0 - 2.0 * m.tail(degree).sum();
  return m;
}

Eigen::MatrixXi frequency_grid(int degree, std::size_t dimension) {
  if (degree < 1) throw Error("spectral degree must be at least 1");
  if (dimension < 1) throw DimensionError("dimension must be at least 1");
  const int side = 2 * degree + 1;
  std::size_t total = 1;
  for (std::size_t d = 0; d < dimension; ++d) total *= static_cast<std::size_t>(side);
  const auto n = static_cast<Eigen::Index>(dimension);
  Eigen::MatrixXi out(static_cast<Eigen::Index>((total - 1) / 2 + 1), n);
  out.row(0).setZero();
  Eigen::Index row = 1;
  Eigen::VectorXi k(n);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (Eigen::Index d = n; d-- > 0;) {
      k[d] = static_cast<int>(rest % static_cast<std::size_t>(side)) - degree;
      rest /= static_cast<std::size_t>(side);
    }
    Eigen::Index first = 0;
    while (first < n && k[first] == 0) ++first;
    if (first == n || k[first] < 0) continue;
    out.row(row++) = k.transpose();
  }
  return out;
}

Vector spectral_weights(const Vector& sigma, int degree) {
  const auto n = static_cast<std::size_t>(sigma.size());
  const Eigen::MatrixXi freq = frequency_grid(degree, n);
  std::vector<Vector> per_dim;
  per_dim.reserve(n);
  for (std::size_t d = 0; d < n; ++d) per_dim.push_back(band_masses_1d(sigma[static_cast<Eigen::Index>(d)], degree));
  Vector m(freq.rows());
  for (Eigen::Index j = 0; j < freq.rows(); ++j) {
    double p = 1.0;
    for (std::size_t d = 0; d < n; ++d) p *= per_dim[d][freq(j, static_cast<Eigen::Index>(d)) + degree];
    m[j] = (j == 0) ? p : 2.0 * p;
  }
  return m;
}

FeatureMap::FeatureMap(int degree, double sigma_f, Vector feature_sigma, UnitTransform transform)
    : degree_(degree),
      sigma_f_(sigma_f),
      feature_sigma_(std::move(feature_sigma)),
      transform_(std::move(transform)) {
  if (!(sigma_f_ > 0.0)) throw Error("sigma_f must be positive");
  if (static_cast<std::size_t>(feature_sigma_.size()) != transform_.dimension()) {
    throw DimensionError("feature_sigma_l has " + std::to_string(feature_sigma_.size()) + " entries for dimension " +
                         std::to_string(transform_.dimension()));
  }
  frequencies_ = frequency_grid(degree_, transform_.dimension());
  masses_ = spectral_weights(feature_sigma_, degree_);
  weights_.resize(size());
  const double s2 = sigma_f_ * sigma_f_;
  weights_[0] = s2 * masses_[0];
  for (Eigen::Index j = 1; j < masses_.size(); ++j) weights_[2 * j - 1] = weights_[2 * j] = s2 * masses_[j];
}

Matrix FeatureMap::basis_torus(const Eigen::Ref<const Matrix>& u) const {
  if (static_cast<std::size_t>(u.cols()) != dimension()) throw DimensionError("torus point dimension mismatch");
  const Matrix phase = kTwoPi * (u * frequencies_.cast<double>().transpose());
  Matrix t(u.rows(), size());
  t.col(0).setOnes();
  for (Eigen::Index j = 1; j < frequencies_.rows(); ++j) {
    t.col(2 * j - 1) = phase.col(j).array().cos().matrix();
    t.col(2 * j) = phase.col(j).array().sin().matrix();
  }
  return t;
}

Vector FeatureMap::features_torus(const Eigen::Ref<const Vector>& u) const {
  const Matrix row = u.transpose();
  return (basis_torus(row).row(0).transpose().array() * weights_.array()).matrix();
}

Vector FeatureMap::features(const Eigen::Ref<const Vector>& x) const { return features_torus(transform_.apply(x)); }

Matrix FeatureMap::features_rows(const Eigen::Ref<const Matrix>& x) const {
  Matrix u(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) u.row(i) = transform_.apply(x.row(i).transpose()).transpose();
  return basis_torus(u) * weights_.asDiagonal();
}

Matrix basis_on_grid(const FeatureMap& map, std::size_t points_per_dim) {
  const auto q = static_cast<long long>(points_per_dim);
  const auto n = static_cast<Eigen::Index>(map.dimension());
  Eigen::Index total = 1;
  for (Eigen::Index d = 0; d < n; ++d) total *= static_cast<Eigen::Index>(q);

  Vector cos_table(q), sin_table(q);
  for (long long i = 0; i < q; ++i) {
    const double a = kTwoPi * static_cast<double>(i) / static_cast<double>(q);
    cos_table[i] = std::cos(a);
    sin_table[i] = std::sin(a);
  }
  const Eigen::MatrixXi& freq = map.frequencies();
  Matrix t(total, map.size());
  std::vector<long long> idx(static_cast<std::size_t>(n));
  for (Eigen::Index p = 0; p < total; ++p) {
    long long rest = p;
    for (Eigen::Index d = n; d-- > 0;) {
      idx[static_cast<std::size_t>(d)] = rest % q;
      rest /= q;
    }
    t(p, 0) = 1.0;
    for (Eigen::Index j = 1; j < freq.rows(); ++j) {
      long long phase = 0;
      for (Eigen::Index d = 0; d < n; ++d) phase += static_cast<long long>(freq(j, d)) * idx[static_cast<std::size_t>(d)];
      phase %= q;
      if (phase < 0) phase += q;
      t(p, 2 * j - 1) = cos_table[phase];
      t(p, 2 * j) = sin_table[phase];
    }
  }
  return t;
}

Matrix features_on_lattice(const FeatureMap& map, const Lattice& lattice) {
  if (lattice.dimension != map.dimension()) throw DimensionError("lattice and feature map differ in dimension");
  return basis_on_grid(map, lattice.points_per_dim) * map.weights().asDiagonal();
}

std::size_t projection_resolution(int degree, std::size_t dimension) {
  const double budget = std::pow(2.0e4, 1.0 / static_cast<double>(dimension));
  const auto fine = static_cast<std::size_t>(std::min(256.0, std::floor(budget)));
  return std::max(fine, static_cast<std::size_t>(4 * (2 * degree + 1)));
}

Matrix transition_matrix(const FittedEstimator& est, const FeatureMap& map, TransitionMethod method) {
  if (static_cast<std::size_t>(est.data().dimension()) != map.dimension()) {
    throw DimensionError("estimator and feature map differ in dimension");
  }
  const Dataset& data = est.data();
  Matrix u_plus(data.size(), data.dimension());
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    u_plus.row(i) = map.transform().apply(data.xp.row(i).transpose()).transpose();
  }
  const Matrix t_plus = map.basis_torus(u_plus);
  const Vector& w = map.weights();

  if (method == TransitionMethod::kernel) {
    Matrix u_x(data.size(), data.dimension());
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      u_x.row(i) = map.transform().apply(data.x.row(i).transpose()).transpose();
    }
    const Matrix t_x = map.basis_torus(u_x);
    return t_x.transpose() * est.solve(t_plus) * w.asDiagonal();
  }

  const std::size_t q = projection_resolution(map.degree(), map.dimension());
  const Matrix grid = torus_grid(q, map.dimension());
  Matrix x_grid(grid.rows(), grid.cols());
  for (Eigen::Index i = 0; i < grid.rows(); ++i) x_grid.row(i) = map.transform().inverse(grid.row(i).transpose()).transpose();
  const Matrix expected = est.apply(x_grid, t_plus);  // E[T(x+) | x] on the grid
  const Matrix t_grid = basis_on_grid(map, q);
  // discrete orthogonality: |1|^2 = Q^n, |cos|^2 = |sin|^2 = Q^n / 2
  Vector inv_norm = Vector::Constant(map.size(), 2.0 / static_cast<double>(grid.rows()));
  inv_norm[0] = 1.0 / static_cast<double>(grid.rows());
  const Matrix g = inv_norm.asDiagonal() * (t_grid.transpose() * expected);
  return w.cwiseInverse().asDiagonal() * g * w.asDiagonal();
}

}  // namespace sbc
