#pragma once

#include <Eigen/Dense>

#include <vector>

#include "sbc/estimator.hpp"
#include "sbc/geometry.hpp"

namespace sbc {

/// Masses of the 1-D frequency bands k = -F..F (index k + F) for a Gaussian spectral
/// measure with standard deviation 1 / sigma, bands of half-width pi around 2 pi k.
/// The two outermost bands absorb the tails.
Vector band_masses_1d(double sigma, int degree);

/// Integer frequency vectors: row 0 is zero, then one representative per +-k pair
/// (first non-zero entry positive), in lexicographic order over {-F..F}^n.
Eigen::MatrixXi frequency_grid(int degree, std::size_t dimension);

/// Band masses m_0..m_M; m_j for j >= 1 is the combined mass of the +-k pair.
Vector spectral_weights(const Vector& sigma, int degree);

/// Truncated Fourier feature map phi(x) = D T(P(x)) with
/// T(u) = [1, cos(2 pi k_1.u), sin(2 pi k_1.u), ...] and D = diag(sigma_f^2 m).
class FeatureMap {
 public:
  FeatureMap(int degree, double sigma_f, Vector feature_sigma, UnitTransform transform);

  [[nodiscard]] std::size_t dimension() const noexcept { return transform_.dimension(); }
  [[nodiscard]] int degree() const noexcept { return degree_; }
  [[nodiscard]] Eigen::Index num_bands() const noexcept { return frequencies_.rows() - 1; }  // M
  [[nodiscard]] Eigen::Index size() const noexcept { return 2 * num_bands() + 1; }
  [[nodiscard]] const Eigen::MatrixXi& frequencies() const noexcept { return frequencies_; }
  [[nodiscard]] const Vector& masses() const noexcept { return masses_; }
  [[nodiscard]] double sigma_f() const noexcept { return sigma_f_; }
  [[nodiscard]] const Vector& feature_sigma() const noexcept { return feature_sigma_; }
  [[nodiscard]] const UnitTransform& transform() const noexcept { return transform_; }

  /// Diagonal of D, length 2M + 1.
  [[nodiscard]] const Vector& weights() const noexcept { return weights_; }

  [[nodiscard]] Vector features(const Eigen::Ref<const Vector>& x) const;
  /// Features at a torus point u = P(x).
  [[nodiscard]] Vector features_torus(const Eigen::Ref<const Vector>& u) const;
  /// Unweighted trigonometric basis T(u), one row per row of `u`.
  [[nodiscard]] Matrix basis_torus(const Eigen::Ref<const Matrix>& u) const;
  /// phi at every row of `x` (state coordinates).
  [[nodiscard]] Matrix features_rows(const Eigen::Ref<const Matrix>& x) const;

 private:
  int degree_;
  double sigma_f_;
  Vector feature_sigma_;
  UnitTransform transform_;
  Eigen::MatrixXi frequencies_;
  Vector masses_;
  Vector weights_;
};

/// Unweighted basis T on the regular grid {i/Q}^n (point order of torus_grid), using
/// exact integer phase reduction.
Matrix basis_on_grid(const FeatureMap& map, std::size_t points_per_dim);

/// phi on every lattice point, Q^n x (2M + 1).
Matrix features_on_lattice(const FeatureMap& map, const Lattice& lattice);

enum class TransitionMethod {
  /// Project k(x)^T (K + N lambda I)^{-1} T(X+) onto the basis on a fine torus grid:
  /// H = D^{-1} G D.
  projection,
  /// H = D^{-1} Phi_X^T (K + N lambda I)^{-1} Phi_+.
  kernel,
};

/// Points per dimension used by the projection method.
std::size_t projection_resolution(int degree, std::size_t dimension);

/// Finite-basis transition operator H with phi(x)^T H b ~ E[B(x+) | x].
Matrix transition_matrix(const FittedEstimator& est, const FeatureMap& map,
                         TransitionMethod method = TransitionMethod::projection);

}  // namespace sbc
