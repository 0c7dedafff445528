#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "sbc/dynamics.hpp"
#include "sbc/spectral.hpp"

using namespace sbc;

namespace {

const double two_pi = 2.0 * std::numbers::pi;

UnitTransform interval_transform() { return unit_transform(RegionSet::rect(Vector::Constant(1, -1), Vector::Constant(1, 1))); }

double reconstructed(const FeatureMap& map, const Vector& x, const Vector& y) {
  return map.features(x).dot(map.weights().cwiseInverse().asDiagonal() * map.features(y));
}

// Gaussian in torus coordinates summed over periodic images
double periodic_gaussian(double d, double sigma, double sf) {
  double s = 0.0;
  for (int k = -3; k <= 3; ++k) s += std::exp(-0.5 * std::pow((d + k) / sigma, 2));
  return sf * sf * s;
}

double max_reconstruction_error(int degree, double sigma) {
  const FeatureMap map(degree, 1.0, Vector::Constant(1, sigma), interval_transform());
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vector x = Vector::Constant(1, u(rng)), y = Vector::Constant(1, u(rng));
    const double d = map.transform().apply(x)[0] - map.transform().apply(y)[0];
    worst = std::max(worst, std::abs(reconstructed(map, x, y) - periodic_gaussian(d, sigma, 1.0)));
  }
  return worst;
}

}  // namespace

TEST_CASE("band masses") {
  // spectral std pi puts the central band at +-1 std
  const Vector m = band_masses_1d(1.0 / std::numbers::pi, 1);
  const double central = std::erf(1.0 / std::sqrt(2.0));
  CHECK(m[1] == doctest::Approx(central).epsilon(1e-12));
  CHECK(m[0] + m[2] == doctest::Approx(1.0 - central).epsilon(1e-12));
  CHECK(m.sum() == doctest::Approx(1.0).epsilon(1e-14));

  const Vector w = spectral_weights(Vector::Constant(1, 1.0 / std::numbers::pi), 1);
  REQUIRE(w.size() == 2);
  CHECK(w[0] == doctest::Approx(0.68269).epsilon(1e-5));
  CHECK(w[1] == doctest::Approx(0.31731).epsilon(1e-5));

  Vector s2(2);
  s2 << 0.05, 0.2;
  CHECK(spectral_weights(s2, 3).sum() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(spectral_weights(Vector::Constant(1, 1e3), 4)[0] == doctest::Approx(1.0));
}

TEST_CASE("frequency grid") {
  const Eigen::MatrixXi one = frequency_grid(5, 1);
  CHECK(one.rows() == 6);
  for (int j = 0; j < 6; ++j) CHECK(one(j, 0) == j);
  const Eigen::MatrixXi two = frequency_grid(2, 2);
  CHECK(two.rows() == (25 - 1) / 2 + 1);
  CHECK(two.row(0).isZero());
  // no frequency appears together with its negation
  for (Eigen::Index a = 1; a < two.rows(); ++a) {
    for (Eigen::Index b = 1; b < two.rows(); ++b) CHECK_FALSE(two.row(a) == -two.row(b));
  }
}

TEST_CASE("feature map values") {
  const FeatureMap map(5, 1.5, Vector::Constant(1, 0.0925), interval_transform());
  CHECK(map.size() == 11);
  const Vector phi = map.features(Vector::Constant(1, -1.0));  // P(x) = 0
  REQUIRE(phi.size() == 11);
  CHECK(phi[0] == doctest::Approx(2.25 * map.masses()[0]));
  for (int j = 1; j <= 5; ++j) {
    CHECK(phi[2 * j - 1] == doctest::Approx(2.25 * map.masses()[j]));
    CHECK(std::abs(phi[2 * j]) < 1e-15);
  }

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const Vector x = Vector::Constant(1, u(rng));
    CHECK(reconstructed(map, x, x) == doctest::Approx(2.25).epsilon(1e-13));
  }

  // one period along each torus axis
  Vector s2(2);
  s2 << 0.1, 0.2;
  const FeatureMap two(3, 1.0, s2, unit_transform(RegionSet::rect(Vector::Constant(2, -2), Vector::Constant(2, 2))));
  Vector t(2);
  t << 0.37, 0.81;
  for (int k = 0; k < 2; ++k) {
    Vector shifted = t;
    shifted[k] += 1.0;
    CHECK((two.features_torus(t) - two.features_torus(shifted)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("kernel reconstruction") {
  CHECK(max_reconstruction_error(8, 0.06) < 0.05);

  // lengthscale tied to the band count as in 2 pi F = 3 / sigma
  double previous = 1e300;
  for (int f : {2, 4, 8, 16}) {
    const double err = max_reconstruction_error(f, 3.0 / (two_pi * f));
    MESSAGE("F = " << f << ": max error " << err);
    CHECK(err <= previous * 1.05);
    previous = err;
  }
}

TEST_CASE("lattice features match direct evaluation") {
  const SafetySpec spec{RegionSet::rect(Vector::Constant(1, -1), Vector::Constant(1, 1)),
                        RegionSet::rect(Vector::Constant(1, -0.5), Vector::Constant(1, 0.5)),
                        RegionSet::rect(Vector::Constant(1, 0.9), Vector::Constant(1, 1))};
  const UnitTransform p = unit_transform(spec.domain);
  const FeatureMap map(3, 1.0, Vector::Constant(1, 0.15), p);
  const Lattice lat = build_lattice(16, spec, p, 0.0);
  const Matrix fast = features_on_lattice(map, lat);
  REQUIRE(fast.rows() == 16);
  REQUIRE(fast.cols() == map.size());
  for (Eigen::Index i = 0; i < 16; ++i) {
    const Vector direct = map.features(p.inverse(lat.points.row(i).transpose()));
    CHECK((fast.row(i).transpose() - direct).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK((fast.row(0).transpose() - map.features(p.inverse(Vector::Zero(1)))).cwiseAbs().maxCoeff() < 1e-12);

  Vector s2(2);
  s2 << 0.1, 0.3;
  const SafetySpec spec2{RegionSet::rect(Vector::Constant(2, -1), Vector::Constant(2, 1)),
                         RegionSet::rect(Vector::Constant(2, -0.2), Vector::Constant(2, 0.2)),
                         RegionSet::rect(Vector::Constant(2, 0.8), Vector::Constant(2, 1))};
  const UnitTransform p2 = unit_transform(spec2.domain);
  const FeatureMap map2(2, 1.0, s2, p2);
  const Lattice lat2 = build_lattice(9, spec2, p2, 0.0);
  const Matrix fast2 = features_on_lattice(map2, lat2);
  for (Eigen::Index i = 0; i < lat2.size(); ++i) {
    const Vector direct = map2.features(p2.inverse(lat2.points.row(i).transpose()));
    CHECK((fast2.row(i).transpose() - direct).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("transition matrix agrees with the kernel-form estimate") {
  Vector noise(1);
  noise << 0.1;
  const RegionSet box = RegionSet::rect(Vector::Constant(1, -1), Vector::Constant(1, 1));
  const Dataset d = sample_transitions(parse_dynamics({"x1 / 2"}, noise), 200, box, 42);
  // estimator lengthscale 0.12 in state units is the feature lengthscale 0.06 on the torus
  const FittedEstimator est = fit(KernelParams{1.0, Vector::Constant(1, 0.12), 1e-5}, d);
  const FeatureMap map(8, 1.0, Vector::Constant(1, 0.06), unit_transform(box));

  auto worst_ratio = [&](TransitionMethod method, double range) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-range, range), coef(-1.0, 1.0);
    Matrix x(20, 1);
    for (int i = 0; i < 20; ++i) x(i, 0) = u(rng);
    const Matrix h = transition_matrix(est, map, method);
    CHECK(h.rows() == map.size());
    CHECK(h.cols() == map.size());
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      Vector b(map.size());
      for (auto& v : b) v = coef(rng);
      const Vector oracle = oracle::kernel_form_expectation(est, map, x, b);
      const Vector ours = map.features_rows(x) * (h * b);
      worst = std::max(worst, (ours - oracle).cwiseAbs().maxCoeff() / b.norm());
    }
    return worst;
  };
  CHECK(worst_ratio(TransitionMethod::projection, 1.0) <= 0.05);
  // the kernel form wraps samples across the torus seam, so it is only checked away from it
  CHECK(worst_ratio(TransitionMethod::kernel, 0.7) <= 0.05);
}

TEST_CASE("identity dynamics give an identity-like operator") {
  Matrix xs(40, 1);
  for (int i = 0; i < 40; ++i) xs(i, 0) = -1.0 + 2.0 * (i + 0.5) / 40.0;
  const Dataset d{xs, xs};
  const FittedEstimator est = fit(KernelParams{1.0, Vector::Constant(1, 0.15), 1e-10}, d);
  const FeatureMap map(4, 1.0, Vector::Constant(1, 0.12), interval_transform());
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Matrix h = transition_matrix(est, map);
  Vector b(map.size());
  for (auto& v : b) v = u(rng);
  const Matrix phi = map.features_rows(xs);
  CHECK((phi * (h * b) - phi * b).cwiseAbs().maxCoeff() < 1e-2);
  CHECK((h - Matrix::Identity(h.rows(), h.cols())).norm() < 1e-2);
}
