#include <doctest.h>

#include <cmath>
#include <random>

#include "sbc/errors.hpp"
#include "sbc/estimator.hpp"

using namespace sbc;
using Rows = std::vector<std::vector<double>>;

namespace {

KernelParams params(double sf, double sl, double lambda, Eigen::Index n = 1) {
  return KernelParams{sf, Vector::Constant(n, sl), lambda};
}

Dataset random_dataset(Eigen::Index count, Eigen::Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Dataset d{Matrix(count, n), Matrix(count, n)};
  for (Eigen::Index i = 0; i < count; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      d.x(i, j) = u(rng);
      d.xp(i, j) = std::sin(3.0 * d.x(i, j)) + 0.1 * u(rng);
    }
  }
  return d;
}

}  // namespace

TEST_CASE("gaussian kernel") {
  Vector a(1), b(1);
  a << 0.3;
  b << 1.3;
  CHECK(kernel_eval(params(2.0, 0.7, 0.0), a, a) == doctest::Approx(4.0));
  CHECK(kernel_eval(params(1.0, 1.0, 0.0), a, b) == doctest::Approx(std::exp(-0.5)));
  CHECK(kernel_eval(params(1.0, 1.0, 0.0), a, b) == doctest::Approx(0.60653).epsilon(1e-5));

  Matrix one(1, 1);
  one << 0.2;
  CHECK(gram_matrix(params(1.5, 1.0, 0.0), one)(0, 0) == doctest::Approx(2.25));
  Matrix twin(2, 1);
  twin << 0.4, 0.4;
  CHECK(gram_matrix(params(1.0, 0.3, 0.0), twin).isApprox(Matrix::Ones(2, 2)));

  // anisotropic lengthscales
  Vector x(2), y(2);
  x << 0.0, 0.0;
  y << 1.0, 2.0;
  KernelParams p{1.0, Vector(2), 0.0};
  p.sigma_l << 1.0, 2.0;
  CHECK(kernel_eval(p, x, y) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("single sample closed forms") {
  const Dataset d = load_samples(Rows{{0.5}}, Rows{{0.25}});
  const FittedEstimator est = fit(params(1.2, 0.5, 0.3), d);
  CHECK(est.weights()(0, 0) == doctest::Approx(0.25 / (1.44 + 0.3)));
  Vector x(1);
  x << 0.5;
  CHECK(est.predict(x)[0] == doctest::Approx(1.44 / 1.74 * 0.25));
  CHECK(fit(params(1.0, 0.5, 0.0), d).predict(x)[0] == doctest::Approx(0.25));

  // LML of a single point: -y^2/2 - log(1)/2 - log(2 pi)/2
  const Dataset y = load_samples(Rows{{0.0}}, Rows{{0.7}});
  CHECK(log_marginal_likelihood(params(1.0, 1.0, 0.0), y) == doctest::Approx(-0.5 * 0.49 - 0.91893853320467274));
}

TEST_CASE("duplicate inputs without ridge are singular") {
  const Dataset d = load_samples(Rows{{0.1}, {0.1}}, Rows{{0.0}, {1.0}});
  CHECK_THROWS_AS(fit(params(1.0, 0.5, 0.0), d), SingularSystemError);
  CHECK_NOTHROW(fit(params(1.0, 0.5, 1e-3), d));
  CHECK_THROWS(fit(params(-1.0, 0.5, 1e-3), d));
}

TEST_CASE("predictions match an explicit dense solve") {
  const Dataset d = random_dataset(60, 2, 5);
  const KernelParams p = params(1.3, 0.4, 1e-3, 2);
  const FittedEstimator est = fit(p, d);
  Matrix a(60, 60);
  for (int i = 0; i < 60; ++i) {
    for (int j = 0; j < 60; ++j) {
      const double r2 = ((d.x.row(i) - d.x.row(j)).array() / 0.4).square().sum();
      a(i, j) = 1.69 * std::exp(-0.5 * r2);
    }
  }
  a.diagonal().array() += 60 * 1e-3;
  const Matrix w = a.fullPivLu().solve(d.xp);
  CHECK((w - est.weights()).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(est.relative_residual() < 1e-10);

  const Matrix test = Matrix::Random(15, 2);
  const Matrix expect = kernel_matrix(p, test, d.x) * w;
  CHECK((est.predict_rows(test) - expect).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ridge interpolation at vanishing lambda") {
  for (unsigned seed : {1u, 2u, 3u}) {
    const Dataset d = random_dataset(50, 1, seed);
    // random inputs can nearly coincide, so the lengthscale sits below their typical gap
    const FittedEstimator est = fit(params(1.0, 0.02, 1e-12), d);
    const Matrix pred = est.predict_rows(d.x);
    CHECK((pred - d.xp).cwiseAbs().maxCoeff() < 1e-4);
  }
  Matrix grid(50, 1);
  for (int i = 0; i < 50; ++i) grid(i, 0) = -1.0 + 2.0 * i / 49.0;
  const Dataset even{grid, grid.array().sin().matrix()};
  const FittedEstimator smooth = fit(params(1.0, 0.1, 1e-12), even);
  CHECK((smooth.predict_rows(grid) - even.xp).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("r2 score") {
  Matrix y(3, 1), exact(3, 1), flat(3, 1), half(3, 1);
  y << 0, 1, 2;
  exact = y;
  flat.setConstant(1.0);
  half << 0, 1, 1;
  CHECK(r2_score(y, exact) == doctest::Approx(1.0));
  CHECK(r2_score(y, flat) == doctest::Approx(0.0));
  CHECK(r2_score(y, half) == doctest::Approx(0.5));
}
