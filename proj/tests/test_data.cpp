#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "sbc/data.hpp"
#include "sbc/dynamics.hpp"
#include "sbc/errors.hpp"

using namespace sbc;
using Rows = std::vector<std::vector<double>>;

TEST_CASE("expressions") {
  Vector x(1);
  x << 0.6;
  CHECK(Expression("x1 / 2", 1).evaluate(x) == doctest::Approx(0.3));

  const DynamicsModel barr2 = parse_dynamics({"x1 + 0.1 * (x2 - 1 + exp(-x1))", "x2 - 0.1 * sin(x1)^2"});
  const Vector y = barr2.mean(Vector::Zero(2));
  CHECK(std::abs(y[0]) < 1e-15);
  CHECK(std::abs(y[1]) < 1e-15);

  Vector z(2);
  z << 0.7, -0.3;
  const Vector w = barr2.mean(z);
  CHECK(w[0] == doctest::Approx(0.7 + 0.1 * (-0.3 - 1 + std::exp(-0.7))));
  CHECK(w[1] == doctest::Approx(-0.3 - 0.1 * std::pow(std::sin(0.7), 2)));

  CHECK(Expression("-2^2", 1).evaluate(x) == doctest::Approx(-4));
  CHECK(Expression("2^3^2", 1).evaluate(x) == doctest::Approx(512));
  CHECK(Expression("x1^3 / 3 - pi", 1).evaluate(x) == doctest::Approx(0.072 - M_PI));

  CHECK_THROWS_AS(Expression("x1 +", 1), ExpressionError);
  CHECK_THROWS_AS(Expression("x3", 2), ExpressionError);
  CHECK_THROWS_AS(Expression("foo(x1)", 1), ExpressionError);
}

TEST_CASE("sampling") {
  const DynamicsModel quiet = parse_dynamics({"x1 / 2"});
  std::mt19937_64 rng(1);
  Vector x(1);
  x << 0.6;
  CHECK(quiet.step(x, rng)[0] == doctest::Approx(0.3));

  Vector noise(1);
  noise << 0.1;
  const DynamicsModel noisy = parse_dynamics({"x1 / 2"}, noise);
  const RegionSet box = RegionSet::rect(Vector::Constant(1, -1), Vector::Constant(1, 1));
  const Dataset a = sample_transitions(noisy, 1000, box, 42);
  const Dataset b = sample_transitions(noisy, 1000, box, 42);
  CHECK(a == b);
  CHECK_FALSE(a == sample_transitions(noisy, 1000, box, 43));
  CHECK(a.x.minCoeff() >= -1.0);
  CHECK(a.x.maxCoeff() <= 1.0);
  const Vector resid = a.xp.col(0) - a.x.col(0) / 2.0;
  const double sd = std::sqrt(resid.squaredNorm() / 1000.0);
  CHECK(sd == doctest::Approx(0.1).epsilon(0.1));

  Vector n2(2);
  n2 << 0.1, 0.1;
  const DynamicsModel two = parse_dynamics({"x1", "x2"}, n2);
  const Dataset d = sample_transitions(two, 1000, RegionSet::rect(Vector::Constant(2, -2), Vector::Constant(2, 2)), 3);
  CHECK(d.x.rows() == 1000);
  CHECK(d.x.cols() == 2);
  CHECK(d.xp.rows() == 1000);
  CHECK(d.xp.cols() == 2);
}

TEST_CASE("loading samples") {
  const Dataset one = load_samples(Rows{{0.5}}, Rows{{0.25}});
  CHECK(one.size() == 1);
  CHECK(one.dimension() == 1);

  CHECK_THROWS_AS(load_samples(std::vector<std::vector<double>>(10, {0.0}), std::vector<std::vector<double>>(9, {0.0})),
                  DataError);
  CHECK_THROWS_AS(load_samples(Rows{{0.0, 1.0}, {2.0}}, Rows{{0.0, 1.0}, {2.0, 3.0}}), DataError);
  CHECK_THROWS_AS(load_samples(Rows{{NAN}}, Rows{{0.0}}), DataError);

  const auto dir = std::filesystem::temp_directory_path() / "sbc_data_test";
  std::filesystem::create_directories(dir);
  Matrix x = Matrix::Random(1000, 2), xp = Matrix::Random(1000, 2);
  write_csv_matrix(dir / "x.csv", x);
  write_csv_matrix(dir / "xp.csv", xp);
  const Dataset csv = load_samples(dir / "x.csv", dir / "xp.csv");
  CHECK(csv.size() == 1000);
  CHECK(csv.dimension() == 2);
  CHECK((csv.x - x).cwiseAbs().maxCoeff() == 0.0);

  std::ofstream(dir / "bad.csv") << "1,2\n3\n";
  CHECK_THROWS_AS(read_csv_matrix(dir / "bad.csv"), DataError);
  std::ofstream(dir / "text.csv") << "1,abc\n";
  CHECK_THROWS_AS(read_csv_matrix(dir / "text.csv"), DataError);
  std::filesystem::remove_all(dir);
}
