#include <doctest.h>

#include <cmath>

#include "sbc/errors.hpp"
#include "sbc/geometry.hpp"

using namespace sbc;

namespace {
Vector v(std::initializer_list<double> xs) {
  Vector out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}
}  // namespace

TEST_CASE("membership") {
  CHECK(contains(RegionSet::rect(v({-1}), v({1})), v({0})));
  CHECK(contains(RegionSet::sphere(v({-0.5, 0.5}), 0.4), v({-0.5, 0.5})));
  CHECK_FALSE(contains(RegionSet::rect(v({-1}), v({-0.9})), v({0})));
  // closed sets
  CHECK(contains(RegionSet::rect(v({-1}), v({1})), v({1})));
  CHECK(contains(RegionSet::sphere(v({0, 0}), 1.0), v({1, 0})));
  CHECK_THROWS_AS(contains(RegionSet::rect(v({-1}), v({1})), v({0, 0})), DimensionError);

  RegionSet multi({RegionSet::rect(v({-1}), v({-0.5})), RegionSet::rect(v({0.5}), v({1}))});
  CHECK(contains(multi, v({0.75})));
  CHECK_FALSE(contains(multi, v({0})));
}

TEST_CASE("dilation") {
  const RegionSet r = scale_set(RegionSet::rect(v({-1}), v({1})), 0.04);
  CHECK(r.as_rect().lower[0] == doctest::Approx(-1.04));
  CHECK(r.as_rect().upper[0] == doctest::Approx(1.04));

  const RegionSet s = scale_set(RegionSet::sphere(v({0.3, 0.1}), 0.4), 0.05);
  CHECK(s.as_sphere().radius_sq == doctest::Approx(0.441).epsilon(1e-12));
  CHECK(s.as_sphere().center == v({0.3, 0.1}));

  const RegionSet same = RegionSet::rect(v({2, -3}), v({4, 1}));
  CHECK(scale_set(same, 0.0) == same);

  // off-centre box grows about its own centre
  const RegionSet shifted = scale_set(RegionSet::rect(v({2}), v({4})), 0.5);
  CHECK(shifted.as_rect().lower[0] == doctest::Approx(1.5));
  CHECK(shifted.as_rect().upper[0] == doctest::Approx(4.5));
}

TEST_CASE("set text round trip") {
  const RegionSet s = parse_region_set("SphereSet([-0.5, 0.5], 0.63245553203367588)");
  CHECK(s.as_sphere().radius_sq == doctest::Approx(0.4).epsilon(1e-14));
  const RegionSet r = parse_region_set("RectSet([-3, -2], [2.5, 1])");
  CHECK(parse_region_set(r.to_string()) == r);
  CHECK(parse_region_set(s.to_string()) == s);
  CHECK_THROWS(parse_region_set("RectSet([1], [0])"));
  CHECK_THROWS(parse_region_set("Box([0], [1])"));
}

TEST_CASE("unit transform") {
  const UnitTransform p = unit_transform(RegionSet::rect(v({-1}), v({1})));
  CHECK(p.apply(v({1}))[0] == doctest::Approx(1.0));
  CHECK(p.apply(v({-1}))[0] == doctest::Approx(0.0));
  CHECK(p.apply(v({0.2}))[0] == doctest::Approx(0.6));

  const UnitTransform over = unit_transform(RegionSet::rect(v({1, -7}), v({90, 19})));
  const Vector corner = over.apply(v({90, 19}));
  CHECK(corner[0] == doctest::Approx(1.0));
  CHECK(corner[1] == doctest::Approx(1.0));
  const Vector back = over.inverse(over.apply(v({12.5, 3.25})));
  CHECK(back[0] == doctest::Approx(12.5));
  CHECK(back[1] == doctest::Approx(3.25));

  const UnitTransform padded = unit_transform(RegionSet::rect(v({0}), v({1})), 0.25);
  CHECK(padded.apply(v({0}))[0] == doctest::Approx(0.25 / 1.5));
}

TEST_CASE("torus lattice") {
  const Matrix g = torus_grid(4, 1);
  REQUIRE(g.rows() == 4);
  for (int i = 0; i < 4; ++i) CHECK(g(i, 0) == doctest::Approx(0.25 * i));
  CHECK(torus_grid(300, 1).rows() == 300);
  CHECK(torus_grid(330, 2).rows() == 108900);

  const SafetySpec spec{RegionSet::rect(v({-1}), v({1})), RegionSet::rect(v({-0.5}), v({0.5})),
                        RegionSet({RegionSet::rect(v({-1}), v({-0.9})), RegionSet::rect(v({0.9}), v({1}))})};
  const UnitTransform p = unit_transform(spec.domain);
  const Lattice lat = build_lattice(40, spec, p, 0.0);
  CHECK(lat.in_initial.size() + lat.out_initial.size() == 40);
  CHECK(lat.in_unsafe.size() + lat.out_unsafe.size() == 40);
  for (auto i : lat.in_initial) CHECK(contains(spec.initial, p.inverse(lat.points.row(i).transpose())));
  for (auto i : lat.out_unsafe) CHECK_FALSE(contains(spec.unsafe, p.inverse(lat.points.row(i).transpose())));

  // a larger scaling only moves points into the sets
  const Lattice wide = build_lattice(40, spec, p, 0.1);
  CHECK(wide.in_initial.size() >= lat.in_initial.size());
  CHECK(wide.in_unsafe.size() >= lat.in_unsafe.size());

  const Lattice two = build_lattice(5, SafetySpec{RegionSet::rect(v({0, 0}), v({1, 1})), RegionSet::rect(v({0, 0}), v({0.1, 0.1})),
                                                  RegionSet::rect(v({0.9, 0.9}), v({1, 1}))},
                                    unit_transform(RegionSet::rect(v({0, 0}), v({1, 1}))), 0.0);
  const auto idx = two.multi_index(7);
  CHECK(idx[0] == 1);
  CHECK(idx[1] == 2);
}
