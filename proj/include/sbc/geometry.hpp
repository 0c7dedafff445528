#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace sbc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Closed axis-aligned box.
struct Rect {
  Vector lower;
  Vector upper;
};

/// Closed ball, stored by squared radius.
struct Sphere {
  Vector center;
  double radius_sq = 0.0;
};

/// A rectangle, a ball or a finite union of them.
class RegionSet {
 public:
  RegionSet(Rect rect);      // NOLINT(google-explicit-constructor)
  RegionSet(Sphere sphere);  // NOLINT(google-explicit-constructor)
  explicit RegionSet(std::vector<RegionSet> members);

  static RegionSet rect(Vector lower, Vector upper) { return RegionSet{Rect{std::move(lower), std::move(upper)}}; }
  static RegionSet sphere(Vector center, double radius_sq) {
    return RegionSet{Sphere{std::move(center), radius_sq}};
  }

  [[nodiscard]] std::size_t dimension() const noexcept { return dim_; }
  [[nodiscard]] bool is_rect() const noexcept { return std::holds_alternative<Rect>(shape_); }
  [[nodiscard]] bool is_sphere() const noexcept { return std::holds_alternative<Sphere>(shape_); }
  [[nodiscard]] bool is_multi() const noexcept { return std::holds_alternative<std::vector<RegionSet>>(shape_); }

  [[nodiscard]] const Rect& as_rect() const;
  [[nodiscard]] const Sphere& as_sphere() const;
  [[nodiscard]] const std::vector<RegionSet>& members() const;

  /// Smallest axis-aligned box containing the set.
  [[nodiscard]] Rect bounding_box() const;

  /// Flattened list of non-multi members (the set itself if it is not a union).
  [[nodiscard]] std::vector<RegionSet> leaves() const;

  /// Text form accepted by parse_region_set.
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const RegionSet& a, const RegionSet& b);

 private:
  std::variant<Rect, Sphere, std::vector<RegionSet>> shape_;
  std::size_t dim_ = 0;
};

/// True iff `point` lies in the closed set. Throws DimensionError on mismatch.
bool contains(const RegionSet& set, const Eigen::Ref<const Vector>& point);

/// Dilate about the set's own center by (1 + fraction). The result is a superset.
RegionSet scale_set(const RegionSet& set, double fraction);

/// Parse `RectSet([-1], [1])` / `SphereSet([cx, cy], r)`.
RegionSet parse_region_set(const std::string& text);

/// Affine map P(x) = scale .* x + offset from the padded bounding box onto [0,1]^n.
class UnitTransform {
 public:
  UnitTransform(Vector scale, Vector offset);

  [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(scale_.size()); }
  [[nodiscard]] const Vector& scale() const noexcept { return scale_; }
  [[nodiscard]] const Vector& offset() const noexcept { return offset_; }

  [[nodiscard]] Vector apply(const Eigen::Ref<const Vector>& x) const;
  [[nodiscard]] Vector inverse(const Eigen::Ref<const Vector>& u) const;

  /// Image of a box in torus coordinates.
  [[nodiscard]] Rect apply(const Rect& rect) const;

 private:
  Vector scale_;
  Vector offset_;
};

/// Build P from the domain box; `pad` is a fraction of the width added on every side.
UnitTransform unit_transform(const RegionSet& bounds, double pad = 0.0);

struct SafetySpec {
  RegionSet domain;
  RegionSet initial;
  RegionSet unsafe;
  int horizon = 1;

  [[nodiscard]] std::size_t dimension() const noexcept { return domain.dimension(); }
};

/// Regular periodic grid {i / Q}^n on the unit torus, classified against the
/// (scaled) specification sets.
struct Lattice {
  std::size_t dimension = 0;
  std::size_t points_per_dim = 0;
  /// One point per row, torus coordinates.
  Matrix points;
  std::vector<Eigen::Index> in_initial, out_initial;
  std::vector<Eigen::Index> in_unsafe, out_unsafe;
  std::vector<Eigen::Index> in_domain, out_domain;

  [[nodiscard]] Eigen::Index size() const noexcept { return points.rows(); }
  /// Per-dimension integer index of point `i` (first dimension varies slowest).
  [[nodiscard]] std::vector<std::size_t> multi_index(Eigen::Index i) const;
};

/// Grid of Q^n torus points without classification.
Matrix torus_grid(std::size_t points_per_dim, std::size_t dimension);

Lattice build_lattice(std::size_t points_per_dim, const SafetySpec& spec, const UnitTransform& transform,
                      double scaling);

}  // namespace sbc
