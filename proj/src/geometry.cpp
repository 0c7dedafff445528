#include "sbc/geometry.hpp"

#include <cctype>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "sbc/errors.hpp"

namespace sbc {

namespace {

void check_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw Error(std::string(what) + " contains non-finite values");
}

}  // namespace

RegionSet::RegionSet(Rect rect) : shape_(std::move(rect)) {
  const auto& r = std::get<Rect>(shape_);
  if (r.lower.size() != r.upper.size()) throw DimensionError("RectSet bounds have different dimensions");
  if (r.lower.size() == 0) throw DimensionError("RectSet must have at least one dimension");
  check_finite(r.lower, "RectSet lower bound");
  check_finite(r.upper, "RectSet upper bound");
  if ((r.lower.array() > r.upper.array()).any()) throw Error("RectSet requires lower <= upper componentwise");
  dim_ = static_cast<std::size_t>(r.lower.size());
}

RegionSet::RegionSet(Sphere sphere) : shape_(std::move(sphere)) {
  const auto& s = std::get<Sphere>(shape_);
  if (s.center.size() == 0) throw DimensionError("SphereSet must have at least one dimension");
  check_finite(s.center, "SphereSet center");
  if (!(s.radius_sq > 0.0) || !std::isfinite(s.radius_sq)) throw Error("SphereSet radius must be positive");
  dim_ = static_cast<std::size_t>(s.center.size());
}

RegionSet::RegionSet(std::vector<RegionSet> members) : shape_(std::move(members)) {
  const auto& m = std::get<std::vector<RegionSet>>(shape_);
  if (m.empty()) throw Error("MultiSet must contain at least one set");
  dim_ = m.front().dimension();
  for (const auto& s : m) {
    if (s.dimension() != dim_) throw DimensionError("MultiSet members have different dimensions");
  }
}

const Rect& RegionSet::as_rect() const {
  if (!is_rect()) throw Error("set is not a RectSet");
  return std::get<Rect>(shape_);
}

const Sphere& RegionSet::as_sphere() const {
  if (!is_sphere()) throw Error("set is not a SphereSet");
  return std::get<Sphere>(shape_);
}

const std::vector<RegionSet>& RegionSet::members() const {
  if (!is_multi()) throw Error("set is not a MultiSet");
  return std::get<std::vector<RegionSet>>(shape_);
}

Rect RegionSet::bounding_box() const {
  if (is_rect()) return as_rect();
  if (is_sphere()) {
    const auto& s = as_sphere();
    const double r = std::sqrt(s.radius_sq);
    return Rect{s.center.array() - r, s.center.array() + r};
  }
  Rect box = members().front().bounding_box();
  for (const auto& m : members()) {
    const Rect b = m.bounding_box();
    box.lower = box.lower.cwiseMin(b.lower);
    box.upper = box.upper.cwiseMax(b.upper);
  }
  return box;
}

std::vector<RegionSet> RegionSet::leaves() const {
  if (!is_multi()) return {*this};
  std::vector<RegionSet> out;
  for (const auto& m : members()) {
    auto sub = m.leaves();
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

namespace {

std::string vector_text(const Vector& v) {
  std::ostringstream os;
  os << std::setprecision(17) << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ']';
  return os.str();
}

}  // namespace

std::string RegionSet::to_string() const {
  if (is_rect()) return "RectSet(" + vector_text(as_rect().lower) + ", " + vector_text(as_rect().upper) + ")";
  if (is_sphere()) {
    std::ostringstream os;
    os << std::setprecision(17) << std::sqrt(as_sphere().radius_sq);
    return "SphereSet(" + vector_text(as_sphere().center) + ", " + os.str() + ")";
  }
  std::string out = "MultiSet(";
  for (std::size_t i = 0; i < members().size(); ++i) out += (i ? ", " : "") + members()[i].to_string();
  return out + ")";
}

bool operator==(const RegionSet& a, const RegionSet& b) {
  if (a.shape_.index() != b.shape_.index() || a.dim_ != b.dim_) return false;
  if (a.is_rect()) return a.as_rect().lower == b.as_rect().lower && a.as_rect().upper == b.as_rect().upper;
  if (a.is_sphere()) return a.as_sphere().center == b.as_sphere().center && a.as_sphere().radius_sq == b.as_sphere().radius_sq;
  return a.members() == b.members();
}

bool contains(const RegionSet& set, const Eigen::Ref<const Vector>& point) {
  if (static_cast<std::size_t>(point.size()) != set.dimension()) {
    throw DimensionError("point of dimension " + std::to_string(point.size()) + " tested against set of dimension " +
                         std::to_string(set.dimension()));
  }
  if (set.is_rect()) {
    const auto& r = set.as_rect();
    return (point.array() >= r.lower.array()).all() && (point.array() <= r.upper.array()).all();
  }
  if (set.is_sphere()) {
    const auto& s = set.as_sphere();
    return (point - s.center).squaredNorm() <= s.radius_sq;
  }
  for (const auto& m : set.members()) {
    if (contains(m, point)) return true;
  }
  return false;
}

RegionSet scale_set(const RegionSet& set, double fraction) {
  if (!(fraction >= 0.0)) throw Error("set scaling must be non-negative");
  if (fraction == 0.0) return set;
  const double factor = 1.0 + fraction;
  if (set.is_rect()) {
    const auto& r = set.as_rect();
    const Vector center = 0.5 * (r.lower + r.upper);
    const Vector half = 0.5 * (r.upper - r.lower) * factor;
    return RegionSet::rect(center - half, center + half);
  }
  if (set.is_sphere()) {
    const auto& s = set.as_sphere();
    return RegionSet::sphere(s.center, s.radius_sq * factor * factor);
  }
  std::vector<RegionSet> scaled;
  scaled.reserve(set.members().size());
  for (const auto& m : set.members()) scaled.push_back(scale_set(m, fraction));
  return RegionSet{std::move(scaled)};
}

namespace {

class SetTextParser {
 public:
  explicit SetTextParser(const std::string& text) : text_(text) {}

  RegionSet parse() {
    skip_ws();
    const std::string name = identifier();
    expect('(');
    RegionSet result = [&]() -> RegionSet {
      if (name == "RectSet") {
        Vector lower = vector();
        expect(',');
        Vector upper = vector();
        if (lower.size() != upper.size()) fail("RectSet bounds have different lengths");
        return RegionSet::rect(std::move(lower), std::move(upper));
      }
      if (name == "SphereSet") {
        Vector center = vector();
        expect(',');
        const double radius = number();
        if (!(radius > 0.0)) fail("SphereSet radius must be positive");
        return RegionSet::sphere(std::move(center), radius * radius);
      }
      if (name == "MultiSet") {
        std::vector<RegionSet> members;
        members.push_back(SetTextParser::sub(*this));
        while (peek() == ',') {
          ++pos_;
          members.push_back(SetTextParser::sub(*this));
        }
        return RegionSet{std::move(members)};
      }
      fail("unknown set type '" + name + "'");
    }();
    expect(')');
    skip_ws();
    return result;
  }

  void finish() {
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing characters");
  }

 private:
  static RegionSet sub(SetTextParser& p) { return p.parse(); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("invalid set '" + text_ + "': " + msg + " (at position " + std::to_string(pos_) + ")");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected a set type");
    return text_.substr(start, pos_ - start);
  }

  double number() {
    skip_ws();
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  Vector vector() {
    expect('[');
    std::vector<double> values;
    if (peek() != ']') {
      values.push_back(number());
      while (peek() == ',') {
        ++pos_;
        values.push_back(number());
      }
    }
    expect(']');
    if (values.empty()) fail("empty coordinate list");
    return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace

RegionSet parse_region_set(const std::string& text) {
  SetTextParser parser(text);
  RegionSet set = parser.parse();
  parser.finish();
  return set;
}

UnitTransform::UnitTransform(Vector scale, Vector offset) : scale_(std::move(scale)), offset_(std::move(offset)) {
  if (scale_.size() != offset_.size()) throw DimensionError("transform scale/offset size mismatch");
  if (!(scale_.array() > 0.0).all() || !scale_.allFinite()) throw Error("transform scale must be positive");
}

Vector UnitTransform::apply(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != scale_.size()) throw DimensionError("point dimension does not match transform");
  return scale_.cwiseProduct(x) + offset_;
}

Vector UnitTransform::inverse(const Eigen::Ref<const Vector>& u) const {
  if (u.size() != scale_.size()) throw DimensionError("point dimension does not match transform");
  return (u - offset_).cwiseQuotient(scale_);
}

Rect UnitTransform::apply(const Rect& rect) const { return Rect{apply(rect.lower), apply(rect.upper)}; }

UnitTransform unit_transform(const RegionSet& bounds, double pad) {
  if (!bounds.is_rect()) throw Error("the state space must be a RectSet");
  if (!(pad >= 0.0)) throw Error("pad must be non-negative");
  const auto& r = bounds.as_rect();
  const Vector width = r.upper - r.lower;
  if ((width.array() <= 0.0).any()) throw Error("degenerate state-space bounds (zero width)");
  const Vector lo = r.lower - pad * width;
  const Vector padded = width * (1.0 + 2.0 * pad);
  Vector scale = padded.cwiseInverse();
  Vector offset = -lo.cwiseProduct(scale);
  return UnitTransform{std::move(scale), std::move(offset)};
}

std::vector<std::size_t> Lattice::multi_index(Eigen::Index i) const {
  std::vector<std::size_t> idx(dimension);
  auto rem = static_cast<std::size_t>(i);
  for (std::size_t d = dimension; d-- > 0;) {
    idx[d] = rem % points_per_dim;
    rem /= points_per_dim;
  }
  return idx;
}

Matrix torus_grid(std::size_t points_per_dim, std::size_t dimension) {
  std::size_t total = 1;
  for (std::size_t d = 0; d < dimension; ++d) total *= points_per_dim;
  Matrix points(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(dimension));
  const double step = 1.0 / static_cast<double>(points_per_dim);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rem = i;
    for (std::size_t d = dimension; d-- > 0;) {
      points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = static_cast<double>(rem % points_per_dim) * step;
      rem /= points_per_dim;
    }
  }
  return points;
}

Lattice build_lattice(std::size_t points_per_dim, const SafetySpec& spec, const UnitTransform& transform,
                      double scaling) {
  if (points_per_dim < 2) throw Error("lattice resolution must be at least 2");
  const std::size_t n = spec.dimension();
  if (transform.dimension() != n) throw DimensionError("transform and specification dimensions differ");
  Lattice lat;
  lat.dimension = n;
  lat.points_per_dim = points_per_dim;
  lat.points = torus_grid(points_per_dim, n);

  const RegionSet x0 = scale_set(spec.initial, scaling);
  const RegionSet xu = scale_set(spec.unsafe, scaling);
  const RegionSet xs = scale_set(spec.domain, scaling);
  for (Eigen::Index i = 0; i < lat.points.rows(); ++i) {
    const Vector x = transform.inverse(lat.points.row(i).transpose());
    (contains(x0, x) ? lat.in_initial : lat.out_initial).push_back(i);
    (contains(xu, x) ? lat.in_unsafe : lat.out_unsafe).push_back(i);
    (contains(xs, x) ? lat.in_domain : lat.out_domain).push_back(i);
  }
  return lat;
}

}  // namespace sbc
