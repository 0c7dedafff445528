#include "sbc/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "sbc/errors.hpp"

namespace sbc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_integer(double v) { return std::floor(v) == v; }

double vallee_poussin_1d(double z, double a, double b) {
  const double m = std::round(z / kTwoPi);
  const double eps = z - kTwoPi * m;
  if (std::abs(eps) < 1e-9) {
    if (is_integer(a + b) && is_integer(b - a)) return (is_integer(b) || std::fmod(m, 2.0) == 0.0) ? a + b : -(a + b);
    const double s = std::sin(0.5 * 1e-9);
    return std::sin(0.5 * (b + a) * (z + 1e-9)) * std::sin(0.5 * (b - a) * (z + 1e-9)) / (s * s) / (b - a);
  }
  const double s = std::sin(0.5 * z);
  return std::sin(0.5 * (b + a) * z) * std::sin(0.5 * (b - a) * z) / (s * s) / (b - a);
}

/// Complement sums with per-dimension kernel tables; sums over whichever side of the
/// partition is smaller, using (1/Q) sum_i D(z - 2 pi i / Q) = 1 per dimension.
class ComplementSum {
 public:
  ComplementSum(const Lattice& lattice, const std::vector<Eigen::Index>& complement, int f_max)
      : q_(lattice.points_per_dim), n_(lattice.dimension), a_(f_max), b_(static_cast<double>(q_) - f_max) {
    std::vector<char> mask(static_cast<std::size_t>(lattice.size()), 0);
    for (auto i : complement) mask[static_cast<std::size_t>(i)] = 1;
    use_complement_ = 2 * complement.size() <= static_cast<std::size_t>(lattice.size());
    for (Eigen::Index i = 0; i < lattice.size(); ++i) {
      if (static_cast<bool>(mask[static_cast<std::size_t>(i)]) != use_complement_) continue;
      const auto idx = lattice.multi_index(i);
      for (auto v : idx) indices_.push_back(static_cast<std::uint32_t>(v));
    }
    count_ = indices_.size() / n_;
    norm_ = std::pow(static_cast<double>(q_), -static_cast<double>(n_));
    tables_.assign(n_, std::vector<double>(q_));
  }

  double operator()(const Eigen::Ref<const Vector>& u) {
    for (std::size_t d = 0; d < n_; ++d) {
      for (std::size_t i = 0; i < q_; ++i) {
        tables_[d][i] = vallee_poussin_1d(kTwoPi * (u[static_cast<Eigen::Index>(d)] - static_cast<double>(i) / q_), a_, b_);
      }
    }
    double sum = 0.0;
    const std::uint32_t* p = indices_.data();
    for (std::size_t k = 0; k < count_; ++k, p += n_) {
      double term = tables_[0][p[0]];
      for (std::size_t d = 1; d < n_; ++d) term *= tables_[d][p[d]];
      sum += term;
    }
    sum *= norm_;
    return use_complement_ ? sum : 1.0 - sum;
  }

 private:
  std::size_t q_, n_;
  double a_, b_;
  bool use_complement_ = true;
  std::vector<std::uint32_t> indices_;
  std::size_t count_ = 0;
  double norm_ = 1.0;
  std::vector<std::vector<double>> tables_;
};

}  // namespace

double vallee_poussin(const Eigen::Ref<const Vector>& z, double a, double b) {
  if (!(a > 0.0) || !(b > a)) throw Error("Vallee-Poussin kernel needs 0 < a < b");
  double v = 1.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) v *= vallee_poussin_1d(z[i], a, b);
  return v;
}

double coefficient_C(int f_max, std::size_t points_per_dim, std::size_t dimension) {
  if (static_cast<double>(points_per_dim) <= 2.0 * f_max) {
    throw NyquistError("lattice resolution " + std::to_string(points_per_dim) + " must exceed 2 * f_max = " +
                       std::to_string(2 * f_max) + " (f_max = " + std::to_string(f_max) + ")");
  }
  return std::pow(1.0 - 2.0 * f_max / static_cast<double>(points_per_dim), -0.5 * static_cast<double>(dimension));
}

std::vector<SearchRegion> torus_regions(const RegionSet& set, const UnitTransform& transform) {
  std::vector<SearchRegion> out;
  for (const auto& leaf : set.leaves()) {
    SearchRegion r;
    r.box = transform.apply(leaf.bounding_box());
    if (leaf.is_rect()) {
      const Rect box = r.box;
      r.inside = [box](const Vector& u) {
        return (u.array() >= box.lower.array()).all() && (u.array() <= box.upper.array()).all();
      };
    } else {
      r.inside = [leaf, transform](const Vector& u) { return contains(leaf, transform.inverse(u)); };
    }
    out.push_back(std::move(r));
  }
  return out;
}

double complement_average(const Lattice& lattice, const std::vector<Eigen::Index>& complement, int f_max,
                          const Eigen::Ref<const Vector>& u) {
  if (static_cast<std::size_t>(u.size()) != lattice.dimension) throw DimensionError("point and lattice differ in dimension");
  if (complement.empty()) return 0.0;
  ComplementSum sum(lattice, complement, f_max);
  return sum(u);
}

double coefficient_A(const Lattice& lattice, const std::vector<Eigen::Index>& complement, int f_max,
                     const std::vector<SearchRegion>& regions, const PSOConfig& pso) {
  (void)coefficient_C(f_max, lattice.points_per_dim, lattice.dimension);
  if (complement.empty() || regions.empty()) return 0.0;
  ComplementSum objective(lattice, complement, f_max);
  const auto n = static_cast<Eigen::Index>(lattice.dimension);
  const double cell = 1.0 / static_cast<double>(lattice.points_per_dim);
  const double minus_inf = -std::numeric_limits<double>::infinity();

  double overall = minus_inf;
  for (std::size_t ri = 0; ri < regions.size(); ++ri) {
    const SearchRegion& region = regions[ri];
    const Vector lo = region.box.lower;
    const Vector hi = region.box.upper;
    const Vector width = hi - lo;
    auto fitness = [&](const Vector& u) { return region.inside(u) ? objective(u) : minus_inf; };

    std::mt19937_64 rng(pso.seed + 0x9E3779B97F4A7C15ULL * ri);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int np = std::max(1, pso.particles);
    std::vector<Vector> pos(static_cast<std::size_t>(np)), vel(pos.size()), best(pos.size());
    std::vector<double> best_val(pos.size(), minus_inf);
    Vector gbest = 0.5 * (lo + hi);
    double gbest_val = fitness(gbest);

    for (std::size_t p = 0; p < pos.size(); ++p) {
      Vector x(n);
      for (int attempt = 0; attempt < 100; ++attempt) {
        for (Eigen::Index d = 0; d < n; ++d) x[d] = lo[d] + unit(rng) * width[d];
        if (region.inside(x)) break;
      }
      Vector v(n);
      for (Eigen::Index d = 0; d < n; ++d) v[d] = (2.0 * unit(rng) - 1.0) * 0.1 * width[d];
      pos[p] = x;
      vel[p] = v;
      best[p] = x;
      best_val[p] = fitness(x);
      if (best_val[p] > gbest_val) {
        gbest_val = best_val[p];
        gbest = x;
      }
    }
    for (int it = 0; it < pso.iterations; ++it) {
      for (std::size_t p = 0; p < pos.size(); ++p) {
        for (Eigen::Index d = 0; d < n; ++d) {
          vel[p][d] = pso.inertia * vel[p][d] + pso.cognitive * unit(rng) * (best[p][d] - pos[p][d]) +
                      pso.social * unit(rng) * (gbest[d] - pos[p][d]);
          pos[p][d] = std::clamp(pos[p][d] + vel[p][d], lo[d], hi[d]);
        }
        const double f = fitness(pos[p]);
        if (f > best_val[p]) {
          best_val[p] = f;
          best[p] = pos[p];
          if (f > gbest_val) {
            gbest_val = f;
            gbest = pos[p];
          }
        }
      }
    }

    // refine on the 3^n lattice cells around the incumbent, then on shrinking windows
    double half = 1.5 * cell;
    constexpr int steps = 24;
    for (int round = 0; round < 5; ++round, half /= 4.0) {
      const Vector centre = gbest;
      std::vector<int> counter(static_cast<std::size_t>(n), 0);
      while (true) {
        Vector u(n);
        for (Eigen::Index d = 0; d < n; ++d) {
          u[d] = std::clamp(centre[d] - half + 2.0 * half * counter[static_cast<std::size_t>(d)] / steps, lo[d], hi[d]);
        }
        const double f = fitness(u);
        if (f > gbest_val) {
          gbest_val = f;
          gbest = u;
        }
        Eigen::Index d = 0;
        while (d < n && ++counter[static_cast<std::size_t>(d)] > steps) counter[static_cast<std::size_t>(d++)] = 0;
        if (d == n) break;
      }
    }
    overall = std::max(overall, gbest_val);
  }
  if (!std::isfinite(overall)) return 0.0;
  return std::max(0.0, overall);
}

TighteningCoefficients tightening_coefficients(const Lattice& lattice, const SafetySpec& spec,
                                               const UnitTransform& transform, int f_max, const PSOConfig& pso) {
  TighteningCoefficients t;
  t.f_max = f_max;
  t.points_per_dim = lattice.points_per_dim;
  t.C = coefficient_C(f_max, lattice.points_per_dim, lattice.dimension);
  t.A_domain = coefficient_A(lattice, lattice.out_domain, f_max, torus_regions(spec.domain, transform), pso);
  t.A_initial = coefficient_A(lattice, lattice.out_initial, f_max, torus_regions(spec.initial, transform), pso);
  t.A_unsafe = coefficient_A(lattice, lattice.out_unsafe, f_max, torus_regions(spec.unsafe, transform), pso);
  return t;
}

namespace {

double denominator(const TighteningCoefficients& t, double a, const char* set) {
  const double den = t.C - 2.0 * a + 1.0;
  if (!(den > 0.0)) {
    throw LatticeTooCoarseError(std::string("tightening denominator for ") + set + " is " + std::to_string(den) +
                                " (C = " + std::to_string(t.C) + ", A = " + std::to_string(a) +
                                "); increase lattice_resolution or reduce num_frequencies");
  }
  return den;
}

}  // namespace

AssembledLP assemble_lp(std::shared_ptr<const Matrix> features, std::shared_ptr<const Matrix> drift,
                        const Lattice& lattice, const TighteningCoefficients& t, int horizon,
                        const RobustnessParams& robust) {
  if (!features || !drift) throw Error("assemble_lp needs feature and drift matrices");
  if (features->rows() != lattice.size() || drift->rows() != lattice.size() || features->cols() != drift->cols()) {
    throw DimensionError("feature matrices do not match the lattice");
  }
  if (horizon < 1) throw Error("time horizon must be at least 1");
  if (robust.epsilon < 0.0) throw Error("epsilon must be non-negative");
  if (robust.epsilon > 0.0 && !(robust.b_bar > 0.0)) throw Error("epsilon > 0 requires b_bar > 0");
  const double den0 = denominator(t, t.A_initial, "X_init");
  const double denu = denominator(t, t.A_unsafe, "X_unsafe");
  const double denx = denominator(t, t.A_domain, "X_bounds");

  AssembledLP out;
  LPProblem& p = out.problem;
  LPLayout& l = out.layout;
  const double inf = LPProblem::infinity;
  l.b_begin = 0;
  l.b_size = features->cols();
  for (Eigen::Index j = 0; j < l.b_size; ++j) p.add_variable("b" + std::to_string(j));
  l.eta = p.add_variable("eta", 1.0, 0.0, 1.0);
  l.c = p.add_variable("c", static_cast<double>(horizon), 0.0, inf);
  l.bmin_initial = p.add_variable("Bmin_X0");
  l.bmax_unsafe = p.add_variable("Bmax_Xu");
  l.bmin_delta_domain = p.add_variable("BminDelta_X");
  l.bmax_domain = p.add_variable("Bmax_X");
  l.bmax_out_initial = p.add_variable("Bmax_notX0");
  l.bmin_out_unsafe = p.add_variable("Bmin_notXu");
  l.bmin_out_domain = p.add_variable("Bmin_notX");
  l.bmax_delta_out_domain = p.add_variable("BmaxDelta_notX");

  auto block = [&](std::string name, const std::shared_ptr<const Matrix>& m, const std::vector<Eigen::Index>& rows,
                   double coef, std::vector<std::pair<Eigen::Index, double>> extra, double rhs) {
    if (rows.empty()) return;
    p.blocks.push_back(RowBlock{std::move(name), m, rows, coef, l.b_begin, std::move(extra), rhs});
  };
  const double cm1 = t.C - 1.0;

  // X0:  Bmin_X0 <= phi b <= eta^
  block("init_lo", features, lattice.in_initial, -1.0, {{l.bmin_initial, 1.0}}, 0.0);
  block("init_hi", features, lattice.in_initial, den0,
        {{l.eta, -2.0}, {l.bmin_initial, -cm1}, {l.bmax_out_initial, 2.0 * t.A_initial}}, 0.0);
  // Xu:  gamma^ <= phi b <= Bmax_Xu
  block("unsafe_lo", features, lattice.in_unsafe, -denu, {{l.bmax_unsafe, cm1}, {l.bmin_out_unsafe, -2.0 * t.A_unsafe}},
        -2.0);
  block("unsafe_hi", features, lattice.in_unsafe, 1.0, {{l.bmax_unsafe, -1.0}}, 0.0);
  // X:  BminDelta_X <= phi (H - I) b <= Delta^,  xi^ <= phi b <= Bmax_X
  block("drift_lo", drift, lattice.in_domain, -1.0, {{l.bmin_delta_domain, 1.0}}, 0.0);
  block("drift_hi", drift, lattice.in_domain, denx,
        {{l.c, -2.0}, {l.bmin_delta_domain, -cm1}, {l.bmax_delta_out_domain, 2.0 * t.A_domain}},
        -2.0 * robust.epsilon * robust.b_bar * robust.kappa);
  block("nonneg_lo", features, lattice.in_domain, -denx, {{l.bmax_domain, cm1}, {l.bmin_out_domain, -2.0 * t.A_domain}},
        0.0);
  block("domain_hi", features, lattice.in_domain, 1.0, {{l.bmax_domain, -1.0}}, 0.0);
  // complements
  block("out_init", features, lattice.out_initial, 1.0, {{l.bmax_out_initial, -1.0}}, 0.0);
  block("out_unsafe", features, lattice.out_unsafe, -1.0, {{l.bmin_out_unsafe, 1.0}}, 0.0);
  block("out_domain_lo", features, lattice.out_domain, -1.0, {{l.bmin_out_domain, 1.0}}, 0.0);
  block("out_drift_hi", drift, lattice.out_domain, 1.0, {{l.bmax_delta_out_domain, -1.0}}, 0.0);

  if (robust.epsilon > 0.0) {
    l.abs_begin = p.num_variables();
    SparseRow norm{"norm_bound", {}, robust.b_bar};
    for (Eigen::Index j = 0; j < l.b_size; ++j) {
      const Eigen::Index a = p.add_variable("absb" + std::to_string(j), 0.0, 0.0, inf);
      p.sparse_rows.push_back(SparseRow{"abs_pos", {{l.b_begin + j, 1.0}, {a, -1.0}}, 0.0});
      p.sparse_rows.push_back(SparseRow{"abs_neg", {{l.b_begin + j, -1.0}, {a, -1.0}}, 0.0});
      norm.terms.emplace_back(a, 1.0);
    }
    p.sparse_rows.push_back(std::move(norm));
  }
  p.validate();
  return out;
}

TightenedBounds tightened_bounds(const LPLayout& l, const TighteningCoefficients& t, const RobustnessParams& robust,
                                 const Eigen::Ref<const Vector>& x) {
  const double cm1 = t.C - 1.0;
  TightenedBounds h;
  h.eta_hat = (2.0 * x[l.eta] + cm1 * x[l.bmin_initial] - 2.0 * t.A_initial * x[l.bmax_out_initial]) /
              (t.C - 2.0 * t.A_initial + 1.0);
  h.gamma_hat = (2.0 + cm1 * x[l.bmax_unsafe] - 2.0 * t.A_unsafe * x[l.bmin_out_unsafe]) / (t.C - 2.0 * t.A_unsafe + 1.0);
  h.delta_hat = (2.0 * (x[l.c] - robust.epsilon * robust.b_bar * robust.kappa) + cm1 * x[l.bmin_delta_domain] -
                 2.0 * t.A_domain * x[l.bmax_delta_out_domain]) /
                (t.C - 2.0 * t.A_domain + 1.0);
  h.xi_hat = (cm1 * x[l.bmax_domain] - 2.0 * t.A_domain * x[l.bmin_out_domain]) / (t.C - 2.0 * t.A_domain + 1.0);
  return h;
}

}  // namespace sbc
