#include "sbc/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "sbc/errors.hpp"

namespace sbc {

KernelParams median_heuristic(const Dataset& data, double lambda) {
  data.validate();
  const Eigen::Index n = data.size();
  if (n < 2) throw DataError("median heuristic needs at least two samples");
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) dist.push_back((data.x.row(i) - data.x.row(j)).norm());
  }
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  double median = dist[mid];
  if (dist.size() % 2 == 0) {
    const double below = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + below);
  }
  if (!(median > 0.0)) throw DataError("median heuristic: all inputs coincide");
  KernelParams p;
  p.sigma_f = 1.0;
  p.sigma_l = Vector::Constant(data.dimension(), median);
  p.lambda = lambda;
  return p;
}

double cross_validated_r2(const Dataset& data, const KernelParams& params, int folds) {
  if (folds < 2) throw Error("grid search needs at least two folds");
  if (data.size() < folds) throw DataError("fewer samples than folds");
  double total = 0.0;
  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (Eigen::Index i = 0; i < data.size(); ++i) (i % folds == f ? test : train).push_back(i);
    try {
      const FittedEstimator est = fit(params, data.subset(train));
      const double score = r2_score(est, data.subset(test));
      if (!std::isfinite(score)) return -std::numeric_limits<double>::infinity();
      total += score;
    } catch (const SingularSystemError&) {
      return -std::numeric_limits<double>::infinity();
    }
  }
  return total / folds;
}

TunerReport grid_search(const Dataset& data, const std::vector<KernelParams>& grid, int folds) {
  if (grid.empty()) throw Error("grid search needs a non-empty grid");
  TunerReport report{grid.front(), -std::numeric_limits<double>::infinity(), 0, "grid"};
  bool chosen = false;
  for (const auto& candidate : grid) {
    const double score = cross_validated_r2(data, candidate, folds);
    ++report.evaluations;
    if (!chosen || score > report.objective) {
      report.params = candidate;
      report.objective = score;
      chosen = true;
    }
  }
  return report;
}

namespace {

Vector project(const Vector& x, const Vector& lo, const Vector& hi) { return x.cwiseMax(lo).cwiseMin(hi); }

/// Gradient with components that point out of an active bound removed.
Vector projected_gradient(const Vector& x, const Vector& g, const Vector& lo, const Vector& hi) {
  Vector pg = g;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if ((x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0) || lo[i] == hi[i]) pg[i] = 0.0;
  }
  return pg;
}

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& f, Vector x0, const Vector& lower, const Vector& upper,
                           const LbfgsOptions& options) {
  if (x0.size() != lower.size() || x0.size() != upper.size()) throw DimensionError("L-BFGS bounds dimension mismatch");
  if (!(lower.array() <= upper.array()).all()) throw Error("L-BFGS lower bound exceeds upper bound");

  LbfgsResult r;
  r.x = project(x0, lower, upper);
  Vector g;
  r.value = f(r.x, g);
  ++r.evaluations;
  if (!std::isfinite(r.value)) throw Error("objective is not finite at the initial point");

  std::deque<Vector> s_hist, y_hist;
  for (; r.iterations < options.max_iterations; ++r.iterations) {
    const Vector pg = projected_gradient(r.x, g, lower, upper);
    if (pg.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) break;

    // two-loop recursion on the free variables
    Vector q = pg;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      const double rho = 1.0 / y_hist[k].dot(s_hist[k]);
      alpha[k] = rho * s_hist[k].dot(q);
      q -= alpha[k] * y_hist[k];
    }
    if (!s_hist.empty()) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double rho = 1.0 / y_hist[k].dot(s_hist[k]);
      const double beta = rho * y_hist[k].dot(q);
      q += (alpha[k] - beta) * s_hist[k];
    }
    Vector dir = -projected_gradient(r.x, q, lower, upper);
    if (dir.dot(pg) >= 0.0) {
      dir = -pg;
      s_hist.clear();
      y_hist.clear();
    }
    if (s_hist.empty()) dir *= 1.0 / std::max(1.0, dir.norm());

    double step = 1.0;
    Vector x_new, g_new;
    double f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
      x_new = project(r.x + step * dir, lower, upper);
      f_new = f(x_new, g_new);
      ++r.evaluations;
      if (std::isfinite(f_new) && f_new <= r.value + 1e-4 * g.dot(x_new - r.x)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    const Vector s = x_new - r.x;
    const Vector y = g_new - g;
    r.x = x_new;
    r.value = f_new;
    g = g_new;
    if (s.norm() < 1e-14) break;
    if (s.dot(y) > 1e-12 * y.squaredNorm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
      }
    }
  }
  return r;
}

TunerReport lbfgs_tune(const Dataset& data, const KernelParams& lower, const KernelParams& upper,
                       const KernelParams& init, const LbfgsOptions& options) {
  init.validate();
  const Eigen::Index d = data.dimension();
  if (init.sigma_l.size() != d || lower.sigma_l.size() != d || upper.sigma_l.size() != d) {
    throw DimensionError("tuner bounds must have one lengthscale per input dimension");
  }
  auto pack = [d](const KernelParams& p) {
    Vector t(d + 2);
    t[0] = std::log(p.sigma_f);
    t.segment(1, d) = p.sigma_l.array().log().matrix();
    t[d + 1] = std::log(p.lambda);
    return t;
  };
  auto unpack = [d](const Vector& t) {
    KernelParams p;
    p.sigma_f = std::exp(t[0]);
    p.sigma_l = t.segment(1, d).array().exp().matrix();
    p.lambda = std::exp(t[d + 1]);
    return p;
  };
  if (!(init.lambda > 0.0) || !(lower.lambda > 0.0)) throw Error("L-BFGS tuning needs lambda > 0 (log-space search)");
  const Vector lo = pack(lower);
  const Vector hi = pack(upper);
  const Vector t0 = pack(init);
  if (!((lo.array() <= t0.array()).all() && (t0.array() <= hi.array()).all())) {
    throw Error("initial hyperparameters lie outside the tuner bounds");
  }

  Objective negative_lml = [&](const Vector& t, Vector& grad) {
    try {
      const double v = log_marginal_likelihood(unpack(t), data, grad);
      grad = -grad;
      return -v;
    } catch (const SingularSystemError&) {
      grad = Vector::Zero(t.size());
      return std::numeric_limits<double>::infinity();
    }
  };
  const LbfgsResult res = lbfgs_minimize(negative_lml, t0, lo, hi, options);
  return TunerReport{unpack(res.x), -res.value, res.evaluations, "lbfgs"};
}

}  // namespace sbc
