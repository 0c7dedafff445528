#include "sbc/certify.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "sbc/errors.hpp"

namespace sbc {

using nlohmann::json;

SafetyBound safety_probability(double eta, double c, int horizon) {
  if (!(eta >= 0.0 && eta < 1.0)) throw Error("eta must lie in [0, 1)");
  if (!(c >= 0.0)) throw Error("c must be non-negative");
  if (horizon < 1) throw Error("time horizon must be at least 1");
  const double v = 1.0 - (eta + c * horizon);
  if (v <= 0.0) return {0.0, true};
  return {v, false};
}

double evaluate_barrier(const BarrierCertificate& cert, const Eigen::Ref<const Vector>& x) {
  if (!cert.map) throw Error("certificate has no feature map");
  return cert.map->features(x).dot(cert.b);
}

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string fixed(double v, int digits = 6) {
  std::ostringstream out;
  out << std::setprecision(digits) << v;
  return out.str();
}

}  // namespace

SynthesisResult synthesize(const Configuration& config, const Logger& log, const SynthesisOptions& options) {
  auto say = [&](const std::string& line) {
    if (log) log(line);
  };
  SynthesisResult result;
  Stopwatch watch;
  auto stage = [&](const std::string& name) {
    const double s = watch.lap();
    result.timings.push_back({name, s});
    say(name + " done in " + fixed(s, 3) + " s");
  };

  const SafetySpec& spec = config.spec;
  const Dataset data = resolve_dataset(config);
  result.samples = data.size();
  say("dataset: " + std::to_string(data.size()) + " transitions in dimension " + std::to_string(data.dimension()));
  stage("data");

  KernelParams params{config.sigma_f, config.sigma_l, config.lambda};
  const FittedEstimator est = fit(params, data);
  result.train_r2 = r2_score(est, data);
  say("estimator fitted, training R^2 = " + fixed(result.train_r2));
  stage("fit");

  const int degree = config.num_frequencies - 1;
  const UnitTransform transform = unit_transform(spec.domain, config.pad);
  auto map = std::make_shared<const FeatureMap>(degree, config.sigma_f, config.feature_sigma_l, transform);
  say("feature map: " + std::to_string(map->size()) + " features, f_max = " + std::to_string(degree));
  for (Eigen::Index d = 0; d < config.feature_sigma_l.size(); ++d) {
    const double covered = 3.0 / config.feature_sigma_l[d];
    say("  dim " + std::to_string(d + 1) + ": highest band 2 pi F = " + fixed(2.0 * std::numbers::pi * degree, 4) +
        ", 3 / feature_sigma_l = " + fixed(covered, 4));
  }

  const auto q = static_cast<std::size_t>(config.lattice_resolution);
  const Lattice lattice = build_lattice(q, spec, transform, config.set_scaling);
  result.lattice_points = lattice.size();
  say("lattice: " + std::to_string(lattice.size()) + " points, " + std::to_string(lattice.in_initial.size()) +
      " in X0, " + std::to_string(lattice.in_unsafe.size()) + " in Xu, " + std::to_string(lattice.in_domain.size()) +
      " in X");
  stage("lattice");

  PSOConfig pso = options.pso;
  pso.seed = config.seed;
  const TighteningCoefficients coeffs = tightening_coefficients(lattice, spec, transform, degree, pso);
  say("coefficients: C = " + fixed(coeffs.C, 8) + ", A_X = " + fixed(coeffs.A_domain) + ", A_X0 = " +
      fixed(coeffs.A_initial) + ", A_Xu = " + fixed(coeffs.A_unsafe));
  stage("coefficients");

  result.transition = transition_matrix(est, *map, options.transition);
  auto phi = std::make_shared<const Matrix>(features_on_lattice(*map, lattice));
  Matrix h_minus_i = result.transition;
  h_minus_i.diagonal().array() -= 1.0;
  auto drift = std::make_shared<const Matrix>(*phi * h_minus_i);
  stage("features");

  RobustnessParams robust;
  robust.epsilon = config.epsilon;
  if (config.b_bar) robust.b_bar = *config.b_bar;
  if (config.kappa) robust.kappa = *config.kappa;
  auto lp = std::make_shared<AssembledLP>(assemble_lp(phi, drift, lattice, coeffs, spec.horizon, robust));
  result.lp_rows = lp->problem.num_rows();
  result.lp_variables = lp->problem.num_variables();
  say("LP: " + std::to_string(result.lp_rows) + " rows, " + std::to_string(result.lp_variables) + " variables");
  stage("assembly");

  const LPSolution sol = [&] {
    if (config.optimiser == "SimplexOptimiser") return solve_simplex(lp->problem, options.simplex);
    return solve_lp(lp->problem, config.optimiser);
  }();
  result.lp = lp;
  result.lp_status = sol.status;
  result.lp_iterations = sol.iterations;
  result.lp_objective = sol.objective;
  result.lp_residual = sol.max_residual;
  result.lp_solution = sol.x;
  say("LP " + to_string(sol.status) + " after " + std::to_string(sol.iterations) + " iterations, objective " +
      fixed(sol.objective, 8) + ", max residual " + fixed(sol.max_residual, 3));
  stage("solve");

  if (sol.status != LPStatus::optimal) {
    say("certification failed: " + to_string(sol.status));
    return result;
  }
  const LPLayout& l = lp->layout;
  // eta pinned at its upper bound means (a) and (b) share a lattice point
  if (sol.x[l.eta] >= 1.0 - 1e-9) {
    say("certification failed: initial and unsafe conditions contradict (eta = 1)");
    return result;
  }
  BarrierCertificate cert;
  cert.b = sol.x.segment(l.b_begin, l.b_size);
  cert.eta = std::clamp(sol.x[l.eta], 0.0, 1.0);
  cert.c = std::max(0.0, sol.x[l.c]);
  cert.horizon = spec.horizon;
  cert.map = map;
  cert.coefficients = coeffs;
  const SafetyBound bound = safety_probability(cert.eta, cert.c, spec.horizon);
  cert.bound = bound.value;
  cert.vacuous = bound.vacuous;
  result.certified = !cert.vacuous;
  say("eta = " + fixed(cert.eta, 8) + ", c = " + fixed(cert.c, 8) + ", safety lower bound = " + fixed(cert.bound, 8) +
      (cert.vacuous ? " (vacuous)" : ""));
  result.certificate = std::move(cert);
  return result;
}

Quadrature gauss_hermite(int count) {
  if (count < 1) throw Error("quadrature needs at least one node");
  // Golub-Welsch for the probabilists' weight exp(-x^2 / 2)
  Matrix jacobi = Matrix::Zero(count, count);
  for (int k = 1; k < count; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  Quadrature q;
  q.nodes = eig.eigenvalues();
  q.weights = eig.eigenvectors().row(0).transpose().array().square().matrix();
  q.weights /= q.weights.sum();
  return q;
}

namespace {

/// Points of a regular inclusive grid over `box` that lie in `set`.
std::vector<Vector> grid_points(const RegionSet& set, int per_dim) {
  std::vector<Vector> out;
  for (const auto& leaf : set.leaves()) {
    const Rect box = leaf.bounding_box();
    const auto n = box.lower.size();
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    while (true) {
      Vector x(n);
      for (Eigen::Index d = 0; d < n; ++d) {
        const double t = per_dim > 1 ? static_cast<double>(idx[static_cast<std::size_t>(d)]) / (per_dim - 1) : 0.5;
        x[d] = box.lower[d] + t * (box.upper[d] - box.lower[d]);
      }
      if (contains(leaf, x)) out.push_back(x);
      Eigen::Index d = 0;
      while (d < n && ++idx[static_cast<std::size_t>(d)] >= per_dim) idx[static_cast<std::size_t>(d++)] = 0;
      if (d == n) break;
    }
  }
  return out;
}

}  // namespace

FalsificationReport falsify(const BarrierCertificate& cert, const SafetySpec& spec, const DynamicsModel* model,
                            int grid_per_dim, double tol, int hermite_nodes) {
  if (grid_per_dim < 2) throw Error("falsifier grid needs at least 2 points per dimension");
  FalsificationReport rep;
  rep.grid_per_dim = grid_per_dim;
  const FeatureMap& map = *cert.map;

  for (const auto& x : grid_points(spec.initial, grid_per_dim)) {
    const double v = evaluate_barrier(cert, x);
    if (v > cert.eta + tol) rep.initial.push_back({x, v, cert.eta});
    ++rep.points_checked;
  }
  for (const auto& x : grid_points(spec.unsafe, grid_per_dim)) {
    const double v = evaluate_barrier(cert, x);
    if (v < 1.0 - tol) rep.unsafe.push_back({x, v, 1.0});
    ++rep.points_checked;
  }
  const std::vector<Vector> domain = grid_points(spec.domain, grid_per_dim);
  for (const auto& x : domain) {
    const double v = evaluate_barrier(cert, x);
    if (v < -tol) rep.nonnegative.push_back({x, v, 0.0});
    ++rep.points_checked;
  }
  if (model) {
    if (model->dimension() != spec.dimension()) throw DimensionError("dynamics and specification differ in dimension");
    rep.expectation = "gauss-hermite-" + std::to_string(hermite_nodes);
    const Quadrature gh = gauss_hermite(hermite_nodes);
    const auto n = static_cast<Eigen::Index>(spec.dimension());
    const Vector& sd = model->noise_std();
    // tensor nodes, collapsing dimensions without noise
    std::vector<Vector> offsets{Vector::Zero(n)};
    std::vector<double> weights{1.0};
    for (Eigen::Index d = 0; d < n; ++d) {
      if (!(sd[d] > 0.0)) continue;
      std::vector<Vector> o2;
      std::vector<double> w2;
      for (std::size_t k = 0; k < offsets.size(); ++k) {
        for (int j = 0; j < hermite_nodes; ++j) {
          Vector o = offsets[k];
          o[d] = sd[d] * gh.nodes[j];
          o2.push_back(o);
          w2.push_back(weights[k] * gh.weights[j]);
        }
      }
      offsets = std::move(o2);
      weights = std::move(w2);
    }
    Matrix shifted(static_cast<Eigen::Index>(offsets.size()), n);
    for (const auto& x : domain) {
      const Vector mean = model->mean(x);
      for (std::size_t k = 0; k < offsets.size(); ++k) shifted.row(static_cast<Eigen::Index>(k)) = (mean + offsets[k]).transpose();
      const Vector vals = map.features_rows(shifted) * cert.b;
      double expected = 0.0;
      for (std::size_t k = 0; k < offsets.size(); ++k) expected += weights[k] * vals[static_cast<Eigen::Index>(k)];
      const double diff = expected - evaluate_barrier(cert, x);
      if (diff > cert.c + tol) rep.drift.push_back({x, diff, cert.c});
    }
  }
  return rep;
}

double monte_carlo_safety(const DynamicsModel& model, const Eigen::Ref<const Vector>& x0, const SafetySpec& spec,
                          int trials, std::uint64_t seed) {
  if (trials < 1) throw Error("Monte Carlo needs at least one trial");
  if (static_cast<std::size_t>(x0.size()) != spec.dimension()) throw DimensionError("initial state dimension mismatch");
  std::mt19937_64 rng(seed);
  int safe = 0;
  for (int t = 0; t < trials; ++t) {
    Vector x = x0;
    bool ok = !contains(spec.unsafe, x);
    for (int k = 0; k < spec.horizon && ok; ++k) {
      x = model.step(x, rng);
      if (contains(spec.unsafe, x)) ok = false;
    }
    if (ok) ++safe;
  }
  return static_cast<double>(safe) / trials;
}

BarrierGrid barrier_grid(const BarrierCertificate& cert, const SafetySpec& spec) {
  const Rect box = spec.domain.bounding_box();
  const auto n = box.lower.size();
  BarrierGrid g;
  const int per = (n == 1) ? 200 : 50;
  const Eigen::Index shown = std::min<Eigen::Index>(n, 2);
  for (Eigen::Index d = 0; d < shown; ++d) g.axes.push_back(Vector::LinSpaced(per, box.lower[d], box.upper[d]));
  const Eigen::Index total = (shown == 1) ? per : per * per;
  g.points.resize(total, n);
  const Vector centre = 0.5 * (box.lower + box.upper);
  for (Eigen::Index i = 0; i < total; ++i) {
    Vector x = centre;
    if (shown == 1) {
      x[0] = g.axes[0][i];
    } else {
      x[0] = g.axes[0][i / per];
      x[1] = g.axes[1][i % per];
    }
    g.points.row(i) = x.transpose();
  }
  g.values = cert.map->features_rows(g.points) * cert.b;
  return g;
}

namespace {

json vec(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json violations_json(const std::vector<Violation>& list) {
  json arr = json::array();
  for (std::size_t i = 0; i < list.size() && i < 100; ++i) {
    arr.push_back({{"point", vec(list[i].point)}, {"value", list[i].value}, {"bound", list[i].bound}});
  }
  return {{"count", list.size()}, {"first", arr}};
}

}  // namespace

json falsification_to_json(const FalsificationReport& r) {
  return {{"grid_per_dim", r.grid_per_dim},
          {"expectation", r.expectation},
          {"points_checked", r.points_checked},
          {"clean", r.clean()},
          {"initial", violations_json(r.initial)},
          {"unsafe", violations_json(r.unsafe)},
          {"drift", violations_json(r.drift)},
          {"nonnegative", violations_json(r.nonnegative)}};
}

json result_to_json(const SynthesisResult& result, const Configuration& config, bool include_timings,
                    const FalsificationReport* report) {
  json doc;
  doc["schema"] = 1;
  doc["status"] = result.certified ? "certified" : (result.certificate ? "vacuous" : "infeasible");
  doc["lp"] = {{"status", to_string(result.lp_status)},
               {"rows", result.lp_rows},
               {"variables", result.lp_variables},
               {"iterations", result.lp_iterations},
               {"objective", result.lp_objective},
               {"max_residual", result.lp_residual}};
  doc["estimator"] = {{"samples", result.samples}, {"train_r2", result.train_r2}};
  doc["lattice_points"] = result.lattice_points;
  doc["config"] = to_json(config);
  if (result.certificate) {
    const BarrierCertificate& c = *result.certificate;
    doc["bound"] = c.bound;
    doc["vacuous"] = c.vacuous;
    doc["eta"] = c.eta;
    doc["c"] = c.c;
    doc["time_horizon"] = c.horizon;
    doc["b"] = vec(c.b);
    json freq = json::array();
    const auto& f = c.map->frequencies();
    for (Eigen::Index j = 0; j < f.rows(); ++j) {
      std::vector<int> row(static_cast<std::size_t>(f.cols()));
      for (Eigen::Index d = 0; d < f.cols(); ++d) row[static_cast<std::size_t>(d)] = f(j, d);
      freq.push_back(row);
    }
    doc["frequencies"] = freq;
    doc["masses"] = vec(c.map->masses());
    doc["feature_map"] = {{"sigma_f", c.map->sigma_f()},
                          {"feature_sigma_l", vec(c.map->feature_sigma())},
                          {"scale", vec(c.map->transform().scale())},
                          {"offset", vec(c.map->transform().offset())}};
    doc["coefficients"] = {{"C", c.coefficients.C},
                           {"A_X", c.coefficients.A_domain},
                           {"A_X0", c.coefficients.A_initial},
                           {"A_Xu", c.coefficients.A_unsafe},
                           {"f_max", c.coefficients.f_max},
                           {"lattice_resolution", c.coefficients.points_per_dim}};
    const BarrierGrid g = barrier_grid(c, config.spec);
    json axes = json::array();
    for (const auto& a : g.axes) axes.push_back(vec(a));
    doc["grid"] = {{"axes", axes}, {"values", vec(g.values)}};
  } else {
    doc["bound"] = nullptr;
  }
  if (report) doc["falsification"] = falsification_to_json(*report);
  if (include_timings) {
    json t = json::object();
    for (const auto& s : result.timings) t[s.stage] = s.seconds;
    doc["timings"] = t;
  }
  return doc;
}

std::string barrier_grid_csv(const BarrierGrid& grid) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (Eigen::Index d = 0; d < grid.points.cols(); ++d) out << "x" << d + 1 << ',';
  out << "B\n";
  for (Eigen::Index i = 0; i < grid.points.rows(); ++i) {
    for (Eigen::Index d = 0; d < grid.points.cols(); ++d) out << grid.points(i, d) << ',';
    out << grid.values[i] << '\n';
  }
  return out.str();
}

}  // namespace sbc
