#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbc/config.hpp"
#include "sbc/dynamics.hpp"
#include "sbc/relaxation.hpp"
#include "sbc/solve.hpp"
#include "sbc/spectral.hpp"

namespace sbc {

using Logger = std::function<void(const std::string&)>;

struct BarrierCertificate {
  Vector b;
  double eta = 0.0;
  double c = 0.0;
  int horizon = 1;
  double bound = 0.0;
  bool vacuous = false;
  std::shared_ptr<const FeatureMap> map;
  TighteningCoefficients coefficients;
};

struct SafetyBound {
  double value = 0.0;
  bool vacuous = false;
};

/// max(0, 1 - (eta + c T)); a zero value is flagged vacuous.
SafetyBound safety_probability(double eta, double c, int horizon);

/// B(x) = phi(x)^T b.
double evaluate_barrier(const BarrierCertificate& cert, const Eigen::Ref<const Vector>& x);

struct SynthesisOptions {
  TransitionMethod transition = TransitionMethod::projection;
  PSOConfig pso;  // seed overridden by the configuration
  SimplexOptions simplex;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct SynthesisResult {
  bool certified = false;
  LPStatus lp_status = LPStatus::iteration_limit;
  std::optional<BarrierCertificate> certificate;
  Eigen::Index samples = 0;
  Eigen::Index lattice_points = 0;
  Eigen::Index lp_rows = 0;
  Eigen::Index lp_variables = 0;
  int lp_iterations = 0;
  double lp_objective = 0.0;
  double lp_residual = 0.0;
  /// Primal point returned by the solver; empty when no LP was solved.
  Vector lp_solution;
  double train_r2 = 0.0;
  Matrix transition;
  std::vector<StageTiming> timings;
  /// Problem and its layout, kept for export and independent re-checks.
  std::shared_ptr<const AssembledLP> lp;
};

/// fit -> feature map -> lattice -> coefficients -> LP -> certificate.
/// LP infeasibility is reported in the result, not thrown.
SynthesisResult synthesize(const Configuration& config, const Logger& log = {}, const SynthesisOptions& options = {});

/// Nodes and weights for E[g(Z)], Z ~ N(0, 1): sum_i w_i g(x_i).
struct Quadrature {
  Vector nodes;
  Vector weights;
};
Quadrature gauss_hermite(int count);

struct Violation {
  Vector point;
  double value = 0.0;
  double bound = 0.0;
};

struct FalsificationReport {
  std::vector<Violation> initial;    // B <= eta
  std::vector<Violation> unsafe;     // B >= 1
  std::vector<Violation> drift;      // E[B(x+)] - B(x) <= c
  std::vector<Violation> nonnegative;  // B >= 0
  int grid_per_dim = 0;
  std::string expectation = "none";
  std::size_t points_checked = 0;

  [[nodiscard]] bool clean() const noexcept {
    return initial.empty() && unsafe.empty() && drift.empty() && nonnegative.empty();
  }
};

/// Grid check of the barrier conditions; condition (c) only when a model is given.
FalsificationReport falsify(const BarrierCertificate& cert, const SafetySpec& spec, const DynamicsModel* model,
                            int grid_per_dim, double tol, int hermite_nodes = 9);

/// Fraction of `trials` trajectories of `horizon` steps from x0 that avoid the unsafe set.
double monte_carlo_safety(const DynamicsModel& model, const Eigen::Ref<const Vector>& x0, const SafetySpec& spec,
                          int trials, std::uint64_t seed);

/// Barrier samples for plotting: 200 points in 1-D, 50 x 50 otherwise (first two
/// dimensions, the rest at the domain centre).
struct BarrierGrid {
  std::vector<Vector> axes;
  Matrix points;
  Vector values;
};
BarrierGrid barrier_grid(const BarrierCertificate& cert, const SafetySpec& spec);

/// Versioned result document. Timings are included only on request so that runs
/// with the same seed are byte-identical.
nlohmann::json result_to_json(const SynthesisResult& result, const Configuration& config, bool include_timings = false,
                              const FalsificationReport* report = nullptr);

nlohmann::json falsification_to_json(const FalsificationReport& report);

/// Comma-separated barrier grid with a header row.
std::string barrier_grid_csv(const BarrierGrid& grid);

}  // namespace sbc
