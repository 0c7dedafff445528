#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "sbc/geometry.hpp"
#include "sbc/solve.hpp"

namespace sbc {

/// D^n_{a,b}(z) = (b-a)^{-n} prod_i sin((b+a) z_i / 2) sin((b-a) z_i / 2) / sin^2(z_i / 2),
/// with the value a + b per factor at z_i = 0 (mod 2 pi).
double vallee_poussin(const Eigen::Ref<const Vector>& z, double a, double b);

/// C = (1 - 2 f_max / Q)^{-n/2}. Throws NyquistError unless Q > 2 f_max.
double coefficient_C(int f_max, std::size_t points_per_dim, std::size_t dimension);

struct PSOConfig {
  int particles = 64;
  int iterations = 200;
  double inertia = 0.7;
  double cognitive = 1.5;
  double social = 1.5;
  std::uint64_t seed = 42;
};

/// A region of the torus to search: its bounding box and a membership test.
struct SearchRegion {
  Rect box;
  std::function<bool(const Vector&)> inside;
};

/// Torus-coordinate search regions of each leaf of `set`.
std::vector<SearchRegion> torus_regions(const RegionSet& set, const UnitTransform& transform);

/// (1 / N) sum over lattice points in `complement` of D_{f_max, Q - f_max}(2 pi (u - xbar)).
double complement_average(const Lattice& lattice, const std::vector<Eigen::Index>& complement, int f_max,
                          const Eigen::Ref<const Vector>& u);

/// Upper estimate of sup over u in the regions of complement_average, by seeded PSO and a
/// local grid refinement, clamped at 0. Zero when the complement is empty.
double coefficient_A(const Lattice& lattice, const std::vector<Eigen::Index>& complement, int f_max,
                     const std::vector<SearchRegion>& regions, const PSOConfig& pso = {});

struct TighteningCoefficients {
  double C = 1.0;
  double A_domain = 0.0;
  double A_initial = 0.0;
  double A_unsafe = 0.0;
  int f_max = 0;
  std::size_t points_per_dim = 0;
};

/// C and the three A coefficients. The sup runs over the unscaled sets; the lattice
/// partition uses the enlarged ones.
TighteningCoefficients tightening_coefficients(const Lattice& lattice, const SafetySpec& spec,
                                               const UnitTransform& transform, int f_max, const PSOConfig& pso = {});

/// Variable indices of the assembled program.
struct LPLayout {
  Eigen::Index b_begin = 0;
  Eigen::Index b_size = 0;
  Eigen::Index eta = 0;
  Eigen::Index c = 0;
  Eigen::Index bmin_initial = 0;        // lower bound of B on X0 lattice
  Eigen::Index bmax_unsafe = 0;         // upper bound of B on Xu lattice
  Eigen::Index bmin_delta_domain = 0;   // lower bound of (H - I) B on X lattice
  Eigen::Index bmax_domain = 0;         // upper bound of B on X lattice
  Eigen::Index bmax_out_initial = 0;    // upper bound of B off X0
  Eigen::Index bmin_out_unsafe = 0;     // lower bound of B off Xu
  Eigen::Index bmin_out_domain = 0;     // lower bound of B off X
  Eigen::Index bmax_delta_out_domain = 0;  // upper bound of (H - I) B off X
  Eigen::Index abs_begin = -1;          // |b_j| bounds when epsilon > 0
};

struct RobustnessParams {
  double epsilon = 0.0;
  double b_bar = 0.0;
  double kappa = 0.0;
};

struct AssembledLP {
  LPProblem problem;
  LPLayout layout;
};

/// Finite LP over the lattice. `features` is phi on every lattice point and `drift`
/// is phi (H - I) on the same points.
AssembledLP assemble_lp(std::shared_ptr<const Matrix> features, std::shared_ptr<const Matrix> drift,
                        const Lattice& lattice, const TighteningCoefficients& coeffs, int horizon,
                        const RobustnessParams& robust = {});

/// Tightened values eta^, gamma^, Delta^, xi^ at an LP point, in their fractional form.
struct TightenedBounds {
  double eta_hat = 0.0;
  double gamma_hat = 0.0;
  double delta_hat = 0.0;
  double xi_hat = 0.0;
};

TightenedBounds tightened_bounds(const LPLayout& layout, const TighteningCoefficients& coeffs,
                                 const RobustnessParams& robust, const Eigen::Ref<const Vector>& x);

}  // namespace sbc
