#pragma once

#include <Eigen/Dense>

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "sbc/geometry.hpp"

namespace sbc {

/// Compiled infix expression over the variables x1..xn.
///
/// Grammar: `+ - * /` with the usual precedence, right-associative `^`,
/// unary minus, parentheses, function calls `sin(..)`, `cos`, `tan`, `exp`,
/// `log`, `sqrt`, `abs`, `tanh`, `atan`, and the constants `pi` and `e`.
class Expression {
 public:
  /// Throws ExpressionError with the offending position.
  Expression(const std::string& text, std::size_t num_variables);

  [[nodiscard]] double evaluate(const Eigen::Ref<const Vector>& x) const;
  [[nodiscard]] const std::string& text() const noexcept { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

/// Closed-loop transition map x+ = f(x) + w, w ~ N(0, diag(noise_std^2)).
class DynamicsModel {
 public:
  DynamicsModel(std::vector<Expression> components, Vector noise_std);

  [[nodiscard]] std::size_t dimension() const noexcept { return components_.size(); }
  [[nodiscard]] const Vector& noise_std() const noexcept { return noise_std_; }
  [[nodiscard]] const std::vector<Expression>& components() const noexcept { return components_; }

  /// Deterministic part f(x).
  [[nodiscard]] Vector mean(const Eigen::Ref<const Vector>& x) const;

  /// One noisy step.
  template <class Rng>
  Vector step(const Eigen::Ref<const Vector>& x, Rng& rng) const {
    Vector next = mean(x);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < next.size(); ++i) {
      if (noise_std_[i] > 0.0) next[i] += noise_std_[i] * normal(rng);
    }
    return next;
  }

 private:
  std::vector<Expression> components_;
  Vector noise_std_;
};

/// One expression per state dimension. A missing noise vector means deterministic.
DynamicsModel parse_dynamics(const std::vector<std::string>& exprs, const Vector& noise_std = Vector{});

}  // namespace sbc
