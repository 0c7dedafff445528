#include "sbc/dynamics.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "sbc/errors.hpp"

namespace sbc {

struct Expression::Node {
  enum class Kind { constant, variable, negate, add, sub, mul, div, pow, call };
  enum class Function { sin, cos, tan, exp, log, sqrt, abs, tanh, atan };

  Kind kind = Kind::constant;
  double value = 0.0;
  std::size_t variable = 0;
  Function function = Function::sin;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;

  [[nodiscard]] double eval(const Eigen::Ref<const Vector>& x) const {
    switch (kind) {
      case Kind::constant: return value;
      case Kind::variable: return x[static_cast<Eigen::Index>(variable)];
      case Kind::negate: return -lhs->eval(x);
      case Kind::add: return lhs->eval(x) + rhs->eval(x);
      case Kind::sub: return lhs->eval(x) - rhs->eval(x);
      case Kind::mul: return lhs->eval(x) * rhs->eval(x);
      case Kind::div: return lhs->eval(x) / rhs->eval(x);
      case Kind::pow: return std::pow(lhs->eval(x), rhs->eval(x));
      case Kind::call: {
        const double a = lhs->eval(x);
        switch (function) {
          case Function::sin: return std::sin(a);
          case Function::cos: return std::cos(a);
          case Function::tan: return std::tan(a);
          case Function::exp: return std::exp(a);
          case Function::log: return std::log(a);
          case Function::sqrt: return std::sqrt(a);
          case Function::abs: return std::abs(a);
          case Function::tanh: return std::tanh(a);
          case Function::atan: return std::atan(a);
        }
      }
    }
    return 0.0;
  }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_binary(Node::Kind kind, NodePtr lhs, NodePtr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class ExpressionParser {
 public:
  ExpressionParser(const std::string& text, std::size_t num_variables) : text_(text), num_variables_(num_variables) {}

  NodePtr parse() {
    NodePtr root = expression();
    skip_ws();
    if (pos_ < text_.size()) throw ExpressionError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_);
    return root;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  NodePtr expression() {
    NodePtr lhs = term();
    for (char c = peek(); c == '+' || c == '-'; c = peek()) {
      ++pos_;
      lhs = make_binary(c == '+' ? Node::Kind::add : Node::Kind::sub, lhs, term());
    }
    return lhs;
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (char c = peek(); c == '*' || c == '/'; c = peek()) {
      ++pos_;
      lhs = make_binary(c == '*' ? Node::Kind::mul : Node::Kind::div, lhs, unary());
    }
    return lhs;
  }

  NodePtr unary() {
    const char c = peek();
    if (c == '-') {
      ++pos_;
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::negate;
      n->lhs = unary();
      return n;
    }
    if (c == '+') {
      ++pos_;
      return unary();
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (peek() == '^') {
      ++pos_;
      return make_binary(Node::Kind::pow, base, unary());
    }
    return base;
  }

  NodePtr primary() {
    const char c = peek();
    if (c == '\0') throw ExpressionError("unexpected end of expression", pos_);
    if (c == '(') {
      ++pos_;
      NodePtr inner = expression();
      if (peek() != ')') throw ExpressionError("expected ')'", pos_);
      ++pos_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ExpressionError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  NodePtr number() {
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw ExpressionError("malformed number", pos_);
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::constant;
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    const std::string name = text_.substr(start, pos_ - start);

    auto n = std::make_shared<Node>();
    if (peek() == '(') {
      static const std::pair<const char*, Node::Function> functions[] = {
          {"sin", Node::Function::sin},   {"cos", Node::Function::cos},   {"tan", Node::Function::tan},
          {"exp", Node::Function::exp},   {"log", Node::Function::log},   {"sqrt", Node::Function::sqrt},
          {"abs", Node::Function::abs},   {"tanh", Node::Function::tanh}, {"atan", Node::Function::atan}};
      bool found = false;
      for (const auto& [fname, f] : functions) {
        if (name == fname) {
          n->function = f;
          found = true;
        }
      }
      if (!found) throw ExpressionError("unknown function '" + name + "'", start);
      ++pos_;
      n->kind = Node::Kind::call;
      n->lhs = expression();
      if (peek() != ')') throw ExpressionError("expected ')'", pos_);
      ++pos_;
      return n;
    }
    if (name == "pi") {
      n->value = std::numbers::pi;
      return n;
    }
    if (name == "e") {
      n->value = std::numbers::e;
      return n;
    }
    if (name.size() >= 2 && name[0] == 'x') {
      char* end = nullptr;
      const long idx = std::strtol(name.c_str() + 1, &end, 10);
      if (*end == '\0' && idx >= 1 && static_cast<std::size_t>(idx) <= num_variables_) {
        n->kind = Node::Kind::variable;
        n->variable = static_cast<std::size_t>(idx - 1);
        return n;
      }
    }
    throw ExpressionError("unknown identifier '" + name + "'", start);
  }

  const std::string& text_;
  std::size_t num_variables_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(const std::string& text, std::size_t num_variables)
    : text_(text), root_(ExpressionParser(text, num_variables).parse()) {}

double Expression::evaluate(const Eigen::Ref<const Vector>& x) const { return root_->eval(x); }

DynamicsModel::DynamicsModel(std::vector<Expression> components, Vector noise_std)
    : components_(std::move(components)), noise_std_(std::move(noise_std)) {
  if (components_.empty()) throw Error("dynamics need at least one component");
  if (noise_std_.size() == 0) noise_std_ = Vector::Zero(static_cast<Eigen::Index>(components_.size()));
  if (static_cast<std::size_t>(noise_std_.size()) != components_.size()) {
    throw DimensionError("noise_std has " + std::to_string(noise_std_.size()) + " entries for " +
                         std::to_string(components_.size()) + " state dimensions");
  }
  if (!(noise_std_.array() >= 0.0).all()) throw Error("noise standard deviations must be non-negative");
}

Vector DynamicsModel::mean(const Eigen::Ref<const Vector>& x) const {
  if (static_cast<std::size_t>(x.size()) != components_.size()) throw DimensionError("state dimension mismatch");
  Vector out(x.size());
  for (std::size_t i = 0; i < components_.size(); ++i) out[static_cast<Eigen::Index>(i)] = components_[i].evaluate(x);
  return out;
}

DynamicsModel parse_dynamics(const std::vector<std::string>& exprs, const Vector& noise_std) {
  std::vector<Expression> components;
  components.reserve(exprs.size());
  for (const auto& e : exprs) components.emplace_back(e, exprs.size());
  return DynamicsModel{std::move(components), noise_std};
}

}  // namespace sbc
