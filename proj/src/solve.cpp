#include "sbc/solve.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "sbc/errors.hpp"

namespace sbc {

Eigen::Index LPProblem::add_variable(std::string name, double cost, double lo, double hi) {
  const Eigen::Index k = objective.size();
  variable_names.push_back(std::move(name));
  objective.conservativeResize(k + 1);
  lower.conservativeResize(k + 1);
  upper.conservativeResize(k + 1);
  objective[k] = cost;
  lower[k] = lo;
  upper[k] = hi;
  return k;
}

Eigen::Index LPProblem::num_rows() const noexcept {
  Eigen::Index n = static_cast<Eigen::Index>(sparse_rows.size());
  for (const auto& b : blocks) n += static_cast<Eigen::Index>(b.rows.size());
  return n;
}

void LPProblem::validate() const {
  const Eigen::Index v = num_variables();
  if (lower.size() != v || upper.size() != v || static_cast<Eigen::Index>(variable_names.size()) != v) {
    throw DimensionError("LP variable arrays disagree in length");
  }
  for (Eigen::Index k = 0; k < v; ++k) {
    if (lower[k] > upper[k]) throw Error("LP variable '" + variable_names[static_cast<std::size_t>(k)] + "' has lower > upper");
  }
  for (const auto& b : blocks) {
    if (!b.dense) throw Error("LP block '" + b.name + "' has no matrix");
    if (b.offset < 0 || b.offset + b.dense->cols() > v) throw DimensionError("LP block '" + b.name + "' exceeds the variables");
    for (auto r : b.rows) {
      if (r < 0 || r >= b.dense->rows()) throw DimensionError("LP block '" + b.name + "' references a missing row");
    }
    for (const auto& [k, a] : b.extra) {
      if (k < 0 || k >= v) throw DimensionError("LP block '" + b.name + "' references an undeclared variable");
      if (k >= b.offset && k < b.offset + b.dense->cols()) {
        throw Error("LP block '" + b.name + "' has an extra term inside its dense range");
      }
    }
  }
  for (const auto& r : sparse_rows) {
    for (const auto& [k, a] : r.terms) {
      if (k < 0 || k >= v) throw DimensionError("LP row '" + r.name + "' references an undeclared variable");
    }
  }
}

Vector LPProblem::row_activity(const Eigen::Ref<const Vector>& x) const {
  Vector out(num_rows());
  Eigen::Index at = 0;
  std::map<const Matrix*, Vector> products;
  for (const auto& b : blocks) {
    auto it = products.find(b.dense.get());
    if (it == products.end()) it = products.emplace(b.dense.get(), *b.dense * x.segment(b.offset, b.dense->cols())).first;
    double extra = 0.0;
    for (const auto& [k, a] : b.extra) extra += a * x[k];
    for (auto r : b.rows) out[at++] = b.coef * it->second[r] + extra - b.rhs;
  }
  for (const auto& r : sparse_rows) {
    double s = 0.0;
    for (const auto& [k, a] : r.terms) s += a * x[k];
    out[at++] = s - r.rhs;
  }
  return out;
}

double LPProblem::max_violation(const Eigen::Ref<const Vector>& x) const {
  double worst = 0.0;
  if (num_rows() > 0) worst = std::max(worst, row_activity(x).maxCoeff());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    worst = std::max({worst, lower[k] - x[k], x[k] - upper[k]});
  }
  return worst;
}

std::string to_string(LPStatus status) {
  switch (status) {
    case LPStatus::optimal: return "optimal";
    case LPStatus::infeasible: return "infeasible";
    case LPStatus::unbounded: return "unbounded";
    case LPStatus::iteration_limit: return "iteration-limit";
  }
  return "unknown";
}

namespace {

/// Inequality form with column scaling x = s .* z and unit-norm rows, solved by
/// a primal revised simplex on its dual  min r.y  s.t.  sum_i y_i a_i = -c,  y >= 0.
/// The basis is a set of V rows; the primal iterate z solves B^T z = r_B.
/// Phase one runs on a slightly perturbed cost to escape dual degeneracy, phase
/// two walks the primal vertices with the true cost until all multipliers are signed.
class DualSimplex {
 public:
  DualSimplex(const LPProblem& p, const SimplexOptions& o) : p_(p), o_(o), v_(p.num_variables()) {
    p_.validate();
    problem_rows_ = p_.num_rows();
    total_rows_ = problem_rows_ + 2 * v_;
    compute_column_scale();
    compute_row_norms();
    rhs_.resize(total_rows_);
    for (Eigen::Index i = 0; i < total_rows_; ++i) rhs_[i] = row_rhs(i);
  }

  LPSolution run() {
    LPSolution sol;
    sol.iterations = 0;
    const Vector true_cost = cost_;
    perturb_cost();
    init_basis();
    const LPStatus first = dual_phase(sol);
    if (first != LPStatus::optimal) return finish(sol, first);
    cost_ = true_cost;
    return finish(sol, primal_phase(sol));
  }

 private:
  [[nodiscard]] bool out_of_iterations(const LPSolution& sol) const { return sol.iterations >= o_.max_iterations; }

  /// Pricing runs over a working set of rows; full passes over every row add the worst
  /// offenders and certify optimality.
  LPStatus dual_phase(LPSolution& sol) {
    init_work();
    Vector viol, full(total_rows_);
    int degenerate_run = 0;
    bool bland = false;
    int since_refactor = 0;
    for (; !out_of_iterations(sol); ++sol.iterations) {
      if (since_refactor >= o_.refactor_interval) {
        refactor(true);
        since_refactor = 0;
      }
      compute_z();
      viol.noalias() = work_rows_.topRows(work_size_) * z_;
      viol -= work_rhs_.head(work_size_);

      Eigen::Index enter = -1;
      double best = 0.0;
      for (Eigen::Index w = 0; w < work_size_; ++w) {
        const Eigen::Index i = work_[static_cast<std::size_t>(w)];
        if (basic_pos_[static_cast<std::size_t>(i)] >= 0 || !(viol[w] > o_.feasibility_tolerance)) continue;
        if (bland) {
          if (enter < 0 || i < enter) enter = i;
          continue;
        }
        const double score = viol[w] * (viol[w] / weight_[w]);
        if (score > best) {
          best = score;
          enter = i;
        }
      }
      if (enter < 0) {
        if (since_refactor > 0) {
          // confirm on a fresh factorization
          refactor(true);
          since_refactor = 0;
          --sol.iterations;
          continue;
        }
        activities(z_, full);
        full -= rhs_;
        if (!grow_work(full)) return LPStatus::optimal;
        --sol.iterations;
        continue;
      }

      const Vector a = row_vector(enter);
      Vector alpha = binv_ * a;
      Eigen::Index leave = dual_ratio(alpha, bland);
      if (leave < 0) {
        refactor(true);
        since_refactor = 0;
        alpha = binv_ * a;
        leave = dual_ratio(alpha, bland);
        if (leave < 0) return LPStatus::infeasible;  // unbounded dual ray
      }
      const double step = std::max(0.0, y_[leave] / alpha[leave]);
      update_weights(enter, leave, alpha);
      y_ -= step * alpha;
      y_[leave] = step;
      y_ = y_.cwiseMax(0.0);
      pivot(leave, enter, alpha);
      ++since_refactor;

      if (step <= 1e-12) {
        if (++degenerate_run > 10 * v_) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
    return LPStatus::iteration_limit;
  }

  /// Goldfarb-Reid update of the reference weights 1 + |B^-1 a_i|^2 before the basis changes.
  void update_weights(Eigen::Index enter, Eigen::Index leave, const Vector& alpha) {
    const double pivot_value = alpha[leave];
    const double gq = weight_[work_pos_[static_cast<std::size_t>(enter)]];
    const Vector rho = binv_.row(leave).transpose();
    const Vector w = binv_.transpose() * alpha;
    const Vector vr = work_rows_.topRows(work_size_) * rho;
    const Vector vw = work_rows_.topRows(work_size_) * w;
    for (Eigen::Index k = 0; k < work_size_; ++k) {
      if (basic_pos_[static_cast<std::size_t>(work_[static_cast<std::size_t>(k)])] >= 0) continue;
      const double r = vr[k] / pivot_value;
      if (r == 0.0) continue;
      const double g = weight_[k] - 2.0 * r * vw[k] + r * r * gq;
      weight_[k] = std::isfinite(g) ? std::max(g, 1.0 + r * r) : 1.0 + r * r;
    }
    const Eigen::Index out = basis_[static_cast<std::size_t>(leave)];
    weight_[work_pos_[static_cast<std::size_t>(out)]] = std::max(gq / (pivot_value * pivot_value), 1.0);
  }

  void add_work(Eigen::Index i) {
    if (in_work_[static_cast<std::size_t>(i)]) return;
    if (work_size_ == work_rows_.rows()) {
      const Eigen::Index grown = std::max<Eigen::Index>(64, 2 * work_size_);
      work_rows_.conservativeResize(grown, v_);
      work_rhs_.conservativeResize(grown);
      weight_.conservativeResize(grown);
    }
    const Vector a = row_vector(i);
    work_rows_.row(work_size_) = a.transpose();
    work_rhs_[work_size_] = rhs_[i];
    weight_[work_size_] = binv_.rows() == v_ ? 1.0 + (binv_ * a).squaredNorm() : 1.0;
    work_pos_[static_cast<std::size_t>(i)] = work_size_;
    ++work_size_;
    work_.push_back(i);
    in_work_[static_cast<std::size_t>(i)] = 1;
  }

  /// Unit rows plus an evenly strided sample of the problem rows.
  void init_work() {
    in_work_.assign(static_cast<std::size_t>(total_rows_), 0);
    work_pos_.assign(static_cast<std::size_t>(total_rows_), -1);
    work_.clear();
    work_size_ = 0;
    work_rows_.resize(0, v_);
    work_rhs_.resize(0);
    for (Eigen::Index i = problem_rows_; i < total_rows_; ++i) add_work(i);
    const Eigen::Index target = std::max<Eigen::Index>(1, o_.working_set_factor * v_);
    const Eigen::Index stride = std::max<Eigen::Index>(1, (problem_rows_ + target - 1) / target);
    for (Eigen::Index i = 0; i < problem_rows_; i += stride) add_work(i);
  }

  /// Add the most violated rows outside the working set; false when there are none.
  bool grow_work(const Vector& full) {
    std::vector<std::pair<double, Eigen::Index>> cand;
    for (Eigen::Index i = 0; i < total_rows_; ++i) {
      if (!in_work_[static_cast<std::size_t>(i)] && full[i] > o_.feasibility_tolerance) cand.emplace_back(-full[i], i);
    }
    if (cand.empty()) return false;
    const auto keep = std::min<std::size_t>(cand.size(), static_cast<std::size_t>(std::max<Eigen::Index>(8, 2 * v_)));
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep), cand.end());
    for (std::size_t k = 0; k < keep; ++k) add_work(cand[k].second);
    return true;
  }

  /// Release basic rows with negative multipliers (and idle artificial rows) by primal ratio tests.
  LPStatus primal_phase(LPSolution& sol) {
    refactor(false);
    const double dual_tol = 1e-9 * (1.0 + cost_.lpNorm<Eigen::Infinity>());
    std::vector<char> stuck(static_cast<std::size_t>(v_), 0);
    Vector act(total_rows_), dir_act(total_rows_);
    int since_refactor = 0;
    int degenerate_run = 0;
    for (; !out_of_iterations(sol); ++sol.iterations) {
      if (since_refactor >= o_.refactor_interval) {
        refactor(false);
        since_refactor = 0;
      }
      const bool bland = degenerate_run > 10 * v_;
      Eigen::Index j = -1;
      double most = -dual_tol;
      for (Eigen::Index k = 0; k < v_; ++k) {
        if (y_[k] < most) {
          most = y_[k];
          j = k;
          if (bland) break;
        }
      }
      if (j < 0) {
        for (Eigen::Index k = 0; k < v_; ++k) {
          if (!stuck[static_cast<std::size_t>(k)] && artificial(basis_[static_cast<std::size_t>(k)]) && y_[k] <= dual_tol) {
            j = k;
            break;
          }
        }
      }
      if (j < 0) return LPStatus::optimal;

      compute_z();
      activities(z_, act);
      const Vector d = -binv_.row(j).transpose();
      activities(d, dir_act);
      const Eigen::Index enter = primal_ratio(act, dir_act, bland, y_[j] >= -dual_tol);
      if (enter < 0) {
        if (y_[j] < -dual_tol) return LPStatus::unbounded;
        stuck[static_cast<std::size_t>(j)] = 1;
        --sol.iterations;
        continue;
      }
      const double step = std::max(0.0, rhs_[enter] - act[enter]) / dir_act[enter];
      degenerate_run = (step <= 1e-12) ? degenerate_run + 1 : 0;
      const Vector alpha = binv_ * row_vector(enter);
      pivot(j, enter, alpha);
      std::fill(stuck.begin(), stuck.end(), 0);
      ++since_refactor;
      y_ = -(binv_ * cost_);
    }
    return LPStatus::iteration_limit;
  }

  void pivot(Eigen::Index leave, Eigen::Index enter, const Vector& alpha) {
    const Eigen::RowVectorXd pivot_row = binv_.row(leave) / alpha[leave];
    binv_ -= alpha * pivot_row;
    binv_.row(leave) = pivot_row;
    basic_pos_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(leave)])] = -1;
    basis_[static_cast<std::size_t>(leave)] = enter;
    basic_pos_[static_cast<std::size_t>(enter)] = leave;
  }

  /// Deterministic cost perturbation, relative to the largest scaled cost.
  void perturb_cost() {
    const double mag = o_.perturbation * std::max(1.0, cost_.lpNorm<Eigen::Infinity>());
    if (!(mag > 0.0)) return;
    std::mt19937_64 rng(0x5bc0ffeeULL);
    std::uniform_real_distribution<double> u(0.5, 1.0);
    for (Eigen::Index k = 0; k < v_; ++k) {
      const double delta = mag * u(rng);
      const bool lo = std::isfinite(p_.lower[k]);
      const bool hi = std::isfinite(p_.upper[k]);
      double sign = 1.0;
      if (cost_[k] < 0.0 || (cost_[k] == 0.0 && hi && !lo)) sign = -1.0;
      if (cost_[k] == 0.0 && lo == hi) sign = (rng() & 1U) ? 1.0 : -1.0;
      cost_[k] += sign * delta;
    }
  }

  void compute_column_scale() {
    colmax_ = Vector::Zero(v_);
    for (const auto& b : p_.blocks) {
      const Matrix& m = *b.dense;
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        double mx = 0.0;
        for (auto r : b.rows) mx = std::max(mx, std::abs(m(r, c)));
        colmax_[b.offset + c] = std::max(colmax_[b.offset + c], std::abs(b.coef) * mx);
      }
      for (const auto& [k, a] : b.extra) colmax_[k] = std::max(colmax_[k], std::abs(a));
    }
    for (const auto& r : p_.sparse_rows) {
      for (const auto& [k, a] : r.terms) colmax_[k] = std::max(colmax_[k], std::abs(a));
    }
    scale_ = Vector::Ones(v_);
    for (Eigen::Index k = 0; k < v_; ++k) {
      if (colmax_[k] > 0.0) scale_[k] = 1.0 / colmax_[k];
    }
    cost_ = p_.objective.cwiseProduct(scale_);
  }

  void compute_row_norms() {
    row_norm_.resize(problem_rows_);
    Eigen::Index at = 0;
    for (const auto& b : p_.blocks) {
      const Matrix& m = *b.dense;
      const Vector s = scale_.segment(b.offset, m.cols());
      double extra = 0.0;
      for (const auto& [k, a] : b.extra) extra += a * a * scale_[k] * scale_[k];
      for (auto r : b.rows) {
        const double dense = (m.row(r).transpose().cwiseProduct(s)).squaredNorm();
        row_norm_[at++] = std::sqrt(b.coef * b.coef * dense + extra);
      }
    }
    for (const auto& r : p_.sparse_rows) {
      double s = 0.0;
      for (const auto& [k, a] : r.terms) s += a * a * scale_[k] * scale_[k];
      row_norm_[at++] = std::sqrt(s);
    }
    for (Eigen::Index i = 0; i < problem_rows_; ++i) {
      if (!(row_norm_[i] > 0.0)) row_norm_[i] = 1.0;
    }
    // (block index, local index) lookup for materializing rows
    owner_.clear();
    for (std::size_t bi = 0; bi < p_.blocks.size(); ++bi) {
      for (std::size_t r = 0; r < p_.blocks[bi].rows.size(); ++r) owner_.emplace_back(static_cast<int>(bi), r);
    }
    for (std::size_t si = 0; si < p_.sparse_rows.size(); ++si) owner_.emplace_back(-1, si);
  }

  /// Unit rows: index problem_rows + 2k is  -z_k <= -l_k / s_k,  +1 is  z_k <= u_k / s_k.
  [[nodiscard]] bool artificial(Eigen::Index i) const {
    if (i < problem_rows_) return false;
    const Eigen::Index k = (i - problem_rows_) / 2;
    return ((i - problem_rows_) % 2 == 0) ? !std::isfinite(p_.lower[k]) : !std::isfinite(p_.upper[k]);
  }

  [[nodiscard]] double unit_rhs(Eigen::Index i) const {
    const Eigen::Index k = (i - problem_rows_) / 2;
    if ((i - problem_rows_) % 2 == 0) return std::isfinite(p_.lower[k]) ? -p_.lower[k] / scale_[k] : o_.box;
    return std::isfinite(p_.upper[k]) ? p_.upper[k] / scale_[k] : o_.box;
  }

  [[nodiscard]] Vector row_vector(Eigen::Index i) const {
    Vector a = Vector::Zero(v_);
    if (i >= problem_rows_) {
      const Eigen::Index k = (i - problem_rows_) / 2;
      a[k] = ((i - problem_rows_) % 2 == 0) ? -1.0 : 1.0;
      return a;
    }
    const auto [bi, local] = owner_[static_cast<std::size_t>(i)];
    if (bi >= 0) {
      const RowBlock& b = p_.blocks[static_cast<std::size_t>(bi)];
      a.segment(b.offset, b.dense->cols()) = b.coef * b.dense->row(b.rows[local]).transpose();
      for (const auto& [k, c] : b.extra) a[k] += c;
    } else {
      for (const auto& [k, c] : p_.sparse_rows[local].terms) a[k] += c;
    }
    return a.cwiseProduct(scale_) / row_norm_[i];
  }

  [[nodiscard]] double row_rhs(Eigen::Index i) const {
    if (i >= problem_rows_) return unit_rhs(i);
    const auto [bi, local] = owner_[static_cast<std::size_t>(i)];
    const double r = (bi >= 0) ? p_.blocks[static_cast<std::size_t>(bi)].rhs : p_.sparse_rows[local].rhs;
    return r / row_norm_[i];
  }

  void init_basis() {
    basis_.assign(static_cast<std::size_t>(v_), 0);
    basic_pos_.assign(static_cast<std::size_t>(total_rows_), -1);
    for (Eigen::Index k = 0; k < v_; ++k) {
      const double c = cost_[k];
      const bool use_lower = (c > 0.0) || (c == 0.0 && std::isfinite(p_.lower[k]));
      const Eigen::Index row = problem_rows_ + 2 * k + (use_lower ? 0 : 1);
      basis_[static_cast<std::size_t>(k)] = row;
      basic_pos_[static_cast<std::size_t>(row)] = k;
    }
    refactor(true);
  }

  void refactor(bool clamp) {
    Matrix b(v_, v_);
    for (Eigen::Index j = 0; j < v_; ++j) b.col(j) = row_vector(basis_[static_cast<std::size_t>(j)]);
    const Eigen::PartialPivLU<Matrix> lu(b);
    binv_ = lu.inverse();
    y_ = -(binv_ * cost_);
    if (clamp) y_ = y_.cwiseMax(0.0);
  }

  void compute_z() {
    Vector rb(v_);
    for (Eigen::Index j = 0; j < v_; ++j) rb[j] = rhs_[basis_[static_cast<std::size_t>(j)]];
    z_ = binv_.transpose() * rb;
  }

  /// Normalized a_i . w of every row, for w in scaled coordinates.
  void activities(const Vector& w, Vector& out) const {
    const Vector x = w.cwiseProduct(scale_);
    Eigen::Index at = 0;
    std::map<const Matrix*, Vector> products;
    for (const auto& b : p_.blocks) {
      auto it = products.find(b.dense.get());
      if (it == products.end()) it = products.emplace(b.dense.get(), *b.dense * x.segment(b.offset, b.dense->cols())).first;
      double extra = 0.0;
      for (const auto& [k, a] : b.extra) extra += a * x[k];
      for (auto r : b.rows) {
        out[at] = (b.coef * it->second[r] + extra) / row_norm_[at];
        ++at;
      }
    }
    for (const auto& r : p_.sparse_rows) {
      double s = 0.0;
      for (const auto& [k, a] : r.terms) s += a * x[k];
      out[at] = s / row_norm_[at];
      ++at;
    }
    for (Eigen::Index k = 0; k < v_; ++k) {
      out[problem_rows_ + 2 * k] = -w[k];
      out[problem_rows_ + 2 * k + 1] = w[k];
    }
  }

  /// Harris two-pass ratio test on y_B - t alpha >= 0; Bland picks the smallest row index.
  [[nodiscard]] Eigen::Index dual_ratio(const Vector& alpha, bool bland) const {
    const double tol = o_.feasibility_tolerance;
    double bound = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < v_; ++i) {
      if (alpha[i] > o_.pivot_tolerance) bound = std::min(bound, (y_[i] + tol) / alpha[i]);
    }
    if (!std::isfinite(bound)) return -1;
    Eigen::Index leave = -1;
    if (bland) {
      double exact = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < v_; ++i) {
        if (alpha[i] > o_.pivot_tolerance) exact = std::min(exact, y_[i] / alpha[i]);
      }
      for (Eigen::Index i = 0; i < v_; ++i) {
        if (alpha[i] > o_.pivot_tolerance && y_[i] / alpha[i] <= exact + tol &&
            (leave < 0 || basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          leave = i;
        }
      }
      return leave;
    }
    double best = 0.0;
    for (Eigen::Index i = 0; i < v_; ++i) {
      if (alpha[i] > o_.pivot_tolerance && y_[i] / alpha[i] <= bound && alpha[i] > best) {
        best = alpha[i];
        leave = i;
      }
    }
    return leave;
  }

  /// Harris ratio test along a primal direction: first nonbasic row to become tight.
  /// Zero-cost moves only look for genuine rows, so artificial boxes never trade places.
  [[nodiscard]] Eigen::Index primal_ratio(const Vector& act, const Vector& dir, bool bland, bool genuine_only) const {
    const double tol = o_.feasibility_tolerance;
    double bound = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < total_rows_; ++i) {
      if (basic_pos_[static_cast<std::size_t>(i)] >= 0 || !(dir[i] > o_.pivot_tolerance)) continue;
      if (genuine_only && artificial(i)) continue;
      bound = std::min(bound, (std::max(0.0, rhs_[i] - act[i]) + tol) / dir[i]);
    }
    if (!std::isfinite(bound)) return -1;
    Eigen::Index enter = -1;
    double best = 0.0;
    for (Eigen::Index i = 0; i < total_rows_; ++i) {
      if (basic_pos_[static_cast<std::size_t>(i)] >= 0 || !(dir[i] > o_.pivot_tolerance)) continue;
      if (genuine_only && artificial(i)) continue;
      if (std::max(0.0, rhs_[i] - act[i]) / dir[i] > bound) continue;
      if (bland) return i;
      if (dir[i] > best) {
        best = dir[i];
        enter = i;
      }
    }
    return enter;
  }

  LPSolution finish(LPSolution& sol, LPStatus status) {
    compute_z();
    sol.status = status;
    sol.x = z_.cwiseProduct(scale_);
    sol.objective = p_.objective.dot(sol.x);
    sol.duals = Vector::Zero(problem_rows_);
    if (status == LPStatus::optimal) {
      const double tol = 1e-7 * (1.0 + cost_.lpNorm<Eigen::Infinity>());
      for (Eigen::Index j = 0; j < v_; ++j) {
        const Eigen::Index row = basis_[static_cast<std::size_t>(j)];
        if (row < problem_rows_) {
          sol.duals[row] = std::max(0.0, y_[j]) / row_norm_[row];
        } else if (artificial(row) && y_[j] > tol) {
          sol.status = LPStatus::unbounded;
        }
      }
    }
    sol.max_residual = p_.max_violation(sol.x);
    return sol;
  }

  const LPProblem& p_;
  const SimplexOptions& o_;
  Eigen::Index v_;
  Eigen::Index problem_rows_ = 0;
  Eigen::Index total_rows_ = 0;
  Vector colmax_, scale_, cost_, row_norm_, rhs_;
  std::vector<std::pair<int, std::size_t>> owner_;
  std::vector<Eigen::Index> basis_;
  std::vector<Eigen::Index> basic_pos_;
  Matrix binv_;
  Vector y_, z_;
  std::vector<Eigen::Index> work_;
  std::vector<char> in_work_;
  Matrix work_rows_;
  Vector work_rhs_, weight_;
  std::vector<Eigen::Index> work_pos_;
  Eigen::Index work_size_ = 0;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_terms(std::ostringstream& out, const std::vector<std::pair<Eigen::Index, double>>& terms,
                 const std::vector<std::string>& names) {
  bool first = true;
  for (const auto& [k, a] : terms) {
    if (a == 0.0) continue;
    out << (a < 0.0 ? " - " : (first ? " " : " + ")) << fmt(std::abs(a)) << ' ' << names[static_cast<std::size_t>(k)];
    first = false;
  }
  if (first) out << " 0 " << names.front();
}

}  // namespace

LPSolution solve_simplex(const LPProblem& problem, const SimplexOptions& options) {
  if (problem.num_variables() == 0) throw Error("LP has no variables");
  return DualSimplex(problem, options).run();
}

LPSolution solve_lp(const LPProblem& problem, const std::string& backend) {
  if (backend == "SimplexOptimiser" || backend == "simplex") return solve_simplex(problem);
  if (backend == "GurobiOptimiser" || backend == "HighsOptimiser" || backend == "AlglibOptimiser") {
    throw ConfigError("optimiser '" + backend + "' is not available in this build; use SimplexOptimiser");
  }
  throw ConfigError("unknown optimiser '" + backend + "'");
}

std::string export_lp(const LPProblem& problem) {
  problem.validate();
  const auto& names = problem.variable_names;
  std::ostringstream out;
  out << "\\ generated barrier LP\nMinimize\n obj:";
  std::vector<std::pair<Eigen::Index, double>> obj;
  for (Eigen::Index k = 0; k < problem.num_variables(); ++k) obj.emplace_back(k, problem.objective[k]);
  write_terms(out, obj, names);
  out << "\nSubject To\n";
  std::size_t counter = 0;
  for (const auto& b : problem.blocks) {
    for (auto r : b.rows) {
      std::vector<std::pair<Eigen::Index, double>> terms;
      for (Eigen::Index c = 0; c < b.dense->cols(); ++c) terms.emplace_back(b.offset + c, b.coef * (*b.dense)(r, c));
      for (const auto& e : b.extra) terms.push_back(e);
      out << ' ' << b.name << '_' << counter++ << ':';
      write_terms(out, terms, names);
      out << " <= " << fmt(b.rhs) << '\n';
    }
  }
  for (const auto& r : problem.sparse_rows) {
    out << ' ' << r.name << '_' << counter++ << ':';
    write_terms(out, r.terms, names);
    out << " <= " << fmt(r.rhs) << '\n';
  }
  out << "Bounds\n";
  for (Eigen::Index k = 0; k < problem.num_variables(); ++k) {
    const auto& n = names[static_cast<std::size_t>(k)];
    const bool lo = std::isfinite(problem.lower[k]);
    const bool hi = std::isfinite(problem.upper[k]);
    if (!lo && !hi) {
      out << ' ' << n << " free\n";
    } else {
      out << ' ' << (lo ? fmt(problem.lower[k]) : "-inf") << " <= " << n << " <= " << (hi ? fmt(problem.upper[k]) : "+inf")
          << '\n';
    }
  }
  out << "End\n";
  return out.str();
}

}  // namespace sbc
