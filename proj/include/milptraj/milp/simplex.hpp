#pragma once

// Two-phase primal simplex on the full dense tableau, with upper and lower
// variable bounds handled directly (nonbasic variables sit at a bound, bound
// flips happen without a pivot). Every constraint row receives a logical
// column: <= rows a slack in [0, inf), >= rows a slack in (-inf, 0], = rows a
// slack fixed at 0. Rows whose initial logical value falls outside its bounds
// get an artificial column; phase I drives the artificials' L1 mass to zero.
//
// Pricing is Dantzig (most negative reduced cost) until a run of degenerate
// steps, then Bland's rule until the objective strictly improves again, which
// keeps the method finite on degenerate models.
//
// The solver is built once per Model and re-solved cheaply under different
// variable bounds, which is exactly the access pattern of branch and bound.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "milptraj/milp/model.hpp"

namespace milptraj::milp {

struct SimplexOptions {
  double pivot_tol = 1e-9;    // smallest usable pivot element
  double dual_tol = 1e-9;     // reduced-cost optimality tolerance
  double feas_tol = 1e-8;     // residual accepted at end of phase I
  std::int64_t pivot_limit = 500000;
  int stall_limit = 200;      // degenerate steps before switching to Bland
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;  // structural variable values
  double objective = 0.0;
  std::int64_t pivots = 0;
};

class SimplexSolver {
 public:
  explicit SimplexSolver(const Model& model)
      : n_(model.var_count()), m_(model.constraint_count()) {
    width_ = n_ + 2 * m_;  // structurals, logicals, artificial capacity
    matrix_.assign(m_ * (n_ + m_), 0.0);
    b_.resize(m_);
    slack_lb_.resize(m_);
    slack_ub_.resize(m_);
    const auto& rows = model.constraints();
    for (std::size_t i = 0; i < m_; ++i) {
      for (const Term& t : rows[i].terms) {
        matrix_[i * (n_ + m_) + t.var.index] += t.coef;
      }
      matrix_[i * (n_ + m_) + n_ + i] = 1.0;
      b_[i] = rows[i].rhs;
      switch (rows[i].rel) {
        case Relation::LessEq:
          slack_lb_[i] = 0.0;
          slack_ub_[i] = kInf;
          break;
        case Relation::GreaterEq:
          slack_lb_[i] = -kInf;
          slack_ub_[i] = 0.0;
          break;
        case Relation::Equal:
          slack_lb_[i] = 0.0;
          slack_ub_[i] = 0.0;
          break;
      }
    }
    obj_.assign(n_, 0.0);
    for (const Term& t : model.objective()) obj_[t.var.index] = t.coef;
    // column -> rows incidence over structurals, used by the crash pass
    col_rows_.resize(n_);
    for (std::size_t i = 0; i < m_; ++i) {
      for (const Term& t : rows[i].terms) {
        col_rows_[t.var.index].push_back({i, t.coef});
      }
    }
  }

  std::size_t var_count() const { return n_; }
  std::size_t row_count() const { return m_; }

  /// Solves with the given structural bounds. With use_objective=false the
  /// solve stops after phase I and returns any feasible point.
  LpSolution solve(const std::vector<double>& lb, const std::vector<double>& ub,
                   bool use_objective, const SimplexOptions& opt = {}) {
    opt_ = opt;
    pivots_ = 0;
    init_workspace(lb, ub);
    crash_boxed_columns();
    install_basis();

    LpSolution out;
    if (art_count_ > 0) {
      const LpStatus ph1 = run_phase(/*phase_one=*/true);
      if (ph1 == LpStatus::IterationLimit) return finish(out, ph1, use_objective);
      refresh_basic_values();
      double worst_art = 0.0;
      for (std::size_t j = n_ + m_; j < cols_; ++j) {
        worst_art = std::max(worst_art, std::abs(value_[j]));
      }
      if (worst_art > opt_.feas_tol) {
        out.status = LpStatus::Infeasible;
        out.pivots = pivots_;
        return out;
      }
      // pin artificials at zero for the rest of the solve
      for (std::size_t j = n_ + m_; j < cols_; ++j) {
        lb_[j] = 0.0;
        ub_[j] = 0.0;
        if (state_[j] != ColState::Basic) {
          state_[j] = ColState::AtLower;
          value_[j] = 0.0;
        }
      }
    }
    if (use_objective) {
      const LpStatus ph2 = run_phase(/*phase_one=*/false);
      return finish(out, ph2, use_objective);
    }
    return finish(out, LpStatus::Optimal, use_objective);
  }

 private:
  enum class ColState : unsigned char { Basic, AtLower, AtUpper, Free };

  void init_workspace(const std::vector<double>& lb, const std::vector<double>& ub) {
    cols_ = n_ + m_;  // artificials appended below
    art_count_ = 0;
    tab_.assign(m_ * width_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      std::copy_n(matrix_.begin() + i * (n_ + m_), n_ + m_, tab_.begin() + i * width_);
    }
    rhs_ = b_;
    lb_.assign(width_, 0.0);
    ub_.assign(width_, 0.0);
    value_.assign(width_, 0.0);
    state_.assign(width_, ColState::AtLower);
    for (std::size_t j = 0; j < n_; ++j) {
      lb_[j] = lb[j];
      ub_[j] = ub[j];
      if (lb[j] == -kInf && ub[j] == kInf) {
        state_[j] = ColState::Free;
        value_[j] = 0.0;
      } else if (lb[j] == -kInf) {
        state_[j] = ColState::AtUpper;
        value_[j] = ub[j];
      } else if (ub[j] == kInf || std::abs(lb[j]) <= std::abs(ub[j])) {
        state_[j] = ColState::AtLower;
        value_[j] = lb[j];
      } else {
        state_[j] = ColState::AtUpper;
        value_[j] = ub[j];
      }
    }
    for (std::size_t i = 0; i < m_; ++i) {
      lb_[n_ + i] = slack_lb_[i];
      ub_[n_ + i] = slack_ub_[i];
    }
  }

  // One greedy pass over finite-boxed structurals, flipping a column to its
  // other bound when that lowers the total row infeasibility of the crash
  // point. Cuts the phase-I work on models with many disjunction binaries.
  void crash_boxed_columns() {
    std::vector<double> act(m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      if (value_[j] == 0.0) continue;
      for (const auto& [row, coef] : col_rows_[j]) act[row] += coef * value_[j];
    }
    auto row_infeas = [&](std::size_t i, double a) {
      const double s = b_[i] - a;  // implied logical value
      double v = 0.0;
      if (s < slack_lb_[i]) v += slack_lb_[i] - s;
      if (s > slack_ub_[i]) v += s - slack_ub_[i];
      return v;
    };
    for (std::size_t j = 0; j < n_; ++j) {
      if (lb_[j] == -kInf || ub_[j] == kInf || lb_[j] >= ub_[j]) continue;
      const double other = (state_[j] == ColState::AtLower) ? ub_[j] : lb_[j];
      const double delta = other - value_[j];
      double gain = 0.0;
      for (const auto& [row, coef] : col_rows_[j]) {
        gain += row_infeas(row, act[row] + coef * delta) - row_infeas(row, act[row]);
      }
      if (gain < -1e-12) {
        for (const auto& [row, coef] : col_rows_[j]) act[row] += coef * delta;
        value_[j] = other;
        state_[j] = (state_[j] == ColState::AtLower) ? ColState::AtUpper
                                                     : ColState::AtLower;
      }
    }
  }

  void install_basis() {
    basis_.assign(m_, 0);
    for (std::size_t i = 0; i < m_; ++i) {
      double act = 0.0;
      const double* row = &tab_[i * width_];
      for (std::size_t j = 0; j < n_; ++j) {
        if (value_[j] != 0.0) act += row[j] * value_[j];
      }
      const double s = b_[i] - act;
      const std::size_t sj = n_ + i;
      if (s >= slack_lb_[i] && s <= slack_ub_[i]) {
        basis_[i] = sj;
        state_[sj] = ColState::Basic;
        value_[sj] = s;
        continue;
      }
      // clamp the slack to its nearest bound, absorb the residual in an
      // artificial with phase-I cost +/-1
      double clamped;
      if (s < slack_lb_[i]) {
        clamped = slack_lb_[i];
        state_[sj] = ColState::AtLower;
      } else {
        clamped = slack_ub_[i];
        state_[sj] = ColState::AtUpper;
      }
      value_[sj] = clamped;
      const double resid = s - clamped;
      const std::size_t aj = cols_++;
      ++art_count_;
      for (std::size_t r = 0; r < m_; ++r) tab_[r * width_ + aj] = (r == i) ? 1.0 : 0.0;
      if (resid > 0.0) {
        lb_[aj] = 0.0;
        ub_[aj] = kInf;
      } else {
        lb_[aj] = -kInf;
        ub_[aj] = 0.0;
      }
      basis_[i] = aj;
      state_[aj] = ColState::Basic;
      value_[aj] = resid;
    }
    // reduced cost rows; the starting basis matrix is the identity
    cost1_.assign(width_, 0.0);
    cost2_.assign(width_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) cost2_[j] = obj_[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t bj = basis_[i];
      if (bj < n_ + m_) continue;  // slack basic, no phase-I cost
      const double sgn = (ub_[bj] == kInf) ? 1.0 : -1.0;  // minimize |artificial|
      const double* row = &tab_[i * width_];
      for (std::size_t j = 0; j < cols_; ++j) {
        if (j != bj) cost1_[j] -= sgn * row[j];
      }
    }
  }

  double phase_objective(bool phase_one) const {
    double v = 0.0;
    if (phase_one) {
      for (std::size_t j = n_ + m_; j < cols_; ++j) v += std::abs(value_[j]);
    } else {
      for (std::size_t j = 0; j < n_; ++j) v += obj_[j] * value_[j];
    }
    return v;
  }

  LpStatus run_phase(bool phase_one) {
    std::vector<double>& cost = phase_one ? cost1_ : cost2_;
    int stall = 0;
    bool bland = false;
    double bland_entry_obj = 0.0;
    while (true) {
      if (pivots_ >= opt_.pivot_limit) return LpStatus::IterationLimit;
      int dir = 0;
      const std::ptrdiff_t q = pick_entering(cost, bland, dir);
      if (q < 0) return LpStatus::Optimal;

      // ratio test: step until a basic variable or the entering variable
      // itself hits a bound
      double best = kInf;
      std::ptrdiff_t block_row = -1;
      const double own_range = ub_[q] - lb_[q];
      if (std::isfinite(own_range)) best = own_range;
      for (std::size_t i = 0; i < m_; ++i) {
        const double alpha = tab_[i * width_ + q];
        if (std::abs(alpha) <= opt_.pivot_tol) continue;
        const double rate = dir * alpha;  // basic moves by -rate per unit step
        const std::size_t bj = basis_[i];
        double limit;
        if (rate > 0.0) {
          if (lb_[bj] == -kInf) continue;
          limit = (value_[bj] - lb_[bj]) / rate;
        } else {
          if (ub_[bj] == kInf) continue;
          limit = (value_[bj] - ub_[bj]) / rate;
        }
        if (limit < 0.0) limit = 0.0;
        if (limit < best - 1e-10) {
          best = limit;
          block_row = std::ptrdiff_t(i);
        } else if (block_row >= 0 && limit <= best + 1e-10) {
          // tie break: Bland wants the smallest variable index, otherwise
          // prefer the numerically larger pivot
          if (bland) {
            if (bj < basis_[std::size_t(block_row)]) block_row = std::ptrdiff_t(i);
          } else if (std::abs(alpha) >
                     std::abs(tab_[std::size_t(block_row) * width_ + q])) {
            block_row = std::ptrdiff_t(i);
          }
        }
      }
      if (!std::isfinite(best)) {
        return phase_one ? LpStatus::Infeasible : LpStatus::Unbounded;
      }

      if (block_row < 0) {
        apply_bound_flip(std::size_t(q), dir, best);
      } else {
        apply_pivot(std::size_t(block_row), std::size_t(q), dir, best, phase_one);
      }

      if (best <= 1e-11) {
        if (++stall > opt_.stall_limit && !bland) {
          bland = true;
          bland_entry_obj = phase_objective(phase_one);
        }
      } else {
        stall = 0;
        if (bland && phase_objective(phase_one) < bland_entry_obj - 1e-10) {
          bland = false;
        }
      }
    }
  }

  std::ptrdiff_t pick_entering(const std::vector<double>& cost, bool bland,
                               int& dir) const {
    std::ptrdiff_t best = -1;
    double best_score = opt_.dual_tol;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (state_[j] == ColState::Basic) continue;
      if (lb_[j] >= ub_[j]) continue;  // fixed
      const double d = cost[j];
      double score = 0.0;
      int candidate_dir = 0;
      switch (state_[j]) {
        case ColState::AtLower:
          if (d < -opt_.dual_tol) { score = -d; candidate_dir = 1; }
          break;
        case ColState::AtUpper:
          if (d > opt_.dual_tol) { score = d; candidate_dir = -1; }
          break;
        case ColState::Free:
          if (std::abs(d) > opt_.dual_tol) {
            score = std::abs(d);
            candidate_dir = d < 0.0 ? 1 : -1;
          }
          break;
        case ColState::Basic:
          break;
      }
      if (candidate_dir == 0) continue;
      if (bland) { dir = candidate_dir; return std::ptrdiff_t(j); }
      if (score > best_score) {
        best_score = score;
        best = std::ptrdiff_t(j);
        dir = candidate_dir;
      }
    }
    return best;
  }

  void apply_bound_flip(std::size_t q, int dir, double step) {
    for (std::size_t i = 0; i < m_; ++i) {
      const double alpha = tab_[i * width_ + q];
      if (alpha != 0.0) value_[basis_[i]] -= dir * alpha * step;
    }
    value_[q] += dir * step;
    if (state_[q] == ColState::AtLower) {
      state_[q] = ColState::AtUpper;
      value_[q] = ub_[q];
    } else {
      state_[q] = ColState::AtLower;
      value_[q] = lb_[q];
    }
    ++pivots_;  // counted: it is a full ratio-test iteration
  }

  void apply_pivot(std::size_t r, std::size_t q, int dir, double step,
                   bool phase_one) {
    for (std::size_t i = 0; i < m_; ++i) {
      const double alpha = tab_[i * width_ + q];
      if (alpha != 0.0) value_[basis_[i]] -= dir * alpha * step;
    }
    value_[q] += dir * step;

    const std::size_t leaving = basis_[r];
    const double rate = dir * tab_[r * width_ + q];
    if (rate > 0.0) {
      state_[leaving] = ColState::AtLower;
      value_[leaving] = lb_[leaving];
    } else {
      state_[leaving] = ColState::AtUpper;
      value_[leaving] = ub_[leaving];
    }

    double* prow = &tab_[r * width_];
    const double piv = prow[q];
    const double inv = 1.0 / piv;
    for (std::size_t j = 0; j < cols_; ++j) prow[j] *= inv;
    prow[q] = 1.0;
    rhs_[r] *= inv;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &tab_[i * width_];
      const double f = row[q];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) row[j] -= f * prow[j];
      row[q] = 0.0;
      rhs_[i] -= f * rhs_[r];
    }
    if (phase_one) eliminate_cost(cost1_, prow, q);
    eliminate_cost(cost2_, prow, q);

    basis_[r] = q;
    state_[q] = ColState::Basic;
    ++pivots_;
    if ((pivots_ & 0x7f) == 0) refresh_basic_values();
  }

  void eliminate_cost(std::vector<double>& cost, const double* prow, std::size_t q) {
    const double f = cost[q];
    if (f == 0.0) return;
    for (std::size_t j = 0; j < cols_; ++j) cost[j] -= f * prow[j];
    cost[q] = 0.0;
  }

  // Recompute basic values from the pivoted rhs to shed accumulated drift.
  void refresh_basic_values() {
    for (std::size_t i = 0; i < m_; ++i) {
      double acc = rhs_[i];
      const double* row = &tab_[i * width_];
      for (std::size_t j = 0; j < cols_; ++j) {
        if (state_[j] != ColState::Basic && value_[j] != 0.0) {
          acc -= row[j] * value_[j];
        }
      }
      value_[basis_[i]] = acc;
    }
  }

  LpSolution finish(LpSolution& out, LpStatus status, bool use_objective) {
    refresh_basic_values();
    out.status = status;
    out.pivots = pivots_;
    out.x.assign(value_.begin(), value_.begin() + std::ptrdiff_t(n_));
    if (use_objective && status == LpStatus::Optimal) {
      double z = 0.0;
      for (std::size_t j = 0; j < n_; ++j) z += obj_[j] * out.x[j];
      out.objective = z;
    }
    return out;
  }

  // immutable problem data
  std::size_t n_, m_, width_;
  std::vector<double> matrix_;  // m x (n+m), logical identity included
  std::vector<double> b_;
  std::vector<double> slack_lb_, slack_ub_;
  std::vector<double> obj_;
  std::vector<std::vector<std::pair<std::size_t, double>>> col_rows_;

  // per-solve workspace
  SimplexOptions opt_;
  std::size_t cols_ = 0, art_count_ = 0;
  std::vector<double> tab_, rhs_, lb_, ub_, value_, cost1_, cost2_;
  std::vector<ColState> state_;
  std::vector<std::size_t> basis_;
  std::int64_t pivots_ = 0;
};

}  // namespace milptraj::milp
