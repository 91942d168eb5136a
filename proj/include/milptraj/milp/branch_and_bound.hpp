#pragma once

// Branch and bound over the binary variables of a Model. Node relaxations are
// solved by the bounded-variable simplex; the node order is best-first on the
// parent relaxation bound, branching picks the most fractional binary, and a
// rounding-with-repair heuristic tries to complete each fractional LP point
// into an incumbent. Everything is deterministic for a fixed model.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <queue>
#include <stdexcept>
#include <vector>

#include "milptraj/milp/model.hpp"
#include "milptraj/milp/simplex.hpp"

namespace milptraj::milp {

struct SolveOptions {
  double integrality_tol = 1e-6;
  double feasibility_tol = 1e-7;   // residual accepted on incumbents
  double gap_tol = 1e-8;           // objective convergence / pruning margin
  std::int64_t node_limit = 1000000;
  std::size_t binary_limit = 200;  // guard on model size, raise per use case
  SimplexOptions lp;
};

/// Solver interface; algorithm code depends only on this, so an external MILP
/// engine can stand in for the embedded one.
class MilpSolver {
 public:
  virtual ~MilpSolver() = default;
  /// Minimizes the model objective (or finds any feasible point if the model
  /// has none).
  virtual SolveResult solve(const Model& model, const SolveOptions& opt) const = 0;
  /// Ignores any objective and searches for a feasible mixed-integer point.
  virtual SolveResult check_feasible(const Model& model,
                                     const SolveOptions& opt) const = 0;
};

class EmbeddedSolver final : public MilpSolver {
 public:
  SolveResult solve(const Model& model, const SolveOptions& opt = {}) const override {
    return run(model, opt, model.has_objective());
  }

  SolveResult check_feasible(const Model& model,
                             const SolveOptions& opt = {}) const override {
    return run(model, opt, /*use_objective=*/false);
  }

 private:
  struct Node {
    std::vector<std::pair<unsigned char, unsigned char>> bin_bounds;
    double bound = -kInf;
  };

  struct QueueEntry {
    double bound;
    std::int64_t id;
    std::size_t index;
    bool operator>(const QueueEntry& o) const {
      if (bound != o.bound) return bound > o.bound;
      return id > o.id;
    }
  };

  static SolveResult run(const Model& model, const SolveOptions& opt,
                         bool use_objective) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = model.var_count();

    std::vector<std::size_t> bins;
    for (std::size_t j = 0; j < n; ++j) {
      if (model.is_binary(j)) bins.push_back(j);
    }
    if (bins.size() > opt.binary_limit) {
      throw std::invalid_argument("model exceeds configured binary limit");
    }

    SimplexSolver simplex(model);
    std::vector<double> lb(n), ub(n);
    for (std::size_t j = 0; j < n; ++j) {
      lb[j] = model.lower(j);
      ub[j] = model.upper(j);
    }

    SolveResult res;
    res.has_objective = use_objective;
    auto wall = [&] {
      return std::chrono::duration<double, std::milli>(
                 std::chrono::steady_clock::now() - t0)
          .count();
    };

    std::deque<Node> nodes;
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;
    nodes.push_back({std::vector<std::pair<unsigned char, unsigned char>>(
                         bins.size(), {0, 1}),
                     -kInf});
    open.push({-kInf, 0, 0});
    std::int64_t next_id = 1;

    bool have_incumbent = false;
    std::vector<double> best_x;
    double best_obj = kInf;

    while (!open.empty()) {
      if (res.stats.bb_nodes >= opt.node_limit) {
        res.status = SolveStatus::IterationLimit;
        if (have_incumbent) {
          res.assignment = best_x;
          res.objective = use_objective ? best_obj : 0.0;
        }
        res.stats.wall_ms = wall();
        return res;
      }
      const QueueEntry top = open.top();
      open.pop();
      const Node node = nodes[top.index];
      if (have_incumbent && use_objective && node.bound >= best_obj - opt.gap_tol) {
        continue;  // cannot improve on the incumbent
      }
      ++res.stats.bb_nodes;

      for (std::size_t k = 0; k < bins.size(); ++k) {
        lb[bins[k]] = node.bin_bounds[k].first;
        ub[bins[k]] = node.bin_bounds[k].second;
      }
      LpSolution rel = simplex.solve(lb, ub, use_objective, opt.lp);
      res.stats.lp_pivots += rel.pivots;
      if (rel.status == LpStatus::Infeasible) continue;
      if (rel.status == LpStatus::IterationLimit) {
        res.status = SolveStatus::IterationLimit;
        if (have_incumbent) {
          res.assignment = best_x;
          res.objective = use_objective ? best_obj : 0.0;
        }
        res.stats.wall_ms = wall();
        return res;
      }
      if (rel.status == LpStatus::Unbounded) {
        res.status = SolveStatus::Unbounded;
        res.stats.wall_ms = wall();
        return res;
      }
      const double node_obj = use_objective ? rel.objective : 0.0;
      if (have_incumbent && use_objective && node_obj >= best_obj - opt.gap_tol) {
        continue;
      }

      // most fractional binary
      std::ptrdiff_t branch = -1;
      double branch_score = kInf;
      for (std::size_t k = 0; k < bins.size(); ++k) {
        const double v = rel.x[bins[k]];
        const double frac_dist = std::abs(v - std::round(v));
        if (frac_dist <= opt.integrality_tol) continue;
        const double score = std::abs(v - 0.5);
        if (score < branch_score) {
          branch_score = score;
          branch = std::ptrdiff_t(k);
        }
      }

      if (branch < 0) {
        // integral relaxation point
        if (model.max_violation(rel.x) <= opt.feasibility_tol &&
            (!have_incumbent || node_obj < best_obj)) {
          have_incumbent = true;
          best_x = rel.x;
          best_obj = node_obj;
          if (!use_objective) break;  // feasibility search stops at first hit
        }
        continue;
      }

      if (try_rounding(model, bins, node.bin_bounds, rel.x, opt)) {
        const double cand_obj = use_objective ? model.objective_value(rel.x) : 0.0;
        if (!have_incumbent || cand_obj < best_obj) {
          have_incumbent = true;
          best_x = rel.x;
          best_obj = cand_obj;
          if (!use_objective) break;
        }
      }

      Node lo = node;
      lo.bound = node_obj;
      lo.bin_bounds[std::size_t(branch)] = {0, 0};
      Node hi = std::move(lo);  // copy before move? no: build both explicitly
      hi.bin_bounds[std::size_t(branch)] = {1, 1};
      Node down = node;
      down.bound = node_obj;
      down.bin_bounds[std::size_t(branch)] = {0, 0};
      nodes.push_back(std::move(down));
      open.push({node_obj, next_id++, nodes.size() - 1});
      nodes.push_back(std::move(hi));
      open.push({node_obj, next_id++, nodes.size() - 1});
    }

    if (have_incumbent) {
      res.status = use_objective ? SolveStatus::Optimal : SolveStatus::Feasible;
      res.assignment = best_x;
      res.objective = use_objective ? best_obj : 0.0;
    } else {
      res.status = SolveStatus::Infeasible;
    }
    res.stats.wall_ms = wall();
    return res;
  }

  // Rounds the binaries of an LP point and repairs violations by greedy
  // flips. On success the point is written back into x; the caller still
  // recomputes the objective. Purely a heuristic: failure just means no
  // incumbent from this node.
  static bool try_rounding(const Model& model, const std::vector<std::size_t>& bins,
                           const std::vector<std::pair<unsigned char, unsigned char>>& bb,
                           std::vector<double>& x, const SolveOptions& opt) {
    std::vector<double> cand = x;
    for (std::size_t k = 0; k < bins.size(); ++k) {
      double v = std::round(cand[bins[k]]);
      v = std::max(v, double(bb[k].first));
      v = std::min(v, double(bb[k].second));
      cand[bins[k]] = v;
    }

    const auto& rows = model.constraints();
    std::vector<double> act(rows.size(), 0.0);
    std::vector<std::vector<std::size_t>> var_rows(model.var_count());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (const Term& t : rows[i].terms) {
        act[i] += t.coef * cand[t.var.index];
        var_rows[t.var.index].push_back(i);
      }
    }
    auto row_violation = [&](std::size_t i) {
      const double lhs = act[i];
      switch (rows[i].rel) {
        case Relation::LessEq: return std::max(0.0, lhs - rows[i].rhs);
        case Relation::GreaterEq: return std::max(0.0, rows[i].rhs - lhs);
        case Relation::Equal: return std::abs(lhs - rows[i].rhs);
      }
      return 0.0;
    };
    auto total_violation = [&] {
      double s = 0.0;
      for (std::size_t i = 0; i < rows.size(); ++i) s += row_violation(i);
      return s;
    };

    double total = total_violation();
    for (std::size_t iter = 0; iter < 4 * bins.size() && total > opt.feasibility_tol;
         ++iter) {
      double best_gain = -1e-9;
      std::ptrdiff_t best_k = -1;
      for (std::size_t k = 0; k < bins.size(); ++k) {
        if (bb[k].first >= bb[k].second) continue;  // fixed at this node
        const std::size_t j = bins[k];
        const double delta = (cand[j] < 0.5) ? 1.0 : -1.0;
        double gain = 0.0;
        for (std::size_t i : var_rows[j]) {
          const double before = row_violation(i);
          double coef = 0.0;
          for (const Term& t : rows[i].terms) {
            if (t.var.index == j) { coef = t.coef; break; }
          }
          act[i] += coef * delta;
          gain += row_violation(i) - before;
          act[i] -= coef * delta;
        }
        if (gain < best_gain) {
          best_gain = gain;
          best_k = std::ptrdiff_t(k);
        }
      }
      if (best_k < 0) break;
      const std::size_t j = bins[std::size_t(best_k)];
      const double delta = (cand[j] < 0.5) ? 1.0 : -1.0;
      for (std::size_t i : var_rows[j]) {
        for (const Term& t : rows[i].terms) {
          if (t.var.index == j) { act[i] += t.coef * delta; break; }
        }
      }
      cand[j] += delta;
      total = total_violation();
    }

    if (total > opt.feasibility_tol) return false;
    if (model.max_violation(cand) > opt.feasibility_tol) return false;
    x = cand;
    return true;
  }
};

inline const EmbeddedSolver& embedded_solver() {
  static const EmbeddedSolver solver;
  return solver;
}

/// Solves the model with every binary relaxed to [0, 1]; a single LP solve.
inline SolveResult solve_lp(const Model& model, const SolveOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = model.var_count();
  std::vector<double> lb(n), ub(n);
  for (std::size_t j = 0; j < n; ++j) {
    lb[j] = model.lower(j);
    ub[j] = model.upper(j);
  }
  SimplexSolver simplex(model);
  LpSolution sol = simplex.solve(lb, ub, model.has_objective(), opt.lp);
  SolveResult res;
  res.stats.lp_pivots = sol.pivots;
  res.has_objective = model.has_objective();
  switch (sol.status) {
    case LpStatus::Optimal:
      res.status = model.has_objective() ? SolveStatus::Optimal : SolveStatus::Feasible;
      res.assignment = std::move(sol.x);
      res.objective = sol.objective;
      break;
    case LpStatus::Infeasible: res.status = SolveStatus::Infeasible; break;
    case LpStatus::Unbounded: res.status = SolveStatus::Unbounded; break;
    case LpStatus::IterationLimit: res.status = SolveStatus::IterationLimit; break;
  }
  res.stats.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  return res;
}

inline SolveResult solve_milp(const Model& model, const SolveOptions& opt = {}) {
  return embedded_solver().solve(model, opt);
}

inline SolveResult check_feasible(const Model& model, const SolveOptions& opt = {}) {
  return embedded_solver().check_feasible(model, opt);
}

}  // namespace milptraj::milp
