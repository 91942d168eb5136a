#pragma once

// Small mixed-integer linear program container. Variables are continuous
// (boxed, infinities allowed) or binary; constraints are sparse linear rows
// with relation <=, >= or =; the optional objective is always minimized.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace milptraj::milp {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Opaque variable handle. Carries a tag of the issuing model so that ids
/// from one model cannot silently index into another.
struct VarId {
  std::uint32_t index = 0;
  std::uint32_t model_tag = 0;

  bool operator==(const VarId&) const = default;
};

struct Term {
  VarId var;
  double coef = 0.0;
};

enum class Relation { LessEq, GreaterEq, Equal };

struct Constraint {
  std::vector<Term> terms;  // normalized: unique vars, ascending index
  Relation rel = Relation::LessEq;
  double rhs = 0.0;
};

enum class SolveStatus { Optimal, Feasible, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Feasible: return "Feasible";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::IterationLimit: return "IterationLimit";
  }
  return "?";
}

struct SolveStats {
  std::int64_t lp_pivots = 0;
  std::int64_t bb_nodes = 0;
  double wall_ms = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> assignment;  // one value per variable, by index
  bool has_objective = false;
  double objective = 0.0;
  SolveStats stats;

  bool feasible() const {
    return status == SolveStatus::Optimal || status == SolveStatus::Feasible;
  }
  double value(VarId v) const { return assignment.at(v.index); }
};

class Model {
 public:
  Model() : tag_(next_tag()) {}

  VarId add_continuous(double lb, double ub, std::string name = {}) {
    if (std::isnan(lb) || std::isnan(ub) || lb > ub) {
      throw std::invalid_argument("add_continuous: need lb <= ub");
    }
    vars_.push_back({lb, ub, false, std::move(name)});
    return {std::uint32_t(vars_.size() - 1), tag_};
  }

  VarId add_binary(std::string name = {}) {
    vars_.push_back({0.0, 1.0, true, std::move(name)});
    return {std::uint32_t(vars_.size() - 1), tag_};
  }

  void add_constraint(const std::vector<Term>& terms, Relation rel, double rhs) {
    if (!std::isfinite(rhs)) {
      throw std::invalid_argument("add_constraint: non-finite rhs");
    }
    constraints_.push_back({normalize(terms), rel, rhs});
  }

  /// Sets the (minimization) objective, replacing any previous one.
  void set_objective(const std::vector<Term>& terms) {
    objective_ = normalize(terms);
    has_objective_ = true;
  }

  void clear_objective() {
    objective_.clear();
    has_objective_ = false;
  }

  std::size_t var_count() const { return vars_.size(); }
  std::size_t constraint_count() const { return constraints_.size(); }
  std::size_t binary_count() const {
    return std::size_t(std::count_if(vars_.begin(), vars_.end(),
                                     [](const Var& v) { return v.binary; }));
  }

  bool is_binary(std::size_t i) const { return vars_.at(i).binary; }
  double lower(std::size_t i) const { return vars_.at(i).lb; }
  double upper(std::size_t i) const { return vars_.at(i).ub; }
  const std::string& name(std::size_t i) const { return vars_.at(i).name; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::vector<Term>& objective() const { return objective_; }
  bool has_objective() const { return has_objective_; }
  std::uint32_t tag() const { return tag_; }

  double objective_value(const std::vector<double>& x) const {
    double v = 0.0;
    for (const Term& t : objective_) v += t.coef * x.at(t.var.index);
    return v;
  }

  /// Largest constraint violation of an assignment; straight row evaluation,
  /// shared by tests and the solver's own acceptance of heuristic points.
  double max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (const Constraint& c : constraints_) {
      double lhs = 0.0;
      for (const Term& t : c.terms) lhs += t.coef * x.at(t.var.index);
      double viol = 0.0;
      switch (c.rel) {
        case Relation::LessEq: viol = lhs - c.rhs; break;
        case Relation::GreaterEq: viol = c.rhs - lhs; break;
        case Relation::Equal: viol = std::abs(lhs - c.rhs); break;
      }
      worst = std::max(worst, viol);
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      worst = std::max(worst, vars_[i].lb - x.at(i));
      worst = std::max(worst, x.at(i) - vars_[i].ub);
    }
    return worst;
  }

 private:
  struct Var {
    double lb, ub;
    bool binary;
    std::string name;
  };

  std::vector<Term> normalize(const std::vector<Term>& terms) const {
    std::vector<Term> out;
    out.reserve(terms.size());
    for (const Term& t : terms) {
      if (t.var.model_tag != tag_ || t.var.index >= vars_.size()) {
        throw std::invalid_argument("term references a variable of another model");
      }
      if (!std::isfinite(t.coef)) {
        throw std::invalid_argument("non-finite coefficient");
      }
      out.push_back(t);
    }
    std::sort(out.begin(), out.end(),
              [](const Term& a, const Term& b) { return a.var.index < b.var.index; });
    // duplicate mentions of a variable sum up
    std::size_t w = 0;
    for (std::size_t r = 0; r < out.size(); ++r) {
      if (w > 0 && out[w - 1].var.index == out[r].var.index) {
        out[w - 1].coef += out[r].coef;
      } else {
        out[w++] = out[r];
      }
    }
    out.resize(w);
    return out;
  }

  static std::uint32_t next_tag() {
    static std::uint32_t counter = 0;
    return ++counter;
  }

  std::uint32_t tag_;
  std::vector<Var> vars_;
  std::vector<Constraint> constraints_;
  std::vector<Term> objective_;
  bool has_objective_ = false;
};

}  // namespace milptraj::milp
