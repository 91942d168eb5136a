#pragma once

// Damped double-integrator vehicle model: per axis, xdd + xd = u with the
// control held constant between grid times. Discretization is the exact
// closed form of the matrix exponential, so rollouts incur no integration
// error.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace milptraj {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }

/// Planar state (x, y, vx, vy), nondimensional units.
struct State {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;

  Vec2 position() const { return {x, y}; }
  Vec2 velocity() const { return {vx, vy}; }
  double speed() const { return std::hypot(vx, vy); }
};

inline bool is_finite(const State& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.vx) &&
         std::isfinite(s.vy);
}

/// Time grid for the control discretization: times t[0..N] with t[0] = 0 and
/// strictly increasing entries. N = step_count() is the number of control
/// intervals.
class ControlGrid {
 public:
  explicit ControlGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.size() < 2) {
      throw std::invalid_argument("control grid needs at least one step");
    }
    if (times_.front() != 0.0) {
      throw std::invalid_argument("control grid must start at t=0");
    }
    for (std::size_t k = 0; k + 1 < times_.size(); ++k) {
      if (!(times_[k + 1] > times_[k]) || !std::isfinite(times_[k + 1])) {
        throw std::invalid_argument("control grid times must strictly increase");
      }
    }
  }

  /// Uniform grid with n_steps intervals of length step. Times are computed
  /// as k*step (not accumulated) so grid-point lookups stay exact.
  static ControlGrid uniform(std::size_t n_steps, double step) {
    if (n_steps < 1 || !(step > 0.0) || !std::isfinite(step)) {
      throw std::invalid_argument("uniform grid needs n_steps >= 1, step > 0");
    }
    std::vector<double> t(n_steps + 1);
    for (std::size_t k = 0; k <= n_steps; ++k) t[k] = double(k) * step;
    ControlGrid g(std::move(t));
    g.uniform_step_ = step;
    return g;
  }

  std::size_t step_count() const { return times_.size() - 1; }
  double time(std::size_t k) const { return times_.at(k); }
  double duration(std::size_t k) const { return times_.at(k + 1) - times_.at(k); }
  double horizon() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }
  bool is_uniform() const { return uniform_step_ > 0.0; }
  double uniform_step() const { return uniform_step_; }

  /// Index k with time(k) <= t <= time(k+1); floor division on uniform grids.
  std::size_t step_at(double t) const {
    if (!(t >= 0.0) || t > horizon()) {
      throw std::out_of_range("time outside control grid horizon");
    }
    std::size_t k;
    if (is_uniform()) {
      k = static_cast<std::size_t>(std::floor(t / uniform_step_));
    } else {
      k = 0;
      while (k + 1 < step_count() && times_[k + 1] <= t) ++k;
    }
    if (k >= step_count()) k = step_count() - 1;
    return k;
  }

 private:
  std::vector<double> times_;
  double uniform_step_ = 0.0;
};

/// Per-step control inputs on a grid; inputs[k] applies on [t[k], t[k+1]).
struct ControlSchedule {
  ControlGrid grid;
  std::vector<Vec2> inputs;

  ControlSchedule(ControlGrid g, std::vector<Vec2> u)
      : grid(std::move(g)), inputs(std::move(u)) {
    if (inputs.size() != grid.step_count()) {
      throw std::invalid_argument("schedule needs one input per grid step");
    }
  }
};

/// Exact discrete-time transition x' = A x + B u over one step of duration T.
struct StepMatrices {
  std::array<std::array<double, 4>, 4> A{};
  std::array<std::array<double, 2>, 4> B{};
  double T = 0.0;

  State apply(const State& s, const Vec2& u) const {
    State r;
    r.x = A[0][0] * s.x + A[0][2] * s.vx + B[0][0] * u.x;
    r.y = A[1][1] * s.y + A[1][3] * s.vy + B[1][1] * u.y;
    r.vx = A[2][2] * s.vx + B[2][0] * u.x;
    r.vy = A[3][3] * s.vy + B[3][1] * u.y;
    return r;
  }
};

/// Exact discretization over duration T. The velocity decays by e^{-T}; the
/// position picks up (1-e^{-T}) of the velocity and (T-1+e^{-T}) of the input.
inline StepMatrices discretize(double T) {
  if (!std::isfinite(T) || T < 0.0) {
    throw std::invalid_argument("step duration must be finite and >= 0");
  }
  const double decay = std::exp(-T);
  const double vel_gain = -std::expm1(-T);       // 1 - e^{-T}
  const double pos_gain = T + std::expm1(-T);    // T - 1 + e^{-T}
  StepMatrices m;
  m.T = T;
  m.A[0] = {1.0, 0.0, vel_gain, 0.0};
  m.A[1] = {0.0, 1.0, 0.0, vel_gain};
  m.A[2] = {0.0, 0.0, decay, 0.0};
  m.A[3] = {0.0, 0.0, 0.0, decay};
  m.B[0] = {pos_gain, 0.0};
  m.B[1] = {0.0, pos_gain};
  m.B[2] = {vel_gain, 0.0};
  m.B[3] = {0.0, vel_gain};
  return m;
}

/// State after holding input u for dt, starting from s.
inline State propagate(const State& s, const Vec2& u, double dt) {
  if (!is_finite(s) || !std::isfinite(u.x) || !std::isfinite(u.y)) {
    throw std::invalid_argument("propagate: non-finite state or input");
  }
  if (!std::isfinite(dt) || dt < 0.0) {
    throw std::invalid_argument("propagate: dt must be finite and >= 0");
  }
  return discretize(dt).apply(s, u);
}

/// Discrete states at every grid time; result has step_count()+1 entries.
inline std::vector<State> rollout(const State& start, const ControlSchedule& sched) {
  if (!is_finite(start)) {
    throw std::invalid_argument("rollout: non-finite start state");
  }
  std::vector<State> states;
  states.reserve(sched.grid.step_count() + 1);
  states.push_back(start);
  for (std::size_t k = 0; k < sched.grid.step_count(); ++k) {
    const StepMatrices m = discretize(sched.grid.duration(k));
    states.push_back(m.apply(states.back(), sched.inputs[k]));
  }
  return states;
}

/// Continuous-time evaluable path induced by a schedule from a start state.
/// Grid-time evaluations reproduce the discrete rollout exactly.
class Trajectory {
 public:
  Trajectory(State start, ControlSchedule schedule)
      : start_(start),
        schedule_(std::move(schedule)),
        nodes_(rollout(start, schedule_)) {}

  const State& start() const { return start_; }
  const ControlSchedule& schedule() const { return schedule_; }
  const ControlGrid& grid() const { return schedule_.grid; }
  const std::vector<State>& nodes() const { return nodes_; }
  double horizon() const { return schedule_.grid.horizon(); }

  State at(double t) const {
    const std::size_t k = schedule_.grid.step_at(t);
    const double tau = t - schedule_.grid.time(k);
    if (tau == 0.0) return nodes_[k];
    return propagate(nodes_[k], schedule_.inputs[k], tau);
  }

 private:
  State start_;
  ControlSchedule schedule_;
  std::vector<State> nodes_;
};

inline State eval_trajectory(const Trajectory& traj, double t) { return traj.at(t); }

/// Speed bound along any trajectory with ||u|| <= 1: the steady-state speed
/// under unit input is 1 and speed is non-increasing whenever it exceeds 1.
inline double max_speed(const State& start) {
  if (!is_finite(start)) {
    throw std::invalid_argument("max_speed: non-finite state");
  }
  return std::max(1.0, start.speed());
}

}  // namespace milptraj
