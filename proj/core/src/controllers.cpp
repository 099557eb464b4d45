#include "arms/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "arms/dense_qp.hpp"
#include "arms/errors.hpp"

namespace arms {

Action clip_action(Action a, const ActionLimits& limits) { return clamp_box(a, limits.lo, limits.hi); }

Action rate_limit(Action a, Action a_prev, const ActionLimits& limits) {
  const double step = limits.a_max * limits.dt;
  return {std::clamp(a.x, a_prev.x - step, a_prev.x + step), std::clamp(a.y, a_prev.y - step, a_prev.y + step)};
}

HumanHistory::HumanHistory(std::size_t length) : length_(length) {
  if (length == 0) throw ConfigError("history length must be positive");
}

void HumanHistory::push(const RelativeHumanState& state) {
  if (samples_.empty()) {
    samples_.assign(length_, state);
    return;
  }
  samples_.pop_front();
  samples_.push_back(state);
}

std::size_t observation_size(ObservationLayout layout, std::size_t history_length) {
  const std::size_t scan = layout == ObservationLayout::polar_image ? kPolarBins * kPolarBins : kLidarBeams;
  return 4 * history_length + 3 + scan;
}

std::vector<double> flatten(const FollowerObservation& obs, ObservationLayout layout) {
  std::vector<double> out;
  out.reserve(observation_size(layout, obs.history.size()));
  for (const auto& h : obs.history) {
    out.insert(out.end(), {h.offset.x, h.offset.y, h.velocity.x, h.velocity.y});
  }
  out.insert(out.end(), {obs.clearance, obs.clearance_direction.x, obs.clearance_direction.y});
  if (layout == ObservationLayout::polar_image) {
    for (auto cell : obs.polar_image.cells) out.push_back(cell ? 1.0 : 0.0);
  } else {
    out.insert(out.end(), obs.normalized_ranges.begin(), obs.normalized_ranges.end());
  }
  return out;
}

Action heuristic_follower_command(const FollowerObservation& obs, const HeuristicFollowerParams& params) {
  const RelativeHumanState& now = obs.history.back();
  const double d = norm(now.offset);
  Action a = params.k_p * (d - params.d_ref) * normalized(now.offset) + params.k_v * now.velocity;
  a -= params.k_o * std::max(0.0, params.c_rep - obs.clearance) * obs.clearance_direction;
  return a;
}

Action heuristic_follower(const FollowerObservation& obs, const HeuristicFollowerParams& params,
                          const ActionLimits& limits) {
  return clip_action(heuristic_follower_command(obs, params), limits);
}

Action neural_follower(const FollowerObservation& obs, const NeuralPolicyWeights& weights, ObservationLayout layout,
                       const ActionLimits& limits) {
  if (weights.output_dim() != 2) {
    throw ConfigError("follower network must have 2 outputs, has " + std::to_string(weights.output_dim()));
  }
  const auto out = weights.forward(flatten(obs, layout));
  return clip_action({out[0], out[1]}, limits);
}

Vec2 pursuit_target(const PursuitState& state, double lookahead) {
  const auto& path = state.human_path;
  if (path.empty()) return state.robot;
  double remaining = lookahead;
  for (std::size_t i = path.size() - 1; i > 0; --i) {
    const Vec2 from = path[i];
    const Vec2 to = path[i - 1];
    const double len = distance(from, to);
    if (len >= remaining && len > 0.0) return from + (remaining / len) * (to - from);
    remaining -= len;
  }
  const Vec2 oldest = path.front();
  const Vec2 toward = state.robot - oldest;
  const double gap = norm(toward);
  if (gap <= remaining) return state.robot;
  return oldest + (remaining / gap) * toward;
}

Action pure_pursuit(const PursuitState& state, const PurePursuitParams& params, const ActionLimits& limits) {
  const Vec2 target = pursuit_target(state, params.lookahead);
  Vec2 v = state.human_velocity + params.gain * (target - state.robot);
  v = clamp_norm(v, params.v_max);
  v = state.a_prev + clamp_norm(v - state.a_prev, params.accel * params.dt);
  return clip_action(v, limits);
}

std::size_t DwaLattice::size() const {
  return v_max.size() * accel.size() * desired_distance.size() * follow_gain.size() * avoid_gain.size() *
         avoid_clearance.size() * personal_space.size() * obstacle_buffer.size() * obstacle_free_clearance.size();
}

DwaParams DwaLattice::at(std::size_t index, double dt) const {
  if (index >= size()) throw ConfigError("lattice index out of range");
  // Decode from the fastest-varying axis (last) to the slowest (v_max).
  auto take = [&index](const std::vector<double>& axis) {
    const double value = axis[index % axis.size()];
    index /= axis.size();
    return value;
  };
  DwaParams p;
  p.dt = dt;
  p.obstacle_free_clearance = take(obstacle_free_clearance);
  p.obstacle_buffer = take(obstacle_buffer);
  p.personal_space = take(personal_space);
  p.avoid_clearance = take(avoid_clearance);
  p.avoid_gain = take(avoid_gain);
  p.follow_gain = take(follow_gain);
  p.desired_distance = take(desired_distance);
  p.accel = take(accel);
  p.v_max = take(v_max);
  return p;
}

Action dwa_heuristic(const DwaState& state, const Clearance& clearance, const DwaParams& params,
                     const ActionLimits& limits) {
  const double d = norm(state.p_h);
  const Vec2 toward_human = normalized(state.p_h);
  const double c = clearance.clearance;
  const Vec2 toward_obstacle = clearance.direction;

  Vec2 v = params.follow_gain * (d - params.desired_distance) * toward_human + state.v_h;
  if (c < params.avoid_clearance) v -= params.avoid_gain * (params.avoid_clearance - c) * toward_obstacle;

  // Personal space: never close in further on the human.
  if (d < params.personal_space) {
    const double approach = dot(v, toward_human);
    if (approach > 0.0) v -= approach * toward_human;
  }
  // Obstacle buffer: approach speed toward the obstacle shrinks with clearance.
  const double allowed = params.v_max * std::clamp(c / params.obstacle_buffer, 0.0, 1.0);
  const double closing = dot(v, toward_obstacle);
  if (closing > allowed) v -= (closing - allowed) * toward_obstacle;

  double cap = params.v_max;
  if (c < params.obstacle_free_clearance) {
    cap *= 0.5 + 0.5 * std::max(c, 0.0) / params.obstacle_free_clearance;
  }
  v = clamp_norm(v, cap);
  v = state.a_prev + clamp_norm(v - state.a_prev, params.accel * params.dt);
  return clip_action(v, limits);
}

namespace {

struct MpcProblem {
  Eigen::MatrixXd G;
  Eigen::VectorXd g;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  double constant = 0.0;
};

Vec2 reference_offset(Vec2 p_h, const FilterParams& f) { return (f.d_ref / (norm(p_h) + f.epsilon)) * p_h; }

MpcProblem condense(Vec2 p_h, Vec2 v_h, Action a_prev, std::span<const ConstraintRay> rays, const MpcParams& params) {
  const FilterParams& f = params.filter;
  const int H = params.horizon;
  const int n = 2 * H;
  const double dt = f.dt;
  const Vec2 p_ref = reference_offset(p_h, f);

  MpcProblem qp;
  qp.G = Eigen::MatrixXd::Zero(n, n);
  qp.g = Eigen::VectorXd::Zero(n);

  // Per axis: ||w - dt S u||^2 + rho ||D u - e1 a_prev||^2 with S the
  // lower-triangular ones matrix and D the first-difference matrix.
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(H, H);
  Eigen::MatrixXd D = Eigen::MatrixXd::Identity(H, H);
  for (int i = 0; i < H; ++i) {
    for (int j = 0; j <= i; ++j) S(i, j) = 1.0;
    if (i > 0) D(i, i - 1) = -1.0;
  }
  const Eigen::MatrixXd G_axis = 2.0 * (dt * dt * S.transpose() * S + f.rho * D.transpose() * D);
  const double p0[2] = {p_h.x, p_h.y};
  const double vh[2] = {v_h.x, v_h.y};
  const double ref[2] = {p_ref.x, p_ref.y};
  const double prev[2] = {a_prev.x, a_prev.y};
  for (int axis = 0; axis < 2; ++axis) {
    Eigen::VectorXd w(H);
    for (int k = 0; k < H; ++k) w(k) = p0[axis] + (k + 1) * dt * vh[axis] - ref[axis];
    Eigen::VectorXd e = Eigen::VectorXd::Zero(H);
    e(0) = prev[axis];
    const Eigen::VectorXd g_axis = -2.0 * dt * S.transpose() * w - 2.0 * f.rho * D.transpose() * e;
    for (int i = 0; i < H; ++i) {
      qp.g(2 * i + axis) = g_axis(i);
      for (int j = 0; j < H; ++j) qp.G(2 * i + axis, 2 * j + axis) = G_axis(i, j);
    }
    qp.constant += w.squaredNorm() + f.rho * prev[axis] * prev[axis];
  }

  const bool human_row = f.human_proxy && norm(p_h) > 0.0;
  const int rows = H * (8 + static_cast<int>(rays.size()) + (human_row ? 1 : 0));
  qp.A = Eigen::MatrixXd::Zero(rows, n);
  qp.b = Eigen::VectorXd::Zero(rows);
  int r = 0;
  const double lo[2] = {f.u_min.x, f.u_min.y};
  const double hi[2] = {f.u_max.x, f.u_max.y};
  const double step = f.a_max * dt;
  for (int k = 0; k < H; ++k) {
    for (int axis = 0; axis < 2; ++axis) {
      qp.A(r, 2 * k + axis) = 1.0;
      qp.b(r++) = hi[axis];
      qp.A(r, 2 * k + axis) = -1.0;
      qp.b(r++) = -lo[axis];
    }
    for (int axis = 0; axis < 2; ++axis) {
      const double base = k == 0 ? prev[axis] : 0.0;
      qp.A(r, 2 * k + axis) = 1.0;
      if (k > 0) qp.A(r, 2 * (k - 1) + axis) = -1.0;
      qp.b(r++) = base + step;
      qp.A(r, 2 * k + axis) = -1.0;
      if (k > 0) qp.A(r, 2 * (k - 1) + axis) = 1.0;
      qp.b(r++) = step - base;
    }
  }
  for (int k = 0; k < H; ++k) {
    for (const auto& ray : rays) {
      const Vec2 dir = from_angle(ray.bearing);
      for (int j = 0; j <= k; ++j) {
        qp.A(r, 2 * j) = dir.x;
        qp.A(r, 2 * j + 1) = dir.y;
      }
      qp.b(r++) = (ray.range - f.c_safe) / dt;
    }
    if (human_row) {
      const double d = norm(p_h);
      const Vec2 dir = p_h / d;
      for (int j = 0; j <= k; ++j) {
        qp.A(r, 2 * j) = dir.x;
        qp.A(r, 2 * j + 1) = dir.y;
      }
      qp.b(r++) = (d - f.human_margin) / dt + (k + 1) * dot(dir, v_h);
    }
  }
  return qp;
}

}  // namespace

MpcSolution solve_mpc(Vec2 p_h, Vec2 v_h, Action a_prev, std::span<const ConstraintRay> rays,
                      const MpcParams& params) {
  if (params.horizon < 1) throw ConfigError("MPC horizon must be at least 1");
  const MpcProblem qp = condense(p_h, v_h, a_prev, rays, params);
  const DenseQpSolution sol = solve_dense_qp(qp.G, qp.g, qp.A, qp.b);
  MpcSolution out;
  out.feasible = sol.feasible;
  out.sequence.resize(static_cast<std::size_t>(params.horizon));
  for (int k = 0; k < params.horizon; ++k) out.sequence[static_cast<std::size_t>(k)] = {sol.x(2 * k), sol.x(2 * k + 1)};
  out.objective = sol.objective + qp.constant;
  return out;
}

double mpc_cost(std::span<const Action> sequence, Vec2 p_h, Vec2 v_h, Action a_prev, const MpcParams& params) {
  const FilterParams& f = params.filter;
  const Vec2 p_ref = reference_offset(p_h, f);
  Vec2 p = p_h;
  Action last = a_prev;
  double cost = 0.0;
  for (const Action& u : sequence) {
    p += f.dt * (v_h - u);
    cost += squared_norm(p - p_ref) + f.rho * squared_norm(u - last);
    last = u;
  }
  return cost;
}

double mpc_violation(std::span<const Action> sequence, Vec2 p_h, Vec2 v_h, Action a_prev,
                     std::span<const ConstraintRay> rays, const MpcParams& params) {
  const FilterParams& f = params.filter;
  const double step = f.a_max * f.dt;
  double worst = -std::numeric_limits<double>::infinity();
  auto note = [&worst](double v) { worst = std::max(worst, v); };
  Vec2 displacement;  // robot motion so far, in units of dt
  Action last = a_prev;
  for (std::size_t k = 0; k < sequence.size(); ++k) {
    const Action u = sequence[k];
    note(u.x - f.u_max.x);
    note(f.u_min.x - u.x);
    note(u.y - f.u_max.y);
    note(f.u_min.y - u.y);
    note(std::abs(u.x - last.x) - step);
    note(std::abs(u.y - last.y) - step);
    displacement += u;
    for (const auto& ray : rays) note(dot(from_angle(ray.bearing), displacement) - (ray.range - f.c_safe) / f.dt);
    const double d = norm(p_h);
    if (f.human_proxy && d > 0.0) {
      const Vec2 dir = p_h / d;
      note(dot(dir, displacement) - (d - f.human_margin) / f.dt - static_cast<double>(k + 1) * dot(dir, v_h));
    }
    last = u;
  }
  return worst;
}

Action mpc_baseline(Vec2 p_h, Vec2 v_h, Action a_prev, std::span<const ConstraintRay> rays, const MpcParams& params) {
  const MpcSolution sol = solve_mpc(p_h, v_h, a_prev, rays, params);
  if (!sol.feasible) return params.infeasible_decay * a_prev;
  return clamp_box(sol.sequence.front(), params.filter.u_min, params.filter.u_max);
}

}  // namespace arms
