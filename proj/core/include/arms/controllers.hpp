#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "arms/geometry.hpp"
#include "arms/neural.hpp"
#include "arms/safety_filter.hpp"
#include "arms/world.hpp"

namespace arms {

/// Omnidirectional velocity command [v_x, v_y] in m/s.
using Action = Vec2;

struct ActionLimits {
  Vec2 lo{-1.0, -1.0};
  Vec2 hi{1.0, 1.0};
  double a_max = 1.0;  ///< m/s^2
  double dt = 0.05;
};

Action clip_action(Action a, const ActionLimits& limits);
/// Each component of a - a_prev limited to a_max * dt.
Action rate_limit(Action a, Action a_prev, const ActionLimits& limits);

/// Human state relative to the robot: (dx, dy, vx, vy).
struct RelativeHumanState {
  Vec2 offset;
  Vec2 velocity;
};

/// Fixed-length window of the most recent human states, oldest first. The
/// first push fills the whole window with that state.
class HumanHistory {
 public:
  explicit HumanHistory(std::size_t length);

  void push(const RelativeHumanState& state);
  std::size_t length() const { return length_; }
  bool empty() const { return samples_.empty(); }
  const RelativeHumanState& latest() const { return samples_.back(); }
  std::vector<RelativeHumanState> samples() const { return {samples_.begin(), samples_.end()}; }

 private:
  std::size_t length_;
  std::deque<RelativeHumanState> samples_;
};

struct FollowerObservation {
  PolarImage polar_image;
  std::vector<double> normalized_ranges;  ///< range / max_range per beam
  std::vector<RelativeHumanState> history;  ///< oldest first; back() is the current state
  double clearance = 0.0;
  Vec2 clearance_direction;
};

enum class ObservationLayout { polar_image, raw_ranges };

/// Flat network input: history (4 values per sample, oldest first), then
/// c, v_c.x, v_c.y, then the 4096 image cells row-major or the beam ranges.
std::vector<double> flatten(const FollowerObservation& obs, ObservationLayout layout);
std::size_t observation_size(ObservationLayout layout, std::size_t history_length);

struct HeuristicFollowerParams {
  double k_p = 1.2;
  double k_v = 0.8;
  double k_o = 2.0;
  double c_rep = 0.8;
  double d_ref = 1.1;
};

/// Attraction toward d_ref plus velocity feed-forward, minus a repulsion
/// along v_c inside c_rep. Unclipped.
Action heuristic_follower_command(const FollowerObservation& obs, const HeuristicFollowerParams& params);
Action heuristic_follower(const FollowerObservation& obs, const HeuristicFollowerParams& params,
                          const ActionLimits& limits = {});

/// Throws ConfigError when the network shape does not fit the observation.
Action neural_follower(const FollowerObservation& obs, const NeuralPolicyWeights& weights, ObservationLayout layout,
                       const ActionLimits& limits = {});

struct PurePursuitParams {
  double lookahead = 0.8;  ///< trail distance behind the human along its path
  double v_max = 0.9;
  double accel = 0.5;      ///< m/s^2
  double gain = 1.5;       ///< 1/s, position error to velocity
  double dt = 0.05;
};

struct PursuitState {
  Vec2 robot;
  std::span<const Vec2> human_path;  ///< world positions, oldest first; back() is current
  Vec2 human_velocity;
  Action a_prev;
};

/// Point `lookahead` meters behind the human measured along its past path.
/// When the recorded path is shorter, the remainder is taken along the
/// segment from the oldest recorded point toward the robot.
Vec2 pursuit_target(const PursuitState& state, double lookahead);
Action pure_pursuit(const PursuitState& state, const PurePursuitParams& params, const ActionLimits& limits = {});

struct DwaParams {
  double v_max = 0.8;
  double accel = 0.6;
  double desired_distance = 1.2;
  double follow_gain = 0.9;
  double avoid_gain = 1.4;
  double avoid_clearance = 1.0;
  double personal_space = 0.9;
  double obstacle_buffer = 1.0;
  double obstacle_free_clearance = 1.8;
  double dt = 0.05;
};

/// Candidate values per parameter (3 each).
struct DwaLattice {
  std::vector<double> v_max{0.6, 0.8, 1.0};
  std::vector<double> accel{0.4, 0.6, 0.8};
  std::vector<double> desired_distance{1.0, 1.2, 1.4};
  std::vector<double> follow_gain{0.6, 0.9, 1.2};
  std::vector<double> avoid_gain{1.0, 1.4, 1.8};
  std::vector<double> avoid_clearance{0.8, 1.0, 1.2};
  std::vector<double> personal_space{0.8, 0.9, 1.0};
  std::vector<double> obstacle_buffer{0.9, 1.0, 1.2};
  std::vector<double> obstacle_free_clearance{1.6, 1.8, 2.0};

  std::size_t size() const;
  /// Mixed-radix decoding with v_max varying slowest.
  DwaParams at(std::size_t index, double dt = 0.05) const;
};

struct DwaState {
  Vec2 p_h;  ///< human relative to robot
  Vec2 v_h;
  Action a_prev;
};

Action dwa_heuristic(const DwaState& state, const Clearance& clearance, const DwaParams& params,
                     const ActionLimits& limits = {});

struct MpcParams {
  int horizon = 10;
  FilterParams filter;
  double infeasible_decay = 0.5;
};

struct MpcSolution {
  std::vector<Action> sequence;  ///< horizon commands, first is executed
  bool feasible = false;
  double objective = 0.0;        ///< tracking cost including constants
};

/// Condensed receding-horizon problem over the command sequence u_1..u_H:
///   sum_k ||p_k - p_ref||^2 + rho ||u_k - u_{k-1}||^2,  u_0 = a_prev,
///   p_k = p_h + k dt v_h - dt sum_{j<=k} u_j,
/// with per-step box, rate, clearance and human rows (rays frozen).
MpcSolution solve_mpc(Vec2 p_h, Vec2 v_h, Action a_prev, std::span<const ConstraintRay> rays,
                      const MpcParams& params);
/// Evaluates the same cost for an arbitrary sequence (used by oracles).
double mpc_cost(std::span<const Action> sequence, Vec2 p_h, Vec2 v_h, Action a_prev, const MpcParams& params);
/// Worst violation of the MPC rows for an arbitrary sequence (<= 0 when feasible).
double mpc_violation(std::span<const Action> sequence, Vec2 p_h, Vec2 v_h, Action a_prev,
                     std::span<const ConstraintRay> rays, const MpcParams& params);
/// First command of solve_mpc, or a_prev * infeasible_decay when infeasible.
Action mpc_baseline(Vec2 p_h, Vec2 v_h, Action a_prev, std::span<const ConstraintRay> rays, const MpcParams& params);

}  // namespace arms
