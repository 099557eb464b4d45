#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arms/controllers.hpp"
#include "arms/neural.hpp"
#include "arms/safety_filter.hpp"
#include "arms/switcher.hpp"
#include "arms/trajectory.hpp"
#include "arms/world.hpp"

namespace arms {

enum class TerminationReason { running, collision, personal_space, timeout, success };

std::string_view to_string(TerminationReason reason);
TerminationReason parse_termination_reason(std::string_view text);
inline bool is_failure(TerminationReason r) {
  return r == TerminationReason::collision || r == TerminationReason::personal_space || r == TerminationReason::timeout;
}

struct EpisodeParams {
  double dt = 0.05;
  double robot_radius = 0.25;
  double lidar_range = 5.0;
  double lidar_noise = 0.0;     ///< range noise std-dev, m
  double personal_space = 0.5;  ///< terminate when d < this
  double far_distance = 2.5;
  int far_steps = 20;           ///< consecutive far steps before timeout
  double drift_distance = 1.3;  ///< t_far counts consecutive time above this
  std::size_t history_length = 8;
  ActionLimits limits;
};

/// Sum of the follower reward terms. `failed` adds the termination penalty.
double follower_reward(double d, double c, double t_far, bool failed);

/// Everything a controller may look at on one control step.
struct StepContext {
  const LidarScan* scan = nullptr;
  Clearance clearance;
  Vec2 robot;
  Vec2 human;
  Vec2 human_velocity;
  Vec2 p_h;  ///< human - robot
  std::span<const Vec2> human_path;  ///< positions seen so far, oldest first
  std::span<const RelativeHumanState> history;
  Action a_prev;
  Action a_prev2;
};

struct ControlOutput {
  Action a_exec;
  Action a_f;
  Action a_qp;
  bool valid = false;
  double alpha = 0.0;
  double alpha_bar = 0.0;
  bool override_fired = false;
  RiskFeatures phi;
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string_view name() const = 0;
  /// Called once before the first step of every episode.
  virtual void reset() {}
  virtual ControlOutput act(const StepContext& ctx) = 0;
};

class PurePursuitController final : public Controller {
 public:
  PurePursuitController(PurePursuitParams params, ActionLimits limits) : params_(params), limits_(limits) {}
  std::string_view name() const override { return "pure_pursuit"; }
  ControlOutput act(const StepContext& ctx) override;

 private:
  PurePursuitParams params_;
  ActionLimits limits_;
};

class DwaController final : public Controller {
 public:
  DwaController(DwaParams params, ActionLimits limits) : params_(params), limits_(limits) {}
  std::string_view name() const override { return "dwa"; }
  ControlOutput act(const StepContext& ctx) override;

 private:
  DwaParams params_;
  ActionLimits limits_;
};

/// Heuristic follower, or the neural one when weights are given.
struct FollowerConfig {
  HeuristicFollowerParams heuristic;
  std::shared_ptr<const NeuralPolicyWeights> weights;
  ObservationLayout layout = ObservationLayout::polar_image;
};

/// Follower command clipped to the box and rate limited against a_prev.
Action follower_action(const FollowerConfig& follower, const StepContext& ctx, const ActionLimits& limits);

class FollowerController final : public Controller {
 public:
  FollowerController(FollowerConfig follower, ActionLimits limits) : follower_(std::move(follower)), limits_(limits) {}
  std::string_view name() const override { return "follower"; }
  ControlOutput act(const StepContext& ctx) override;

 private:
  FollowerConfig follower_;
  ActionLimits limits_;
};

class MpcController final : public Controller {
 public:
  explicit MpcController(MpcParams params) : params_(params) {}
  std::string_view name() const override { return "mpc"; }
  ControlOutput act(const StepContext& ctx) override;

 private:
  MpcParams params_;
};

struct ArmsConfig {
  FollowerConfig follower;
  FilterParams filter;
  SwitchPolicy policy = ConstantGate{1.0};
  double eta = 0.2;
  double alpha_initial = 1.0;
  RiskParams risk;
};

/// Follower + one-step safety filter + gate, fused each step.
class ArmsController final : public Controller {
 public:
  ArmsController(ArmsConfig config, ActionLimits limits);
  std::string_view name() const override { return "arms"; }
  void reset() override;
  ControlOutput act(const StepContext& ctx) override;

 private:
  ArmsConfig config_;
  ActionLimits limits_;
  GateState gate_;
};

/// One control step. Positions and distances are taken after the step; phi
/// holds the features the gate saw before it.
struct StepRecord {
  std::size_t step = 0;
  double t = 0.0;
  Vec2 robot;
  Vec2 human;
  Vec2 human_velocity;
  Action a_f;
  Action a_qp;
  bool valid = false;
  double alpha = 0.0;
  double alpha_bar = 0.0;
  bool override_fired = false;
  Action a_exec;
  double clearance = 0.0;
  double distance = 0.0;
  double reward = 0.0;
  RiskFeatures phi;
  double rt_ms = 0.0;
};

struct EpisodeResult {
  Vec2 robot_start;
  Vec2 human_start;
  std::vector<StepRecord> records;
  TerminationReason reason = TerminationReason::running;
};

/// Closed-loop rollout at the trajectory's sample rate. Deterministic in its
/// arguments apart from the rt_ms column. `seed` drives LiDAR noise only.
EpisodeResult run_episode(const Scenario& scenario, const HumanTrajectory& trajectory, Controller& controller,
                          const EpisodeParams& params = {}, std::uint64_t seed = 0);

/// Column order of the per-episode CSV; rt_ms is always last.
std::span<const std::string_view> step_record_columns();

struct EpisodeFile {
  std::size_t index = 0;
  ScenarioSpec spec;
  double map_width = 0.0;
  double map_height = 0.0;
  std::vector<Obstacle> obstacles;
  TerminationReason reason = TerminationReason::running;
  std::vector<StepRecord> records;
};

/// `# key=value` and `# obstacle ...` comment lines, then the CSV table.
void write_episode_csv(const std::filesystem::path& path, const EpisodeFile& episode);
EpisodeFile read_episode_csv(const std::filesystem::path& path);

}  // namespace arms
