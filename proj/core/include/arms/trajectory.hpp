#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "arms/geometry.hpp"
#include "arms/world.hpp"

namespace arms {

/// Cell-center waypoints of an 8-connected grid path.
struct ReferencePath {
  std::vector<Vec2> waypoints;
  double total_length = 0.0;

  /// Point at arc length `s` along the polyline, clamped to [0, total_length].
  Vec2 point_at(double s) const;
};

/// A* with a Euclidean heuristic over unit/sqrt(2) step costs. Diagonal
/// moves are disallowed when both orthogonal neighbours are blocked.
/// Throws PlanningError when start or goal is blocked or no path exists.
ReferencePath plan_astar(const GridMask& grid, Vec2 start, Vec2 goal);

/// Plans on `map` inflated by `inflation` meters.
ReferencePath plan_astar(const WorldMap& map, Vec2 start, Vec2 goal, double inflation);

struct HumanSample {
  double t = 0.0;
  Vec2 position;
  Vec2 velocity;  ///< (position[k] - position[k-1]) / dt, zero for k = 0
};

struct HumanTrajectory {
  double dt = 0.05;
  std::vector<HumanSample> samples;

  /// Number of control steps needed to consume the trajectory.
  std::size_t episode_length() const { return samples.empty() ? 0 : samples.size() - 1; }
};

/// Stop-and-go speed model. Moving segments draw a target speed uniformly
/// from [move_speed_min, max_speed]; with probability `stop_probability` a
/// segment is a standstill instead. The realised speed follows the target
/// through a first-order lag.
struct MotionProfile {
  double dt = 0.05;
  double max_speed = 0.54;
  double move_speed_min = 0.22;
  double segment_min_s = 1.0;
  double segment_max_s = 3.0;
  double stop_probability = 0.15;
  double stop_min_s = 0.5;
  double stop_max_s = 2.0;
  double lag_s = 0.3;
  int idle_steps = 20;  ///< samples emitted for a zero-length path
};

HumanTrajectory synthesize_motion(const ReferencePath& path, std::uint64_t seed, const MotionProfile& profile = {});

struct DatasetOptions {
  ScenarioGeometry geometry;
  MotionProfile profile;
  double path_inflation = 0.25;
  int max_retries = 10;
};

struct DatasetEntry {
  std::size_t index = 0;
  ScenarioSpec spec;  ///< rng_seed holds the derived per-episode seed
  Scenario scenario;
  ReferencePath path;
  HumanTrajectory trajectory;
};

/// Builds `n` (scenario, trajectory) pairs. Episode i uses the base spec
/// `specs[i % specs.size()]` with a seed derived from (seed, i); planning
/// failures are retried with fresh seeds up to `max_retries` times.
/// The result is a pure function of the arguments, independent of `workers`.
std::vector<DatasetEntry> generate_dataset(std::span<const ScenarioSpec> specs, std::size_t n, std::uint64_t seed,
                                           const DatasetOptions& options = {}, unsigned workers = 1);

/// One file per episode: `# key=value` header lines carrying the scenario
/// spec and seed, then CSV rows `t,x,y,vx,vy`.
void write_trajectory_file(const std::filesystem::path& path, const DatasetEntry& entry);

struct TrajectoryFile {
  ScenarioSpec spec;
  HumanTrajectory trajectory;
};

TrajectoryFile read_trajectory_file(const std::filesystem::path& path);

double mean_speed(std::span<const HumanTrajectory> trajectories);
double max_speed(std::span<const HumanTrajectory> trajectories);

}  // namespace arms
