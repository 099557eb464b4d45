#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "arms/geometry.hpp"

namespace arms {

class Rng;

inline constexpr std::size_t kLidarBeams = 1080;
inline constexpr std::size_t kPolarBins = 64;

struct Circle {
  Vec2 center;
  double radius = 0.0;
};

/// Axis-aligned wall segment from `a` to `b`, dilated by thickness/2 on both
/// sides perpendicular to the segment.
struct Wall {
  Vec2 a;
  Vec2 b;
  double thickness = 0.0;
};

using Obstacle = std::variant<Circle, Wall>;

/// Signed distance from `p` to the obstacle surface (negative inside).
double signed_distance(const Obstacle& obstacle, Vec2 p);

/// Occupancy bitmap with per-cell blocked flags, row-major, row 0 at y = 0.
struct GridMask {
  int cols = 0;
  int rows = 0;
  double resolution = 0.0;
  std::vector<std::uint8_t> blocked;

  bool at(int col, int row) const { return blocked[static_cast<std::size_t>(row) * cols + col] != 0; }
  bool in_range(int col, int row) const { return col >= 0 && row >= 0 && col < cols && row < rows; }
  Vec2 center(int col, int row) const { return {(col + 0.5) * resolution, (row + 0.5) * resolution}; }
  std::array<int, 2> cell_of(Vec2 p) const;
};

/// Static rectangular workspace [0, width] x [0, height] bounded by walls on
/// all four sides, holding circle and wall obstacles. Immutable once built.
class WorldMap {
 public:
  WorldMap(double width_m, double height_m, double resolution, std::vector<Obstacle> obstacles);

  double width() const { return width_; }
  double height() const { return height_; }
  double resolution() const { return grid_.resolution; }
  std::span<const Obstacle> obstacles() const { return obstacles_; }

  /// Occupancy of the cell footprint; boundary cells are always occupied.
  const GridMask& occupancy() const { return grid_; }

  bool in_bounds(Vec2 p) const { return p.x > 0.0 && p.y > 0.0 && p.x < width_ && p.y < height_; }

  /// Distance from `p` to the nearest obstacle surface or boundary wall;
  /// negative when `p` lies inside an obstacle.
  double clearance_at(Vec2 p) const;

  /// Grid where a cell is blocked if its center lies closer than `inflation`
  /// to any surface (boundary walls included), or if it is a boundary cell.
  GridMask inflated(double inflation) const;

 private:
  double width_;
  double height_;
  std::vector<Obstacle> obstacles_;
  GridMask grid_;
};

/// 360 degree planar scan. Beam i points at bearing 2*pi*i/N in the robot frame.
struct LidarScan {
  std::vector<double> ranges;
  double max_range = 5.0;

  static double bearing(std::size_t beam) {
    return 2.0 * std::numbers::pi * static_cast<double>(beam) / static_cast<double>(kLidarBeams);
  }
  /// Unit vector of the beam, from a precomputed table.
  static Vec2 direction(std::size_t beam);
};

/// Exact analytic raycast. Throws InvalidQuery when the pose lies outside the
/// map or inside an obstacle.
LidarScan raycast(const WorldMap& map, const Pose2& pose, double max_range);

/// Raycast with additive Gaussian range noise of standard deviation `sigma`;
/// noisy ranges are clipped into (0, max_range].
LidarScan raycast(const WorldMap& map, const Pose2& pose, double max_range, double sigma, Rng& rng);

/// 64 angular x 64 radial occupancy image of a scan.
struct PolarImage {
  std::array<std::uint8_t, kPolarBins * kPolarBins> cells{};

  bool at(std::size_t angular, std::size_t radial) const { return cells[angular * kPolarBins + radial] != 0; }
  std::size_t count() const;
};

/// Angular bin a covers beams with floor(64*i/N) == a; radial bins are
/// half-open [lo, hi) slices of [0, max_range], with max_range itself
/// folded into the outermost bin.
PolarImage rasterize_polar(const LidarScan& scan);

struct Clearance {
  double clearance = 0.0;    ///< min(range) - robot_radius
  Vec2 direction;            ///< unit vector toward the closest return
  std::size_t beam = 0;      ///< index of the minimizing beam (lowest wins ties)
};

Clearance clearance_and_direction(const LidarScan& scan, double robot_radius);

struct ScenarioSpec {
  int scenario_id = 1;
  double corridor_width = 4.0;
  int obstacle_count = 0;  ///< 0 selects the scenario's default count
  double min_passage_width = 1.2;
  std::uint64_t rng_seed = 0;
};

/// Layout constants of the generated corridors. None of these come from
/// measured data; they are tuning choices for the testbed.
struct ScenarioGeometry {
  double corridor_length = 10.0;
  double resolution = 0.1;
  double robot_radius = 0.25;
  double c_safe = 0.35;
  double follow_distance = 1.1;      ///< robot starts this far behind the human
  double start_x_min = 1.8;
  double start_x_max = 2.4;
  double start_y_spread = 0.5;       ///< human start y within center +- spread
  double goal_y_spread = 1.0;
  double travel_min = 3.0;           ///< goal x offset from start
  double travel_max = 5.5;
  double wall_obstacle_radius = 0.3; ///< scenario 2
  double wall_obstacle_spacing = 1.5;
  int clutter_count_min = 8;         ///< scenario 3
  int clutter_count_max = 14;
  double clutter_radius_min = 0.2;
  double clutter_radius_max = 0.4;
  double clutter_band = 1.5;
  int clutter_attempts_per_obstacle = 40;
};

struct Scenario {
  WorldMap map;
  Vec2 human_start;
  Vec2 human_goal;
  Vec2 robot_start;
};

/// Checks the ScenarioSpec fields; throws ConfigError.
void validate(const ScenarioSpec& spec, const ScenarioGeometry& geometry = {});

/// Deterministic in `spec`. Throws GenerationError when the passage
/// constraint cannot be met.
Scenario generate_scenario(const ScenarioSpec& spec, const ScenarioGeometry& geometry = {});

ScenarioSpec load_scenario_spec(const std::filesystem::path& path);

/// Binary PGM (P5), free cells white, occupied black, top row = max y.
void write_pgm(const WorldMap& map, const std::filesystem::path& path);

}  // namespace arms
