#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "arms/errors.hpp"
#include "arms/rng.hpp"
#include "arms/trajectory.hpp"
#include "arms/world.hpp"

namespace arms {
namespace {

Vec2 snap_to_cell(Vec2 p, double resolution) {
  return {(std::floor(p.x / resolution) + 0.5) * resolution, (std::floor(p.y / resolution) + 0.5) * resolution};
}

bool connected(const GridMask& mask, Vec2 a, Vec2 b) {
  try {
    plan_astar(mask, a, b);
    return true;
  } catch (const PlanningError&) {
    return false;
  }
}

}  // namespace

void validate(const ScenarioSpec& spec, const ScenarioGeometry& geometry) {
  if (spec.scenario_id < 1 || spec.scenario_id > 3) throw ConfigError("scenario_id must be 1, 2 or 3");
  if (!(spec.corridor_width > 0.0)) throw ConfigError("corridor_width must be positive");
  if (spec.obstacle_count < 0) throw ConfigError("obstacle_count must be non-negative");
  const double minimum = 2.0 * (geometry.robot_radius + geometry.c_safe);
  if (spec.min_passage_width < minimum - 1e-12) {
    throw ConfigError("min_passage_width must be at least 2 * (robot_radius + c_safe) = " + std::to_string(minimum));
  }
}

Scenario generate_scenario(const ScenarioSpec& spec, const ScenarioGeometry& geometry) {
  validate(spec, geometry);
  const double width = geometry.corridor_length;
  const double height = spec.corridor_width;
  const double res = geometry.resolution;
  const double inflation = 0.5 * spec.min_passage_width;
  // Clutter only has to leave the robot's own footprint a way through.
  const double connectivity = spec.scenario_id == 3 ? geometry.robot_radius : inflation;
  if (height < spec.min_passage_width + 2.0 * res) {
    throw GenerationError("corridor narrower than the required passage width");
  }

  Rng rng(spec.rng_seed);
  const double mid = 0.5 * height;
  const double start_spread = std::min(geometry.start_y_spread, std::max(0.0, mid - inflation - res));
  const double goal_spread = std::min(geometry.goal_y_spread, std::max(0.0, mid - inflation - res));
  const Vec2 human_start = snap_to_cell(
      {rng.uniform(geometry.start_x_min, geometry.start_x_max), mid + rng.uniform(-start_spread, start_spread)}, res);
  const Vec2 robot_start = snap_to_cell(human_start - Vec2{geometry.follow_distance, 0.0}, res);
  const double goal_x = std::min(human_start.x + rng.uniform(geometry.travel_min, geometry.travel_max),
                                 width - inflation - res);
  const Vec2 human_goal = snap_to_cell({goal_x, mid + rng.uniform(-goal_spread, goal_spread)}, res);

  std::vector<Obstacle> obstacles;
  if (spec.scenario_id == 2) {
    const double r = geometry.wall_obstacle_radius;
    if (height - 2.0 * r < spec.min_passage_width) {
      throw GenerationError("wall obstacles leave a passage narrower than min_passage_width");
    }
    const int limit = spec.obstacle_count > 0 ? spec.obstacle_count : 1 << 20;
    bool bottom = rng.bernoulli(0.5);
    int placed = 0;
    for (double x = rng.uniform(0.75, 0.75 + geometry.wall_obstacle_spacing);
         x < width - 0.5 && placed < limit; x += geometry.wall_obstacle_spacing, ++placed) {
      obstacles.emplace_back(Circle{{x, bottom ? r : height - r}, r});
      bottom = !bottom;
    }
  } else if (spec.scenario_id == 3) {
    const int count = spec.obstacle_count > 0
                          ? spec.obstacle_count
                          : rng.uniform_int(geometry.clutter_count_min, geometry.clutter_count_max);
    const Vec2 axis = human_goal - human_start;
    const Vec2 perp = normalized(Vec2{-axis.y, axis.x});
    const double keep_out = geometry.robot_radius + geometry.c_safe;
    const int attempts = count * geometry.clutter_attempts_per_obstacle;
    for (int attempt = 0; attempt < attempts && static_cast<int>(obstacles.size()) < count; ++attempt) {
      const double r = rng.uniform(geometry.clutter_radius_min, geometry.clutter_radius_max);
      const Vec2 center = human_start + rng.uniform() * axis + rng.uniform(-geometry.clutter_band, geometry.clutter_band) * perp;
      if (center.x < r || center.y < r || center.x > width - r || center.y > height - r) continue;
      if (distance(center, human_start) < r + keep_out || distance(center, robot_start) < r + keep_out ||
          distance(center, human_goal) < r + keep_out) {
        continue;
      }
      std::vector<Obstacle> candidate = obstacles;
      candidate.emplace_back(Circle{center, r});
      const GridMask mask = WorldMap(width, height, res, candidate).inflated(connectivity);
      if (!connected(mask, human_start, human_goal) || !connected(mask, robot_start, human_start)) continue;
      obstacles = std::move(candidate);
    }
  }

  WorldMap map(width, height, res, std::move(obstacles));
  const GridMask mask = map.inflated(connectivity);
  if (!connected(mask, human_start, human_goal) || !connected(mask, robot_start, human_start)) {
    throw GenerationError("generated layout is not connected at the required passage width");
  }
  return Scenario{std::move(map), human_start, human_goal, robot_start};
}

ScenarioSpec load_scenario_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("scenario file " + path.string() + ": " + e.what());
  }
  ScenarioSpec spec;
  try {
    spec.scenario_id = j.at("scenario_id").get<int>();
    spec.corridor_width = j.at("corridor_width").get<double>();
    spec.obstacle_count = j.at("obstacle_count").get<int>();
    spec.min_passage_width = j.at("min_passage_width").get<double>();
    spec.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("scenario file " + path.string() + ": " + e.what());
  }
  validate(spec);
  return spec;
}

}  // namespace arms
