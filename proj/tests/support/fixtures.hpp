#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "arms/rng.hpp"
#include "arms/world.hpp"

namespace fixture {

/// 10 x 6 m room with a handful of random circles and axis-aligned walls.
inline arms::WorldMap random_map(arms::Rng& rng, int circles = 6, int walls = 2) {
  std::vector<arms::Obstacle> obstacles;
  for (int i = 0; i < circles; ++i) {
    obstacles.emplace_back(arms::Circle{{rng.uniform(1.0, 9.0), rng.uniform(1.0, 5.0)}, rng.uniform(0.15, 0.6)});
  }
  for (int i = 0; i < walls; ++i) {
    const arms::Vec2 a{rng.uniform(1.0, 8.0), rng.uniform(1.0, 5.0)};
    const double len = rng.uniform(0.5, 2.0);
    const arms::Vec2 b = rng.bernoulli(0.5) ? arms::Vec2{a.x + len, a.y} : arms::Vec2{a.x, std::min(5.5, a.y + len)};
    obstacles.emplace_back(arms::Wall{a, b, rng.uniform(0.0, 0.2)});
  }
  return arms::WorldMap(10.0, 6.0, 0.1, std::move(obstacles));
}

/// Free position at least `margin` from every surface.
inline arms::Vec2 free_point(const arms::WorldMap& map, arms::Rng& rng, double margin = 0.3) {
  while (true) {
    const arms::Vec2 p{rng.uniform(0.0, map.width()), rng.uniform(0.0, map.height())};
    if (map.clearance_at(p) > margin) return p;
  }
}

/// Scan with ranges uniform in (lo, max_range], a few of them at max_range.
inline arms::LidarScan random_scan(arms::Rng& rng, double lo = 0.1, double max_range = 5.0) {
  arms::LidarScan scan;
  scan.max_range = max_range;
  scan.ranges.resize(arms::kLidarBeams);
  for (double& r : scan.ranges) r = rng.bernoulli(0.1) ? max_range : rng.uniform(lo, max_range);
  return scan;
}

inline arms::LidarScan uniform_scan(double range, double max_range = 5.0) {
  arms::LidarScan scan;
  scan.max_range = max_range;
  scan.ranges.assign(arms::kLidarBeams, range);
  return scan;
}

}  // namespace fixture
