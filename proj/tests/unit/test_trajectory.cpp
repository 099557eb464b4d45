#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "arms/errors.hpp"
#include "arms/rng.hpp"
#include "arms/trajectory.hpp"
#include "arms/world.hpp"
#include "oracles.hpp"

using namespace arms;

namespace {

GridMask open_grid(int cols, int rows, double resolution = 1.0) {
  GridMask g;
  g.cols = cols;
  g.rows = rows;
  g.resolution = resolution;
  g.blocked.assign(static_cast<std::size_t>(cols * rows), 0);
  return g;
}

void check_path_shape(const ReferencePath& path, const GridMask& grid) {
  double length = 0.0;
  for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
    const Vec2 step = (path.waypoints[i] - path.waypoints[i - 1]) / grid.resolution;
    const double dx = std::abs(step.x);
    const double dy = std::abs(step.y);
    CHECK((dx < 1.5 && dy < 1.5 && dx + dy > 0.5));
    length += norm(path.waypoints[i] - path.waypoints[i - 1]);
  }
  for (const Vec2 w : path.waypoints) {
    const auto cell = grid.cell_of(w);
    CHECK_FALSE(grid.at(cell[0], cell[1]));
  }
  CHECK(path.total_length == doctest::Approx(length).epsilon(1e-12));
}

}  // namespace

TEST_CASE("A* on an open grid walks the straight line") {
  const GridMask grid = open_grid(6, 3);
  const ReferencePath path = plan_astar(grid, {1.5, 1.5}, {4.5, 1.5});
  CHECK(path.total_length == doctest::Approx(3.0));
  CHECK(path.waypoints.size() == 4);
  CHECK(path.waypoints.front() == Vec2{1.5, 1.5});
  CHECK(path.waypoints.back() == Vec2{4.5, 1.5});
}

TEST_CASE("A* with start equal to goal returns one waypoint") {
  const ReferencePath path = plan_astar(open_grid(4, 4), {1.5, 1.5}, {1.5, 1.5});
  CHECK(path.waypoints.size() == 1);
  CHECK(path.total_length == 0.0);
}

TEST_CASE("A* reports blocked endpoints and disconnected goals") {
  GridMask grid = open_grid(5, 5);
  for (int row = 0; row < 5; ++row) grid.blocked[static_cast<std::size_t>(row * 5 + 2)] = 1;
  CHECK_THROWS_AS(plan_astar(grid, {0.5, 0.5}, {4.5, 4.5}), PlanningError);
  CHECK_THROWS_AS(plan_astar(grid, {2.5, 0.5}, {4.5, 4.5}), PlanningError);
}

TEST_CASE("A* refuses to cut a blocked corner") {
  GridMask grid = open_grid(3, 3);
  grid.blocked[1] = 1;      // (1, 0)
  grid.blocked[3] = 1;      // (0, 1)
  CHECK_THROWS_AS(plan_astar(grid, {0.5, 0.5}, {1.5, 1.5}), PlanningError);
}

TEST_CASE("A* cost equals Dijkstra on random 32x32 grids") {
  Rng rng(21);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    GridMask grid = open_grid(32, 32);
    const double density = rng.uniform(0.1, 0.35);
    for (auto& cell : grid.blocked) cell = rng.bernoulli(density) ? 1 : 0;
    const std::array<int, 2> s{rng.uniform_int(0, 31), rng.uniform_int(0, 31)};
    const std::array<int, 2> g{rng.uniform_int(0, 31), rng.uniform_int(0, 31)};
    grid.blocked[static_cast<std::size_t>(s[1] * 32 + s[0])] = 0;
    grid.blocked[static_cast<std::size_t>(g[1] * 32 + g[0])] = 0;
    const double expected = oracle::dijkstra_cost(grid, s, g);
    const Vec2 start = grid.center(s[0], s[1]);
    const Vec2 goal = grid.center(g[0], g[1]);
    if (std::isinf(expected)) {
      CHECK_THROWS_AS(plan_astar(grid, start, goal), PlanningError);
      continue;
    }
    const ReferencePath path = plan_astar(grid, start, goal);
    CHECK(path.total_length == doctest::Approx(expected).epsilon(1e-9));
    CHECK(path.total_length >= distance(start, goal) - 1e-9);
    check_path_shape(path, grid);
    ++solved;
  }
  CHECK(solved > 20);
}

TEST_CASE("planning on an inflated map keeps the path clear") {
  const WorldMap map(10.0, 4.0, 0.1, {Circle{{5.0, 2.0}, 0.6}});
  const ReferencePath path = plan_astar(map, {1.0, 2.0}, {9.0, 2.0}, 0.25);
  for (const Vec2 w : path.waypoints) CHECK(map.clearance_at(w) >= 0.25);
  CHECK(path.total_length > 8.0);
}

TEST_CASE("zero-length path holds position") {
  ReferencePath path;
  path.waypoints = {{2.0, 1.0}};
  const HumanTrajectory traj = synthesize_motion(path, 5);
  REQUIRE(traj.samples.size() > 1);
  for (const auto& s : traj.samples) {
    CHECK(s.position == Vec2{2.0, 1.0});
    CHECK(s.velocity == Vec2{});
  }
}

TEST_CASE("constant top-speed profile saturates at 0.54") {
  ReferencePath path;
  path.waypoints = {{0.0, 0.0}, {5.0, 0.0}, {5.0, 5.0}};
  path.total_length = 10.0;
  MotionProfile profile;
  profile.move_speed_min = profile.max_speed;
  profile.stop_probability = 0.0;
  profile.lag_s = 0.0;
  const HumanTrajectory traj = synthesize_motion(path, 1, profile);
  double top = 0.0;
  for (const auto& s : traj.samples) top = std::max(top, norm(s.velocity));
  CHECK(top <= 0.54);
  CHECK(top == doctest::Approx(0.54).epsilon(1e-9));
}

TEST_CASE("synthesized motion respects speed cap and finite differences") {
  Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const WorldMap map(10.0, 4.0, 0.1, {Circle{{rng.uniform(4.0, 6.0), rng.uniform(1.0, 3.0)}, 0.4}});
    const ReferencePath path = plan_astar(map, {1.05, 2.05}, {8.95, rng.uniform(1.0, 3.0)}, 0.25);
    const HumanTrajectory traj = synthesize_motion(path, rng.next());
    REQUIRE(traj.samples.size() > 2);
    CHECK(traj.samples.front().position == path.point_at(0.0));
    CHECK(distance(traj.samples.back().position, path.waypoints.back()) < 1e-9);
    for (std::size_t k = 0; k < traj.samples.size(); ++k) {
      const auto& s = traj.samples[k];
      CHECK(s.t == static_cast<double>(k) * traj.dt);
      CHECK(norm(s.velocity) <= 0.54);
      if (k > 0) {
        const Vec2 fd = (s.position - traj.samples[k - 1].position) / traj.dt;
        CHECK(fd == s.velocity);
      }
      // Every sample sits on the polyline.
      double nearest = 1e9;
      for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
        const Vec2 a = path.waypoints[i - 1];
        const Vec2 ab = path.waypoints[i] - a;
        const double u = std::clamp(dot(s.position - a, ab) / squared_norm(ab), 0.0, 1.0);
        nearest = std::min(nearest, distance(s.position, a + u * ab));
      }
      CHECK(nearest < 1e-9);
    }
  }
}

TEST_CASE("dataset generation is reproducible") {
  const std::vector<ScenarioSpec> specs{{1, 4.0, 0, 1.2, 0}, {3, 4.0, 0, 1.2, 0}};
  const auto a = generate_dataset(specs, 6, 99);
  const auto b = generate_dataset(specs, 6, 99, {}, 3);
  REQUIRE(a.size() == 6);
  REQUIRE(b.size() == 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].index == i);
    CHECK(a[i].spec.scenario_id == specs[i % 2].scenario_id);
    CHECK(a[i].spec.rng_seed == b[i].spec.rng_seed);
    REQUIRE(a[i].trajectory.samples.size() == b[i].trajectory.samples.size());
    for (std::size_t k = 0; k < a[i].trajectory.samples.size(); ++k) {
      CHECK(a[i].trajectory.samples[k].position == b[i].trajectory.samples[k].position);
    }
  }
  const auto one = generate_dataset(specs, 1, 99);
  CHECK(one.size() == 1);
  CHECK(one[0].trajectory.samples.size() == a[0].trajectory.samples.size());
}

TEST_CASE("scenario 1 episodes average 200 to 320 steps") {
  const std::vector<ScenarioSpec> specs{{1, 4.0, 0, 1.2, 0}};
  const auto data = generate_dataset(specs, 200, 4242);
  double steps = 0.0;
  std::vector<HumanTrajectory> trajs;
  for (const auto& e : data) {
    steps += static_cast<double>(e.trajectory.episode_length());
    trajs.push_back(e.trajectory);
  }
  const double mean = steps / static_cast<double>(data.size());
  CHECK(mean >= 200.0);
  CHECK(mean <= 320.0);
  CHECK(max_speed(trajs) <= 0.54);
  CHECK(mean_speed(trajs) == doctest::Approx(0.32).epsilon(0.05 / 0.32));
}

TEST_CASE("trajectory files round-trip exactly") {
  const std::vector<ScenarioSpec> specs{{3, 4.0, 0, 1.2, 0}};
  const auto data = generate_dataset(specs, 1, 7);
  const auto path = std::filesystem::temp_directory_path() / "arms_traj_roundtrip.csv";
  write_trajectory_file(path, data[0]);
  const TrajectoryFile back = read_trajectory_file(path);
  CHECK(back.spec.scenario_id == 3);
  CHECK(back.spec.rng_seed == data[0].spec.rng_seed);
  REQUIRE(back.trajectory.samples.size() == data[0].trajectory.samples.size());
  for (std::size_t k = 0; k < back.trajectory.samples.size(); ++k) {
    CHECK(back.trajectory.samples[k].t == data[0].trajectory.samples[k].t);
    CHECK(back.trajectory.samples[k].position == data[0].trajectory.samples[k].position);
    CHECK(back.trajectory.samples[k].velocity == data[0].trajectory.samples[k].velocity);
  }
  std::filesystem::remove(path);
}
