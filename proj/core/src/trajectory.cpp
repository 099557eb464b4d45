#include "arms/trajectory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <thread>

#include "arms/errors.hpp"
#include "arms/rng.hpp"
#include "text_io.hpp"

namespace arms {

Vec2 ReferencePath::point_at(double s) const {
  if (waypoints.empty()) return {};
  if (s <= 0.0) return waypoints.front();
  double travelled = 0.0;
  for (std::size_t k = 1; k < waypoints.size(); ++k) {
    const double segment = distance(waypoints[k - 1], waypoints[k]);
    if (travelled + segment >= s && segment > 0.0) {
      const double f = (s - travelled) / segment;
      return waypoints[k - 1] + f * (waypoints[k] - waypoints[k - 1]);
    }
    travelled += segment;
  }
  return waypoints.back();
}

ReferencePath plan_astar(const GridMask& grid, Vec2 start, Vec2 goal) {
  const auto [sc, sr] = grid.cell_of(start);
  const auto [gc, gr] = grid.cell_of(goal);
  if (grid.at(sc, sr)) throw PlanningError("A*: start cell is blocked");
  if (grid.at(gc, gr)) throw PlanningError("A*: goal cell is blocked");

  const auto index = [&](int col, int row) { return static_cast<std::size_t>(row) * grid.cols + col; };
  const std::size_t cells = static_cast<std::size_t>(grid.cols) * grid.rows;
  const std::size_t start_idx = index(sc, sr);
  const std::size_t goal_idx = index(gc, gr);
  const auto heuristic = [&](int col, int row) { return std::hypot(double(col - gc), double(row - gr)); };

  std::vector<double> g(cells, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(cells, cells);
  std::vector<std::uint8_t> closed(cells, 0);

  // (f, -g, index): ties prefer deeper nodes, then lower index.
  using Entry = std::tuple<double, double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  g[start_idx] = 0.0;
  open.emplace(heuristic(sc, sr), 0.0, start_idx);

  constexpr int kMoves[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  while (!open.empty()) {
    const auto [f, neg_g, current] = open.top();
    open.pop();
    if (closed[current]) continue;
    closed[current] = 1;
    if (current == goal_idx) break;
    const int col = static_cast<int>(current % grid.cols);
    const int row = static_cast<int>(current / grid.cols);
    for (const auto& move : kMoves) {
      const int nc = col + move[0];
      const int nr = row + move[1];
      if (!grid.in_range(nc, nr) || grid.at(nc, nr)) continue;
      const bool diagonal = move[0] != 0 && move[1] != 0;
      if (diagonal && grid.at(col + move[0], row) && grid.at(col, row + move[1])) continue;
      const std::size_t next = index(nc, nr);
      if (closed[next]) continue;
      const double candidate = g[current] + (diagonal ? std::numbers::sqrt2 : 1.0);
      if (candidate < g[next]) {
        g[next] = candidate;
        parent[next] = current;
        open.emplace(candidate + heuristic(nc, nr), -candidate, next);
      }
    }
  }
  if (!closed[goal_idx]) throw PlanningError("A*: no path between start and goal");

  ReferencePath path;
  for (std::size_t node = goal_idx; node != cells; node = parent[node]) {
    path.waypoints.push_back(grid.center(static_cast<int>(node % grid.cols), static_cast<int>(node / grid.cols)));
    if (node == start_idx) break;
  }
  std::reverse(path.waypoints.begin(), path.waypoints.end());
  path.total_length = g[goal_idx] * grid.resolution;
  return path;
}

ReferencePath plan_astar(const WorldMap& map, Vec2 start, Vec2 goal, double inflation) {
  return plan_astar(map.inflated(inflation), start, goal);
}

HumanTrajectory synthesize_motion(const ReferencePath& path, std::uint64_t seed, const MotionProfile& profile) {
  HumanTrajectory traj;
  traj.dt = profile.dt;
  if (path.waypoints.empty()) return traj;
  const Vec2 origin = path.point_at(0.0);
  traj.samples.push_back({0.0, origin, {}});
  if (path.total_length <= 0.0) {
    for (int k = 1; k <= profile.idle_steps; ++k) traj.samples.push_back({k * profile.dt, origin, {}});
    return traj;
  }

  Rng rng(seed);
  const double dt = profile.dt;
  const double decay = profile.lag_s > 0.0 ? std::exp(-dt / profile.lag_s) : 0.0;
  double s = 0.0;
  double speed = 0.0;
  double target = 0.0;
  double segment_left = 0.0;
  constexpr std::size_t kMaxSamples = 1'000'000;
  while (s < path.total_length && traj.samples.size() < kMaxSamples) {
    if (segment_left <= 0.0) {
      if (rng.bernoulli(profile.stop_probability)) {
        target = 0.0;
        segment_left = rng.uniform(profile.stop_min_s, profile.stop_max_s);
      } else {
        target = rng.uniform(profile.move_speed_min, profile.max_speed);
        segment_left = rng.uniform(profile.segment_min_s, profile.segment_max_s);
      }
    }
    speed = std::min(target + (speed - target) * decay, profile.max_speed);
    segment_left -= dt;
    s = std::min(path.total_length, s + speed * dt);

    const Vec2 previous = traj.samples.back().position;
    Vec2 position = path.point_at(s);
    Vec2 velocity = (position - previous) / dt;
    // Rounding can push the finite-difference speed a hair above the cap.
    while (std::hypot(velocity.x, velocity.y) > profile.max_speed) {
      const double shrink = profile.max_speed / std::hypot(velocity.x, velocity.y) * (1.0 - 1e-12);
      position = previous + shrink * (position - previous);
      velocity = (position - previous) / dt;
    }
    const double t = static_cast<double>(traj.samples.size()) * dt;
    traj.samples.push_back({t, position, velocity});
  }
  return traj;
}

namespace {

DatasetEntry build_entry(const ScenarioSpec& base, std::size_t index, std::uint64_t seed,
                         const DatasetOptions& options) {
  const std::uint64_t episode_seed = mix_seed(seed, index);
  std::string last_error;
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    ScenarioSpec spec = base;
    spec.rng_seed = attempt == 0 ? episode_seed : mix_seed(episode_seed, static_cast<std::uint64_t>(attempt));
    try {
      Scenario scenario = generate_scenario(spec, options.geometry);
      ReferencePath path = plan_astar(scenario.map, scenario.human_start, scenario.human_goal, options.path_inflation);
      HumanTrajectory trajectory = synthesize_motion(path, mix_seed(spec.rng_seed, 0x6d6f74696f6eULL), options.profile);
      return DatasetEntry{index, spec, std::move(scenario), std::move(path), std::move(trajectory)};
    } catch (const GenerationError& e) {
      last_error = e.what();
    } catch (const PlanningError& e) {
      last_error = e.what();
    }
  }
  throw PlanningError("episode " + std::to_string(index) + " failed after retries: " + last_error);
}

}  // namespace

std::vector<DatasetEntry> generate_dataset(std::span<const ScenarioSpec> specs, std::size_t n, std::uint64_t seed,
                                           const DatasetOptions& options, unsigned workers) {
  if (n == 0) throw ConfigError("generate_dataset: n must be positive");
  if (specs.empty()) throw ConfigError("generate_dataset: no scenario specs");
  std::vector<std::optional<DatasetEntry>> slots(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i] = build_entry(specs[i % specs.size()], i, seed, options);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<DatasetEntry> entries;
  entries.reserve(n);
  for (auto& slot : slots) entries.push_back(std::move(*slot));
  return entries;
}

void write_trajectory_file(const std::filesystem::path& path, const DatasetEntry& entry) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  using detail::format_double;
  out << "# scenario_id=" << entry.spec.scenario_id << '\n'
      << "# corridor_width=" << format_double(entry.spec.corridor_width) << '\n'
      << "# obstacle_count=" << entry.spec.obstacle_count << '\n'
      << "# min_passage_width=" << format_double(entry.spec.min_passage_width) << '\n'
      << "# rng_seed=" << entry.spec.rng_seed << '\n'
      << "# dt=" << format_double(entry.trajectory.dt) << '\n'
      << "t,x,y,vx,vy\n";
  for (const auto& sample : entry.trajectory.samples) {
    out << format_double(sample.t) << ',' << format_double(sample.position.x) << ','
        << format_double(sample.position.y) << ',' << format_double(sample.velocity.x) << ','
        << format_double(sample.velocity.y) << '\n';
  }
}

TrajectoryFile read_trajectory_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  TrajectoryFile file;
  std::map<std::string, std::string, std::less<>> header;
  std::string line;
  bool columns_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto body = detail::trim(std::string_view(line).substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) throw ConfigError("malformed header line: " + line);
      header.emplace(std::string(body.substr(0, eq)), std::string(body.substr(eq + 1)));
      continue;
    }
    if (!columns_seen) {
      if (line != "t,x,y,vx,vy") throw ConfigError("unexpected column header: " + line);
      columns_seen = true;
      continue;
    }
    const auto fields = detail::split(line, ',');
    if (fields.size() != 5) throw ConfigError("expected 5 columns: " + line);
    file.trajectory.samples.push_back({detail::parse_double(fields[0]),
                                       {detail::parse_double(fields[1]), detail::parse_double(fields[2])},
                                       {detail::parse_double(fields[3]), detail::parse_double(fields[4])}});
  }
  const auto get = [&](std::string_view key) -> const std::string& {
    const auto it = header.find(key);
    if (it == header.end()) throw ConfigError("missing header key " + std::string(key));
    return it->second;
  };
  file.spec.scenario_id = std::stoi(get("scenario_id"));
  file.spec.corridor_width = detail::parse_double(get("corridor_width"));
  file.spec.obstacle_count = std::stoi(get("obstacle_count"));
  file.spec.min_passage_width = detail::parse_double(get("min_passage_width"));
  file.spec.rng_seed = std::stoull(get("rng_seed"));
  file.trajectory.dt = detail::parse_double(get("dt"));
  return file;
}

double mean_speed(std::span<const HumanTrajectory> trajectories) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& traj : trajectories) {
    for (const auto& sample : traj.samples) {
      total += std::hypot(sample.velocity.x, sample.velocity.y);
      ++count;
    }
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

double max_speed(std::span<const HumanTrajectory> trajectories) {
  double best = 0.0;
  for (const auto& traj : trajectories) {
    for (const auto& sample : traj.samples) best = std::max(best, std::hypot(sample.velocity.x, sample.velocity.y));
  }
  return best;
}

}  // namespace arms
