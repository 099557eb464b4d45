#include "arms/episode.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "arms/errors.hpp"
#include "arms/rng.hpp"
#include "text_io.hpp"

namespace arms {

std::string_view to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::running:
      return "running";
    case TerminationReason::collision:
      return "collision";
    case TerminationReason::personal_space:
      return "personal_space";
    case TerminationReason::timeout:
      return "timeout";
    case TerminationReason::success:
      return "success";
  }
  return "running";
}

TerminationReason parse_termination_reason(std::string_view text) {
  for (auto r : {TerminationReason::running, TerminationReason::collision, TerminationReason::personal_space,
                 TerminationReason::timeout, TerminationReason::success}) {
    if (to_string(r) == text) return r;
  }
  throw ConfigError("unknown termination reason '" + std::string(text) + "'");
}

double follower_reward(double d, double c, double t_far, bool failed) {
  double r = 0.01;
  if (failed) r -= 8.0;
  r += 0.5 - std::min(std::abs(d - 1.1), 0.5);
  if (0.9 <= d && d <= 1.3) r += 0.1;
  const double close = std::max(0.5 - c, 0.0);
  r -= 0.5 * close * close;
  if (c >= 1.0) r += 0.05 * std::min(c - 1.0, 1.0);
  r -= 6.0 * std::max(0.2 - c, 0.0);
  r -= 1.5 * std::max(0.10 - c, 0.0);
  r -= 0.2 * t_far;
  return r;
}

ControlOutput PurePursuitController::act(const StepContext& ctx) {
  PursuitState state{ctx.robot, ctx.human_path, ctx.human_velocity, ctx.a_prev};
  ControlOutput out;
  out.a_exec = pure_pursuit(state, params_, limits_);
  out.a_f = out.a_exec;
  return out;
}

ControlOutput DwaController::act(const StepContext& ctx) {
  ControlOutput out;
  out.a_exec = dwa_heuristic({ctx.p_h, ctx.human_velocity, ctx.a_prev}, ctx.clearance, params_, limits_);
  out.a_f = out.a_exec;
  return out;
}

namespace {

FollowerObservation make_observation(const StepContext& ctx, ObservationLayout layout, bool with_scan) {
  FollowerObservation obs;
  obs.history.assign(ctx.history.begin(), ctx.history.end());
  obs.clearance = ctx.clearance.clearance;
  obs.clearance_direction = ctx.clearance.direction;
  if (with_scan) {
    if (layout == ObservationLayout::polar_image) {
      obs.polar_image = rasterize_polar(*ctx.scan);
    } else {
      obs.normalized_ranges.reserve(ctx.scan->ranges.size());
      for (double r : ctx.scan->ranges) obs.normalized_ranges.push_back(r / ctx.scan->max_range);
    }
  }
  return obs;
}

}  // namespace

Action follower_action(const FollowerConfig& follower, const StepContext& ctx, const ActionLimits& limits) {
  Action a;
  if (follower.weights) {
    a = neural_follower(make_observation(ctx, follower.layout, true), *follower.weights, follower.layout, limits);
  } else {
    a = heuristic_follower(make_observation(ctx, follower.layout, false), follower.heuristic, limits);
  }
  return rate_limit(a, ctx.a_prev, limits);
}

ControlOutput FollowerController::act(const StepContext& ctx) {
  ControlOutput out;
  out.a_f = follower_action(follower_, ctx, limits_);
  out.a_exec = out.a_f;
  return out;
}

ControlOutput MpcController::act(const StepContext& ctx) {
  const auto rays = select_constraint_rays(*ctx.scan, params_.filter);
  const MpcSolution sol = solve_mpc(ctx.p_h, ctx.human_velocity, ctx.a_prev, rays, params_);
  ControlOutput out;
  out.valid = sol.feasible;
  out.a_qp = sol.feasible ? clamp_box(sol.sequence.front(), params_.filter.u_min, params_.filter.u_max)
                          : params_.infeasible_decay * ctx.a_prev;
  out.a_exec = out.a_qp;
  out.alpha = 1.0;
  out.alpha_bar = 1.0;
  return out;
}

ArmsController::ArmsController(ArmsConfig config, ActionLimits limits)
    : config_(std::move(config)), limits_(limits) {
  config_.filter.validate();
  if (!(config_.eta >= 0.0 && config_.eta <= 1.0)) throw ConfigError("eta must lie in [0, 1]");
  if (!(config_.alpha_initial >= 0.0 && config_.alpha_initial <= 1.0)) {
    throw ConfigError("initial gate must lie in [0, 1]");
  }
  reset();
}

void ArmsController::reset() {
  gate_ = GateState{config_.alpha_initial, config_.alpha_initial, config_.eta};
}

ControlOutput ArmsController::act(const StepContext& ctx) {
  const Action a_f = follower_action(config_.follower, ctx, limits_);
  const auto rays = select_constraint_rays(*ctx.scan, config_.filter);
  const FilterOutput filter = solve_safety_qp(ctx.p_h, ctx.human_velocity, ctx.a_prev, rays, config_.filter);
  const RiskFeatures phi = compute_risk_features(*ctx.scan, ctx.a_prev, ctx.a_prev2, ctx.p_h, filter.valid, config_.risk);
  const FuseResult fused = fuse_step(a_f, filter, gate_, config_.policy, phi, ctx.a_prev, limits_);
  gate_ = fused.gate;

  ControlOutput out;
  out.a_exec = fused.a_exec;
  out.a_f = a_f;
  out.a_qp = fused.a_qp_used;
  out.valid = filter.valid;
  out.alpha = fused.gate.alpha_raw;
  out.alpha_bar = fused.gate.alpha_bar;
  out.override_fired = fused.override_fired;
  out.phi = phi;
  return out;
}

EpisodeResult run_episode(const Scenario& scenario, const HumanTrajectory& trajectory, Controller& controller,
                          const EpisodeParams& params, std::uint64_t seed) {
  if (trajectory.samples.empty()) throw ConfigError("empty human trajectory");
  const WorldMap& map = scenario.map;
  Rng noise(seed);
  auto scan_at = [&](Vec2 p) {
    const Pose2 pose{p, 0.0};
    return params.lidar_noise > 0.0 ? raycast(map, pose, params.lidar_range, params.lidar_noise, noise)
                                    : raycast(map, pose, params.lidar_range);
  };

  EpisodeResult result;
  Vec2 robot = scenario.robot_start;
  result.robot_start = robot;
  result.human_start = trajectory.samples.front().position;

  HumanHistory history(params.history_length);
  std::vector<Vec2> human_path{trajectory.samples.front().position};
  history.push({trajectory.samples.front().position - robot, trajectory.samples.front().velocity});
  LidarScan scan = scan_at(robot);
  Action a_prev;
  Action a_prev2;
  int far_counter = 0;
  int drift_steps = 0;

  controller.reset();
  const std::size_t steps = trajectory.episode_length();
  result.records.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const HumanSample& now = trajectory.samples[k];
    const std::vector<RelativeHumanState> window = history.samples();
    StepContext ctx;
    ctx.scan = &scan;
    ctx.clearance = clearance_and_direction(scan, params.robot_radius);
    ctx.robot = robot;
    ctx.human = now.position;
    ctx.human_velocity = now.velocity;
    ctx.p_h = now.position - robot;
    ctx.human_path = human_path;
    ctx.history = window;
    ctx.a_prev = a_prev;
    ctx.a_prev2 = a_prev2;

    const auto start = std::chrono::steady_clock::now();
    const ControlOutput out = controller.act(ctx);
    const auto stop = std::chrono::steady_clock::now();

    const Action a = clip_action(out.a_exec, params.limits);
    robot += params.dt * a;
    a_prev2 = a_prev;
    a_prev = a;

    const HumanSample& next = trajectory.samples[k + 1];
    StepRecord rec;
    rec.step = k;
    rec.t = next.t;
    rec.robot = robot;
    rec.human = next.position;
    rec.human_velocity = next.velocity;
    rec.a_f = out.a_f;
    rec.a_qp = out.a_qp;
    rec.valid = out.valid;
    rec.alpha = out.alpha;
    rec.alpha_bar = out.alpha_bar;
    rec.override_fired = out.override_fired;
    rec.a_exec = a;
    rec.phi = out.phi;
    rec.rt_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    rec.distance = distance(next.position, robot);

    bool collided = map.clearance_at(robot) <= 0.0;
    if (!collided) {
      scan = scan_at(robot);
      rec.clearance = clearance_and_direction(scan, params.robot_radius).clearance;
      collided = rec.clearance <= 0.0;
    } else {
      rec.clearance = map.clearance_at(robot) - params.robot_radius;
    }

    far_counter = rec.distance > params.far_distance ? far_counter + 1 : 0;
    drift_steps = rec.distance > params.drift_distance ? drift_steps + 1 : 0;

    TerminationReason reason = TerminationReason::running;
    if (collided) {
      reason = TerminationReason::collision;
    } else if (rec.distance < params.personal_space) {
      reason = TerminationReason::personal_space;
    } else if (far_counter >= params.far_steps) {
      reason = TerminationReason::timeout;
    } else if (k + 1 == steps) {
      reason = TerminationReason::success;
    }
    rec.reward = follower_reward(rec.distance, rec.clearance, drift_steps * params.dt, is_failure(reason));
    result.records.push_back(rec);

    if (reason != TerminationReason::running) {
      result.reason = reason;
      return result;
    }
    human_path.push_back(next.position);
    history.push({next.position - robot, next.velocity});
  }
  // A single-sample trajectory has nothing to consume.
  result.reason = TerminationReason::success;
  return result;
}

namespace {

constexpr std::array<std::string_view, 27> kColumns = {
    "step",   "t",       "robot_x",   "robot_y", "human_x",  "human_y", "human_vx", "human_vy", "af_x",
    "af_y",   "aqp_x",   "aqp_y",     "valid",   "alpha",    "alpha_bar", "override", "a_x",    "a_y",
    "c",      "d",       "reward",    "phi_c",   "phi_ttc",  "phi_jerk", "phi_band", "phi_valid", "rt_ms"};

}  // namespace

std::span<const std::string_view> step_record_columns() { return kColumns; }

void write_episode_csv(const std::filesystem::path& path, const EpisodeFile& episode) {
  using detail::format_double;
  std::ostringstream out;
  out << "# index=" << episode.index << "\n";
  out << "# scenario_id=" << episode.spec.scenario_id << "\n";
  out << "# corridor_width=" << format_double(episode.spec.corridor_width) << "\n";
  out << "# obstacle_count=" << episode.spec.obstacle_count << "\n";
  out << "# min_passage_width=" << format_double(episode.spec.min_passage_width) << "\n";
  out << "# rng_seed=" << episode.spec.rng_seed << "\n";
  out << "# map_width=" << format_double(episode.map_width) << "\n";
  out << "# map_height=" << format_double(episode.map_height) << "\n";
  out << "# reason=" << to_string(episode.reason) << "\n";
  for (const auto& obstacle : episode.obstacles) {
    if (const auto* c = std::get_if<Circle>(&obstacle)) {
      out << "# circle " << format_double(c->center.x) << ' ' << format_double(c->center.y) << ' '
          << format_double(c->radius) << "\n";
    } else {
      const auto& w = std::get<Wall>(obstacle);
      out << "# wall " << format_double(w.a.x) << ' ' << format_double(w.a.y) << ' ' << format_double(w.b.x) << ' '
          << format_double(w.b.y) << ' ' << format_double(w.thickness) << "\n";
    }
  }
  for (std::size_t i = 0; i < kColumns.size(); ++i) out << (i ? "," : "") << kColumns[i];
  out << "\n";
  for (const auto& r : episode.records) {
    const std::array<double, 26> values = {r.t,          r.robot.x,      r.robot.y,     r.human.x,
                                           r.human.y,    r.human_velocity.x, r.human_velocity.y, r.a_f.x,
                                           r.a_f.y,      r.a_qp.x,       r.a_qp.y,      r.valid ? 1.0 : 0.0,
                                           r.alpha,      r.alpha_bar,    r.override_fired ? 1.0 : 0.0, r.a_exec.x,
                                           r.a_exec.y,   r.clearance,    r.distance,    r.reward,
                                           r.phi.clearance, r.phi.ttc_min, r.phi.jerk,  r.phi.band_error,
                                           r.phi.valid,  r.rt_ms};
    out << r.step;
    for (double v : values) out << ',' << format_double(v);
    out << "\n";
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot write " + path.string());
  file << out.str();
}

EpisodeFile read_episode_csv(const std::filesystem::path& path) {
  using detail::parse_double;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  EpisodeFile ep;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = detail::trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      const std::string_view body = detail::trim(text.substr(1));
      if (body.rfind("circle ", 0) == 0 || body.rfind("wall ", 0) == 0) {
        const auto fields = detail::split(body, ' ');
        if (fields[0] == "circle" && fields.size() == 4) {
          ep.obstacles.emplace_back(Circle{{parse_double(fields[1]), parse_double(fields[2])}, parse_double(fields[3])});
        } else if (fields[0] == "wall" && fields.size() == 6) {
          ep.obstacles.emplace_back(Wall{{parse_double(fields[1]), parse_double(fields[2])},
                                         {parse_double(fields[3]), parse_double(fields[4])},
                                         parse_double(fields[5])});
        } else {
          throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": malformed obstacle line");
        }
        continue;
      }
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const std::string_view key = body.substr(0, eq);
      const std::string value(body.substr(eq + 1));
      if (key == "index") ep.index = std::stoull(value);
      else if (key == "scenario_id") ep.spec.scenario_id = std::stoi(value);
      else if (key == "corridor_width") ep.spec.corridor_width = parse_double(value);
      else if (key == "obstacle_count") ep.spec.obstacle_count = std::stoi(value);
      else if (key == "min_passage_width") ep.spec.min_passage_width = parse_double(value);
      else if (key == "rng_seed") ep.spec.rng_seed = std::stoull(value);
      else if (key == "map_width") ep.map_width = parse_double(value);
      else if (key == "map_height") ep.map_height = parse_double(value);
      else if (key == "reason") ep.reason = parse_termination_reason(value);
      continue;
    }
    const auto fields = detail::split(text, ',');
    if (!header_seen) {
      if (fields.size() != kColumns.size()) throw ConfigError(path.string() + ": unexpected header");
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] != kColumns[i]) throw ConfigError(path.string() + ": unexpected column " + std::string(fields[i]));
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != kColumns.size()) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(kColumns.size()) + " fields");
    }
    std::array<double, 26> v{};
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = parse_double(fields[i + 1]);
    StepRecord r;
    r.step = std::stoull(std::string(fields[0]));
    r.t = v[0];
    r.robot = {v[1], v[2]};
    r.human = {v[3], v[4]};
    r.human_velocity = {v[5], v[6]};
    r.a_f = {v[7], v[8]};
    r.a_qp = {v[9], v[10]};
    r.valid = v[11] != 0.0;
    r.alpha = v[12];
    r.alpha_bar = v[13];
    r.override_fired = v[14] != 0.0;
    r.a_exec = {v[15], v[16]};
    r.clearance = v[17];
    r.distance = v[18];
    r.reward = v[19];
    r.phi = {v[20], v[21], v[22], v[23], v[24]};
    r.rt_ms = v[25];
    ep.records.push_back(r);
  }
  if (!header_seen) throw ConfigError(path.string() + ": missing header row");
  return ep;
}

}  // namespace arms
