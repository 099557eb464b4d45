#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "arms/errors.hpp"
#include "arms/harness.hpp"

namespace arms {
namespace {

using nlohmann::json;

/// Object reader that remembers which keys were consumed so leftovers can be
/// reported as typos.
class Block {
 public:
  Block(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  const std::string& where() const { return where_; }
  bool has(const char* key) const { return j_.contains(key); }
  void consume(const char* key) { seen_.insert(key); }

  template <class T>
  bool get(const char* key, T& out) {
    const auto it = j_.find(key);
    if (it == j_.end()) return false;
    seen_.insert(key);
    try {
      if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
        if (!it->is_number_unsigned()) throw ConfigError("expected a non-negative integer");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!it->is_number_integer()) throw ConfigError("expected an integer");
      }
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
    return true;
  }

  bool get_vec2(const char* key, Vec2& out) {
    std::vector<double> v;
    if (!get(key, v)) return false;
    if (v.size() != 2) throw ConfigError(where_ + "." + key + ": expected [x, y]");
    out = {v[0], v[1]};
    return true;
  }

  std::optional<Block> child(const char* key) {
    const auto it = j_.find(key);
    if (it == j_.end()) return std::nullopt;
    seen_.insert(key);
    return Block(*it, where_ + "." + key);
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.contains(item.key())) throw ConfigError(where_ + ": unknown key '" + item.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::shared_ptr<const NeuralPolicyWeights> load_weights(const std::filesystem::path& base, const std::string& file) {
  const auto path = resolve(base, file);
  if (!std::filesystem::exists(path)) throw ConfigError("weights file not found: " + path.string());
  return std::make_shared<const NeuralPolicyWeights>(NeuralPolicyWeights::load(path));
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

ScenarioSpec parse_scenario(Block b) {
  ScenarioSpec s;
  b.get("scenario_id", s.scenario_id);
  b.get("corridor_width", s.corridor_width);
  b.get("obstacle_count", s.obstacle_count);
  b.get("min_passage_width", s.min_passage_width);
  b.get("rng_seed", s.rng_seed);
  b.finish();
  return s;
}

void parse_dataset(Block b, RunConfig& c) {
  b.get("path_inflation", c.dataset.path_inflation);
  b.get("max_retries", c.dataset.max_retries);
  b.get("write_maps", c.write_maps);
  if (auto m = b.child("motion")) {
    MotionProfile& p = c.dataset.profile;
    m->get("max_speed", p.max_speed);
    m->get("move_speed_min", p.move_speed_min);
    m->get("segment_min_s", p.segment_min_s);
    m->get("segment_max_s", p.segment_max_s);
    m->get("stop_probability", p.stop_probability);
    m->get("stop_min_s", p.stop_min_s);
    m->get("stop_max_s", p.stop_max_s);
    m->get("lag_s", p.lag_s);
    m->get("idle_steps", p.idle_steps);
    m->finish();
  }
  b.finish();
  require(c.dataset.path_inflation >= 0.0, "dataset.path_inflation must be non-negative");
  require(c.dataset.max_retries >= 0, "dataset.max_retries must be non-negative");
  const MotionProfile& p = c.dataset.profile;
  require(p.max_speed > 0.0 && p.move_speed_min > 0.0 && p.move_speed_min <= p.max_speed,
          "dataset.motion: need 0 < move_speed_min <= max_speed");
  require(p.segment_min_s > 0.0 && p.segment_min_s <= p.segment_max_s, "dataset.motion: bad segment range");
  require(p.stop_min_s > 0.0 && p.stop_min_s <= p.stop_max_s, "dataset.motion: bad stop range");
  require(p.stop_probability >= 0.0 && p.stop_probability < 1.0, "dataset.motion.stop_probability outside [0, 1)");
  require(p.lag_s >= 0.0, "dataset.motion.lag_s must be non-negative");
}

void parse_follower(Block b, RunConfig& c, const std::filesystem::path& base) {
  std::string type = "heuristic";
  b.get("type", type);
  HeuristicFollowerParams& h = c.follower.heuristic;
  b.get("k_p", h.k_p);
  b.get("k_v", h.k_v);
  b.get("k_o", h.k_o);
  b.get("c_rep", h.c_rep);
  b.get("d_ref", h.d_ref);
  std::string layout = "polar_image";
  b.get("layout", layout);
  std::string weights;
  b.get("weights", weights);
  b.finish();
  if (layout == "polar_image") {
    c.follower.layout = ObservationLayout::polar_image;
  } else if (layout == "raw_ranges") {
    c.follower.layout = ObservationLayout::raw_ranges;
  } else {
    throw ConfigError("follower.layout must be polar_image or raw_ranges");
  }
  if (type == "heuristic") {
    require(weights.empty(), "follower.weights is only valid for the neural follower");
  } else if (type == "neural") {
    require(!weights.empty(), "follower.weights is required for the neural follower");
    c.follower.weights = load_weights(base, weights);
  } else {
    throw ConfigError("follower.type must be heuristic or neural");
  }
}

void parse_switcher(Block b, RunConfig& c, const std::filesystem::path& base) {
  std::string type = "learned";
  b.get("type", type);
  b.get("eta", c.eta);
  b.get("alpha_initial", c.alpha_initial);
  LogicGate logic;
  DistanceGate dist;
  ConstantGate constant;
  std::string weights;
  b.get("tau_c", logic.tau_c);
  b.get("tau_t", logic.tau_t);
  b.get("c_lo", dist.c_lo);
  b.get("c_hi", dist.c_hi);
  b.get("alpha", constant.alpha);
  b.get("weights", weights);
  b.finish();
  require(c.eta >= 0.0 && c.eta <= 1.0, "switcher.eta must lie in [0, 1]");
  require(c.alpha_initial >= 0.0 && c.alpha_initial <= 1.0, "switcher.alpha_initial must lie in [0, 1]");
  if (type == "learned") {
    auto w = weights.empty() ? default_learned_gate().weights
                             : load_weights(base, weights);
    require(w->input_dim() == 5 && w->output_dim() == 1, "switcher weights must map 5 inputs to 1 output");
    c.switch_policy = LearnedGate{std::move(w)};
  } else if (type == "logic") {
    c.switch_policy = logic;
  } else if (type == "distance") {
    require(dist.c_hi > dist.c_lo, "switcher: c_hi must exceed c_lo");
    c.switch_policy = dist;
  } else if (type == "constant") {
    require(constant.alpha >= 0.0 && constant.alpha <= 1.0, "switcher.alpha must lie in [0, 1]");
    c.switch_policy = constant;
  } else {
    throw ConfigError("switcher.type must be learned, logic, distance or constant");
  }
}

void parse_lattice_axis(Block& b, const char* key, std::vector<double>& axis) {
  if (b.get(key, axis)) require(!axis.empty(), "gridsearch.lattice." + std::string(key) + " must not be empty");
}

}  // namespace

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::pure_pursuit:
      return "pure_pursuit";
    case ControllerKind::dwa:
      return "dwa";
    case ControllerKind::follower:
      return "follower";
    case ControllerKind::mpc:
      return "mpc";
    case ControllerKind::arms:
      return "arms";
  }
  return "arms";
}

ControllerKind parse_controller_kind(std::string_view text) {
  for (auto k : {ControllerKind::pure_pursuit, ControllerKind::dwa, ControllerKind::follower, ControllerKind::mpc,
                 ControllerKind::arms}) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("unknown controller '" + std::string(text) +
                    "' (expected pure_pursuit, dwa, follower, mpc or arms)");
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Block top(root, "config");
  RunConfig c;

  if (top.has("scenarios")) {
    const json& list = root.at("scenarios");
    require(list.is_array() && !list.empty(), "config.scenarios must be a non-empty array");
    c.scenarios.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      c.scenarios.push_back(parse_scenario(Block(list[i], "config.scenarios[" + std::to_string(i) + "]")));
    }
    top.consume("scenarios");
  }
  for (const auto& s : c.scenarios) validate(s, c.dataset.geometry);

  top.get("episodes", c.episodes);
  top.get("seed", c.seed);
  top.get("workers", c.workers);
  require(c.episodes > 0, "config.episodes must be positive");
  require(c.workers > 0, "config.workers must be positive");

  double dt = 0.05;
  top.get("dt", dt);
  require(dt > 0.0, "config.dt must be positive");
  ActionLimits limits;
  limits.dt = dt;
  if (auto b = top.child("limits")) {
    b->get_vec2("u_min", limits.lo);
    b->get_vec2("u_max", limits.hi);
    b->get("a_max", limits.a_max);
    b->finish();
  }
  require(limits.lo.x < limits.hi.x && limits.lo.y < limits.hi.y, "limits: u_min must be below u_max");
  require(limits.a_max > 0.0, "limits.a_max must be positive");

  if (auto b = top.child("dataset")) parse_dataset(*b, c);
  c.dataset.profile.dt = dt;

  std::string controller = "arms";
  top.get("controller", controller);
  c.controller = parse_controller_kind(controller);

  if (auto b = top.child("follower")) parse_follower(*b, c, base_dir);

  FilterParams& f = c.filter;
  if (auto b = top.child("filter")) {
    b->get("d_ref", f.d_ref);
    b->get("rho", f.rho);
    b->get("c_safe", f.c_safe);
    b->get("epsilon", f.epsilon);
    b->get("k_rays", f.k_rays);
    b->get("ray_cutoff", f.ray_cutoff);
    b->get("human_proxy", f.human_proxy);
    b->get("human_margin", f.human_margin);
    b->finish();
  }
  f.dt = dt;
  f.u_min = limits.lo;
  f.u_max = limits.hi;
  f.a_max = limits.a_max;
  f.validate();

  if (auto b = top.child("switcher")) {
    parse_switcher(*b, c, base_dir);
  } else {
    c.switch_policy = default_learned_gate();
  }

  if (auto b = top.child("pure_pursuit")) {
    b->get("lookahead", c.pure_pursuit.lookahead);
    b->get("v_max", c.pure_pursuit.v_max);
    b->get("accel", c.pure_pursuit.accel);
    b->get("gain", c.pure_pursuit.gain);
    b->finish();
  }
  c.pure_pursuit.dt = dt;
  require(c.pure_pursuit.lookahead >= 0.0 && c.pure_pursuit.v_max > 0.0 && c.pure_pursuit.accel > 0.0,
          "pure_pursuit: lookahead, v_max and accel must be positive");

  if (auto b = top.child("dwa")) {
    DwaParams& d = c.dwa;
    b->get("v_max", d.v_max);
    b->get("accel", d.accel);
    b->get("desired_distance", d.desired_distance);
    b->get("follow_gain", d.follow_gain);
    b->get("avoid_gain", d.avoid_gain);
    b->get("avoid_clearance", d.avoid_clearance);
    b->get("personal_space", d.personal_space);
    b->get("obstacle_buffer", d.obstacle_buffer);
    b->get("obstacle_free_clearance", d.obstacle_free_clearance);
    b->finish();
  }
  c.dwa.dt = dt;
  require(c.dwa.v_max > 0.0 && c.dwa.accel > 0.0 && c.dwa.obstacle_buffer > 0.0 && c.dwa.obstacle_free_clearance > 0.0,
          "dwa: v_max, accel, obstacle_buffer and obstacle_free_clearance must be positive");

  if (auto b = top.child("mpc")) {
    b->get("horizon", c.mpc.horizon);
    b->get("infeasible_decay", c.mpc.infeasible_decay);
    b->finish();
  }
  require(c.mpc.horizon >= 1, "mpc.horizon must be at least 1");
  c.mpc.filter = c.filter;

  EpisodeParams& e = c.episode;
  if (auto b = top.child("episode")) {
    b->get("robot_radius", e.robot_radius);
    b->get("lidar_range", e.lidar_range);
    b->get("lidar_noise", e.lidar_noise);
    b->get("personal_space", e.personal_space);
    b->get("far_distance", e.far_distance);
    b->get("far_steps", e.far_steps);
    b->get("drift_distance", e.drift_distance);
    b->get("history_length", e.history_length);
    b->finish();
  }
  e.dt = dt;
  e.limits = limits;
  require(e.robot_radius > 0.0 && e.lidar_range > 0.0, "episode: robot_radius and lidar_range must be positive");
  require(e.lidar_noise >= 0.0, "episode.lidar_noise must be non-negative");
  require(e.far_steps >= 1, "episode.far_steps must be at least 1");
  require(e.history_length >= 1, "episode.history_length must be at least 1");
  c.dataset.geometry.robot_radius = e.robot_radius;

  if (c.follower.weights) {
    const std::size_t expected = observation_size(c.follower.layout, e.history_length);
    require(c.follower.weights->input_dim() == expected,
            "follower weights expect " + std::to_string(c.follower.weights->input_dim()) +
                " inputs but the observation has " + std::to_string(expected));
    require(c.follower.weights->output_dim() == 2, "follower weights must have 2 outputs");
  }

  if (auto b = top.child("metrics")) {
    b->get("sd_range", c.sd_range);
    b->finish();
  }
  require(c.sd_range > 0.0, "metrics.sd_range must be positive");

  if (auto b = top.child("gridsearch")) {
    GridSearchConfig& g = c.gridsearch;
    b->get("episodes", g.episodes);
    b->get("seed", g.seed);
    b->get("indices", g.indices);
    std::string csv;
    if (b->get("csv", csv)) g.csv = resolve(base_dir, csv);
    if (auto l = b->child("lattice")) {
      parse_lattice_axis(*l, "v_max", g.lattice.v_max);
      parse_lattice_axis(*l, "accel", g.lattice.accel);
      parse_lattice_axis(*l, "desired_distance", g.lattice.desired_distance);
      parse_lattice_axis(*l, "follow_gain", g.lattice.follow_gain);
      parse_lattice_axis(*l, "avoid_gain", g.lattice.avoid_gain);
      parse_lattice_axis(*l, "avoid_clearance", g.lattice.avoid_clearance);
      parse_lattice_axis(*l, "personal_space", g.lattice.personal_space);
      parse_lattice_axis(*l, "obstacle_buffer", g.lattice.obstacle_buffer);
      parse_lattice_axis(*l, "obstacle_free_clearance", g.lattice.obstacle_free_clearance);
      l->finish();
    }
    b->finish();
    require(g.episodes > 0, "gridsearch.episodes must be positive");
    for (std::size_t i : g.indices) {
      require(i < g.lattice.size(), "gridsearch.indices: " + std::to_string(i) + " is outside the lattice");
    }
  }

  std::string out;
  if (top.get("out", out)) c.out_dir = resolve(base_dir, out);
  top.finish();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.parent_path());
}

std::unique_ptr<Controller> make_controller(const RunConfig& config) {
  const ActionLimits& limits = config.episode.limits;
  switch (config.controller) {
    case ControllerKind::pure_pursuit:
      return std::make_unique<PurePursuitController>(config.pure_pursuit, limits);
    case ControllerKind::dwa:
      return std::make_unique<DwaController>(config.dwa, limits);
    case ControllerKind::follower:
      return std::make_unique<FollowerController>(config.follower, limits);
    case ControllerKind::mpc:
      return std::make_unique<MpcController>(config.mpc);
    case ControllerKind::arms: {
      ArmsConfig arms;
      arms.follower = config.follower;
      arms.filter = config.filter;
      arms.policy = config.switch_policy;
      arms.eta = config.eta;
      arms.alpha_initial = config.alpha_initial;
      arms.risk.robot_radius = config.episode.robot_radius;
      arms.risk.d_ref = config.filter.d_ref;
      arms.risk.dt = config.episode.dt;
      return std::make_unique<ArmsController>(arms, limits);
    }
  }
  throw ConfigError("unknown controller");
}

}  // namespace arms
