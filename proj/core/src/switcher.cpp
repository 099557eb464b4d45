#include "arms/switcher.hpp"

#include <algorithm>
#include <cmath>

#include "arms/errors.hpp"

namespace arms {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double min_time_to_collision(const LidarScan& scan, Action a_prev, double min_closing_speed) {
  double best = kTtcSentinel;
  for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
    const double closing = dot(LidarScan::direction(i), a_prev);
    if (closing <= 0.0) continue;
    best = std::min(best, scan.ranges[i] / std::max(min_closing_speed, closing));
  }
  return best;
}

RiskFeatures compute_risk_features(const LidarScan& scan, Action a_prev, Action a_prev2, Vec2 p_h, bool filter_valid,
                                   const RiskParams& params) {
  RiskFeatures phi;
  phi.clearance = clearance_and_direction(scan, params.robot_radius).clearance;
  phi.ttc_min = min_time_to_collision(scan, a_prev, params.min_closing_speed);
  phi.jerk = norm(a_prev - a_prev2) / params.dt;
  phi.band_error = std::abs(norm(p_h) - params.d_ref);
  phi.valid = filter_valid ? 1.0 : 0.0;
  return phi;
}

std::array<double, 5> normalize(const RiskFeatures& phi) {
  return {phi.clearance / 5.0, std::min(phi.ttc_min, 10.0) / 10.0, phi.jerk / 40.0, phi.band_error / 2.5, phi.valid};
}

NeuralPolicyWeights default_gate_weights() {
  DenseLayer layer;
  layer.inputs = 5;
  layer.outputs = 1;
  layer.activation = Activation::linear;
  layer.weights = {4.0f, 1.5f, -2.0f, -3.0f, 0.5f};
  layer.bias = {-2.0f};
  return NeuralPolicyWeights({layer});
}

LearnedGate default_learned_gate() {
  static const auto weights = std::make_shared<const NeuralPolicyWeights>(default_gate_weights());
  return LearnedGate{weights};
}

double gate(const SwitchPolicy& policy, const RiskFeatures& phi) {
  const bool valid = phi.valid > 0.5;
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LearnedGate>) {
          if (!p.weights) throw ConfigError("learned gate has no weights");
          const auto input = normalize(phi);
          const double out = p.weights->forward(input).front();
          const bool squashed = p.weights->layers().back().activation == Activation::sigmoid;
          return std::clamp(squashed ? out : sigmoid(out), 0.0, 1.0);
        } else if constexpr (std::is_same_v<T, LogicGate>) {
          return (phi.clearance > p.tau_c && phi.ttc_min > p.tau_t && valid) ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, DistanceGate>) {
          if (!valid) return 0.0;
          return std::clamp((phi.clearance - p.c_lo) / (p.c_hi - p.c_lo), 0.0, 1.0);
        } else {
          return std::clamp(p.alpha, 0.0, 1.0);
        }
      },
      policy);
}

bool violates(std::span<const HalfPlane> rows, Action a, double tolerance) {
  return !check_feasible(rows, a, tolerance).feasible;
}

FuseResult fuse_step(Action a_f, const FilterOutput& filter_out, const GateState& state, const SwitchPolicy& policy,
                     const RiskFeatures& phi, Action a_prev, const ActionLimits& limits) {
  FuseResult out;
  out.a_qp_used = filter_out.valid ? filter_out.a_qp : a_f;
  out.gate = state;
  out.gate.alpha_raw = gate(policy, phi);
  out.gate.alpha_bar = state.eta * out.gate.alpha_raw + (1.0 - state.eta) * state.alpha_bar;
  if (filter_out.valid && violates(filter_out.rows, a_f)) {
    out.gate.alpha_bar = 1.0;
    out.override_fired = true;
  }
  const double w = out.gate.alpha_bar;
  out.a_blend = filter_out.valid ? (1.0 - w) * a_f + w * out.a_qp_used : a_f;
  out.a_exec = rate_limit(clip_action(out.a_blend, limits), a_prev, limits);
  return out;
}

double switcher_reward(double r_env, double alpha_bar, double clearance, bool valid,
                       const SwitcherRewardParams& params) {
  if (!valid) return r_env;
  const double bias = -params.lambda * (1.0 - alpha_bar);
  const double modulation = params.beta * alpha_bar * (1.0 - 2.0 * sigmoid(params.k * (params.tau - clearance)));
  return r_env + bias + modulation;
}

double total_variation(std::span<const double> sequence, double initial) {
  double tv = 0.0;
  double last = initial;
  for (double x : sequence) {
    tv += std::abs(x - last);
    last = x;
  }
  return tv;
}

}  // namespace arms
