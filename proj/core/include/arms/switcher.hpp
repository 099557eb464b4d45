#pragma once

#include <array>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "arms/controllers.hpp"
#include "arms/neural.hpp"
#include "arms/qp.hpp"
#include "arms/safety_filter.hpp"
#include "arms/world.hpp"

namespace arms {

inline constexpr double kTtcSentinel = 1e6;

struct RiskFeatures {
  double clearance = 0.0;         ///< m
  double ttc_min = kTtcSentinel;  ///< s
  double jerk = 0.0;              ///< ||a_{t-1} - a_{t-2}|| / dt
  double band_error = 0.0;        ///< |d - d_ref|
  double valid = 0.0;             ///< 0 or 1
};

struct RiskParams {
  double robot_radius = 0.25;
  double d_ref = 1.1;
  double dt = 0.05;
  double min_closing_speed = 1e-3;  ///< m/s
};

/// Per-beam ttc = range / max(floor, n^T a_prev) over beams with positive
/// closing speed; kTtcSentinel when none closes.
double min_time_to_collision(const LidarScan& scan, Action a_prev, double min_closing_speed = 1e-3);

RiskFeatures compute_risk_features(const LidarScan& scan, Action a_prev, Action a_prev2, Vec2 p_h, bool filter_valid,
                                   const RiskParams& params = {});

/// (c/5, min(ttc,10)/10, jerk/40, band_error/2.5, valid).
std::array<double, 5> normalize(const RiskFeatures& phi);

struct GateState {
  double alpha_raw = 1.0;
  double alpha_bar = 1.0;
  double eta = 0.2;
};

/// MLP over normalize(phi); its first output is passed through a sigmoid
/// unless the last layer already uses one.
struct LearnedGate {
  std::shared_ptr<const NeuralPolicyWeights> weights;
};
/// 1 iff c > tau_c, ttc > tau_t and valid.
struct LogicGate {
  double tau_c = 0.5;
  double tau_t = 1.0;
};
/// clamp((c - c_lo) / (c_hi - c_lo), 0, 1) * valid.
struct DistanceGate {
  double c_lo = 0.3;
  double c_hi = 1.2;
};
struct ConstantGate {
  double alpha = 1.0;
};

using SwitchPolicy = std::variant<LearnedGate, LogicGate, DistanceGate, ConstantGate>;

/// Logistic gate used when no trained switcher weights are supplied. Rises
/// with clearance and time-to-collision, falls with band error and jerk.
NeuralPolicyWeights default_gate_weights();
LearnedGate default_learned_gate();

double gate(const SwitchPolicy& policy, const RiskFeatures& phi);

/// True when some row is exceeded by more than `tolerance`.
bool violates(std::span<const HalfPlane> rows, Action a, double tolerance = kFeasibilityTolerance);

struct FuseResult {
  Action a_exec;
  Action a_blend;    ///< convex combination before clipping
  Action a_qp_used;  ///< a_qp, or a_f on the fallback branch
  GateState gate;
  bool override_fired = false;
};

/// One pass of the soft fusion step: fallback, gate, EMA, override, blend,
/// clip, rate limit against a_prev.
FuseResult fuse_step(Action a_f, const FilterOutput& filter_out, const GateState& state, const SwitchPolicy& policy,
                     const RiskFeatures& phi, Action a_prev, const ActionLimits& limits = {});

struct SwitcherRewardParams {
  double lambda = 0.08;
  double beta = 0.3;
  double tau = 0.5;
  double k = 8.0;
};

double switcher_reward(double r_env, double alpha_bar, double clearance, bool valid,
                       const SwitcherRewardParams& params = {});

/// Sum of |x_t - x_{t-1}| with x_{-1} = initial.
double total_variation(std::span<const double> sequence, double initial);

}  // namespace arms
