#pragma once

#include <span>
#include <vector>

#include "arms/geometry.hpp"
#include "arms/qp.hpp"
#include "arms/world.hpp"

namespace arms {

struct FilterParams {
  double d_ref = 1.1;         ///< midpoint of the [0.9, 1.3] m comfort band
  double rho = 0.5;           ///< smoothness weight on ||u - a_prev||^2
  double dt = 0.05;
  Vec2 u_min{-1.0, -1.0};
  Vec2 u_max{1.0, 1.0};
  double a_max = 1.0;         ///< m/s^2; per-step rate bound is a_max * dt
  double c_safe = 0.35;       ///< center-to-surface margin, robot radius included
  double epsilon = 1e-6;
  int k_rays = 16;
  double ray_cutoff = 2.5;
  bool human_proxy = true;
  double human_margin = 0.9;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// Range (from the robot center) and bearing (robot frame) of one clearance ray.
struct ConstraintRay {
  double range = 0.0;
  double bearing = 0.0;
};

/// Minimum-range beam of each of k_rays equal angular sectors, dropping
/// sectors whose minimum exceeds the cutoff radius.
std::vector<ConstraintRay> select_constraint_rays(const LidarScan& scan, const FilterParams& params);

/// Row layout of the constraint list returned by build_qp.
struct FilterRowLayout {
  static constexpr std::size_t kBoxRows = 4;
  static constexpr std::size_t kRateRows = 4;
  static constexpr std::size_t kFirstClearanceRow = kBoxRows + kRateRows;
};

/// Expands the one-step tracking objective
///   ||p_h + (v_h - u) dt - p_ref||^2 + rho ||u - a_prev||^2,
///   p_ref = d_ref * p_h / (||p_h|| + epsilon),
/// into Q = 2 (dt^2 + rho) I and the matching linear and constant terms, with
/// rows: velocity box (4), rate box (4), one clearance half-plane per ray,
/// then the human proxy row when enabled.
DenseQP build_qp(Vec2 p_h, Vec2 v_h, Vec2 a_prev, std::span<const ConstraintRay> rays, const FilterParams& params);

struct FilterOutput {
  Vec2 a_qp;
  bool valid = false;
  std::vector<HalfPlane> rows;  ///< (A, b) exactly as built
};

FilterOutput solve_safety_qp(Vec2 p_h, Vec2 v_h, Vec2 a_prev, std::span<const ConstraintRay> rays,
                             const FilterParams& params);

}  // namespace arms
