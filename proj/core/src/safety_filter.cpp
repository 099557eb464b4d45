#include "arms/safety_filter.hpp"

#include <algorithm>

#include "arms/errors.hpp"

namespace arms {

void FilterParams::validate() const {
  if (!(dt > 0.0)) throw ConfigError("filter: dt must be positive");
  if (!(u_min.x < u_max.x) || !(u_min.y < u_max.y)) throw ConfigError("filter: u_min must be below u_max");
  if (!(a_max > 0.0)) throw ConfigError("filter: a_max must be positive");
  if (!(c_safe > 0.0)) throw ConfigError("filter: c_safe must be positive");
  if (!(rho >= 0.0)) throw ConfigError("filter: rho must be non-negative");
  if (!(epsilon >= 0.0)) throw ConfigError("filter: epsilon must be non-negative");
  if (k_rays < 1) throw ConfigError("filter: k_rays must be at least 1");
}

std::vector<ConstraintRay> select_constraint_rays(const LidarScan& scan, const FilterParams& params) {
  const std::size_t n = scan.ranges.size();
  const auto sectors = static_cast<std::size_t>(params.k_rays);
  std::vector<ConstraintRay> rays;
  std::size_t begin = 0;
  for (std::size_t sector = 0; sector < sectors; ++sector) {
    const std::size_t end = (sector + 1) * n / sectors;
    if (end <= begin) continue;
    const auto first = scan.ranges.begin() + static_cast<std::ptrdiff_t>(begin);
    const auto it = std::min_element(first, scan.ranges.begin() + static_cast<std::ptrdiff_t>(end));
    if (*it <= params.ray_cutoff) {
      rays.push_back({*it, LidarScan::bearing(static_cast<std::size_t>(it - scan.ranges.begin()))});
    }
    begin = end;
  }
  return rays;
}

DenseQP build_qp(Vec2 p_h, Vec2 v_h, Vec2 a_prev, std::span<const ConstraintRay> rays, const FilterParams& params) {
  const double dt = params.dt;
  const Vec2 p_ref = (params.d_ref / (norm(p_h) + params.epsilon)) * p_h;
  // ||w - dt u||^2 + rho ||u - a||^2 with w the predicted offset at u = 0.
  const Vec2 w = p_h + dt * v_h - p_ref;
  const double curvature = 2.0 * (dt * dt + params.rho);
  const Vec2 linear = -2.0 * (dt * w + params.rho * a_prev);
  const double constant = squared_norm(w) + params.rho * squared_norm(a_prev);

  std::vector<HalfPlane> rows;
  rows.reserve(FilterRowLayout::kFirstClearanceRow + rays.size() + 1);
  rows.push_back({{1.0, 0.0}, params.u_max.x});
  rows.push_back({{-1.0, 0.0}, -params.u_min.x});
  rows.push_back({{0.0, 1.0}, params.u_max.y});
  rows.push_back({{0.0, -1.0}, -params.u_min.y});
  const double step = params.a_max * dt;
  rows.push_back({{1.0, 0.0}, a_prev.x + step});
  rows.push_back({{-1.0, 0.0}, -(a_prev.x - step)});
  rows.push_back({{0.0, 1.0}, a_prev.y + step});
  rows.push_back({{0.0, -1.0}, -(a_prev.y - step)});
  for (const auto& ray : rays) {
    rows.push_back({from_angle(ray.bearing), (ray.range - params.c_safe) / dt});
  }
  if (params.human_proxy) {
    const double d = norm(p_h);
    if (d > 0.0) {
      // The human moves at v_h over the step, so its closing contribution is
      // credited to the bound.
      const Vec2 n = p_h / d;
      rows.push_back({n, (d - params.human_margin) / dt + dot(n, v_h)});
    }
  }
  return DenseQP({curvature, 0.0, curvature}, linear, std::move(rows), constant);
}

FilterOutput solve_safety_qp(Vec2 p_h, Vec2 v_h, Vec2 a_prev, std::span<const ConstraintRay> rays,
                             const FilterParams& params) {
  DenseQP qp = build_qp(p_h, v_h, a_prev, rays, params);
  const QPResult result = solve(qp);
  FilterOutput out;
  out.a_qp = result.u_star;
  out.valid = result.feasible;
  out.rows.assign(qp.constraints().begin(), qp.constraints().end());
  return out;
}

}  // namespace arms
