#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "arms/geometry.hpp"

namespace arms {

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  Vec2 operator*(Vec2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
  double min_eigenvalue() const;
};

/// Half-plane normal^T u <= bound.
struct HalfPlane {
  Vec2 normal;
  double bound = 0.0;
};

inline constexpr double kPdTolerance = 1e-9;
inline constexpr double kFeasibilityTolerance = 1e-8;

/// min_u 1/2 u^T Q u + q^T u + constant  subject to  g_i^T u <= h_i.
class DenseQP {
 public:
  /// Throws ConfigError unless every eigenvalue of Q is >= kPdTolerance.
  DenseQP(Sym2 Q, Vec2 q, std::vector<HalfPlane> constraints, double constant = 0.0);

  const Sym2& Q() const { return Q_; }
  Vec2 q() const { return q_; }
  double constant() const { return constant_; }
  std::span<const HalfPlane> constraints() const { return constraints_; }

  double objective(Vec2 u) const { return 0.5 * dot(u, Q_ * u) + dot(q_, u) + constant_; }
  Vec2 gradient(Vec2 u) const { return Q_ * u + q_; }

 private:
  Sym2 Q_;
  Vec2 q_;
  std::vector<HalfPlane> constraints_;
  double constant_;
};

struct QPResult {
  Vec2 u_star;
  bool feasible = false;
  std::vector<std::size_t> active_set;  ///< at most two constraint indices
  double objective = 0.0;               ///< +inf when infeasible
};

/// Exact solve by enumerating every candidate active set of size 0, 1 and 2
/// and keeping the feasible candidate of least objective. When no candidate
/// is feasible the problem is declared infeasible and u_star is zero.
QPResult solve(const DenseQP& qp);

struct FeasibilityReport {
  bool feasible = true;
  double worst_violation = 0.0;  ///< max(g^T u - h, 0) over constraints
};

FeasibilityReport check_feasible(std::span<const HalfPlane> constraints, Vec2 u,
                                 double tolerance = kFeasibilityTolerance);
inline FeasibilityReport check_feasible(const DenseQP& qp, Vec2 u) { return check_feasible(qp.constraints(), u); }

struct KktReport {
  double stationarity = 0.0;      ///< ||Q u + q + sum lambda_i g_i||
  double min_multiplier = 0.0;    ///< smallest lambda over the active set (0 if empty)
  double complementarity = 0.0;   ///< max |lambda_i * (g_i^T u - h_i)|
};

/// Recovers multipliers for the reported active set and measures the
/// first-order optimality residuals.
KktReport kkt_check(const DenseQP& qp, const QPResult& result);

}  // namespace arms
