#include "arms/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "arms/errors.hpp"

namespace arms {
namespace {

constexpr double kDegenerateDeterminant = 1e-12;

struct Candidate {
  Vec2 u;
  std::size_t first = 0;
  std::size_t second = 0;
  int size = 0;
};

// Solves [a b; c d] x = r. Returns false when |det| is below the degeneracy cut.
bool solve2(double a, double b, double c, double d, Vec2 r, Vec2& x) {
  const double det = a * d - b * c;
  if (std::abs(det) < kDegenerateDeterminant) return false;
  x = {(d * r.x - b * r.y) / det, (a * r.y - c * r.x) / det};
  return true;
}

}  // namespace

double Sym2::min_eigenvalue() const {
  const double mean = 0.5 * (xx + yy);
  const double half_diff = 0.5 * (xx - yy);
  return mean - std::hypot(half_diff, xy);
}

DenseQP::DenseQP(Sym2 Q, Vec2 q, std::vector<HalfPlane> constraints, double constant)
    : Q_(Q), q_(q), constraints_(std::move(constraints)), constant_(constant) {
  if (!(Q_.min_eigenvalue() >= kPdTolerance)) throw ConfigError("DenseQP: Q is not positive definite");
}

FeasibilityReport check_feasible(std::span<const HalfPlane> constraints, Vec2 u, double tolerance) {
  FeasibilityReport report;
  for (const auto& row : constraints) {
    const double violation = dot(row.normal, u) - row.bound;
    report.worst_violation = std::max(report.worst_violation, violation);
  }
  report.feasible = report.worst_violation <= tolerance;
  return report;
}

QPResult solve(const DenseQP& qp) {
  const Sym2& Q = qp.Q();
  const Vec2 q = qp.q();
  const auto rows = qp.constraints();
  const double det_q = Q.xx * Q.yy - Q.xy * Q.xy;
  const auto q_inv = [&](Vec2 v) { return Vec2{(Q.yy * v.x - Q.xy * v.y) / det_q, (Q.xx * v.y - Q.xy * v.x) / det_q}; };

  QPResult best;
  best.objective = std::numeric_limits<double>::infinity();
  const auto consider = [&](const Candidate& c) {
    if (!check_feasible(rows, c.u).feasible) return;
    const double value = qp.objective(c.u);
    if (value < best.objective) {
      best.objective = value;
      best.u_star = c.u;
      best.feasible = true;
      best.active_set.clear();
      if (c.size >= 1) best.active_set.push_back(c.first);
      if (c.size >= 2) best.active_set.push_back(c.second);
    }
  };

  // Unconstrained minimizer.
  const Vec2 free_min = -1.0 * q_inv(q);
  consider({free_min, 0, 0, 0});
  if (best.feasible) return best;

  // Minimizer on each constraint line g^T u = h.
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Vec2 g = rows[i].normal;
    const Vec2 q_inv_g = q_inv(g);
    const double curvature = dot(g, q_inv_g);
    if (!(curvature > 0.0)) continue;
    const double lambda = -(rows[i].bound + dot(g, q_inv(q))) / curvature;
    consider({free_min - lambda * q_inv_g, i, 0, 1});
  }

  // Vertex of every constraint pair.
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      Vec2 vertex;
      if (!solve2(rows[i].normal.x, rows[i].normal.y, rows[j].normal.x, rows[j].normal.y,
                  {rows[i].bound, rows[j].bound}, vertex)) {
        continue;
      }
      consider({vertex, i, j, 2});
    }
  }

  if (!best.feasible) best.u_star = {};
  return best;
}

KktReport kkt_check(const DenseQP& qp, const QPResult& result) {
  KktReport report;
  const Vec2 grad = qp.gradient(result.u_star);
  const auto rows = qp.constraints();
  Vec2 residual = grad;
  double min_lambda = std::numeric_limits<double>::infinity();
  const auto account = [&](std::size_t index, double lambda) {
    residual += lambda * rows[index].normal;
    min_lambda = std::min(min_lambda, lambda);
    const double slack = dot(rows[index].normal, result.u_star) - rows[index].bound;
    report.complementarity = std::max(report.complementarity, std::abs(lambda * slack));
  };
  if (result.active_set.size() == 1) {
    const Vec2 g = rows[result.active_set[0]].normal;
    account(result.active_set[0], -dot(g, grad) / squared_norm(g));
  } else if (result.active_set.size() == 2) {
    const Vec2 g1 = rows[result.active_set[0]].normal;
    const Vec2 g2 = rows[result.active_set[1]].normal;
    Vec2 lambda;
    // [g1 g2] lambda = -grad
    if (solve2(g1.x, g2.x, g1.y, g2.y, -1.0 * grad, lambda)) {
      account(result.active_set[0], lambda.x);
      account(result.active_set[1], lambda.y);
    }
  }
  report.stationarity = norm(residual);
  report.min_multiplier = result.active_set.empty() ? 0.0 : min_lambda;
  return report;
}

}  // namespace arms
