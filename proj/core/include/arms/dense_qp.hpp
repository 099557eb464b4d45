#pragma once

#include <vector>

#include <Eigen/Dense>

namespace arms {

struct DenseQpSolution {
  Eigen::VectorXd x;
  bool feasible = false;
  double objective = 0.0;          ///< 1/2 x^T G x + g^T x (no constant)
  std::vector<int> active;         ///< indices of rows of A active at x
  Eigen::VectorXd multipliers;     ///< one per entry of `active`
  int iterations = 0;
};

/// Strictly convex QP  min 1/2 x^T G x + g^T x  s.t.  A x <= b, solved by the
/// dual active-set method of Goldfarb and Idnani. G must be positive
/// definite (throws ConfigError otherwise).
///
/// Returns feasible = false when the constraints are inconsistent or the
/// iteration budget runs out; x is then the last dual iterate.
DenseQpSolution solve_dense_qp(const Eigen::MatrixXd& G, const Eigen::VectorXd& g, const Eigen::MatrixXd& A,
                               const Eigen::VectorXd& b, int max_iterations = 0);

}  // namespace arms
