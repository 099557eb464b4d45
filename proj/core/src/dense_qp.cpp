#include "arms/dense_qp.hpp"

#include <cmath>
#include <limits>

#include "arms/errors.hpp"

namespace arms {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Working factorization: J = L^{-T} Q with R upper triangular such that the
/// first `iq` columns of J span N+ = (active normals) via J^T N = [R; 0].
struct Factors {
  Eigen::MatrixXd J;
  Eigen::MatrixXd R;
  int iq = 0;
  double r_norm = 1.0;
};

// Givens rotation taking (a, b) to (h, 0) with c >= 0. Returns false when
// the pair is already negligible.
bool givens(double& a, double b, double& c, double& s) {
  const double h = std::hypot(a, b);
  if (h < kEps) return false;
  c = a / h;
  s = b / h;
  if (c < 0.0) {
    c = -c;
    s = -s;
    a = -h;
  } else {
    a = h;
  }
  return true;
}

bool add_constraint(Factors& f, Eigen::VectorXd& d) {
  const int n = static_cast<int>(d.size());
  for (int j = n - 1; j >= f.iq + 1; --j) {
    double c = 0.0;
    double s = 0.0;
    double h = d(j - 1);
    if (!givens(h, d(j), c, s)) continue;
    d(j - 1) = h;
    d(j) = 0.0;
    const double xny = s / (1.0 + c);
    for (int k = 0; k < n; ++k) {
      const double t1 = f.J(k, j - 1);
      const double t2 = f.J(k, j);
      f.J(k, j - 1) = t1 * c + t2 * s;
      f.J(k, j) = xny * (t1 + f.J(k, j - 1)) - t2;
    }
  }
  f.R.col(f.iq).head(f.iq + 1) = d.head(f.iq + 1);
  ++f.iq;
  if (std::abs(d(f.iq - 1)) <= kEps * f.r_norm) return false;  // dependent
  f.r_norm = std::max(f.r_norm, std::abs(d(f.iq - 1)));
  return true;
}

void delete_constraint(Factors& f, std::vector<int>& active, Eigen::VectorXd& u, int row) {
  const int n = static_cast<int>(f.J.rows());
  int qq = -1;
  for (int i = 0; i < f.iq; ++i) {
    if (active[i] == row) {
      qq = i;
      break;
    }
  }
  if (qq < 0) return;
  for (int i = qq; i < f.iq - 1; ++i) {
    active[i] = active[i + 1];
    u(i) = u(i + 1);
    f.R.col(i) = f.R.col(i + 1);
  }
  active[f.iq - 1] = active[f.iq];
  u(f.iq - 1) = u(f.iq);
  u(f.iq) = 0.0;
  f.R.col(f.iq - 1).setZero();
  --f.iq;
  for (int j = qq; j < f.iq; ++j) {
    double c = 0.0;
    double s = 0.0;
    double h = f.R(j, j);
    if (!givens(h, f.R(j + 1, j), c, s)) continue;
    f.R(j, j) = h;
    f.R(j + 1, j) = 0.0;
    const double xny = s / (1.0 + c);
    for (int k = j + 1; k < f.iq; ++k) {
      const double t1 = f.R(j, k);
      const double t2 = f.R(j + 1, k);
      f.R(j, k) = t1 * c + t2 * s;
      f.R(j + 1, k) = xny * (t1 + f.R(j, k)) - t2;
    }
    for (int k = 0; k < n; ++k) {
      const double t1 = f.J(k, j);
      const double t2 = f.J(k, j + 1);
      f.J(k, j) = t1 * c + t2 * s;
      f.J(k, j + 1) = xny * (f.J(k, j) + t1) - t2;
    }
  }
}

}  // namespace

DenseQpSolution solve_dense_qp(const Eigen::MatrixXd& G, const Eigen::VectorXd& g, const Eigen::MatrixXd& A,
                               const Eigen::VectorXd& b, int max_iterations) {
  const int n = static_cast<int>(G.rows());
  const int m = static_cast<int>(A.rows());
  if (G.cols() != n || g.size() != n || (m > 0 && A.cols() != n) || b.size() != m) {
    throw ConfigError("dense QP: inconsistent dimensions");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) throw ConfigError("dense QP: Hessian is not positive definite");
  if (max_iterations <= 0) max_iterations = 50 * (n + m) + 50;

  Factors f;
  const Eigen::MatrixXd L = llt.matrixL();
  f.J = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n)).transpose();
  f.R = Eigen::MatrixXd::Zero(n, n + 1);
  const double scale = G.trace() * f.J.trace();

  DenseQpSolution out;
  Eigen::VectorXd x = llt.solve(-g);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n + 1);
  std::vector<int> active(static_cast<std::size_t>(n) + 1, -1);
  std::vector<int> iai(static_cast<std::size_t>(m));
  std::vector<char> allowed(static_cast<std::size_t>(m));
  Eigen::VectorXd s(m), d(n), z(n), r(n + 1);

  auto finish = [&](bool feasible) {
    out.x = x;
    out.feasible = feasible;
    out.objective = 0.5 * x.dot(G * x) + g.dot(x);
    out.active.assign(active.begin(), active.begin() + f.iq);
    out.multipliers = u.head(f.iq);
    return out;
  };

  for (;;) {
    // Major iteration: pick the most violated row not yet excluded.
    if (++out.iterations > max_iterations) return finish(false);
    for (int i = 0; i < m; ++i) iai[i] = i;
    for (int i = 0; i < f.iq; ++i) iai[active[i]] = -1;
    s = b - A * x;
    double psi = 0.0;
    for (int i = 0; i < m; ++i) psi += std::min(0.0, s(i));
    if (std::abs(psi) <= m * kEps * scale * 100.0) return finish(true);
    std::fill(allowed.begin(), allowed.end(), 1);

    // Snapshot so that a linearly dependent addition can be undone.
    const Factors f_saved = f;
    const Eigen::VectorXd x_saved = x;
    const Eigen::VectorXd u_saved = u;
    const std::vector<int> active_saved = active;

    bool added = false;
    while (!added) {
      double ss = 0.0;
      int ip = -1;
      for (int i = 0; i < m; ++i) {
        if (iai[i] != -1 && allowed[i] && s(i) < ss) {
          ss = s(i);
          ip = i;
        }
      }
      if (ip < 0) return finish(true);
      const Eigen::VectorXd np = -A.row(ip).transpose();
      u(f.iq) = 0.0;
      active[f.iq] = ip;

      for (;;) {
        if (++out.iterations > max_iterations) return finish(false);
        d = f.J.transpose() * np;
        z = f.J.rightCols(n - f.iq) * d.tail(n - f.iq);
        if (f.iq > 0) {
          r.head(f.iq) = f.R.topLeftCorner(f.iq, f.iq).triangularView<Eigen::Upper>().solve(d.head(f.iq));
        }
        // Step lengths: t1 keeps dual feasibility, t2 reaches the new row.
        double t1 = kInf;
        int leaving = -1;
        for (int k = 0; k < f.iq; ++k) {
          if (r(k) > 0.0 && u(k) / r(k) < t1) {
            t1 = u(k) / r(k);
            leaving = active[k];
          }
        }
        double t2 = kInf;
        if (z.squaredNorm() > kEps) {
          t2 = -s(ip) / z.dot(np);
          if (t2 < 0.0) t2 = kInf;
        }
        const double t = std::min(t1, t2);
        if (t >= kInf) return finish(false);

        if (t2 >= kInf) {
          // Dual step only.
          u.head(f.iq) -= t * r.head(f.iq);
          u(f.iq) += t;
          iai[leaving] = leaving;
          delete_constraint(f, active, u, leaving);
          continue;
        }

        x += t * z;
        u.head(f.iq) -= t * r.head(f.iq);
        u(f.iq) += t;

        if (t == t2) {
          if (!add_constraint(f, d)) {
            f = f_saved;
            x = x_saved;
            u = u_saved;
            active = active_saved;
            for (int i = 0; i < m; ++i) iai[i] = i;
            for (int i = 0; i < f.iq; ++i) iai[active[i]] = -1;
            allowed[ip] = 0;
            s = b - A * x;
            break;
          }
          iai[ip] = -1;
          added = true;
          break;
        }

        // Partial step: drop the blocking row and retry the same row.
        iai[leaving] = leaving;
        delete_constraint(f, active, u, leaving);
        s(ip) = b(ip) - A.row(ip).dot(x);
      }
    }
  }
}

}  // namespace arms
