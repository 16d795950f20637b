#include "mmrrw/lp.hpp"

#include <stdexcept>
#include <vector>

namespace mmrrw {

LpResult solve_lp_max(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const int m = static_cast<int>(A.rows()), n = static_cast<int>(A.cols());
  if (c.size() != n || b.size() != m) throw std::invalid_argument("solve_lp_max: shape mismatch");
  if (m && b.minCoeff() < 0) throw std::invalid_argument("solve_lp_max: origin must be feasible (b >= 0)");
  constexpr double eps = 1e-12;

  // rows 0..m-1 constraints, row m objective (reduced costs, negated)
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  T.topLeftCorner(m, n) = A;
  T.block(0, n, m, m).setIdentity();
  T.topRightCorner(m, 1) = b;
  T.block(m, 0, 1, n) = -c.transpose();
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  LpResult res;
  const int cols = n + m;
  for (int iter = 0; iter < 50000; ++iter) {
    int enter = -1;
    for (int j = 0; j < cols; ++j)
      if (T(m, j) < -eps) {
        enter = j;
        break;
      }
    if (enter < 0) {
      res.status = LpStatus::Optimal;
      res.x = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < m; ++i)
        if (basis[i] < n) res.x(basis[i]) = T(i, cols);
      res.objective = c.dot(res.x);
      return res;
    }
    int leave = -1;
    double best = 0;
    for (int i = 0; i < m; ++i) {
      if (T(i, enter) <= eps) continue;
      double ratio = T(i, cols) / T(i, enter);
      if (leave < 0 || ratio < best - 1e-15 || (ratio <= best + 1e-15 && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave < 0) {
      res.status = LpStatus::Unbounded;
      return res;
    }
    T.row(leave) /= T(leave, enter);
    for (int i = 0; i <= m; ++i)
      if (i != leave && T(i, enter) != 0.0) T.row(i) -= T(i, enter) * T.row(leave);
    basis[leave] = enter;
  }
  res.status = LpStatus::IterationLimit;
  return res;
}

}  // namespace mmrrw
