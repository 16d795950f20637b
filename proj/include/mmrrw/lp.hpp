#pragma once

#include <Eigen/Dense>

namespace mmrrw {

enum class LpStatus { Optimal, Unbounded, IterationLimit };

struct LpResult {
  LpStatus status = LpStatus::IterationLimit;
  Eigen::VectorXd x;
  double objective = 0;
};

// max cᵀx  s.t.  A x ≤ b, x ≥ 0, with b ≥ 0 so the origin is a feasible basis.
// Dense tableau simplex with Bland's rule (no cycling).
LpResult solve_lp_max(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

}  // namespace mmrrw
