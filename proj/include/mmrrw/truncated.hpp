#pragma once

#include <map>
#include <vector>

#include "mmrrw/qbd.hpp"

namespace mmrrw {

// Stationary law of the chain restricted to {0..L}^d; a coordinate at L that
// would move up stays at L, the rest of the step goes through.
struct TruncatedSolution {
  int d = 0;
  int L = 0;
  std::vector<StatePoint> states;
  Eigen::VectorXd pi;
  double residual = 0;

  // Probability of (x, i), 0 outside the box.
  double prob(const std::vector<int>& x, int i) const;
  // Marginal of coordinate l.
  Eigen::VectorXd marginal(int l) const;

  std::map<std::vector<int>, int> first_index;  // x -> index of (x, 0)
};

TruncatedSolution truncated_stationary(const MmrrwModel& m, int L);

// a(A) from the truncated stationary law of ℒ^A (approximation; exact = false).
DriftVector truncated_induced_drift(const MmrrwModel& m, Face A, int L);

}  // namespace mmrrw
