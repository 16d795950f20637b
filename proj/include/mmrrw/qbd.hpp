#pragma once

#include <optional>

#include "mmrrw/induced.hpp"

namespace mmrrw {

inline constexpr double kZeroBand = 1e-9;

enum class RMethod { Natural, LogReduction, Auto };

struct RSolution {
  Eigen::MatrixXd R;
  int iterations = 0;
  double residual = 0;         // ‖R − (A0 + R A1 + R² A2)‖∞
  double spectral_radius = 0;
  RMethod method = RMethod::Natural;
};

// Minimal nonnegative solution of R = A0 + R A1 + R² A2.
RSolution compute_R(const QbdBlocks& q, double tol = 1e-14, RMethod method = RMethod::Auto);
double fixed_point_residual(const QbdBlocks& q, const Eigen::MatrixXd& R);
double spectral_radius(const Eigen::MatrixXd& M);

// κ(A0 − A2)1 with κ the stationary vector of A0 + A1 + A2.
double qbd_mean_drift(const QbdBlocks& q);

enum class QbdRecurrence { PositiveRecurrent, NotPositiveRecurrent, NullBoundary };
QbdRecurrence qbd_recurrence(const QbdBlocks& q, double zero_band = kZeroBand);
bool qbd_positive_recurrent(const QbdBlocks& q);

struct QbdStationary {
  Eigen::RowVectorXd pi0, pi1;
  Eigen::MatrixXd R;
  // π_k = π_1 R^{k-1}
  Eigen::RowVectorXd level(int k) const;
  double normalization() const;  // π_0 1 + π_1 (I − R)^{-1} 1
};

QbdStationary qbd_stationary(const QbdBlocks& q);
// Max-abs balance residual on levels 0..3.
double qbd_balance_residual(const QbdBlocks& q, const QbdStationary& st);

struct DriftVector {
  Face face;
  Eigen::VectorXd a;                       // parent coordinates
  bool exact = true;                       // solved stationary law
  bool sign_only = false;                  // user-supplied signs; a holds -1/0/+1
  std::optional<Eigen::VectorXd> ci_halfwidth;  // simulation estimates only
};

// Sign of component l: exact and sign-only values use the zero band, estimates
// use their confidence interval (0 when it straddles zero).
int drift_sign(const DriftVector& v, int l, double zero_band = kZeroBand);

// Exact a(A) for |A| ∈ {d, d-1}.
DriftVector induced_drift(const MmrrwModel& m, Face A);
// a(N) directly as the α-average under the finite-chain stationary law.
Eigen::VectorXd interior_drift_reference(const MmrrwModel& m);

}  // namespace mmrrw
