#include "mmrrw/qbd.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace mmrrw {

namespace {

double inf_norm(const Eigen::MatrixXd& M) {
  return M.size() ? M.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
}

Eigen::MatrixXd natural_step(const QbdBlocks& q, const Eigen::MatrixXd& R) {
  return q.A0 + R * q.A1 + R * R * q.A2;
}

bool natural_iteration(const QbdBlocks& q, Eigen::MatrixXd& R, double tol, int cap, int& iters) {
  for (iters = 0; iters < cap; ++iters) {
    Eigen::MatrixXd next = natural_step(q, R);
    double diff = inf_norm(next - R);
    R.swap(next);
    if (diff <= tol && fixed_point_residual(q, R) <= tol) return true;
  }
  return false;
}

// Latouche–Ramaswami logarithmic reduction for G, then R = A0 (I − A1 − A0 G)^{-1}.
bool log_reduction(const QbdBlocks& q, Eigen::MatrixXd& R, int& iters) {
  const auto n = q.A1.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::PartialPivLU<Eigen::MatrixXd> base(I - q.A1);
  Eigen::MatrixXd H = base.solve(q.A0);
  Eigen::MatrixXd L = base.solve(q.A2);
  Eigen::MatrixXd G = L, T = H;
  for (iters = 0; iters < 80; ++iters) {
    Eigen::MatrixXd U = H * L + L * H;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(I - U);
    if (!lu.isInvertible()) return false;
    Eigen::MatrixXd H2 = lu.solve(H * H);
    Eigen::MatrixXd L2 = lu.solve(L * L);
    H.swap(H2);
    L.swap(L2);
    Eigen::MatrixXd inc = T * L;
    G += inc;
    T = T * H;
    if (inf_norm(inc) < 1e-17 || inf_norm(T) < 1e-17) break;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(I - q.A1 - q.A0 * G);
  if (!lu.isInvertible()) return false;
  R = q.A0 * lu.inverse();
  return R.allFinite();
}

}  // namespace

double fixed_point_residual(const QbdBlocks& q, const Eigen::MatrixXd& R) {
  return inf_norm(R - natural_step(q, R));
}

double spectral_radius(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

RSolution compute_R(const QbdBlocks& q, double tol, RMethod method) {
  if (auto msg = check_qbd_blocks(q); !msg.empty()) throw ModelError("compute_R: " + msg);
  const auto n = q.A1.rows();
  RSolution out;
  constexpr int kCap = 1000000;

  bool done = false;
  if (method != RMethod::Natural) {
    Eigen::MatrixXd R;
    int it = 0;
    if (log_reduction(q, R, it)) {
      // a few fixed-point sweeps remove rounding left by the inverse
      int polish = 0;
      if (fixed_point_residual(q, R) > tol) natural_iteration(q, R, tol, 200, polish);
      if (fixed_point_residual(q, R) <= tol && (R.array() >= -1e-14).all()) {
        out.R = R.cwiseMax(0.0);
        out.iterations = it + polish;
        out.method = RMethod::LogReduction;
        done = true;
      }
    }
    if (!done && method == RMethod::LogReduction) throw SolverError("logarithmic reduction failed to reach tolerance");
  }
  if (!done) {
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
    int it = 0;
    if (!natural_iteration(q, R, tol, kCap, it)) {
      std::ostringstream os;
      os << "R iteration did not converge after " << kCap << " steps; last residual " << fixed_point_residual(q, R);
      throw SolverError(os.str());
    }
    out.R = R;
    out.iterations = it;
    out.method = RMethod::Natural;
  }
  out.residual = fixed_point_residual(q, out.R);
  out.spectral_radius = spectral_radius(out.R);
  return out;
}

double qbd_mean_drift(const QbdBlocks& q) {
  Eigen::MatrixXd A = q.A0 + q.A1 + q.A2;
  Eigen::RowVectorXd kappa;
  try {
    kappa = stationary_finite(A);
  } catch (const SolverError& e) {
    throw SolverError(std::string("interior phase matrix: ") + e.what());
  }
  return (kappa * (q.A0 - q.A2)).sum();
}

QbdRecurrence qbd_recurrence(const QbdBlocks& q, double zero_band) {
  double drift = qbd_mean_drift(q);
  if (drift < -zero_band) return QbdRecurrence::PositiveRecurrent;
  if (drift > zero_band) return QbdRecurrence::NotPositiveRecurrent;
  return QbdRecurrence::NullBoundary;
}

bool qbd_positive_recurrent(const QbdBlocks& q) {
  return qbd_recurrence(q) == QbdRecurrence::PositiveRecurrent;
}

Eigen::RowVectorXd QbdStationary::level(int k) const {
  if (k == 0) return pi0;
  Eigen::RowVectorXd v = pi1;
  for (int r = 1; r < k; ++r) v = v * R;
  return v;
}

double QbdStationary::normalization() const {
  const auto n = R.rows();
  Eigen::MatrixXd IR = Eigen::MatrixXd::Identity(n, n) - R;
  Eigen::VectorXd tail = IR.fullPivLu().solve(Eigen::VectorXd::Ones(n));
  return pi0.sum() + pi1.dot(tail);
}

QbdStationary qbd_stationary(const QbdBlocks& q) {
  if (!qbd_positive_recurrent(q)) throw SolverError("qbd_stationary: QBD is not positive recurrent");
  RSolution rs = compute_R(q);
  if (rs.spectral_radius >= 1.0) throw SolverError("qbd_stationary: spectral radius of R is not below 1");
  const auto n0 = q.B00.rows(), n1 = q.A1.rows();
  const Eigen::MatrixXd I1 = Eigen::MatrixXd::Identity(n1, n1);

  // x M = 0 with x = (π0, π1); the first balance column is replaced by normalization
  Eigen::MatrixXd M(n0 + n1, n0 + n1);
  M.topLeftCorner(n0, n0) = q.B00 - Eigen::MatrixXd::Identity(n0, n0);
  M.topRightCorner(n0, n1) = q.B01;
  M.bottomLeftCorner(n1, n0) = q.B10;
  M.bottomRightCorner(n1, n1) = q.A1 + rs.R * q.A2 - I1;
  Eigen::VectorXd norm(n0 + n1);
  norm.head(n0).setOnes();
  norm.tail(n1) = (I1 - rs.R).fullPivLu().solve(Eigen::VectorXd::Ones(n1));
  M.col(0) = norm;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n0 + n1);
  rhs(0) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M.transpose());
  if (!lu.isInvertible()) throw SolverError("qbd_stationary: boundary system is singular (reducible chain?)");
  Eigen::VectorXd x = lu.solve(rhs);

  QbdStationary st;
  st.pi0 = x.head(n0).transpose();
  st.pi1 = x.tail(n1).transpose();
  st.R = rs.R;
  double res = qbd_balance_residual(q, st);
  if (res > 1e-10) throw SolverError("qbd_stationary: balance residual " + std::to_string(res));
  if (std::abs(st.normalization() - 1.0) > 1e-12) throw SolverError("qbd_stationary: normalization failed");
  return st;
}

double qbd_balance_residual(const QbdBlocks& q, const QbdStationary& st) {
  Eigen::RowVectorXd p[5];
  for (int k = 0; k < 5; ++k) p[k] = st.level(k);
  double r = (p[0] * q.B00 + p[1] * q.B10 - p[0]).cwiseAbs().maxCoeff();
  r = std::max(r, (p[0] * q.B01 + p[1] * q.A1 + p[2] * q.A2 - p[1]).cwiseAbs().maxCoeff());
  for (int k = 2; k <= 3; ++k)
    r = std::max(r, (p[k - 1] * q.A0 + p[k] * q.A1 + p[k + 1] * q.A2 - p[k]).cwiseAbs().maxCoeff());
  return r;
}

int drift_sign(const DriftVector& v, int l, double zero_band) {
  double a = v.a(l);
  double band = zero_band;
  if (!v.exact && !v.sign_only && v.ci_halfwidth) band = std::max(zero_band, (*v.ci_halfwidth)(l));
  if (a > band) return 1;
  if (a < -band) return -1;
  return 0;
}

Eigen::VectorXd interior_drift_reference(const MmrrwModel& m) {
  const Face N = Face::full(m.d);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m.bg_size(N), m.bg_size(N));
  for (auto it = m.blocks.lower_bound(BlockKey{N, 0, Face()}); it != m.blocks.end() && it->first.from == N; ++it)
    if (it->first.to == N) P += it->second;
  Eigen::RowVectorXd pi = stationary_finite(P);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(m.d);
  for (int i = 0; i < pi.size(); ++i) a += pi(i) * local_drift(m, N, i);
  return a;
}

DriftVector induced_drift(const MmrrwModel& m, Face A) {
  const Face N = Face::full(m.d);
  if (A.empty() || !A.subset_of(N)) throw ModelError("induced_drift: bad face {" + A.key() + "}");
  DriftVector out;
  out.face = A;
  out.exact = true;
  InducedChain c = project(m, A);

  if (A.size() == m.d) {
    Eigen::RowVectorXd pi = solve_finite_chain(c);
    out.a = Eigen::VectorXd::Zero(m.d);
    for (int i = 0; i < pi.size(); ++i) out.a += pi(i) * local_drift(m, N, i);
    return out;
  }
  if (A.size() != m.d - 1)
    throw SolverError("induced_drift: exact solve needs |A| >= d-1; estimate the sign by simulation instead");

  QbdBlocks q = assemble_qbd(c);
  auto rec = qbd_recurrence(q);
  if (rec != QbdRecurrence::PositiveRecurrent)
    throw SolverError("induced_drift: induced chain for {" + A.key() + "} is not positive recurrent");
  QbdStationary st = qbd_stationary(q);
  const int k = c.coord_map[0];

  std::vector<int> x(m.d, 2);
  x[k] = 0;
  Eigen::VectorXd a = Eigen::VectorXd::Zero(m.d);
  for (int i = 0; i < st.pi0.size(); ++i) a += st.pi0(i) * local_drift_at(m, x, i);
  x[k] = 1;
  for (int i = 0; i < st.pi1.size(); ++i) a += st.pi1(i) * local_drift_at(m, x, i);
  const auto n1 = st.R.rows();
  Eigen::MatrixXd IR = Eigen::MatrixXd::Identity(n1, n1) - st.R;
  Eigen::RowVectorXd deep = st.pi1 * st.R * IR.fullPivLu().inverse();  // mass of levels ≥ 2
  for (int i = 0; i < deep.size(); ++i) a += deep(i) * local_drift(m, N, i);

  // the kept coordinate has zero stationary mean increment
  if (std::abs(a(k)) > 1e-8)
    throw SolverError("induced_drift: kept coordinate has nonzero mean increment " + std::to_string(a(k)));
  a(k) = 0.0;
  out.a = a;
  return out;
}

}  // namespace mmrrw
