#pragma once

// Independent oracles and fixtures shared by the unit tests. Nothing here calls
// the solvers under test.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mmrrw/classify.hpp"
#include "mmrrw/examples.hpp"

namespace oracle {

using namespace mmrrw;

// Birth-death chain on {0,1,...}: up q0 at 0, up u / down v above. Returns π_0.
inline double bd_pi0(double q0, double u, double v) { return 1.0 / (1.0 + q0 / (v - u)); }

// Drift a_l({l}) of a 2D product walk: coordinate l is saturated, the other one
// is the birth-death chain above, and coordinate l's mean move is mf on the
// face and mn in the interior.
inline double product_face_drift(double mf, double mn, double q0, double u, double v) {
  double p0 = bd_pi0(q0, u, v);
  return p0 * mf + (1 - p0) * mn;
}

// Dense solve of a QBD truncated at level L (up moves at L folded into A1).
// Returns π stacked as [level 0 | level 1 | ... | level L].
inline Eigen::VectorXd truncated_qbd(const QbdBlocks& q, int L) {
  const int m0 = static_cast<int>(q.B00.rows()), m = static_cast<int>(q.A1.rows());
  const int n = m0 + L * m;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  auto off = [&](int k) { return k == 0 ? 0 : m0 + (k - 1) * m; };
  P.block(0, 0, m0, m0) = q.B00;
  P.block(0, off(1), m0, m) = q.B01;
  for (int k = 1; k <= L; ++k) {
    if (k == 1) P.block(off(1), 0, m, m0) = q.B10;
    else P.block(off(k), off(k - 1), m, m) = q.A2;
    P.block(off(k), off(k), m, m) += q.A1;
    if (k < L) P.block(off(k), off(k + 1), m, m) = q.A0;
    else P.block(off(k), off(k), m, m) += q.A0;
  }
  Eigen::MatrixXd M = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  M.row(0).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(0) = 1;
  return M.fullPivLu().solve(rhs);
}

inline Eigen::MatrixXd random_stochastic_rows(std::mt19937_64& rng, int rows, const std::vector<int>& cols,
                                              const std::vector<double>& weights) {
  // splits each row over the column groups in proportion to weights, then
  // spreads every group's share randomly over its columns
  std::uniform_real_distribution<double> U(0.05, 1.0);
  int total = 0;
  for (int c : cols) total += c;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, total);
  for (int r = 0; r < rows; ++r) {
    std::vector<double> w(weights.size());
    double ws = 0;
    for (std::size_t g = 0; g < w.size(); ++g) ws += (w[g] = weights[g] * U(rng));
    int c0 = 0;
    for (std::size_t g = 0; g < cols.size(); ++g) {
      std::vector<double> e(cols[g]);
      double es = 0;
      for (auto& x : e) es += (x = U(rng));
      for (int c = 0; c < cols[g]; ++c) out(r, c0 + c) = w[g] / ws * e[c] / es;
      c0 += cols[g];
    }
  }
  return out;
}

// Random QBD with level-0 size m0 and phase count m whose down moves dominate.
inline QbdBlocks random_qbd(std::mt19937_64& rng, int m0, int m) {
  QbdBlocks q;
  Eigen::MatrixXd r0 = random_stochastic_rows(rng, m0, {m0, m}, {1.0, 1.0});
  q.B00 = r0.leftCols(m0);
  q.B01 = r0.rightCols(m);
  Eigen::MatrixXd r2 = random_stochastic_rows(rng, m, {m, m, m}, {2.0, 1.0, 0.8});
  q.A2 = r2.leftCols(m);
  q.A1 = r2.middleCols(m, m);
  q.A0 = r2.rightCols(m);
  // level 1 shares A1 and A0; its down mass goes to level 0
  q.B10 = random_stochastic_rows(rng, m, {m0}, {1.0});
  for (int r = 0; r < m; ++r) q.B10.row(r) *= q.A2.row(r).sum();
  return q;
}

// Profile with exact drifts; faces absent from `drifts` get status `rest`.
inline DriftProfile make_profile(int d, const std::map<Face, std::vector<double>>& drifts,
                                 Status rest = Status::NotPositiveRecurrent) {
  DriftProfile p;
  p.d = d;
  for (Face A : faces_by_size_desc(d)) {
    if (A.empty()) continue;
    auto it = drifts.find(A);
    if (it == drifts.end()) {
      p.status[A] = rest;
      continue;
    }
    DriftVector v;
    v.face = A;
    v.a = Eigen::Map<const Eigen::VectorXd>(it->second.data(), d);
    p.drifts[A] = v;
    p.status[A] = Status::PositiveRecurrent;
  }
  return p;
}

// Instance of a table row with random magnitudes under coordinate map perm
// (table coordinate t -> model coordinate perm[t]). Blank faces get random
// signs, NA faces status NotPR.
inline DriftProfile table_profile(const TableRow& row, std::mt19937_64& rng, std::array<int, 3> perm) {
  std::uniform_real_distribution<double> mag(0.05, 1.0), U(0, 1);
  DriftProfile p;
  p.d = 3;
  const Face N = Face::full(3);
  DriftVector vN;
  vN.face = N;
  vN.a = Eigen::VectorXd::Zero(3);
  for (int t = 0; t < 3; ++t) vN.a(perm[t]) = row.aN[t] * mag(rng);
  p.drifts[N] = vN;
  p.status[N] = Status::PositiveRecurrent;
  const auto& faces = table_faces();
  for (int k = 0; k < 6; ++k) {
    Face F;
    for (int t : faces[k].members()) F = F.with(perm[t]);
    const TableEntry& e = row.entries[k];
    if (e.kind == TableEntry::NA) {
      p.status[F] = Status::NotPositiveRecurrent;
      continue;
    }
    DriftVector v;
    v.face = F;
    v.a = Eigen::VectorXd::Zero(3);
    for (int t : faces[k].members()) {
      int s = e.kind == TableEntry::Signs ? e.signs[t] : (U(rng) < 0.5 ? -1 : 1);
      v.a(perm[t]) = s * mag(rng);
    }
    p.drifts[F] = v;
    p.status[F] = Status::PositiveRecurrent;
  }
  return p;
}

inline DriftProfile scaled(DriftProfile p, double c) {
  for (auto& [A, v] : p.drifts) v.a *= c;
  return p;
}

// Relabels coordinates: new coordinate sigma[l] carries old coordinate l.
inline Face permute_face(Face A, const std::vector<int>& sigma) {
  Face out;
  for (int l : A.members()) out = out.with(sigma[l]);
  return out;
}

inline DriftProfile permuted(const DriftProfile& p, const std::vector<int>& sigma) {
  DriftProfile q;
  q.d = p.d;
  q.zero_band = p.zero_band;
  for (const auto& [A, s] : p.status) q.status[permute_face(A, sigma)] = s;
  for (const auto& [A, v] : p.drifts) {
    DriftVector w = v;
    w.face = permute_face(A, sigma);
    for (int l = 0; l < p.d; ++l) w.a(sigma[l]) = v.a(l);
    q.drifts[w.face] = w;
  }
  return q;
}

inline MmrrwModel permuted(const MmrrwModel& m, const std::vector<int>& sigma) {
  MmrrwModel out;
  out.d = m.d;
  for (const auto& [A, n] : m.bg_sizes) out.bg_sizes[permute_face(A, sigma)] = n;
  for (const auto& [k, P] : m.blocks) {
    Step z = decode_step(k.z, m.d), y(m.d);
    for (int l = 0; l < m.d; ++l) y[sigma[l]] = z[l];
    out.add(permute_face(k.from, sigma), y, permute_face(k.to, sigma), P);
  }
  return out;
}

}  // namespace oracle
