#include <algorithm>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "mmrrw/truncated.hpp"

namespace mmrrw {

double TruncatedSolution::prob(const std::vector<int>& x, int i) const {
  auto it = first_index.find(x);
  if (it == first_index.end()) return 0.0;
  return pi(it->second + i);
}

Eigen::VectorXd TruncatedSolution::marginal(int l) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(L + 1);
  for (std::size_t s = 0; s < states.size(); ++s) out(states[s].x[l]) += pi(s);
  return out;
}

TruncatedSolution truncated_stationary(const MmrrwModel& m, int L) {
  if (L < 5) throw ModelError("truncated_stationary: level cap must be at least 5");
  const int d = m.d;
  double boxes = 1;
  for (int l = 0; l < d; ++l) boxes *= (L + 1);
  if (boxes > 4e6) throw ModelError("truncated_stationary: state space too large");

  TruncatedSolution sol;
  sol.d = d;
  sol.L = L;
  std::vector<int> x(d, 0);
  for (;;) {
    Face A = face_of(x);
    sol.first_index[x] = static_cast<int>(sol.states.size());
    for (int i = 0; i < m.bg_size(A); ++i) sol.states.push_back({x, i});
    int l = d - 1;
    while (l >= 0 && ++x[l] > L) x[l--] = 0;
    if (l < 0) break;
  }
  const int n = static_cast<int>(sol.states.size());

  std::vector<Eigen::Triplet<double>> moves;  // (to, from, p)
  for (int s = 0; s < n; ++s) {
    const auto& st = sol.states[s];
    Face A = face_of(st.x), E = witness_of(st.x);
    for (auto it = m.blocks.lower_bound(BlockKey{A, 0, Face()}); it != m.blocks.end() && it->first.from == A; ++it) {
      Step z = decode_step(it->first.z, d);
      if (target_face(A, z, E) != it->first.to) continue;
      // an up move at the cap is dropped for that coordinate only
      std::vector<int> y = st.x;
      for (int l = 0; l < d; ++l) y[l] = std::min(y[l] + z[l], L);
      const int base = sol.first_index.at(y);
      const Eigen::MatrixXd& P = it->second;
      for (int j = 0; j < P.cols(); ++j) {
        double p = P(st.i, j);
        if (p > 0) moves.emplace_back(base + j, s, p);
      }
    }
  }
  Eigen::SparseMatrix<double> Pt(n, n);
  Pt.setFromTriplets(moves.begin(), moves.end());

  // Pᵀ − I with the first balance row replaced by the normalization
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(moves.size() + 2 * n);
  for (const auto& t : moves)
    if (t.row() != 0) trip.push_back(t);
  for (int s = 1; s < n; ++s) trip.emplace_back(s, s, -1.0);
  for (int s = 0; s < n; ++s) trip.emplace_back(0, s, 1.0);
  Eigen::SparseMatrix<double> M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(M);
  if (lu.info() != Eigen::Success) throw SolverError("truncated_stationary: factorization failed (reducible chain?)");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(0) = 1.0;
  sol.pi = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !sol.pi.allFinite()) throw SolverError("truncated_stationary: solve failed");

  Eigen::VectorXd flow = Pt * sol.pi;
  sol.residual = std::max((flow - sol.pi).cwiseAbs().maxCoeff(), std::abs(sol.pi.sum() - 1.0));
  if (sol.residual > 1e-12) throw SolverError("truncated_stationary: residual " + std::to_string(sol.residual));
  return sol;
}

DriftVector truncated_induced_drift(const MmrrwModel& m, Face A, int L) {
  if (A.empty() || A.size() >= m.d) throw ModelError("truncated_induced_drift: need 1 <= |A| < d");
  InducedChain c = project(m, A);
  TruncatedSolution sol = truncated_stationary(c.model, L);
  DriftVector out;
  out.face = A;
  out.exact = false;
  out.a = Eigen::VectorXd::Zero(m.d);
  for (std::size_t s = 0; s < sol.states.size(); ++s) {
    std::vector<int> xp(m.d, 2);
    for (int k = 0; k < c.model.d; ++k) xp[c.coord_map[k]] = sol.states[s].x[k];
    out.a += sol.pi(s) * local_drift_at(m, xp, sol.states[s].i);
  }
  for (int k = 0; k < c.model.d; ++k) out.a(c.coord_map[k]) = 0.0;
  return out;
}

}  // namespace mmrrw
