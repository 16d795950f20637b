#include "mmrrw/induced.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace mmrrw {

Face InducedChain::parent_face(Face local) const {
  Face F = removed;
  for (int k = 0; k < static_cast<int>(coord_map.size()); ++k)
    if (local.contains(k)) F = F.with(coord_map[k]);
  return F;
}

Eigen::VectorXd InducedChain::embed(const Eigen::VectorXd& local) const {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(parent_dim);
  for (int k = 0; k < static_cast<int>(coord_map.size()); ++k) a(coord_map[k]) = local(k);
  return a;
}

InducedChain project(const MmrrwModel& m, Face A) {
  const Face N = Face::full(m.d);
  if (A.empty()) throw ModelError("cannot project out the empty face");
  if (!A.subset_of(N)) throw ModelError("face {" + A.key() + "} is not a subset of the coordinates");

  InducedChain c;
  c.parent_dim = m.d;
  c.removed = A;
  for (int l = 0; l < m.d; ++l)
    if (!A.contains(l)) c.coord_map.push_back(l);
  const int dl = static_cast<int>(c.coord_map.size());
  c.model.d = dl;

  auto restrict = [&](Face F) {
    Face out;
    for (int k = 0; k < dl; ++k)
      if (F.contains(c.coord_map[k])) out = out.with(k);
    return out;
  };

  for (std::uint32_t mk = 0; mk < (1u << dl); ++mk) {
    Face local(mk);
    Face parent = c.parent_face(local);
    c.model.bg_sizes[local] = m.bg_size(parent);
    auto lab = m.labels.find(parent);
    if (lab != m.labels.end()) c.model.labels[local] = lab->second;
  }

  for (auto& [k, P] : m.blocks) {
    if (!A.subset_of(k.from) || !A.subset_of(k.to)) continue;
    Step z = decode_step(k.z, m.d);
    Step zl(dl);
    for (int q = 0; q < dl; ++q) zl[q] = z[c.coord_map[q]];
    c.model.add(restrict(k.from), zl, restrict(k.to), P);
  }
  return c;
}

int ClassStructure::closed_count() const {
  return static_cast<int>(std::count(closed.begin(), closed.end(), true));
}

ClassStructure communicating_classes(const Eigen::MatrixXd& P) {
  const int n = static_cast<int>(P.rows());
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (P(i, j) > 0) adj[i].push_back(j);

  // Tarjan
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<bool> on(n, false);
  int counter = 0;
  ClassStructure cs;
  std::function<void(int)> visit = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on[v] = true;
    for (int w : adj[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<int> cls;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on[w] = false;
        comp[w] = static_cast<int>(cs.classes.size());
        cls.push_back(w);
      } while (w != v);
      std::sort(cls.begin(), cls.end());
      cs.classes.push_back(cls);
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[v] < 0) visit(v);

  cs.closed.assign(cs.classes.size(), true);
  for (int v = 0; v < n; ++v)
    for (int w : adj[v])
      if (comp[w] != comp[v]) cs.closed[comp[v]] = false;
  return cs;
}

Eigen::RowVectorXd stationary_finite(const Eigen::MatrixXd& P) {
  const int n = static_cast<int>(P.rows());
  if (n == 0 || P.cols() != n) throw SolverError("stationary_finite: matrix must be square and nonempty");
  auto cs = communicating_classes(P);
  if (cs.closed_count() != 1) {
    std::string msg = "finite chain is reducible; closed classes:";
    for (std::size_t k = 0; k < cs.classes.size(); ++k) {
      if (!cs.closed[k]) continue;
      msg += " {";
      for (std::size_t q = 0; q < cs.classes[k].size(); ++q) msg += (q ? "," : "") + std::to_string(cs.classes[k][q]);
      msg += "}";
    }
    throw SolverError(msg);
  }
  Eigen::MatrixXd M = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  M.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) throw SolverError("stationary_finite: singular balance system");
  Eigen::RowVectorXd pi = lu.solve(rhs).transpose();
  double res = (pi * P - pi).cwiseAbs().maxCoeff();
  if (res > 1e-12) throw SolverError("stationary_finite: residual " + std::to_string(res) + " exceeds 1e-12");
  return pi;
}

Eigen::MatrixXd finite_chain_matrix(const MmrrwModel& m0) {
  if (m0.d != 0) throw ModelError("finite chain expected (dimension 0)");
  int s = m0.bg_size(Face());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(s, s);
  for (auto& [k, B] : m0.blocks) P += B;
  return P;
}

Eigen::RowVectorXd solve_finite_chain(const InducedChain& c) {
  return stationary_finite(finite_chain_matrix(c.model));
}

namespace {

Eigen::MatrixXd block_or_zero(const MmrrwModel& m, Face from, int z, Face to) {
  const Eigen::MatrixXd* p = m.find(from, Step{z}, to);
  if (p) return *p;
  return Eigen::MatrixXd::Zero(m.bg_size(from), m.bg_size(to));
}

}  // namespace

std::string check_qbd_blocks(const QbdBlocks& q) {
  auto bad = [](const Eigen::VectorXd& s) { return (s.array() - 1.0).abs().maxCoeff() > kRowSumTol; };
  const auto n0 = q.B00.rows(), n1 = q.A1.rows();
  if (q.B00.cols() != n0 || q.B01.rows() != n0 || q.B01.cols() != n1 || q.B10.rows() != n1 || q.B10.cols() != n0 ||
      q.A0.rows() != n1 || q.A0.cols() != n1 || q.A1.cols() != n1 || q.A2.rows() != n1 || q.A2.cols() != n1)
    return "block shapes are inconsistent";
  if ((q.B00.array() < 0).any() || (q.B01.array() < 0).any() || (q.B10.array() < 0).any() ||
      (q.A0.array() < 0).any() || (q.A1.array() < 0).any() || (q.A2.array() < 0).any())
    return "negative block entry";
  if (bad(q.B00.rowwise().sum() + q.B01.rowwise().sum())) return "rows of (B00 B01) do not sum to 1";
  if (bad(q.B10.rowwise().sum() + q.A1.rowwise().sum() + q.A0.rowwise().sum()))
    return "rows of (B10 A1 A0) do not sum to 1";
  if (bad(q.A2.rowwise().sum() + q.A1.rowwise().sum() + q.A0.rowwise().sum()))
    return "rows of (A2 A1 A0) do not sum to 1";
  return {};
}

QbdBlocks qbd_from_model(const MmrrwModel& m) {
  if (m.d != 1) throw ModelError("QBD assembly needs a one-dimensional chain");
  const Face E, F = Face::full(1);
  QbdBlocks q;
  q.B00 = block_or_zero(m, E, 0, E);
  q.B01 = block_or_zero(m, E, 1, F);
  q.B10 = block_or_zero(m, F, -1, E);
  q.A2 = block_or_zero(m, F, -1, F);
  q.A1 = block_or_zero(m, F, 0, F);
  q.A0 = block_or_zero(m, F, 1, F);
  if (auto msg = check_qbd_blocks(q); !msg.empty()) throw ModelError("QBD blocks incomplete: " + msg);
  return q;
}

QbdBlocks assemble_qbd(const InducedChain& c) { return qbd_from_model(c.model); }

MmrrwModel qbd_to_model(const QbdBlocks& q) {
  if (auto msg = check_qbd_blocks(q); !msg.empty()) throw ModelError("invalid QBD blocks: " + msg);
  MmrrwModel m;
  m.d = 1;
  const Face E, F = Face::full(1);
  m.bg_sizes[E] = static_cast<int>(q.B00.rows());
  m.bg_sizes[F] = static_cast<int>(q.A1.rows());
  auto put = [&](Face a, int z, Face b, const Eigen::MatrixXd& P) {
    if (P.size() && P.cwiseAbs().maxCoeff() > 0) m.add(a, Step{z}, b, P);
  };
  put(E, 0, E, q.B00);
  put(E, 1, F, q.B01);
  put(F, -1, E, q.B10);
  put(F, -1, F, q.A2);
  put(F, 0, F, q.A1);
  put(F, 1, F, q.A0);
  return m;
}

}  // namespace mmrrw
