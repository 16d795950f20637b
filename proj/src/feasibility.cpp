#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mmrrw/classify.hpp"
#include "mmrrw/lp.hpp"

namespace mmrrw {

namespace {

// Direction used by the optimizers: the drift (or its sign vector) scaled to unit length.
Eigen::VectorXd normalized(const DriftVector& v, double band) {
  Eigen::VectorXd a = v.a;
  if (v.sign_only)
    for (int l = 0; l < a.size(); ++l) a(l) = drift_sign(v, l, band);
  double n = a.norm();
  return n > 0 ? Eigen::VectorXd(a / n) : a;
}

struct Constraint {
  Eigen::VectorXd g;  // normalized drift
  int j;
};

// m_k(U) = -⟨ĝ_k, u_{j_k}⟩
double lin_margin(const Constraint& c, const Eigen::MatrixXd& U) { return -c.g.dot(U.col(c.j)); }

double true_objective(const std::vector<Constraint>& cs, const Eigen::MatrixXd& U) {
  double m = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(U, Eigen::EigenvaluesOnly).eigenvalues()(0);
  for (const auto& c : cs) m = std::min(m, lin_margin(c, U));
  return m;
}

Eigen::MatrixXd frob_project(Eigen::MatrixXd U) {
  U = 0.5 * (U + U.transpose());
  double n = U.norm();
  return n > 1.0 ? Eigen::MatrixXd(U / n) : U;
}

// Smoothed max-min ascent: F = -(1/β) log(Σ exp(-β m_k) + Σ exp(-β λ_i)).
Eigen::MatrixXd smoothed_ascent(const std::vector<Constraint>& cs, Eigen::MatrixXd U, double& best_obj) {
  const int d = static_cast<int>(U.rows());
  U = frob_project(U);
  if (U.norm() > 0) U /= U.norm();
  Eigen::MatrixXd best = U;
  best_obj = true_objective(cs, U);
  for (double beta : {10.0, 100.0, 1000.0, 10000.0}) {
    const double eta = 1.0 / beta;
    for (int it = 0; it < 60; ++it) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(U);
      std::vector<double> vals;
      vals.reserve(cs.size() + d);
      for (const auto& c : cs) vals.push_back(lin_margin(c, U));
      for (int i = 0; i < d; ++i) vals.push_back(es.eigenvalues()(i));
      double mn = *std::min_element(vals.begin(), vals.end());
      double Z = 0;
      for (double& v : vals) {
        v = std::exp(-beta * (v - mn));
        Z += v;
      }
      Eigen::MatrixXd G = Eigen::MatrixXd::Zero(d, d);
      for (std::size_t k = 0; k < cs.size(); ++k) {
        double w = vals[k] / Z;
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(d, d);
        E.col(cs[k].j) = cs[k].g;
        G -= w * 0.5 * (E + E.transpose());
      }
      for (int i = 0; i < d; ++i) {
        auto v = es.eigenvectors().col(i);
        G += (vals[cs.size() + i] / Z) * v * v.transpose();
      }
      U = frob_project(U + eta * G);
      double obj = true_objective(cs, U);
      if (obj > best_obj) {
        best_obj = obj;
        best = U;
      }
    }
  }
  return best;
}

struct KelleyResult {
  Eigen::MatrixXd U;
  double bound = std::numeric_limits<double>::infinity();
  double objective = -std::numeric_limits<double>::infinity();
};

// Cutting planes on the PSD cone: max t s.t. m_k(U) ≥ t, xᵀUx ≥ t for the
// accumulated cuts x, |U_ij| ≤ 1. The LP value bounds the max-min margin from above.
KelleyResult kelley(const std::vector<Constraint>& cs, int d, int max_iter = 120) {
  std::vector<std::pair<int, int>> vars;
  Eigen::MatrixXi idx(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      idx(i, j) = idx(j, i) = static_cast<int>(vars.size());
      vars.emplace_back(i, j);
    }
  const int nv = static_cast<int>(vars.size());
  const double M = d + 2.0;

  std::vector<Eigen::VectorXd> rows;  // coefficient c on U entries; constraint t ≤ c·U
  for (const auto& c : cs) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(nv);
    for (int i = 0; i < d; ++i) r(idx(i, c.j)) -= c.g(i);
    rows.push_back(r);
  }
  auto cut = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(nv);
    for (int v = 0; v < nv; ++v) {
      auto [i, j] = vars[v];
      r(v) = i == j ? x(i) * x(i) : 2 * x(i) * x(j);
    }
    return r;
  };
  std::vector<Eigen::VectorXd> cuts;
  for (int i = 0; i < d; ++i) {
    cuts.push_back(cut(Eigen::VectorXd::Unit(d, i)));
    for (int j = i + 1; j < d; ++j) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
      x(i) = x(j) = std::sqrt(0.5);
      cuts.push_back(cut(x));
      x(j) = -x(j);
      cuts.push_back(cut(x));
    }
  }

  KelleyResult res;
  for (int iter = 0; iter < max_iter; ++iter) {
    const int m = static_cast<int>(rows.size() + cuts.size()) + nv + 1;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, nv + 1);
    Eigen::VectorXd b(m), c = Eigen::VectorXd::Zero(nv + 1);
    c(nv) = 1.0;
    int r = 0;
    // t − c·U ≤ 0 with U = p − 1, t = τ − M
    auto put = [&](const Eigen::VectorXd& coef) {
      A.row(r).head(nv) = -coef.transpose();
      A(r, nv) = 1.0;
      b(r) = M - coef.sum();
      ++r;
    };
    for (const auto& row : rows) put(row);
    for (const auto& row : cuts) put(row);
    for (int v = 0; v < nv; ++v) {
      A(r, v) = 1.0;
      b(r++) = 2.0;
    }
    A(r, nv) = 1.0;
    b(r++) = M + 1.0;
    LpResult lp = solve_lp_max(c, A, b);
    if (lp.status != LpStatus::Optimal) break;
    Eigen::MatrixXd U(d, d);
    for (int v = 0; v < nv; ++v) {
      auto [i, j] = vars[v];
      U(i, j) = U(j, i) = lp.x(v) - 1.0;
    }
    double t = lp.x(nv) - M;
    res.bound = std::min(res.bound, t);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(U);
    double obj = true_objective(cs, U);
    if (obj > res.objective) {
      res.objective = obj;
      res.U = U;
    }
    if (t <= 0 || es.eigenvalues()(0) >= t - 1e-10) break;
    cuts.push_back(cut(es.eigenvectors().col(0)));
  }
  return res;
}

}  // namespace

UResult feasibility_U(const DriftProfile& p, const FeasibilityOptions& opt) {
  UResult out;
  const int d = p.d;
  std::vector<Constraint> cs;
  for (Face A : faces_by_size_desc(d)) {
    if (A.empty()) continue;
    Status st = p.status_of(A);
    if (st == Status::Unknown) {
      out.blocked = true;
      out.reason = "status of {" + A.key() + "} is unknown";
      return out;
    }
    if (st != Status::PositiveRecurrent) continue;
    const DriftVector* v = p.drift(A);
    if (!v) {
      out.blocked = true;
      out.reason = "no drift for positive recurrent face {" + A.key() + "}";
      return out;
    }
    Eigen::VectorXd g = normalized(*v, p.zero_band);
    if (g.norm() == 0) {
      out.reason = "a({" + A.key() + "}) vanishes";
      return out;
    }
    for (int j : A.members()) cs.push_back({g, j});
  }

  KelleyResult k = kelley(cs, d);
  out.upper_bound = k.bound;
  if (k.bound <= opt.margin_floor) {
    out.reason = "cutting-plane bound on the margin is not positive";
    out.best_margin = k.objective;
    return out;
  }

  auto try_cert = [&](const Eigen::MatrixXd& U) -> bool {
    Eigen::MatrixXd S = U / U.diagonal().maxCoeff();
    if (!(true_objective(cs, U) > opt.margin_floor * U.norm())) return false;
    CertCheck chk = verify_U(S, p);
    if (!chk.ok) return false;
    CertU c;
    c.U = S;
    c.margins = margins_U(S, p);
    c.lambda_min = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S, Eigen::EigenvaluesOnly).eigenvalues()(0);
    out.cert = c;
    return true;
  };

  Rng rng(opt.seed, 0x5eed);
  double best = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    Eigen::MatrixXd U0(d, d);
    if (r == 0 && k.U.size()) {
      U0 = k.U;
    } else if (r == 1) {
      U0.setOnes();
      U0.diagonal().setConstant(d);
    } else if (r == 2) {
      U0.setIdentity();
    } else {
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
          // Box-Muller
          double u1 = std::max(rng.uniform(), 1e-300), u2 = rng.uniform();
          U0(i, j) = U0(j, i) = std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
        }
    }
    double obj = 0;
    Eigen::MatrixXd U = smoothed_ascent(cs, U0, obj);
    best = std::max(best, obj);
    if (try_cert(U)) break;
  }
  out.best_margin = best;
  if (!out.cert) {
    std::ostringstream os;
    os << "no certificate found; best normalized margin " << best;
    out.reason = os.str();
  }
  return out;
}

WResult feasibility_W(const DriftProfile& p, Face A, double margin_floor) {
  WResult out;
  const int d = p.d;
  std::vector<Eigen::VectorXd> gs;
  for (Face B : faces_by_size_desc(d)) {
    if (!B.intersects(A)) continue;
    Status st = p.status_of(B);
    if (st == Status::Unknown) {
      out.outcome = WOutcome::BlockedByUnknown;
      out.reason = "status of {" + B.key() + "} is unknown";
      return out;
    }
    if (st != Status::PositiveRecurrent) continue;
    const DriftVector* v = p.drift(B);
    if (!v) {
      out.outcome = WOutcome::BlockedByUnknown;
      out.reason = "no drift for positive recurrent face {" + B.key() + "}";
      return out;
    }
    gs.push_back(normalized(*v, p.zero_band));
  }

  // w = q − 1, t = τ − M; maximize t subject to the sign rows and ⟨â(B), w⟩ ≥ t.
  const double M = 2.0 * d + 2.0;
  const int m = d + static_cast<int>(gs.size()) + d + 1;
  Eigen::MatrixXd Am = Eigen::MatrixXd::Zero(m, d + 1);
  Eigen::VectorXd b(m), c = Eigen::VectorXd::Zero(d + 1);
  c(d) = 1.0;
  int r = 0;
  for (int l = 0; l < d; ++l) {
    Am(r, d) = 1.0;
    if (A.contains(l)) {
      Am(r, l) = -1.0;
      b(r) = M - 1.0;
    } else {
      Am(r, l) = 1.0;
      b(r) = M + 1.0;
    }
    ++r;
  }
  for (const auto& g : gs) {
    Am.row(r).head(d) = -g.transpose();
    Am(r, d) = 1.0;
    b(r) = M - g.sum();
    ++r;
  }
  for (int l = 0; l < d; ++l) {
    Am(r, l) = 1.0;
    b(r++) = 2.0;
  }
  Am(r, d) = 1.0;
  b(r++) = M + 1.0;

  LpResult lp = solve_lp_max(c, Am, b);
  if (lp.status != LpStatus::Optimal) {
    out.reason = "LP did not reach an optimum";
    return out;
  }
  out.margin = lp.x(d) - M;
  if (out.margin <= margin_floor) {
    out.reason = "max-margin LP value is not positive";
    return out;
  }
  Eigen::VectorXd w = lp.x.head(d).array() - 1.0;
  CertCheck chk = verify_W(A, w, p);
  if (!chk.ok) {
    out.reason = "LP solution failed verification: " + chk.violations.front();
    return out;
  }
  CertW cert;
  cert.face = A;
  cert.w = w;
  cert.margins = margins_W(A, w, p);
  out.cert = cert;
  out.outcome = WOutcome::Certified;
  return out;
}

StabilityVerdict classify_by_feasibility(const DriftProfile& p, const FeasibilityOptions& opt) {
  StabilityVerdict v;
  UResult u = feasibility_U(p, opt);
  std::vector<CertW> ws;
  std::vector<std::string> blocked;
  for (Face A : faces_by_size_desc(p.d)) {
    if (A.empty()) continue;
    WResult w = feasibility_W(p, A, opt.margin_floor);
    if (w.outcome == WOutcome::Certified) {
      ws.push_back(*w.cert);
      v.certifying_faces.push_back(A);
    } else if (w.outcome == WOutcome::BlockedByUnknown) {
      blocked.push_back("{" + A.key() + "}");
    }
  }
  if (u.cert && !ws.empty())
    throw SolverError("both a U and a W_{" + ws.front().face.key() + "} certificate exist; drift profile is inconsistent");
  if (u.cert) {
    v.verdict = Verdict::PositiveRecurrent;
    v.rule = "U-feasibility";
    v.certificate = *u.cert;
  } else if (!ws.empty()) {
    v.verdict = Verdict::Transient;
    v.rule = "W-feasibility";
    v.certificate = ws.front();
  } else {
    v.verdict = Verdict::Unknown;
    v.rule = "feasibility-inconclusive";
    v.certifying_faces.clear();
    if (u.blocked) v.caveats.push_back("U search blocked: " + u.reason);
    else v.caveats.push_back("U search: " + u.reason);
    if (!blocked.empty()) {
      std::string s = "W search blocked by unknown statuses for";
      for (auto& b : blocked) s += " " + b;
      v.caveats.push_back(s);
    }
  }
  return v;
}

}  // namespace mmrrw
