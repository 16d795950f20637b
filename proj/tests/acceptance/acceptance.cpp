// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mmrrw/report.hpp"
#include "mmrrw/truncated.hpp"
#include "support.hpp"

using namespace mmrrw;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void fail(const std::string& why) {
    if (pass) detail << why;
    pass = false;
  }
};

const Face N2 = Face::full(2), N3 = Face::full(3);

// ---- 1 ----------------------------------------------------------------------------

void criterion1(Outcome& o) {
  MmrrwModel m = three_queue_mmrrw(1, 2, 1, 9.0);
  QbdStationary st = qbd_stationary(assemble_qbd(project(m, Face::of({0, 1}))));
  double worst = std::max(std::abs(st.pi0(0) - 1.0 / 3), std::abs(st.pi0(1) - 1.0 / 3));
  for (int k = 1; k <= 60; ++k) worst = std::max(worst, std::abs(st.level(k)(0) - std::pow(0.5, k) / 3));
  Eigen::VectorXd aN = induced_drift(m, N3).a;
  double aerr = (aN.array() + 1.0 / 9).abs().maxCoeff();
  double a1err = std::abs(induced_drift(m, Face::of({0, 1})).a(0) + 1.0 / 27);
  o.detail << "law err " << worst << ", a(N) err " << aerr << ", a1({1,2}) err " << a1err;
  if (worst > 1e-10) o.fail("; stationary law off");
  if (aerr > 1e-12) o.fail("; a(N) off");
  if (a1err > 1e-12) o.fail("; a1({1,2}) off");
}

// ---- 2 ----------------------------------------------------------------------------

void criterion2(Outcome& o) {
  struct Case {
    double delta;
    Verdict v;
    std::string rule;
    double product;  // 0 when not a spiral
  };
  for (const Case& c : {Case{2.0, Verdict::PositiveRecurrent, "Table1-C1-1-1", 0},
                        Case{1.0, Verdict::PositiveRecurrent, "Table1-C1-7-1", std::pow(3.0 / 7, 3)},
                        Case{0.3, Verdict::Transient, "Table1-C1-7-1", std::pow(13.0 / 7, 3)}}) {
    StabilityVerdict v = classify_auto(three_queue_mmrrw(2, 2.5, c.delta));
    o.detail << "delta " << c.delta << ": " << to_string(v.verdict) << " " << v.rule;
    if (v.verdict != c.v || v.rule != c.rule) o.fail(" <- wrong verdict");
    if (c.product > 0) {
      o.detail << " product " << (v.spiral_product ? *v.spiral_product : -1);
      if (!v.spiral_product || std::abs(*v.spiral_product - c.product) > 1e-9 * c.product) o.fail(" <- wrong product");
    }
    if (!v.certificate) {
      o.fail(" <- no certificate");
    } else {
      CertCheck chk = verify_certificate(*v.certificate, *v.profile);
      o.detail << " margin " << chk.min_margin << "; ";
      if (!chk.ok || !(chk.min_margin > 0)) o.fail(" <- certificate does not verify");
    }
  }
}

// ---- 3 ----------------------------------------------------------------------------

void criterion3(Outcome& o) {
  std::mt19937_64 rng(314);
  int used = 0, tries = 0;
  double worst_res = 0, worst_tv = 0;
  while (used < 50 && tries < 5000) {
    ++tries;
    int m0 = 1 + static_cast<int>(rng() % 6), m = 1 + static_cast<int>(rng() % 6);
    QbdBlocks q = oracle::random_qbd(rng, m0, m);
    if (qbd_mean_drift(q) >= -1e-3) continue;
    RSolution R = compute_R(q);
    if (R.spectral_radius > 0.7) continue;
    ++used;
    worst_res = std::max(worst_res, fixed_point_residual(q, R.R));
    QbdStationary st = qbd_stationary(q);
    TruncatedSolution tr = truncated_stationary(qbd_to_model(q), 60);
    double tv = 0;
    for (int i = 0; i < m0; ++i) tv += std::abs(st.pi0(i) - tr.prob({0}, i));
    for (int k = 1; k <= 20; ++k) {
      Eigen::RowVectorXd lk = st.level(k);
      for (int i = 0; i < m; ++i) tv += std::abs(lk(i) - tr.prob({k}, i));
    }
    worst_tv = std::max(worst_tv, 0.5 * tv);
  }
  o.detail << used << " QBDs, max residual " << worst_res << ", max TV " << worst_tv;
  if (used < 50) o.fail("; not enough stable QBDs generated");
  if (worst_res > 1e-12) o.fail("; residual too large");
  if (worst_tv > 1e-8) o.fail("; TV too large");
}

// ---- 4 ----------------------------------------------------------------------------

struct Walk2 {
  MmrrwModel model;
  std::map<Face, std::map<Step, double>> steps;
};

Walk2 random_walk_2d(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0, 1);
  Walk2 w;
  for (Face A : faces_by_size_desc(2)) {
    std::vector<std::pair<Step, double>> cand;
    for (int z1 = -1; z1 <= 1; ++z1)
      for (int z2 = -1; z2 <= 1; ++z2) {
        if ((z1 < 0 && !A.contains(0)) || (z2 < 0 && !A.contains(1))) continue;
        if (U(rng) < 0.3) continue;  // sparse supports
        cand.push_back({Step{z1, z2}, U(rng)});
      }
    double s = 0.2 + U(rng);  // leaves some mass on staying put
    for (auto& c : cand) s += c.second;
    auto& sa = w.steps[A];
    for (auto& c : cand) sa[c.first] += c.second / s;
  }
  w.model = orthant_walk(2, w.steps);
  return w;
}

double mean_move(const std::map<Step, double>& s, int l) {
  double m = 0;
  for (const auto& [z, p] : s) m += p * z[l];
  return m;
}

double prob_move(const std::map<Step, double>& s, int l, int dir) {
  double m = 0;
  for (const auto& [z, p] : s)
    if (z[l] == dir) m += p;
  return m;
}

// Face drift of {k} from the birth-death chain of the other coordinate; nullopt if not PR.
std::optional<double> face_drift(const Walk2& w, int k) {
  const int o = 1 - k;
  const auto& sN = w.steps.at(N2);
  const auto& sF = w.steps.at(Face::of({k}));
  double u = prob_move(sN, o, 1), v = prob_move(sN, o, -1), q0 = prob_move(sF, o, 1);
  if (!(u < v)) return std::nullopt;
  double p0 = oracle::bd_pi0(q0, u, v);
  return p0 * mean_move(sF, k) + (1 - p0) * mean_move(sN, k);
}

bool independent_check(const Certificate& c, const std::map<Face, Eigen::Vector2d>& a) {
  if (const auto* u = std::get_if<CertU>(&c)) {
    const Eigen::MatrixXd& U = u->U;
    if ((U - U.transpose()).cwiseAbs().maxCoeff() > 1e-12) return false;
    if (Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(U).eigenvalues()(0) <= 0) return false;
    for (const auto& [A, v] : a)
      for (int j : A.members())
        if (!(v.dot(U.col(j)) < 0)) return false;
    return true;
  }
  if (const auto* w = std::get_if<CertW>(&c)) {
    for (int l = 0; l < 2; ++l)
      if (!((w->face.contains(l) ? w->w(l) : -w->w(l)) > 0)) return false;
    for (const auto& [B, v] : a)
      if (B.intersects(w->face) && !(v.dot(w->w) > 0)) return false;
    return true;
  }
  return false;
}

void criterion4(Outcome& o) {
  std::mt19937_64 rng(4242);
  int done = 0, tries = 0, mismatches = 0, bad_certs = 0;
  std::map<std::string, int> seen;
  while (done < 200 && tries < 100000) {
    ++tries;
    Walk2 w = random_walk_2d(rng);
    const double a1 = mean_move(w.steps.at(N2), 0), a2 = mean_move(w.steps.at(N2), 1);
    if (std::abs(a1) < 1e-3 || std::abs(a2) < 1e-3) continue;
    auto s1 = face_drift(w, 0), s2 = face_drift(w, 1);
    if ((s1 && std::abs(*s1) < 1e-3) || (s2 && std::abs(*s2) < 1e-3)) continue;
    if (validate_model(w.model).ok() == false) continue;
    // expected verdict straight from the case table
    Verdict want;
    std::string cs;
    if (a1 < 0 && a2 < 0) {
      want = (*s1 < 0 && *s2 < 0) ? Verdict::PositiveRecurrent : Verdict::Transient;
      cs = want == Verdict::PositiveRecurrent ? "C1a" : "C1b";
    } else if (a1 > 0 && a2 < 0) {
      want = *s1 < 0 ? Verdict::PositiveRecurrent : Verdict::Transient;
      cs = *s1 < 0 ? "C2a" : "C2b";
    } else if (a1 < 0 && a2 > 0) {
      want = *s2 < 0 ? Verdict::PositiveRecurrent : Verdict::Transient;
      cs = *s2 < 0 ? "C3a" : "C3b";
    } else {
      want = Verdict::Transient;
      cs = "C4";
    }
    ++done;
    ++seen[cs];
    StabilityVerdict v = classify_auto(w.model);
    if (v.verdict != want || v.rule != "2D-" + cs) ++mismatches;
    std::map<Face, Eigen::Vector2d> drifts{{N2, Eigen::Vector2d(a1, a2)}};
    if (s1) drifts[Face::of({0})] = Eigen::Vector2d(*s1, 0);
    if (s2) drifts[Face::of({1})] = Eigen::Vector2d(0, *s2);
    if (!v.certificate || !independent_check(*v.certificate, drifts)) ++bad_certs;
  }
  o.detail << done << " walks, cases";
  for (const auto& [k, n] : seen) o.detail << " " << k << ":" << n;
  o.detail << ", mismatches " << mismatches << ", failed certificates " << bad_certs;
  if (done < 200) o.fail("; not enough walks");
  if (mismatches) o.fail("; verdict mismatch");
  if (bad_certs) o.fail("; certificate failed independent check");
}

// ---- 5 ----------------------------------------------------------------------------

void criterion5(Outcome& o) {
  std::mt19937_64 rng(555);
  int instances = 0, certified = 0, disagreements = 0, both = 0;
  FeasibilityOptions fo;
  for (const auto& row : table_rows()) {
    for (int draw = 0; draw < 3; ++draw) {
      std::array<int, 3> perm{0, 1, 2};
      std::shuffle(perm.begin(), perm.end(), rng);
      DriftProfile p = oracle::table_profile(row, rng, perm);
      ++instances;
      StabilityVerdict t = classify_3d(p, fo);
      bool u = feasibility_U(p, fo).cert.has_value();
      bool w = false;
      for (Face A : faces_by_size_desc(3))
        if (!A.empty() && feasibility_W(p, A).outcome == WOutcome::Certified) w = true;
      if (u && w) ++both;
      if (u || w) {
        ++certified;
        Verdict f = u ? Verdict::PositiveRecurrent : Verdict::Transient;
        if (t.verdict != f) {
          ++disagreements;
          o.detail << "[" << row.id << " draw " << draw << "] ";
        }
      }
    }
  }
  o.detail << instances << " instances, " << certified << " certified by the search, " << disagreements
           << " disagreements, " << both << " with both U and W";
  if (disagreements) o.fail("; table and search disagree");
  if (both) o.fail("; U and W both certified");
}

// ---- 6 ----------------------------------------------------------------------------

DriftProfile spiral_profile(std::mt19937_64& rng, bool stable) {
  std::uniform_real_distribution<double> U(0.05, 1.0), L(-1.5, 1.5);
  std::map<Face, std::vector<double>> d;
  d[N3] = {-U(rng), -U(rng), -U(rng)};
  // target log product inside (−3, −0.05) or (0.05, 3)
  double lp = (stable ? -1 : 1) * (0.05 + 2.95 * std::abs(L(rng)) / 1.5);
  double x0 = L(rng), x1 = L(rng), x2 = lp - x0 - x1;
  const double ratios[3] = {std::exp(x0), std::exp(x1), std::exp(x2)};
  std::array<int, 3> perm{0, 1, 2};
  std::shuffle(perm.begin(), perm.end(), rng);
  for (int t = 0; t < 3; ++t) {
    std::vector<double> v(3, 0.0);
    double neg = U(rng);
    v[perm[t]] = -neg;
    v[perm[(t + 1) % 3]] = ratios[t] * neg;
    d[Face::of({perm[t], perm[(t + 1) % 3]})] = v;
  }
  return oracle::make_profile(3, d);
}

// Frame drift a_c(F_t) with F_t = {t, t+1} in frame coordinates.
double fd(const DriftProfile& p, const std::array<int, 3>& s, int t, int c) {
  return p.drift(Face::of({s[t], s[(t + 1) % 3]}))->a(s[c]);
}

bool check_transient(const SpiralTransientCert& c, const DriftProfile& p, std::string& why) {
  const auto& s = c.perm;
  double c1 = c.c1, c2 = c.c2, c3 = c.c3, c0 = c.c0;
  // ratio bounds on c2, c3
  if (!(c2 > 0 && c2 < fd(p, s, 0, 1) / -fd(p, s, 0, 0))) return why = "c2 bound", false;
  if (!(c3 / c2 > 0 && c3 / c2 < fd(p, s, 1, 2) / -fd(p, s, 1, 1))) return why = "c3/c2 bound", false;
  if (!(1 / c3 > 0 && 1 / c3 < fd(p, s, 2, 0) / -fd(p, s, 2, 2))) return why = "1/c3 bound", false;
  Eigen::Vector3d w[3] = {Eigen::Vector3d(1, 1 / c2, 1 / c3 - c0) / c1, Eigen::Vector3d(1 - c0, 1 / c2, 1 / c3) / c1,
                          Eigen::Vector3d(1, 1 / c2 - c0, 1 / c3) / c1};
  const Eigen::Vector3d* given[3] = {&c.w12, &c.w23, &c.w31};
  Eigen::Vector3d aN;
  for (int t = 0; t < 3; ++t) aN(t) = p.drift(N3)->a(s[t]);
  double eps = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 3; ++t) {
    Eigen::Vector3d aF(fd(p, s, t, 0), fd(p, s, t, 1), fd(p, s, t, 2));
    double f1 = aF.dot(w[t]), f2 = aN.dot(w[t]);
    if (!(f1 > 0 && f2 > 0)) return why = "f_A not positive", false;
    eps = std::min({eps, f1, f2});
    Eigen::Vector3d wm;
    for (int k = 0; k < 3; ++k) wm(s[k]) = w[t](k);
    if ((wm - *given[t]).cwiseAbs().maxCoeff() > 1e-9 * (1 + wm.cwiseAbs().maxCoeff())) return why = "w mismatch", false;
  }
  if (!(c.eps0 > 0) || std::abs(c.eps0 - eps) > 1e-9 * eps) return why = "eps0", false;
  return true;
}

bool check_positive(const SpiralPositiveCert& c, const DriftProfile& p, std::string& why) {
  const auto& s = c.perm;
  Eigen::Matrix3d U;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) U(a, b) = c.U(s[a], s[b]);
  double r[3];
  for (int t = 0; t < 3; ++t) r[t] = -fd(p, s, t, (t + 1) % 3) / fd(p, s, t, t);
  // r12 u22 < u12 < u11 / r12 and cyclic
  for (int t = 0; t < 3; ++t) {
    int a = t, b = (t + 1) % 3;
    if (!(r[t] * U(b, b) < U(a, b) && U(a, b) < U(a, a) / r[t])) return why = "double inequality", false;
  }
  if (!(U(0, 0) * U(1, 1) - U(0, 1) * U(0, 1) > 0 && U.determinant() > 0)) return why = "minors", false;
  if (Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(U).eigenvalues()(0) <= 0) return why = "not PD", false;
  for (Face A : faces_by_size_desc(3)) {
    const DriftVector* v = p.drift(A);
    if (!v) continue;
    for (int j : A.members())
      if (!(v->a.dot(c.U.col(j)) < 0)) return why = "drift inner product", false;
  }
  return true;
}

void criterion6(Outcome& o) {
  std::mt19937_64 rng(66);
  int okT = 0, okP = 0;
  std::string why;
  for (int k = 0; k < 20; ++k) {
    DriftProfile p = spiral_profile(rng, false);
    try {
      if (check_transient(spiral_transience_certificate(p), p, why)) ++okT;
      else o.fail("transient check failed: " + why + "; ");
    } catch (const std::exception& e) {
      o.fail(std::string("transient construction threw: ") + e.what() + "; ");
    }
    DriftProfile q = spiral_profile(rng, true);
    try {
      if (check_positive(spiral_lyapunov_matrix(q), q, why)) ++okP;
      else o.fail("positive check failed: " + why + "; ");
    } catch (const std::exception& e) {
      o.fail(std::string("positive construction threw: ") + e.what() + "; ");
    }
  }
  o.detail << okT << "/20 transient, " << okP << "/20 positive";
}

// ---- 7 ----------------------------------------------------------------------------

void criterion7(Outcome& o) {
  DiagnosticParams dp;
  dp.reps = 200;
  dp.horizon = 1000000;
  dp.seed = 7;
  Diagnostic s = recurrence_diagnostic(three_queue_mmrrw(1, 2, 1), dp);
  o.detail << "(1,2,1): " << s.call << " returns " << s.return_fraction << " mean return time " << s.mean_return_time;
  if (!(s.call == "stable-like" && s.return_fraction >= 0.99)) o.fail(" <- not stable-like");
  Diagnostic t = recurrence_diagnostic(three_queue_mmrrw(2, 2.5, 0.3), dp);
  o.detail << "; (2,2.5,0.3): " << t.call << " slope " << t.slope_mean << " +- " << t.slope_ci;
  if (!(t.call == "transient-like" && t.slope_mean - t.slope_ci > 0)) o.fail(" <- not transient-like");

  MmrrwModel m = three_queue_mmrrw(1, 2, 1);
  const long long T = 20000;
  PathState deep{{int(T) + 1, int(T) + 1, int(T) + 1}, 0};
  GEstimate g = estimate_g(m, deep, T, 200, 77);
  Eigen::VectorXd aN = induced_drift(m, N3).a;
  double worst = 0;
  for (int l = 0; l < 3; ++l) worst = std::max(worst, std::abs(g.mean(l) - aN(l)) / (g.ci_halfwidth(l) / 1.96));
  o.detail << "; g vs a(N) max " << worst << " sigma";
  if (!(worst <= 4)) o.fail(" <- g off by more than 4 sigma");
}

// ---- 8 ----------------------------------------------------------------------------

Certificate permute_cert(const Certificate& c, const std::vector<int>& sigma) {
  auto pm = [&](const Eigen::MatrixXd& U) {
    Eigen::MatrixXd V(U.rows(), U.cols());
    for (int a = 0; a < U.rows(); ++a)
      for (int b = 0; b < U.cols(); ++b) V(sigma[a], sigma[b]) = U(a, b);
    return V;
  };
  auto pv = [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd v(w.size());
    for (int a = 0; a < w.size(); ++a) v(sigma[a]) = w(a);
    return v;
  };
  auto pf = [&](const std::vector<Face>& fs) {
    std::vector<Face> out;
    for (Face f : fs) out.push_back(oracle::permute_face(f, sigma));
    return out;
  };
  auto pp = [&](std::array<int, 3> s) {
    for (int& x : s) x = sigma[x];
    return s;
  };
  return std::visit(
      [&](const auto& x) -> Certificate {
        using T = std::decay_t<decltype(x)>;
        T y = x;
        if constexpr (std::is_same_v<T, CertU>) {
          y.U = pm(x.U);
          y.null_faces = pf(x.null_faces);
        } else if constexpr (std::is_same_v<T, CertW>) {
          y.face = oracle::permute_face(x.face, sigma);
          y.w = pv(x.w);
          y.null_faces = pf(x.null_faces);
        } else if constexpr (std::is_same_v<T, SpiralPositiveCert>) {
          y.U = pm(x.U);
          y.perm = pp(x.perm);
        } else {
          y.w12 = pv(x.w12);
          y.w23 = pv(x.w23);
          y.w31 = pv(x.w31);
          y.perm = pp(x.perm);
        }
        return y;
      },
      c);
}

void criterion8(Outcome& o) {
  std::mt19937_64 rng(88);
  std::uniform_real_distribution<double> U(0, 1);
  int models = 0, nu_bad = 0, scale_bad = 0, perm_bad = 0;
  ClassifyOptions opt;
  auto check = [&](const CtmcModel& c, double nu) {
    ++models;
    StabilityVerdict a = classify_auto(uniformize(c, nu), opt);
    StabilityVerdict b = classify_auto(uniformize(c, 2 * nu), opt);
    if (a.verdict != b.verdict || a.rule != b.rule) ++nu_bad;
    const double k = std::exp(4 * U(rng) - 2);
    if (classify_profile(oracle::scaled(*a.profile, k), opt).verdict != a.verdict) ++scale_bad;
    std::vector<int> sigma(a.profile->d);
    std::iota(sigma.begin(), sigma.end(), 0);
    do std::shuffle(sigma.begin(), sigma.end(), rng);
    while (a.profile->d > 1 && std::is_sorted(sigma.begin(), sigma.end()));
    StabilityVerdict pvv = classify_auto(oracle::permuted(uniformize(c, nu), sigma), opt);
    bool ok = pvv.verdict == a.verdict;
    if (ok && a.certificate) ok = verify_certificate(permute_cert(*a.certificate, sigma), *pvv.profile).ok;
    if (!ok) ++perm_bad;
  };
  // three-queue networks away from the regime boundaries
  int tq = 0;
  while (tq < 20) {
    double mu = 1 + 2 * U(rng), lambda = mu * (0.2 + 0.7 * U(rng)), delta = 0.1 + 3 * U(rng);
    auto f = three_queue_closed_form(lambda, mu, delta);
    if (std::abs(f.successor_rate) < 0.1 * mu || std::abs(std::log(std::abs(f.ratio))) < 0.2) continue;
    ++tq;
    check(three_queue_ctmc(lambda, mu, delta), three_queue_default_nu(lambda, mu, delta));
  }
  // random two-dimensional walks read as rate models
  int w2 = 0;
  while (w2 < 30) {
    Walk2 w = random_walk_2d(rng);
    const double a1 = mean_move(w.steps.at(N2), 0), a2 = mean_move(w.steps.at(N2), 1);
    if (std::abs(a1) < 1e-3 || std::abs(a2) < 1e-3) continue;
    auto s1 = face_drift(w, 0), s2 = face_drift(w, 1);
    if ((s1 && std::abs(*s1) < 1e-3) || (s2 && std::abs(*s2) < 1e-3)) continue;
    ++w2;
    CtmcModel c{w.model};
    check(c, 1.0);
  }
  o.detail << models << " models; nu mismatches " << nu_bad << ", scale mismatches " << scale_bad
           << ", relabeling mismatches " << perm_bad;
  if (nu_bad || scale_bad || perm_bad) o.fail("; invariance broken");
}

}  // namespace

int main() {
  struct Crit {
    int id;
    const char* name;
    double limit_s;
    std::function<void(Outcome&)> run;
  };
  std::vector<Crit> crits = {
      {1, "three-queue closed form", 1, criterion1},
      {2, "regime sweep", 10, criterion2},
      {3, "QBD correctness", 30, criterion3},
      {4, "2D case-rule conformance", 10, criterion4},
      {5, "3D table/feasibility agreement", 120, criterion5},
      {6, "spiral certificates", 10, criterion6},
      {7, "empirical consistency", 300, criterion7},
      {8, "invariance suite", 60, criterion8},
  };
  int failed = 0;
  for (auto& c : crits) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.limit_s) o.fail("; runtime over " + std::to_string(c.limit_s) + " s");
    if (!o.pass) ++failed;
    std::printf("%s criterion %d: %s (%.2f s, limit %.0f s) %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                c.limit_s, o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
