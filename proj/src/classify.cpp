#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mmrrw/classify.hpp"

namespace mmrrw {

// ---- two dimensions ---------------------------------------------------------

Case2D case_2d(const DriftProfile& p) {
  const Face N = Face::full(2), F1 = Face::of({0}), F2 = Face::of({1});
  const int a1 = p.sign(N, 0), a2 = p.sign(N, 1);
  auto s1 = [&] { return p.status_of(F1) == Status::PositiveRecurrent ? p.sign(F1, 0) : 0; };
  auto s2 = [&] { return p.status_of(F2) == Status::PositiveRecurrent ? p.sign(F2, 1) : 0; };
  if (a1 < 0 && a2 < 0) {
    if (s1() > 0 || s2() > 0) return Case2D::C1b;
    if (s1() < 0 && s2() < 0) return Case2D::C1a;
    return Case2D::Undecided;
  }
  if (a1 > 0 && a2 < 0) return s1() < 0 ? Case2D::C2a : s1() > 0 ? Case2D::C2b : Case2D::Undecided;
  if (a1 < 0 && a2 > 0) return s2() < 0 ? Case2D::C3a : s2() > 0 ? Case2D::C3b : Case2D::Undecided;
  if (a1 > 0 && a2 > 0) return Case2D::C4;
  if (a1 == 0 && a2 < 0) return s1() < 0 ? Case2D::RemarkC2a : s1() > 0 ? Case2D::RemarkC2b : Case2D::Undecided;
  if (a1 < 0 && a2 == 0) return s2() < 0 ? Case2D::RemarkC3a : s2() > 0 ? Case2D::RemarkC3b : Case2D::Undecided;
  if ((a1 > 0 && a2 == 0) || (a1 == 0 && a2 > 0)) return Case2D::RemarkTransient;
  return Case2D::Undecided;
}

std::string rule_2d(Case2D c) {
  switch (c) {
    case Case2D::C1a: return "2D-C1a";
    case Case2D::C1b: return "2D-C1b";
    case Case2D::C2a: return "2D-C2a";
    case Case2D::C2b: return "2D-C2b";
    case Case2D::C3a: return "2D-C3a";
    case Case2D::C3b: return "2D-C3b";
    case Case2D::C4: return "2D-C4";
    case Case2D::RemarkC2a: return "2D-zero-drift-C2a";
    case Case2D::RemarkC2b: return "2D-zero-drift-C2b";
    case Case2D::RemarkC3a: return "2D-zero-drift-C3a";
    case Case2D::RemarkC3b: return "2D-zero-drift-C3b";
    case Case2D::RemarkTransient: return "2D-zero-drift-transient";
    default: return "2D-undecided";
  }
}

namespace {

// u11 = 1, u12 = 2r, u22 doubled until u12 < u22 / r and u11 u22 > u12² (roles of
// the coordinates swapped when `second` is set).
Eigen::MatrixXd one_sided_u(double r, bool second) {
  double u12 = 2 * r, u22 = 1;
  while (!(u12 < u22 / r && u22 > u12 * u12)) u22 *= 2;
  Eigen::MatrixXd U(2, 2);
  if (!second) U << 1, u12, u12, u22;
  else U << u22, u12, u12, 1;
  return U;
}

std::vector<Face> null_faces_2d(const DriftProfile& p, Case2D c) {
  const Face N = Face::full(2);
  switch (c) {
    case Case2D::RemarkC2a:
    case Case2D::RemarkC2b: return {Face::of({1})};
    case Case2D::RemarkC3a:
    case Case2D::RemarkC3b: return {Face::of({0})};
    case Case2D::RemarkTransient: return {p.sign(N, 1) == 0 ? Face::of({0}) : Face::of({1})};
    default: return {};
  }
}

}  // namespace

Certificate certificate_2d(const DriftProfile& p, Case2D c) {
  const Face N = Face::full(2);
  const DriftVector* vN = p.drift(N);
  if (!vN) throw ModelError("certificate_2d: a(N) missing");
  const double a1 = vN->a(0), a2 = vN->a(1);
  auto nulls = null_faces_2d(p, c);
  Certificate cert;
  auto make_u = [&](Eigen::MatrixXd U) {
    CertU u;
    u.U = std::move(U);
    u.null_faces = nulls;
    u.margins = margins_U(u.U, p, nulls);
    u.lambda_min = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(u.U, Eigen::EigenvaluesOnly).eigenvalues()(0);
    return u;
  };
  auto make_w = [&](Face A, double w1, double w2) {
    CertW w;
    w.face = A;
    w.w = Eigen::Vector2d(w1, w2);
    w.null_faces = nulls;
    w.margins = margins_W(A, w.w, p, nulls);
    return w;
  };
  switch (c) {
    case Case2D::C1a: {
      Eigen::MatrixXd U(2, 2);
      U << 1, 0.5, 0.5, 1;
      cert = make_u(U);
      break;
    }
    case Case2D::C1b:
      if (p.sign(Face::of({0}), 0) > 0) cert = make_w(Face::of({0}), 1, -a1 / a2 - 0.25);
      else cert = make_w(Face::of({1}), -a2 / a1 - 0.25, 1);
      break;
    case Case2D::C2a: cert = make_u(one_sided_u(-a1 / a2, false)); break;
    case Case2D::C3a: cert = make_u(one_sided_u(-a2 / a1, true)); break;
    case Case2D::RemarkC2a: cert = make_u(one_sided_u(std::max(std::abs(a1), 1e-9) / std::abs(a2), false)); break;
    case Case2D::RemarkC3a: cert = make_u(one_sided_u(std::max(std::abs(a2), 1e-9) / std::abs(a1), true)); break;
    case Case2D::C2b:
    case Case2D::RemarkC2b: cert = make_w(Face::of({0}), 1, -1); break;
    case Case2D::C3b:
    case Case2D::RemarkC3b: cert = make_w(Face::of({1}), -1, 1); break;
    case Case2D::C4:
    case Case2D::RemarkTransient: cert = make_w(N, 1, 1); break;
    default: throw SolverError("certificate_2d: case is undecided");
  }
  CertCheck chk = verify_certificate(cert, p);
  if (!chk.ok) {
    std::ostringstream os;
    os << "certificate_2d: " << rule_2d(c) << " construction failed verification: " << chk.violations.front();
    throw SolverError(os.str());
  }
  return cert;
}

StabilityVerdict classify_2d(const DriftProfile& p) {
  if (p.d != 2) throw ModelError("classify_2d: profile is not two-dimensional");
  if (!p.drift(Face::full(2))) throw ModelError("classify_2d: a(N) missing");
  StabilityVerdict v;
  Case2D c = case_2d(p);
  v.rule = rule_2d(c);
  if (c == Case2D::Undecided) {
    const Face N = Face::full(2);
    if (p.sign(N, 0) == 0 && p.sign(N, 1) == 0) v.caveats.push_back("a(N) = 0: not covered by the two-dimensional case rules");
    else v.caveats.push_back("a tested drift lies within the zero band");
    return v;
  }
  switch (c) {
    case Case2D::C1a:
    case Case2D::C2a:
    case Case2D::C3a:
    case Case2D::RemarkC2a:
    case Case2D::RemarkC3a: v.verdict = Verdict::PositiveRecurrent; break;
    default: v.verdict = Verdict::Transient;
  }
  v.certificate = certificate_2d(p, c);
  if (auto* w = std::get_if<CertW>(&*v.certificate)) v.certifying_faces.push_back(w->face);
  for (Face f : null_faces_2d(p, c))
    v.caveats.push_back("face {" + f.key() + "} has zero interior drift and is read as not positive recurrent");
  return v;
}

// ---- profile construction ------------------------------------------------------

std::pair<Face, DriftVector> parse_assume_sign(const std::string& text, int d) {
  auto eq = text.find('=');
  if (eq == std::string::npos) throw ModelError("--assume-sign expects FACE=SIGNS, got '" + text + "'");
  Face A = Face::parse(text.substr(0, eq), d);
  if (A.empty()) throw ModelError("--assume-sign: empty face");
  std::vector<int> signs;
  std::stringstream ss(text.substr(eq + 1));
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "+" || tok == "+1") signs.push_back(1);
    else if (tok == "-" || tok == "-1") signs.push_back(-1);
    else if (tok == "0") signs.push_back(0);
    else throw ModelError("--assume-sign: bad sign '" + tok + "' (use +, - or 0)");
  }
  DriftVector v;
  v.face = A;
  v.exact = false;
  v.sign_only = true;
  v.a = Eigen::VectorXd::Zero(d);
  auto mem = A.members();
  if (static_cast<int>(signs.size()) == A.size()) {
    for (std::size_t k = 0; k < mem.size(); ++k) v.a(mem[k]) = signs[k];
  } else if (static_cast<int>(signs.size()) == d) {
    for (int l = 0; l < d; ++l) {
      if (!A.contains(l) && signs[l] != 0)
        throw ModelError("--assume-sign: drift of {" + A.key() + "} must vanish outside the face");
      v.a(l) = signs[l];
    }
  } else {
    throw ModelError("--assume-sign: expected " + std::to_string(A.size()) + " or " + std::to_string(d) + " signs");
  }
  return {A, v};
}

namespace {

std::uint64_t face_seed(std::uint64_t seed, Face A) { return mix64(seed ^ (0x9e3779b97f4a7c15ULL * (A.mask() + 1))); }

// Overrides of the parent restated for the induced chain of A.
std::map<Face, DriftVector> induced_overrides(const std::map<Face, DriftVector>& over, const InducedChain& c) {
  std::map<Face, DriftVector> out;
  for (const auto& [B, v] : over) {
    if (!c.removed.subset_of(B) || B == c.removed) continue;
    Face local;
    DriftVector lv = v;
    lv.a = Eigen::VectorXd::Zero(c.model.d);
    for (int k = 0; k < c.model.d; ++k) {
      if (B.contains(c.coord_map[k])) local = local.with(k);
      lv.a(k) = v.a(c.coord_map[k]);
    }
    lv.face = local;
    out[local] = lv;
  }
  return out;
}

Status status_from_verdict(Verdict v) {
  switch (v) {
    case Verdict::PositiveRecurrent: return Status::PositiveRecurrent;
    case Verdict::Transient: return Status::NotPositiveRecurrent;
    default: return Status::Unknown;
  }
}

Status face_status(const MmrrwModel& m, Face A, const ClassifyOptions& opt, std::vector<std::string>* caveats) {
  if (A.size() == m.d) return Status::PositiveRecurrent;
  InducedChain c = project(m, A);
  if (A.size() == m.d - 1) {
    switch (qbd_recurrence(assemble_qbd(c), opt.zero_band)) {
      case QbdRecurrence::PositiveRecurrent: return Status::PositiveRecurrent;
      case QbdRecurrence::NotPositiveRecurrent: return Status::NotPositiveRecurrent;
      default:
        if (caveats) caveats->push_back("induced chain of {" + A.key() + "} has null-boundary drift");
        return Status::Unknown;
    }
  }
  ClassifyOptions sub = opt;
  sub.seed = face_seed(opt.seed, A);
  sub.assume_sign = induced_overrides(opt.assume_sign, c);
  StabilityVerdict v = classify_auto(c.model, sub);
  if (caveats && v.verdict == Verdict::Unknown)
    caveats->push_back("induced chain of {" + A.key() + "} is unclassified (" + v.rule + ")");
  return status_from_verdict(v.verdict);
}

}  // namespace

Status recurrence_status(const MmrrwModel& m, Face A, const ClassifyOptions& opt) {
  if (A.empty() || !A.subset_of(Face::full(m.d))) throw ModelError("recurrence_status: bad face");
  return face_status(m, A, opt, nullptr);
}

DriftProfile build_profile(const MmrrwModel& m, const ClassifyOptions& opt) {
  require_valid(m);
  DriftProfile p;
  p.d = m.d;
  p.zero_band = opt.zero_band;
  for (const auto& [A, v] : opt.assume_sign) {
    if (v.a.size() != m.d) throw ModelError("sign override for {" + A.key() + "} has the wrong length");
    for (int l = 0; l < m.d; ++l)
      if (!A.contains(l) && v.a(l) != 0)
        throw ModelError("sign override for {" + A.key() + "} is nonzero outside the face");
  }

  for (Face A : faces_by_size_desc(m.d)) {
    if (A.empty()) continue;
    Status st = face_status(m, A, opt, &p.caveats);
    if (A.size() >= m.d - 1) {
      p.status[A] = st;
      if (st == Status::PositiveRecurrent) p.drifts[A] = induced_drift(m, A);
      continue;
    }
    auto ov = opt.assume_sign.find(A);
    if (ov != opt.assume_sign.end()) {
      if (st == Status::NotPositiveRecurrent) {
        p.caveats.push_back("sign override for {" + A.key() + "} ignored: induced chain is not positive recurrent");
      } else {
        if (st == Status::Unknown)
          p.caveats.push_back("status of {" + A.key() + "} unknown; assumed positive recurrent because of the override");
        st = Status::PositiveRecurrent;
        p.drifts[A] = ov->second;
        p.caveats.push_back("drift of {" + A.key() + "} taken from a sign override");
      }
    } else if (st == Status::PositiveRecurrent && opt.estimate_signs) {
      SignEstimate est = estimate_drift_sign(m, A, opt.sign_params, face_seed(opt.seed ^ 0xd1f7, A));
      DriftVector v;
      v.face = A;
      v.exact = false;
      v.a = est.mean;
      v.ci_halfwidth = est.ci_halfwidth;
      p.drifts[A] = v;
      std::ostringstream os;
      os << "drift of {" << A.key() << "} simulation-estimated at 95% CI over " << est.steps << " steps";
      if (!est.converged) os << " (precision target not reached within budget)";
      p.caveats.push_back(os.str());
    }
    p.status[A] = st;
  }
  return p;
}

StabilityVerdict classify_profile(const DriftProfile& p, const ClassifyOptions& opt) {
  StabilityVerdict v;
  if (p.d == 1) {
    int s = p.sign(Face::full(1), 0);
    v.verdict = s < 0 ? Verdict::PositiveRecurrent : s > 0 ? Verdict::Transient : Verdict::Unknown;
    v.rule = "1D-QBD-mean-drift";
    if (s == 0) v.caveats.push_back("mean drift within the zero band (null recurrent or undecided)");
  } else if (p.d == 2) {
    v = classify_2d(p);
  } else if (p.d == 3) {
    v = classify_3d(p, opt.feas);
  } else {
    v = classify_by_feasibility(p, opt.feas);
  }
  return v;
}

StabilityVerdict classify_auto(const MmrrwModel& m, const ClassifyOptions& opt) {
  if (m.d < 1) throw ModelError("classify_auto: dimension must be at least 1");
  DriftProfile p = build_profile(m, opt);
  ClassifyOptions o = opt;
  o.feas.seed = mix64(opt.seed ^ 0xfea5);
  StabilityVerdict v = classify_profile(p, o);
  v.caveats.insert(v.caveats.begin(), p.caveats.begin(), p.caveats.end());
  v.profile = std::move(p);
  return v;
}

}  // namespace mmrrw
