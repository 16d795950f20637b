#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mmrrw/classify.hpp"

namespace mmrrw {

namespace {

constexpr double kSpiralBand = 1e-9;

Face frame_face(const std::array<int, 3>& s, int t) { return Face::of({s[t], s[(t + 1) % 3]}); }

// a_{σ[coord]}(σ(F_t)) for the frame face F_t = {t, t+1}.
double frame_drift(const DriftProfile& p, const std::array<int, 3>& s, int t, int coord) {
  const DriftVector* v = p.drift(frame_face(s, t));
  if (!v) throw SolverError("spiral: missing drift for a two-coordinate face");
  return v->a(s[coord]);
}

bool frame_ok(const DriftProfile& p, const std::array<int, 3>& s) {
  const Face N = Face::full(3);
  for (int l = 0; l < 3; ++l)
    if (p.sign(N, l) != -1) return false;
  for (int t = 0; t < 3; ++t) {
    Face F = frame_face(s, t);
    if (p.status_of(F) != Status::PositiveRecurrent || !p.drift(F)) return false;
    if (p.sign(F, s[t]) != -1 || p.sign(F, s[(t + 1) % 3]) != 1) return false;
  }
  return true;
}

// r_t = −a_{t+1}(F_t) / a_t(F_t) in frame coordinates.
std::array<double, 3> frame_ratios(const DriftProfile& p, const std::array<int, 3>& s) {
  std::array<double, 3> r{};
  for (int t = 0; t < 3; ++t) r[t] = -frame_drift(p, s, t, (t + 1) % 3) / frame_drift(p, s, t, t);
  return r;
}

Eigen::Matrix3d to_model(const Eigen::Matrix3d& Uf, const std::array<int, 3>& s) {
  Eigen::Matrix3d U;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) U(s[a], s[b]) = Uf(a, b);
  return U;
}

Eigen::Matrix3d to_frame(const Eigen::MatrixXd& U, const std::array<int, 3>& s) {
  Eigen::Matrix3d Uf;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) Uf(a, b) = U(s[a], s[b]);
  return Uf;
}

Eigen::Vector3d vec_to_model(const Eigen::Vector3d& wf, const std::array<int, 3>& s) {
  Eigen::Vector3d w;
  for (int t = 0; t < 3; ++t) w(s[t]) = wf(t);
  return w;
}

bool valid_perm(const std::array<int, 3>& s) {
  std::array<int, 3> c = s;
  std::sort(c.begin(), c.end());
  return c == std::array<int, 3>{0, 1, 2};
}

struct TransientParts {
  std::array<Eigen::Vector3d, 3> wf;  // frame coordinates
  std::array<double, 6> f;
};

TransientParts transient_parts(const DriftProfile& p, const std::array<int, 3>& s, double c0, double c1, double c2,
                               double c3) {
  TransientParts out;
  out.wf[0] = Eigen::Vector3d(1, 1 / c2, 1 / c3 - c0) / c1;
  out.wf[1] = Eigen::Vector3d(1 - c0, 1 / c2, 1 / c3) / c1;
  out.wf[2] = Eigen::Vector3d(1, 1 / c2 - c0, 1 / c3) / c1;
  const DriftVector* aN = p.drift(Face::full(3));
  if (!aN) throw SolverError("spiral: missing a(N)");
  Eigen::Vector3d nf;
  for (int t = 0; t < 3; ++t) nf(t) = aN->a(s[t]);
  for (int t = 0; t < 3; ++t) {
    Eigen::Vector3d af;
    for (int c = 0; c < 3; ++c) af(c) = frame_drift(p, s, t, c);
    out.f[2 * t] = af.dot(out.wf[t]);
    out.f[2 * t + 1] = nf.dot(out.wf[t]);
  }
  return out;
}

}  // namespace

std::optional<std::array<int, 3>> spiral_frame(const DriftProfile& p) {
  if (p.d != 3) return std::nullopt;
  std::array<int, 3> s{0, 1, 2};
  do {
    if (frame_ok(p, s)) return s;
  } while (std::next_permutation(s.begin(), s.end()));
  return std::nullopt;
}

double spiral_product(const DriftProfile& p, const std::array<int, 3>& perm) {
  auto r = frame_ratios(p, perm);
  return r[0] * r[1] * r[2];
}

Eigen::Matrix3d spiral_u(double r12, double r23, double r31, double delta, double eps) {
  (void)r23;
  Eigen::Matrix3d U;
  const double u11 = 1.0;
  const double u22 = (u11 - delta) / (r12 * r12);
  const double u33 = r31 * r31 * (u11 + delta);
  const double c = u11 * u22 * u33;
  U(0, 0) = u11;
  U(1, 1) = u22;
  U(2, 2) = u33;
  U(0, 1) = U(1, 0) = std::sqrt(std::max(0.0, (c - eps) / u33));
  U(1, 2) = U(2, 1) = std::sqrt(std::max(0.0, (c - eps) / u11));
  U(0, 2) = U(2, 0) = std::sqrt(std::max(0.0, (c - eps) / u22));
  return U;
}

std::array<double, 5> spiral_slacks(const Eigen::Matrix3d& U, double r12, double r23, double r31) {
  auto pair = [](double lo, double mid, double hi) { return std::min(mid - lo, hi - mid); };
  return {pair(r12 * U(1, 1), U(0, 1), U(0, 0) / r12), pair(r23 * U(2, 2), U(1, 2), U(1, 1) / r23),
          pair(r31 * U(0, 0), U(0, 2), U(2, 2) / r31), U(0, 0) * U(1, 1) - U(0, 1) * U(0, 1), U.determinant()};
}

double spiral_margin(const Eigen::Matrix3d& U, double r12, double r23, double r31) {
  double m = 1 - (r12 * U(1, 1)) / (U(0, 0) / r12);
  m = std::min(m, 1 - (r23 * U(2, 2)) / (U(1, 1) / r23));
  m = std::min(m, 1 - (r31 * U(0, 0)) / (U(2, 2) / r31));
  return m;
}

SpiralPositiveCert spiral_lyapunov_matrix(const DriftProfile& p) {
  auto frame = spiral_frame(p);
  if (!frame) throw SolverError("spiral_lyapunov_matrix: drifts do not have the spiral sign pattern");
  auto r = frame_ratios(p, *frame);
  const double P = r[0] * r[1] * r[2];
  if (!(P < 1)) throw SolverError("spiral_lyapunov_matrix: ratio product is not below 1");

  double delta = std::min(0.1, 0.5 * (1 - P * P) / (1 + P * P));
  for (int dtry = 0; dtry < 60; ++dtry, delta *= 0.5) {
    const double c = (1 - delta) / (r[0] * r[0]) * r[2] * r[2] * (1 + delta);
    double eps = 0.25 * c * delta;
    for (int etry = 0; etry < 200; ++etry, eps *= 0.5) {
      Eigen::Matrix3d Uf = spiral_u(r[0], r[1], r[2], delta, eps);
      auto sl = spiral_slacks(Uf, r[0], r[1], r[2]);
      if (!std::all_of(sl.begin(), sl.end(), [](double v) { return v > 0; })) continue;
      SpiralPositiveCert cert;
      cert.U = to_model(Uf, *frame);
      cert.delta = delta;
      cert.epsilon = eps;
      cert.r12 = r[0];
      cert.r23 = r[1];
      cert.r31 = r[2];
      cert.perm = *frame;
      if (verify_spiral_positive(cert, p).ok) return cert;
    }
  }
  std::ostringstream os;
  os << "spiral_lyapunov_matrix: no (delta, epsilon) verified; ratio product " << P;
  throw SolverError(os.str());
}

SpiralTransientCert spiral_transience_certificate(const DriftProfile& p) {
  auto frame = spiral_frame(p);
  if (!frame) throw SolverError("spiral_transience_certificate: drifts do not have the spiral sign pattern");
  auto r = frame_ratios(p, *frame);
  const double P = r[0] * r[1] * r[2];
  if (!(P > 1)) throw SolverError("spiral_transience_certificate: interval for c2, c3 is empty (product <= 1)");
  const double k = std::cbrt(P);
  SpiralTransientCert cert;
  cert.perm = *frame;
  cert.c1 = 1.0;
  cert.c2 = r[0] / k;
  cert.c3 = cert.c2 * r[1] / k;
  for (double c0 = 1.0; c0 < 1e300; c0 *= 2) {
    if (!(c0 > std::max({1.0, 1 / cert.c2, 1 / cert.c3}))) continue;
    TransientParts tp = transient_parts(p, *frame, c0, cert.c1, cert.c2, cert.c3);
    double mn = *std::min_element(tp.f.begin(), tp.f.end());
    if (mn > 0) {
      cert.c0 = c0;
      cert.w12 = vec_to_model(tp.wf[0], *frame);
      cert.w23 = vec_to_model(tp.wf[1], *frame);
      cert.w31 = vec_to_model(tp.wf[2], *frame);
      cert.eps0 = mn;
      return cert;
    }
  }
  throw SolverError("spiral_transience_certificate: c0 search exhausted");
}

CertCheck verify_spiral_positive(const SpiralPositiveCert& c, const DriftProfile& p) {
  CertCheck out;
  if (p.d != 3 || !valid_perm(c.perm) || c.U.rows() != 3 || c.U.cols() != 3) {
    out.violations.push_back("spiral certificate needs d = 3 and a permutation of the coordinates");
    return out;
  }
  if (!frame_ok(p, c.perm)) {
    out.violations.push_back("drifts do not have the spiral sign pattern in the recorded frame");
    return out;
  }
  auto r = frame_ratios(p, c.perm);
  const double rec[3] = {c.r12, c.r23, c.r31};
  for (int t = 0; t < 3; ++t)
    if (std::abs(r[t] - rec[t]) > 1e-9 * std::max(1.0, std::abs(r[t])))
      out.violations.push_back("recorded ratio r" + std::to_string(t + 1) + " does not match the drifts");
  Eigen::Matrix3d Uf = to_frame(c.U, c.perm);
  auto sl = spiral_slacks(Uf, r[0], r[1], r[2]);
  const char* names[5] = {"(r12 u22, u12, u11/r12)", "(r23 u33, u23, u22/r23)", "(r31 u11, u13, u33/r31)",
                          "u11 u22 - u12^2", "det U"};
  for (int i = 0; i < 5; ++i)
    if (!(sl[i] > 0)) out.violations.push_back(std::string("spiral inequality ") + names[i] + " fails");
  CertCheck u = verify_U(c.U, p);
  out.violations.insert(out.violations.end(), u.violations.begin(), u.violations.end());
  out.ok = out.violations.empty();
  out.min_margin = out.ok ? std::min(u.min_margin, spiral_margin(Uf, r[0], r[1], r[2])) : 0.0;
  return out;
}

CertCheck verify_spiral_transient(const SpiralTransientCert& c, const DriftProfile& p) {
  CertCheck out;
  if (p.d != 3 || !valid_perm(c.perm)) {
    out.violations.push_back("spiral certificate needs d = 3 and a permutation of the coordinates");
    return out;
  }
  if (!frame_ok(p, c.perm)) {
    out.violations.push_back("drifts do not have the spiral sign pattern in the recorded frame");
    return out;
  }
  auto r = frame_ratios(p, c.perm);
  if (!(c.c2 > 0 && c.c2 < r[0])) out.violations.push_back("c2 outside (0, a2({1,2})/(-a1({1,2})))");
  if (!(c.c3 / c.c2 > 0 && c.c3 / c.c2 < r[1])) out.violations.push_back("c3/c2 outside (0, a3({2,3})/(-a2({2,3})))");
  if (!(1 / c.c3 > 0 && 1 / c.c3 < r[2])) out.violations.push_back("1/c3 outside (0, a1({3,1})/(-a3({3,1})))");
  if (!(c.c0 > 0 && c.c1 > 0)) out.violations.push_back("c0 and c1 must be positive");
  if (!out.violations.empty()) return out;

  TransientParts tp = transient_parts(p, c.perm, c.c0, c.c1, c.c2, c.c3);
  const Eigen::Vector3d rec[3] = {c.w12, c.w23, c.w31};
  for (int t = 0; t < 3; ++t) {
    Eigen::Vector3d w = vec_to_model(tp.wf[t], c.perm);
    if ((w - rec[t]).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, w.cwiseAbs().maxCoeff()))
      out.violations.push_back("recorded vector w" + std::to_string(t) + " does not match c0..c3");
  }
  double mn = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 6; ++i) {
    if (!(tp.f[i] > 0)) {
      std::ostringstream os;
      os << "f_A(" << (i % 2 ? "a(N)" : "a(A)") << ") for frame face " << i / 2 + 1 << " is " << tp.f[i];
      out.violations.push_back(os.str());
    }
    mn = std::min(mn, tp.f[i]);
  }
  if (c.eps0 > mn * (1 + 1e-9) + 1e-15) out.violations.push_back("recorded eps0 exceeds min f_A");
  out.ok = out.violations.empty();
  out.min_margin = out.ok ? mn : 0.0;
  return out;
}

StabilityVerdict spiral_test(const DriftProfile& p) {
  auto frame = spiral_frame(p);
  if (!frame) throw SolverError("spiral_test: drifts do not have the spiral sign pattern");
  StabilityVerdict v;
  v.rule = "Table1-C1-7-1";
  const double P = spiral_product(p, *frame);
  v.spiral_product = P;
  if (P < 1 - kSpiralBand) {
    v.verdict = Verdict::PositiveRecurrent;
    v.certificate = spiral_lyapunov_matrix(p);
  } else if (P > 1 + kSpiralBand) {
    v.verdict = Verdict::Transient;
    v.certificate = spiral_transience_certificate(p);
  } else {
    v.verdict = Verdict::Unknown;
    v.caveats.push_back("ratio product within 1e-9 of 1");
  }
  return v;
}

}  // namespace mmrrw
