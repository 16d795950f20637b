#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mmrrw/classify.hpp"

namespace mmrrw {

std::string to_string(Status s) {
  switch (s) {
    case Status::PositiveRecurrent: return "PositiveRecurrent";
    case Status::NotPositiveRecurrent: return "NotPositiveRecurrent";
    default: return "Unknown";
  }
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::PositiveRecurrent: return "PositiveRecurrent";
    case Verdict::Transient: return "Transient";
    default: return "Unknown";
  }
}

Status DriftProfile::status_of(Face A) const {
  auto it = status.find(A);
  return it == status.end() ? Status::Unknown : it->second;
}

const DriftVector* DriftProfile::drift(Face A) const {
  auto it = drifts.find(A);
  return it == drifts.end() ? nullptr : &it->second;
}

int DriftProfile::sign(Face A, int l) const {
  const DriftVector* v = drift(A);
  return v ? drift_sign(*v, l, zero_band) : 0;
}

bool DriftProfile::fully_resolved() const {
  for (Face A : faces_by_size_desc(d)) {
    if (A.empty()) continue;
    Status s = status_of(A);
    if (s == Status::Unknown) return false;
    if (s == Status::PositiveRecurrent && !drift(A)) return false;
  }
  return true;
}

std::string certificate_type(const Certificate& c) {
  switch (c.index()) {
    case 0: return "U";
    case 1: return "W";
    case 2: return "spiral-positive";
    default: return "spiral-transient";
  }
}

namespace detail {

struct Bound {
  double nominal = 0, lo = 0, hi = 0;
};

// Guaranteed range of ⟨a, u⟩. Estimates widen by their CI; sign-only vectors
// are decided only when every term has the same sign.
Bound inner_bound(const DriftVector& v, const Eigen::VectorXd& u, double band) {
  Bound b;
  if (v.sign_only) {
    bool neg = false, pos = false;
    for (int l = 0; l < u.size(); ++l) {
      int s = drift_sign(v, l, band);
      double t = s * u(l);
      b.nominal += t;
      if (t < 0) neg = true;
      if (t > 0) pos = true;
    }
    if (neg && pos) {
      b.lo = -std::numeric_limits<double>::infinity();
      b.hi = std::numeric_limits<double>::infinity();
    } else {
      b.lo = b.hi = b.nominal;
    }
    return b;
  }
  b.nominal = v.a.dot(u);
  double slack = 0;
  if (!v.exact && v.ci_halfwidth) slack = v.ci_halfwidth->cwiseAbs().dot(u.cwiseAbs());
  b.lo = b.nominal - slack;
  b.hi = b.nominal + slack;
  return b;
}

bool is_null(Face A, const std::vector<Face>& null_faces) {
  for (Face f : null_faces)
    if (f == A) return true;
  return false;
}

// Faces read as null must not be known positive recurrent.
void check_null_faces(const std::vector<Face>& null_faces, const DriftProfile& p, CertCheck& out) {
  for (Face f : null_faces)
    if (p.status_of(f) == Status::PositiveRecurrent)
      out.violations.push_back("face {" + f.key() + "} is listed as null but is positive recurrent");
}

}  // namespace detail

using detail::check_null_faces;
using detail::inner_bound;
using detail::is_null;

CertCheck verify_U(const Eigen::MatrixXd& U, const DriftProfile& p, const std::vector<Face>& null_faces) {
  CertCheck out;
  const int d = p.d;
  out.min_margin = std::numeric_limits<double>::infinity();
  if (U.rows() != d || U.cols() != d) {
    out.violations.push_back("U has wrong shape");
    out.min_margin = 0;
    return out;
  }
  double scale = std::max(1.0, U.cwiseAbs().maxCoeff());
  if ((U - U.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) out.violations.push_back("U is not symmetric");
  Eigen::MatrixXd S = 0.5 * (U + U.transpose());
  for (int k = 1; k <= d; ++k) {
    double minor = S.topLeftCorner(k, k).determinant();
    if (!(minor > 0)) {
      std::ostringstream os;
      os << "leading principal minor " << k << " = " << minor << " is not positive";
      out.violations.push_back(os.str());
    }
  }
  check_null_faces(null_faces, p, out);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  out.min_margin = std::min(out.min_margin, es.eigenvalues()(0));

  for (Face A : faces_by_size_desc(d)) {
    if (A.empty() || is_null(A, null_faces)) continue;
    Status st = p.status_of(A);
    if (st == Status::NotPositiveRecurrent) continue;
    if (st == Status::Unknown) {
      out.violations.push_back("status of {" + A.key() + "} is unknown");
      continue;
    }
    const DriftVector* v = p.drift(A);
    if (!v) {
      out.violations.push_back("no drift for positive recurrent face {" + A.key() + "}");
      continue;
    }
    for (int j : A.members()) {
      auto b = inner_bound(*v, S.col(j), p.zero_band);
      if (!(b.hi < 0)) {
        std::ostringstream os;
        os << "<a({" << A.key() << "}), u_" << j + 1 << "> = " << b.nominal << " is not certainly negative";
        out.violations.push_back(os.str());
      } else {
        out.min_margin = std::min(out.min_margin, -b.hi);
      }
    }
  }
  out.ok = out.violations.empty();
  if (!out.ok) out.min_margin = std::min(out.min_margin, 0.0);
  return out;
}

CertCheck verify_W(Face A, const Eigen::VectorXd& w, const DriftProfile& p, const std::vector<Face>& null_faces) {
  CertCheck out;
  const int d = p.d;
  out.min_margin = std::numeric_limits<double>::infinity();
  if (w.size() != d || A.empty() || !A.subset_of(Face::full(d))) {
    out.violations.push_back("w or face has wrong shape");
    out.min_margin = 0;
    return out;
  }
  for (int l = 0; l < d; ++l) {
    double s = A.contains(l) ? w(l) : -w(l);
    if (!(s > 0)) {
      std::ostringstream os;
      os << "w_" << l + 1 << " = " << w(l) << " has the wrong sign";
      out.violations.push_back(os.str());
    } else {
      out.min_margin = std::min(out.min_margin, s);
    }
  }
  check_null_faces(null_faces, p, out);
  for (Face B : faces_by_size_desc(d)) {
    if (!B.intersects(A) || is_null(B, null_faces)) continue;
    Status st = p.status_of(B);
    if (st == Status::NotPositiveRecurrent) continue;
    if (st == Status::Unknown) {
      out.violations.push_back("status of {" + B.key() + "} is unknown");
      continue;
    }
    const DriftVector* v = p.drift(B);
    if (!v) {
      out.violations.push_back("no drift for positive recurrent face {" + B.key() + "}");
      continue;
    }
    auto b = inner_bound(*v, w, p.zero_band);
    if (!(b.lo > 0)) {
      std::ostringstream os;
      os << "<a({" << B.key() << "}), w> = " << b.nominal << " is not certainly positive";
      out.violations.push_back(os.str());
    } else {
      out.min_margin = std::min(out.min_margin, b.lo);
    }
  }
  out.ok = out.violations.empty();
  if (!out.ok) out.min_margin = std::min(out.min_margin, 0.0);
  return out;
}

std::vector<MarginEntry> margins_U(const Eigen::MatrixXd& U, const DriftProfile& p, const std::vector<Face>& null_faces) {
  std::vector<MarginEntry> out;
  for (Face A : faces_by_size_desc(p.d)) {
    if (A.empty() || is_null(A, null_faces) || p.status_of(A) != Status::PositiveRecurrent) continue;
    const DriftVector* v = p.drift(A);
    if (!v) continue;
    for (int j : A.members()) out.push_back({A, j, inner_bound(*v, U.col(j), p.zero_band).nominal});
  }
  return out;
}

std::vector<MarginEntry> margins_W(Face A, const Eigen::VectorXd& w, const DriftProfile& p, const std::vector<Face>& null_faces) {
  std::vector<MarginEntry> out;
  for (Face B : faces_by_size_desc(p.d)) {
    if (!B.intersects(A) || is_null(B, null_faces) || p.status_of(B) != Status::PositiveRecurrent) continue;
    const DriftVector* v = p.drift(B);
    if (!v) continue;
    out.push_back({B, -1, inner_bound(*v, w, p.zero_band).nominal});
  }
  return out;
}

CertCheck verify_certificate(const Certificate& c, const DriftProfile& p) {
  return std::visit(
      [&](const auto& cert) -> CertCheck {
        using T = std::decay_t<decltype(cert)>;
        if constexpr (std::is_same_v<T, CertU>) return verify_U(cert.U, p, cert.null_faces);
        else if constexpr (std::is_same_v<T, CertW>) return verify_W(cert.face, cert.w, p, cert.null_faces);
        else if constexpr (std::is_same_v<T, SpiralPositiveCert>) return verify_spiral_positive(cert, p);
        else return verify_spiral_transient(cert, p);
      },
      c);
}

}  // namespace mmrrw
