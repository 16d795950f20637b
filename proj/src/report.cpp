#include "mmrrw/report.hpp"

namespace mmrrw {

using nlohmann::json;

namespace {

Eigen::VectorXd vec(const json& j, int n, const char* what) {
  if (!j.is_array() || (n >= 0 && static_cast<int>(j.size()) != n))
    throw ModelError(std::string("certificate: '") + what + "' must be an array of length " + std::to_string(n));
  Eigen::VectorXd v(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw ModelError(std::string("certificate: '") + what + "' holds a non-number");
    v(static_cast<Eigen::Index>(k)) = j[k].get<double>();
  }
  return v;
}

Eigen::MatrixXd mat(const json& j, int n, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw ModelError(std::string("certificate: '") + what + "' must be a " + std::to_string(n) + "x" + std::to_string(n) + " array");
  Eigen::MatrixXd M(n, n);
  for (int r = 0; r < n; ++r) M.row(r) = vec(j[r], n, what).transpose();
  return M;
}

double num(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) throw ModelError(std::string("certificate: missing number '") + key + "'");
  return j[key].get<double>();
}

json faces_json(const std::vector<Face>& fs) {
  json a = json::array();
  for (Face f : fs) a.push_back(f.key());
  return a;
}

std::vector<Face> faces_from(const json& j, int d) {
  std::vector<Face> out;
  if (j.is_array())
    for (const auto& k : j) out.push_back(Face::parse(k.get<std::string>(), d));
  return out;
}

json margins_json(const std::vector<MarginEntry>& ms) {
  json a = json::array();
  for (const auto& m : ms) {
    json e{{"face", m.face.key()}, {"value", m.value}};
    if (m.j >= 0) e["j"] = m.j + 1;
    a.push_back(e);
  }
  return a;
}

json perm_json(const std::array<int, 3>& p) { return json::array({p[0] + 1, p[1] + 1, p[2] + 1}); }

std::array<int, 3> perm_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ModelError("certificate: 'perm' must list three coordinates");
  std::array<int, 3> p{};
  for (int t = 0; t < 3; ++t) p[t] = j[t].get<int>() - 1;
  return p;
}

Status status_from(const std::string& s) {
  if (s == "PositiveRecurrent") return Status::PositiveRecurrent;
  if (s == "NotPositiveRecurrent") return Status::NotPositiveRecurrent;
  if (s == "Unknown") return Status::Unknown;
  throw ModelError("profile: unknown status '" + s + "'");
}

}  // namespace

json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

json to_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
  return a;
}

json to_json(const DriftVector& v) {
  json j{{"face", v.face.key()}, {"a", to_json(v.a)}, {"exact", v.exact}, {"sign_only", v.sign_only}};
  if (v.ci_halfwidth) j["ci_halfwidth"] = to_json(*v.ci_halfwidth);
  return j;
}

DriftVector drift_from_json(const json& j, int d) {
  DriftVector v;
  v.face = Face::parse(j.at("face").get<std::string>(), d);
  v.a = vec(j.at("a"), d, "a");
  v.exact = j.value("exact", true);
  v.sign_only = j.value("sign_only", false);
  if (j.contains("ci_halfwidth")) v.ci_halfwidth = vec(j["ci_halfwidth"], d, "ci_halfwidth");
  return v;
}

json to_json(const DriftProfile& p) {
  json faces = json::object();
  for (const auto& [A, s] : p.status) {
    json f{{"status", to_string(s)}};
    if (const DriftVector* v = p.drift(A)) f["drift"] = to_json(*v);
    faces[A.key()] = f;
  }
  return json{{"d", p.d}, {"zero_band", p.zero_band}, {"faces", faces}, {"caveats", p.caveats}};
}

DriftProfile profile_from_json(const json& j) {
  DriftProfile p;
  p.d = j.at("d").get<int>();
  p.zero_band = j.value("zero_band", kZeroBand);
  for (const auto& [k, f] : j.at("faces").items()) {
    Face A = Face::parse(k, p.d);
    p.status[A] = status_from(f.at("status").get<std::string>());
    if (f.contains("drift")) p.drifts[A] = drift_from_json(f["drift"], p.d);
  }
  if (j.contains("caveats")) p.caveats = j["caveats"].get<std::vector<std::string>>();
  return p;
}

json to_json(const Certificate& c) {
  json j{{"type", certificate_type(c)}};
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, CertU>) {
          j["U"] = to_json(x.U);
          j["margins"] = margins_json(x.margins);
          j["lambda_min"] = x.lambda_min;
          j["null_faces"] = faces_json(x.null_faces);
        } else if constexpr (std::is_same_v<T, CertW>) {
          j["face"] = x.face.key();
          j["w"] = to_json(x.w);
          j["margins"] = margins_json(x.margins);
          j["null_faces"] = faces_json(x.null_faces);
        } else if constexpr (std::is_same_v<T, SpiralPositiveCert>) {
          j["U"] = to_json(x.U);
          j["delta"] = x.delta;
          j["epsilon"] = x.epsilon;
          j["r12"] = x.r12;
          j["r23"] = x.r23;
          j["r31"] = x.r31;
          j["perm"] = perm_json(x.perm);
        } else {
          j["c0"] = x.c0;
          j["c1"] = x.c1;
          j["c2"] = x.c2;
          j["c3"] = x.c3;
          j["w12"] = to_json(Eigen::VectorXd(x.w12));
          j["w23"] = to_json(Eigen::VectorXd(x.w23));
          j["w31"] = to_json(Eigen::VectorXd(x.w31));
          j["eps0"] = x.eps0;
          j["perm"] = perm_json(x.perm);
        }
      },
      c);
  return j;
}

Certificate certificate_from_json(const json& jin, int d) {
  // accept a full verdict report as well as a bare certificate
  const json& j = jin.contains("certificate") && jin["certificate"].is_object() ? jin["certificate"] : jin;
  if (!j.is_object() || !j.contains("type")) throw ModelError("certificate: missing 'type'");
  const std::string t = j["type"].get<std::string>();
  if (t == "U") {
    CertU c;
    c.U = mat(j.at("U"), d, "U");
    c.lambda_min = j.value("lambda_min", 0.0);
    c.null_faces = faces_from(j.value("null_faces", json::array()), d);
    return c;
  }
  if (t == "W") {
    CertW c;
    c.face = Face::parse(j.at("face").get<std::string>(), d);
    c.w = vec(j.at("w"), d, "w");
    c.null_faces = faces_from(j.value("null_faces", json::array()), d);
    return c;
  }
  if (d != 3) throw ModelError("certificate: spiral certificates need d = 3");
  if (t == "spiral-positive") {
    SpiralPositiveCert c;
    c.U = mat(j.at("U"), 3, "U");
    c.delta = num(j, "delta");
    c.epsilon = num(j, "epsilon");
    c.r12 = num(j, "r12");
    c.r23 = num(j, "r23");
    c.r31 = num(j, "r31");
    c.perm = perm_from(j.at("perm"));
    return c;
  }
  if (t == "spiral-transient") {
    SpiralTransientCert c;
    c.c0 = num(j, "c0");
    c.c1 = num(j, "c1");
    c.c2 = num(j, "c2");
    c.c3 = num(j, "c3");
    c.w12 = vec(j.at("w12"), 3, "w12");
    c.w23 = vec(j.at("w23"), 3, "w23");
    c.w31 = vec(j.at("w31"), 3, "w31");
    c.eps0 = num(j, "eps0");
    c.perm = perm_from(j.at("perm"));
    return c;
  }
  throw ModelError("certificate: unknown type '" + t + "'");
}

json to_json(const CertCheck& c) {
  return json{{"ok", c.ok}, {"min_margin", c.min_margin}, {"violations", c.violations}};
}

json to_json(const StabilityVerdict& v) {
  json j{{"verdict", to_string(v.verdict)},
         {"rule", v.rule},
         {"caveats", v.caveats},
         {"certifying_faces", faces_json(v.certifying_faces)},
         {"certificate", nullptr},
         {"margins", nullptr},
         {"drift_profile", nullptr}};
  if (v.certificate) {
    j["certificate"] = to_json(*v.certificate);
    if (v.profile) {
      CertCheck chk = verify_certificate(*v.certificate, *v.profile);
      j["margins"] = json{{"min", chk.min_margin}, {"verified", chk.ok}};
    }
  }
  if (v.spiral_product) j["spiral_product"] = *v.spiral_product;
  if (v.profile) j["drift_profile"] = to_json(*v.profile);
  return j;
}

json to_json(const ValidationReport& r) {
  auto list = [](const std::vector<ValidationIssue>& is) {
    json a = json::array();
    for (const auto& i : is) a.push_back(json{{"kind", i.kind}, {"message", i.message}});
    return a;
  };
  return json{{"ok", r.ok()}, {"errors", list(r.errors)}, {"warnings", list(r.warnings)}};
}

json to_json(const Diagnostic& d) {
  json visits = json::object();
  for (const auto& [A, f] : d.visit_fraction) visits[A.empty() ? "{}" : A.key()] = f;
  return json{{"call", d.call},
              {"return_fraction", d.return_fraction},
              {"slope_mean", d.slope_mean},
              {"slope_ci_halfwidth", d.slope_ci},
              {"mean_return_time", d.mean_return_time},
              {"return_time_ci_halfwidth", d.return_time_ci},
              {"visit_fraction", visits},
              {"start", d.start}};
}

json to_json(const GEstimate& g) {
  return json{{"mean", to_json(g.mean)}, {"ci_halfwidth", to_json(g.ci_halfwidth)}, {"reps", g.reps}, {"horizon", g.horizon}};
}

}  // namespace mmrrw
