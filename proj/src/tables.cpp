#include <algorithm>
#include <set>
#include <sstream>

#include "mmrrw/classify.hpp"

namespace mmrrw {

namespace {

TableEntry entry(const char* s) {
  TableEntry e;
  std::string t(s);
  if (t.empty()) return e;
  if (t == "NA") {
    e.kind = TableEntry::NA;
    return e;
  }
  e.kind = TableEntry::Signs;
  for (int i = 0; i < 3; ++i) e.signs[i] = t[i] == '+' ? 1 : t[i] == '-' ? -1 : 0;
  return e;
}

struct RawRow {
  const char* id;
  int table;
  const char* aN;
  const char* f[6];
  char outcome;  // P, T, S
};

// Face order: {1,2}, {2,3}, {3,1}, {1}, {2}, {3}. "" leaves the face unconstrained.
const RawRow kRows[] = {
    {"C1-1-1", 1, "---", {"--0", "0--", "-0-", "-00", "0-0", "00-"}, 'P'},
    {"C1-1-2", 1, "---", {"--0", "0--", "-0-", "+00", "", ""}, 'T'},
    {"C1-1-3", 1, "---", {"--0", "0--", "-0-", "", "0+0", ""}, 'T'},
    {"C1-1-4", 1, "---", {"--0", "0--", "-0-", "", "", "00+"}, 'T'},
    {"C1-2-1", 1, "---", {"+-0", "0--", "-0-", "-00", "NA", "00-"}, 'P'},
    {"C1-2-2", 1, "---", {"+-0", "0--", "-0-", "+00", "NA", ""}, 'T'},
    {"C1-2-3", 1, "---", {"+-0", "0--", "-0-", "", "NA", "00+"}, 'T'},
    {"C1-3-1", 1, "---", {"++0", "", "", "NA", "NA", ""}, 'T'},
    {"C1-4-1", 1, "---", {"+-0", "0+-", "-0-", "-00", "NA", "NA"}, 'P'},
    {"C1-4-2", 1, "---", {"+-0", "0+-", "-0-", "+00", "NA", "NA"}, 'T'},
    {"C1-5-1", 1, "---", {"+-0", "0-+", "-0-", "-00", "NA", "00-"}, 'P'},
    {"C1-5-2", 1, "---", {"+-0", "0-+", "-0-", "+00", "NA", ""}, 'T'},
    {"C1-5-3", 1, "---", {"+-0", "0-+", "-0-", "", "NA", "00+"}, 'T'},
    {"C1-6-1", 1, "---", {"+-0", "0+-", "+0-", "-00", "NA", "NA"}, 'P'},
    // second row carries the same label in the source table; kept as written
    {"C1-6-1", 1, "---", {"+-0", "0+-", "+0-", "+00", "NA", "NA"}, 'T'},
    {"C1-7-1", 1, "---", {"+-0", "0+-", "-0+", "NA", "NA", "NA"}, 'S'},

    {"C2-1-1", 2, "+--", {"--0", "NA", "-0-", "-00", "0-0", "00-"}, 'P'},
    {"C2-1-2", 2, "+--", {"--0", "NA", "-0-", "+00", "", ""}, 'T'},
    {"C2-1-3", 2, "+--", {"--0", "NA", "-0-", "", "0+0", ""}, 'T'},
    {"C2-1-4", 2, "+--", {"--0", "NA", "-0-", "", "", "00+"}, 'T'},
    {"C2-2-1", 2, "+--", {"+-0", "NA", "-0-", "-00", "NA", "00-"}, 'P'},
    {"C2-2-2", 2, "+--", {"+-0", "NA", "-0-", "+00", "NA", ""}, 'T'},
    {"C2-2-3", 2, "+--", {"+-0", "NA", "-0-", "", "NA", "00+"}, 'T'},
    {"C2-3-1", 2, "+--", {"++0", "NA", "", "NA", "NA", ""}, 'T'},
    {"C2-4-1", 2, "+--", {"+-0", "NA", "+0-", "-00", "NA", "NA"}, 'P'},
    {"C2-4-2", 2, "+--", {"+-0", "NA", "+0-", "+00", "NA", "NA"}, 'T'},
    {"C2-5-1", 2, "+--", {"+-0", "NA", "-0+", "NA", "NA", "00-"}, 'P'},
    {"C2-5-2", 2, "+--", {"+-0", "NA", "-0+", "NA", "NA", "00+"}, 'T'},

    {"C3-1-1", 3, "++-", {"--0", "NA", "NA", "-00", "0-0", "NA"}, 'P'},
    {"C3-1-2", 3, "++-", {"--0", "NA", "NA", "+00", "", "NA"}, 'T'},
    {"C3-1-3", 3, "++-", {"--0", "NA", "NA", "", "0+0", "NA"}, 'T'},
    {"C3-2-1", 3, "++-", {"+-0", "NA", "NA", "-00", "NA", "NA"}, 'P'},
    {"C3-2-2", 3, "++-", {"+-0", "NA", "NA", "+00", "NA", "NA"}, 'T'},
    {"C3-3-1", 3, "++-", {"++0", "NA", "NA", "NA", "NA", "NA"}, 'T'},

    {"C4-1-1", 4, "+++", {"NA", "NA", "NA", "NA", "NA", "NA"}, 'T'},
};

std::vector<TableRow> build_rows() {
  std::vector<TableRow> rows;
  for (const auto& r : kRows) {
    TableRow t;
    t.id = r.id;
    t.table = r.table;
    for (int i = 0; i < 3; ++i) t.aN[i] = r.aN[i] == '+' ? 1 : -1;
    for (int k = 0; k < 6; ++k) t.entries[k] = entry(r.f[k]);
    t.outcome = r.outcome == 'P' ? TableRow::Positive : r.outcome == 'T' ? TableRow::Transient : TableRow::Spiral;
    rows.push_back(t);
  }
  return rows;
}

Face mapped(Face tf, const std::array<int, 3>& s) {
  Face out;
  for (int t : tf.members()) out = out.with(s[t]);
  return out;
}

bool row_matches(const TableRow& row, const DriftProfile& p, const std::array<int, 3>& s) {
  const Face N = Face::full(3);
  for (int t = 0; t < 3; ++t)
    if (p.sign(N, s[t]) != row.aN[t]) return false;
  const auto& faces = table_faces();
  for (int k = 0; k < 6; ++k) {
    const TableEntry& e = row.entries[k];
    Face F = mapped(faces[k], s);
    Status st = p.status_of(F);
    if (e.kind == TableEntry::Any) continue;
    if (e.kind == TableEntry::NA) {
      if (st != Status::NotPositiveRecurrent) return false;
      continue;
    }
    if (st != Status::PositiveRecurrent || !p.drift(F)) return false;
    for (int t : faces[k].members())
      if (p.sign(F, s[t]) != e.signs[t]) return false;
  }
  return true;
}

std::string perm_text(const std::array<int, 3>& s) {
  std::ostringstream os;
  os << "table coordinates 1,2,3 map to model coordinates " << s[0] + 1 << "," << s[1] + 1 << "," << s[2] + 1;
  return os.str();
}

// Any sign the tables would test that sits inside the zero band.
bool zero_band_sign(const DriftProfile& p) {
  const Face N = Face::full(3);
  for (Face A : faces_by_size_desc(3)) {
    if (A.empty()) continue;
    if (A != N && p.status_of(A) != Status::PositiveRecurrent) continue;
    if (!p.drift(A)) continue;
    for (int l : A.members())
      if (p.sign(A, l) == 0) return true;
  }
  return false;
}

}  // namespace

const std::vector<TableRow>& table_rows() {
  static const std::vector<TableRow> rows = build_rows();
  return rows;
}

const std::array<Face, 6>& table_faces() {
  static const std::array<Face, 6> f = {Face::of({0, 1}), Face::of({1, 2}), Face::of({0, 2}),
                                        Face::of({0}),    Face::of({1}),    Face::of({2})};
  return f;
}

std::vector<TableMatch> match_tables(const DriftProfile& p) {
  std::vector<TableMatch> out;
  if (p.d != 3 || !p.drift(Face::full(3))) return out;
  for (const auto& row : table_rows()) {
    std::array<int, 3> s{0, 1, 2};
    do {
      if (row_matches(row, p, s)) out.push_back({&row, s});
    } while (std::next_permutation(s.begin(), s.end()));
  }
  return out;
}

StabilityVerdict classify_3d(const DriftProfile& p, const FeasibilityOptions& opt) {
  if (p.d != 3) throw ModelError("classify_3d: profile is not three-dimensional");
  if (!p.drift(Face::full(3))) throw ModelError("classify_3d: a(N) missing");
  for (const auto& [A, v] : p.drifts)
    if (v.sign_only)
      for (int l = 0; l < 3; ++l)
        if (!A.contains(l) && v.a(l) != 0)
          throw ModelError("classify_3d: sign override for {" + A.key() + "} is nonzero outside the face");

  auto matches = match_tables(p);
  StabilityVerdict v;
  if (matches.empty()) {
    if (zero_band_sign(p)) {
      v.rule = "3D-zero-band";
      v.caveats.push_back("a tested drift component lies within the zero band or its confidence interval covers 0");
      return v;
    }
    v = classify_by_feasibility(p, opt);
    v.rule = "3D-no-table-match/" + v.rule;
    v.caveats.push_back("sign pattern not covered by the case tables");
    return v;
  }

  std::set<int> outcomes;
  for (const auto& m : matches) outcomes.insert(m.row->outcome);
  if (outcomes.size() > 1) {
    std::string s = "classify_3d: conflicting table rows match:";
    for (const auto& m : matches) s += " " + m.row->id;
    throw SolverError(s);
  }
  const TableMatch& m = matches.front();
  auto perm_caveat = [&](StabilityVerdict& out) {
    if (m.perm != std::array<int, 3>{0, 1, 2}) out.caveats.push_back(perm_text(m.perm));
  };

  if (m.row->outcome == TableRow::Spiral) {
    v = spiral_test(p);
    perm_caveat(v);
    if (v.verdict == Verdict::PositiveRecurrent) {
      for (Face A : faces_by_size_desc(3))
        if (!A.empty() && feasibility_W(p, A, opt.margin_floor).outcome == WOutcome::Certified)
          throw SolverError("classify_3d: spiral test says positive recurrent but W_{" + A.key() + "} is nonempty");
    } else if (v.verdict == Verdict::Transient) {
      if (feasibility_U(p, opt).cert)
        throw SolverError("classify_3d: spiral test says transient but a U certificate exists");
    }
    return v;
  }

  v.rule = "Table" + std::to_string(m.row->table) + "-" + m.row->id;
  perm_caveat(v);
  UResult u = feasibility_U(p, opt);
  std::vector<CertW> ws;
  for (Face A : faces_by_size_desc(3)) {
    if (A.empty()) continue;
    WResult w = feasibility_W(p, A, opt.margin_floor);
    if (w.outcome == WOutcome::Certified) {
      ws.push_back(*w.cert);
      v.certifying_faces.push_back(A);
    }
  }
  if (m.row->outcome == TableRow::Positive) {
    v.verdict = Verdict::PositiveRecurrent;
    if (!ws.empty())
      throw SolverError("classify_3d: table row " + m.row->id + " says positive recurrent but W_{" +
                        ws.front().face.key() + "} is nonempty");
    v.certifying_faces.clear();
    if (u.cert) v.certificate = *u.cert;
    else v.caveats.push_back("no U certificate found by the search: " + u.reason);
  } else {
    v.verdict = Verdict::Transient;
    if (u.cert) throw SolverError("classify_3d: table row " + m.row->id + " says transient but a U certificate exists");
    if (!ws.empty()) v.certificate = ws.front();
    else v.caveats.push_back("no W certificate found by the LP");
  }
  return v;
}

}  // namespace mmrrw
