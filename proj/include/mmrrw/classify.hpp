#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mmrrw/qbd.hpp"
#include "mmrrw/simulate.hpp"

namespace mmrrw {

enum class Status { PositiveRecurrent, NotPositiveRecurrent, Unknown };
enum class Verdict { PositiveRecurrent, Transient, Unknown };

std::string to_string(Status s);
std::string to_string(Verdict v);

struct DriftProfile {
  int d = 0;
  std::map<Face, DriftVector> drifts;
  std::map<Face, Status> status;
  double zero_band = kZeroBand;
  std::vector<std::string> caveats;

  Status status_of(Face A) const;
  const DriftVector* drift(Face A) const;
  // Sign of a_l(A); 0 inside the zero band or when the drift is missing.
  int sign(Face A, int l) const;
  // Every face is PR with a drift vector, or NotPR.
  bool fully_resolved() const;
};

// ⟨a(A), u_j⟩ or ⟨a(B), w⟩ with the face and column it belongs to (j = -1 for w).
struct MarginEntry {
  Face face;
  int j = -1;
  double value = 0;
};

struct CertU {
  Eigen::MatrixXd U;
  std::vector<MarginEntry> margins;
  double lambda_min = 0;
  std::vector<Face> null_faces;  // zero-drift boundary faces read as not PR
};

struct CertW {
  Face face;
  Eigen::VectorXd w;
  std::vector<MarginEntry> margins;
  std::vector<Face> null_faces;
};

// perm[t] is the model coordinate playing role t in the oriented frame where
// a1({1,2}) < 0 < a2({1,2}), a2({2,3}) < 0 < a3({2,3}), a3({3,1}) < 0 < a1({3,1}).
struct SpiralPositiveCert {
  Eigen::MatrixXd U;  // model coordinates
  double delta = 0, epsilon = 0;
  double r12 = 0, r23 = 0, r31 = 0;
  std::array<int, 3> perm{0, 1, 2};
};

struct SpiralTransientCert {
  double c0 = 0, c1 = 1, c2 = 0, c3 = 0;
  Eigen::Vector3d w12, w23, w31;  // model coordinates, keyed by frame faces
  double eps0 = 0;
  std::array<int, 3> perm{0, 1, 2};
};

using Certificate = std::variant<CertU, CertW, SpiralPositiveCert, SpiralTransientCert>;
std::string certificate_type(const Certificate& c);

struct CertCheck {
  bool ok = false;
  double min_margin = 0;
  std::vector<std::string> violations;
};

CertCheck verify_U(const Eigen::MatrixXd& U, const DriftProfile& p, const std::vector<Face>& null_faces = {});
CertCheck verify_W(Face A, const Eigen::VectorXd& w, const DriftProfile& p, const std::vector<Face>& null_faces = {});
// Recorded margins: ⟨a(A), u_j⟩ for A ∈ N_p, j ∈ A and ⟨a(B), w⟩ for B ∈ N̄^A_p.
std::vector<MarginEntry> margins_U(const Eigen::MatrixXd& U, const DriftProfile& p, const std::vector<Face>& null_faces = {});
std::vector<MarginEntry> margins_W(Face A, const Eigen::VectorXd& w, const DriftProfile& p, const std::vector<Face>& null_faces = {});
CertCheck verify_spiral_positive(const SpiralPositiveCert& c, const DriftProfile& p);
CertCheck verify_spiral_transient(const SpiralTransientCert& c, const DriftProfile& p);
CertCheck verify_certificate(const Certificate& c, const DriftProfile& p);

struct StabilityVerdict {
  Verdict verdict = Verdict::Unknown;
  std::optional<Certificate> certificate;
  std::string rule;
  std::vector<std::string> caveats;
  std::vector<Face> certifying_faces;  // every face whose W set certified, in search order
  std::optional<double> spiral_product;
  std::optional<DriftProfile> profile;
};

// ---- feasibility -------------------------------------------------------

struct FeasibilityOptions {
  int restarts = 64;
  std::uint64_t seed = 1;
  double margin_floor = 1e-9;
};

struct UResult {
  std::optional<CertU> cert;
  double best_margin = 0;   // normalized margin of the best iterate
  double upper_bound = 0;   // cutting-plane bound on the normalized margin
  bool blocked = false;
  std::string reason;
};
UResult feasibility_U(const DriftProfile& p, const FeasibilityOptions& opt = {});

enum class WOutcome { Certified, None, BlockedByUnknown };
struct WResult {
  WOutcome outcome = WOutcome::None;
  std::optional<CertW> cert;
  double margin = 0;
  std::string reason;
};
WResult feasibility_W(const DriftProfile& p, Face A, double margin_floor = 1e-9);

// U then W over faces by size descending, lexicographic; hard error if both certify.
StabilityVerdict classify_by_feasibility(const DriftProfile& p, const FeasibilityOptions& opt = {});

// ---- two dimensions -----------------------------------------------------

enum class Case2D { C1a, C1b, C2a, C2b, C3a, C3b, C4, RemarkC2a, RemarkC2b, RemarkC3a, RemarkC3b, RemarkTransient, Undecided };
Case2D case_2d(const DriftProfile& p);
std::string rule_2d(Case2D c);
Certificate certificate_2d(const DriftProfile& p, Case2D c);
StabilityVerdict classify_2d(const DriftProfile& p);

// ---- three dimensions ---------------------------------------------------

struct TableEntry {
  enum Kind { Any, NA, Signs } kind = Any;
  std::array<int, 3> signs{0, 0, 0};
};

struct TableRow {
  std::string id;
  int table = 0;
  std::array<int, 3> aN{0, 0, 0};
  // {1,2}, {2,3}, {3,1}, {1}, {2}, {3}
  std::array<TableEntry, 6> entries;
  enum Outcome { Positive, Transient, Spiral } outcome = Positive;
};

const std::vector<TableRow>& table_rows();
const std::array<Face, 6>& table_faces();

struct TableMatch {
  const TableRow* row = nullptr;
  std::array<int, 3> perm{0, 1, 2};  // table coordinate t -> model coordinate perm[t]
};
std::vector<TableMatch> match_tables(const DriftProfile& p);

// Oriented frame for the spiral test, if the pair drifts and a(N) have one of
// the two cyclic sign patterns.
std::optional<std::array<int, 3>> spiral_frame(const DriftProfile& p);
double spiral_product(const DriftProfile& p, const std::array<int, 3>& perm);
StabilityVerdict spiral_test(const DriftProfile& p);

// Explicit construction with given δ and ε; no search, no verification.
Eigen::Matrix3d spiral_u(double r12, double r23, double r31, double delta, double eps);
// Slacks of the three double inequalities, the 2x2 minor and det U (all must be > 0).
std::array<double, 5> spiral_slacks(const Eigen::Matrix3d& U, double r12, double r23, double r31);
// Smallest relative gap 1 − lower/upper over the three double inequalities.
double spiral_margin(const Eigen::Matrix3d& U, double r12, double r23, double r31);
SpiralPositiveCert spiral_lyapunov_matrix(const DriftProfile& p);
SpiralTransientCert spiral_transience_certificate(const DriftProfile& p);

StabilityVerdict classify_3d(const DriftProfile& p, const FeasibilityOptions& opt = {});

// ---- orchestration ------------------------------------------------------

struct ClassifyOptions {
  double zero_band = kZeroBand;
  std::uint64_t seed = 1;
  std::map<Face, DriftVector> assume_sign;
  bool estimate_signs = true;
  SignEstimateParams sign_params;
  FeasibilityOptions feas;
};

// Parses "1,2=+,-" (signs for the members of A or for all d coordinates).
std::pair<Face, DriftVector> parse_assume_sign(const std::string& text, int d);

Status recurrence_status(const MmrrwModel& m, Face A, const ClassifyOptions& opt = {});
DriftProfile build_profile(const MmrrwModel& m, const ClassifyOptions& opt = {});
StabilityVerdict classify_profile(const DriftProfile& p, const ClassifyOptions& opt = {});
StabilityVerdict classify_auto(const MmrrwModel& m, const ClassifyOptions& opt = {});

}  // namespace mmrrw
