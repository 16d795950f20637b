#include "mmrrw/model.hpp"

#include <cmath>
#include <sstream>

namespace mmrrw {

int MmrrwModel::bg_size(Face A) const {
  auto it = bg_sizes.find(A);
  if (it == bg_sizes.end()) throw ModelError("face {" + A.key() + "} has no background set");
  return it->second;
}

void MmrrwModel::add(Face from, const Step& z, Face to, const Eigen::MatrixXd& p) {
  BlockKey k{from, encode_step(z), to};
  auto it = blocks.find(k);
  if (it == blocks.end())
    blocks.emplace(k, p);
  else
    it->second += p;
}

void MmrrwModel::add(Face from, const Step& z, Face to, int i, int j, double p) {
  BlockKey k{from, encode_step(z), to};
  auto it = blocks.find(k);
  if (it == blocks.end())
    it = blocks.emplace(k, Eigen::MatrixXd::Zero(bg_size(from), bg_size(to))).first;
  it->second(i, j) += p;
}

const Eigen::MatrixXd* MmrrwModel::find(Face from, const Step& z, Face to) const {
  auto it = blocks.find(BlockKey{from, encode_step(z), to});
  return it == blocks.end() ? nullptr : &it->second;
}

Face target_face(Face A, const Step& z, Face E) {
  Face B;
  for (int l = 0; l < static_cast<int>(z.size()); ++l) {
    if (A.contains(l)) {
      if (!(E.contains(l) && z[l] == -1)) B = B.with(l);
    } else if (z[l] == 1) {
      B = B.with(l);
    }
  }
  return B;
}

bool phi_consistent(Face A, const Step& z, Face B) {
  for (int l = 0; l < static_cast<int>(z.size()); ++l) {
    if (!A.contains(l)) {
      if (z[l] == -1) return false;
      if (B.contains(l) != (z[l] == 1)) return false;
    } else if (!B.contains(l) && z[l] != -1) {
      return false;
    }
  }
  return true;
}

Face witness_of(std::span<const int> x) {
  std::uint32_t m = 0;
  for (std::size_t l = 0; l < x.size(); ++l)
    if (x[l] == 1) m |= 1u << l;
  return Face(m);
}

namespace {

std::string step_str(const Step& z) {
  std::string s = "(";
  for (std::size_t l = 0; l < z.size(); ++l) s += (l ? "," : "") + std::to_string(z[l]);
  return s + ")";
}

std::string block_str(Face A, const Step& z, Face B) {
  return "block {" + A.key() + "} z=" + step_str(z) + " -> {" + B.key() + "}";
}

}  // namespace

ValidationReport validate_model(const MmrrwModel& m) {
  ValidationReport rep;
  auto err = [&](std::string kind, std::string msg) { rep.errors.push_back({std::move(kind), std::move(msg)}); };
  auto warn = [&](std::string kind, std::string msg) { rep.warnings.push_back({std::move(kind), std::move(msg)}); };

  if (m.d < 0 || m.d > kMaxDim) {
    err("shape", "dimension " + std::to_string(m.d) + " outside 0.." + std::to_string(kMaxDim));
    return rep;
  }
  const Face N = Face::full(m.d);
  for (auto& [F, s] : m.bg_sizes) {
    if (!F.subset_of(N)) err("shape", "background set for face outside dimension: mask " + std::to_string(F.mask()));
    if (s <= 0) err("shape", "face {" + F.key() + "} has nonpositive background size");
  }
  for (std::uint32_t mk = 0; mk <= N.mask(); ++mk)
    if (!m.bg_sizes.count(Face(mk))) err("shape", "face {" + Face(mk).key() + "} has no background set");
  if (!rep.errors.empty()) return rep;

  std::uint64_t zmax = 1;
  for (int l = 0; l < m.d; ++l) zmax *= 3;

  std::map<Face, std::vector<std::pair<Step, const BlockKey*>>> out_blocks;
  for (auto& [k, P] : m.blocks) {
    if (k.z >= zmax) {
      err("skip-free", "step code outside {-1,0,1}^d");
      continue;
    }
    Step z = decode_step(k.z, m.d);
    std::string name = block_str(k.from, z, k.to);
    if (!k.from.subset_of(N) || !k.to.subset_of(N)) {
      err("shape", name + ": face outside dimension");
      continue;
    }
    if (P.rows() != m.bg_size(k.from) || P.cols() != m.bg_size(k.to)) {
      err("shape", name + ": matrix is " + std::to_string(P.rows()) + "x" + std::to_string(P.cols()) +
                       ", expected " + std::to_string(m.bg_size(k.from)) + "x" + std::to_string(m.bg_size(k.to)));
      continue;
    }
    bool bad = false;
    for (Eigen::Index r = 0; r < P.rows(); ++r)
      for (Eigen::Index c = 0; c < P.cols(); ++c)
        if (!std::isfinite(P(r, c)) || P(r, c) < 0) bad = true;
    if (bad) err("probability", name + ": negative or non-finite entry");
    for (int l = 0; l < m.d; ++l)
      if (!k.from.contains(l) && z[l] == -1)
        err("skip-free", name + ": coordinate " + std::to_string(l + 1) + " is at 0 but steps down");
    if (!phi_consistent(k.from, z, k.to)) err("phi-consistency", name + ": target face unreachable by this step");
    out_blocks[k.from].push_back({z, &k});
  }

  for (std::uint32_t mk = 0; mk <= N.mask(); ++mk) {
    Face A(mk);
    int s = m.bg_size(A);
    auto it = out_blocks.find(A);
    if (it == out_blocks.end()) {
      warn("structure", "face {" + A.key() + "} has no outgoing block");
      err("normalization", "face {" + A.key() + "}: rows sum to 0");
      continue;
    }
    // enumerate witnesses E ⊆ A
    std::uint32_t e = 0;
    while (true) {
      Face E(e);
      Eigen::VectorXd sums = Eigen::VectorXd::Zero(s);
      for (auto& [z, key] : it->second) {
        if (!phi_consistent(A, z, key->to)) continue;
        if (target_face(A, z, E) == key->to) sums += m.blocks.at(*key).rowwise().sum();
      }
      for (int i = 0; i < s; ++i) {
        if (std::abs(sums(i) - 1.0) > kRowSumTol) {
          std::ostringstream os;
          os.precision(17);
          os << "face {" << A.key() << "} row " << i;
          if (!A.empty()) os << " (level-1 coordinates {" << E.key() << "})";
          os << " sums to " << sums(i);
          err("normalization", os.str());
        }
      }
      if (e == A.mask()) break;
      e = (e - A.mask()) & A.mask();
    }
  }

  for (int l = 0; l < m.d; ++l) {
    bool down = false;
    for (auto& [k, P] : m.blocks) {
      Step z = decode_step(k.z, m.d);
      if (z[l] == -1 && P.sum() > 0) {
        down = true;
        break;
      }
    }
    if (!down) warn("structure", "coordinate " + std::to_string(l + 1) + " can never decrease");
  }
  for (auto& [F, names] : m.labels) {
    auto it = m.bg_sizes.find(F);
    if (it == m.bg_sizes.end() || static_cast<int>(names.size()) != it->second)
      warn("labels", "labels for face {" + F.key() + "} do not match its background size");
  }
  return rep;
}

void require_valid(const MmrrwModel& m) {
  auto rep = validate_model(m);
  if (rep.ok()) return;
  std::string msg = "invalid model:";
  for (std::size_t k = 0; k < rep.errors.size() && k < 5; ++k) msg += "\n  " + rep.errors[k].message;
  if (rep.errors.size() > 5) msg += "\n  ... " + std::to_string(rep.errors.size() - 5) + " more";
  throw ModelError(msg);
}

namespace {

Eigen::VectorXd drift_with_witness(const MmrrwModel& m, Face A, Face E, int i) {
  if (i < 0 || i >= m.bg_size(A))
    throw ModelError("background index " + std::to_string(i) + " out of range for face {" + A.key() + "}");
  Eigen::VectorXd a = Eigen::VectorXd::Zero(m.d);
  for (auto it = m.blocks.lower_bound(BlockKey{A, 0, Face()}); it != m.blocks.end() && it->first.from == A; ++it) {
    Step z = decode_step(it->first.z, m.d);
    if (target_face(A, z, E) != it->first.to) continue;
    double mass = it->second.row(i).sum();
    for (int l = 0; l < m.d; ++l) a(l) += z[l] * mass;
  }
  return a;
}

}  // namespace

Eigen::VectorXd local_drift(const MmrrwModel& m, Face A, int i) {
  if (!A.subset_of(Face::full(m.d))) throw ModelError("face {" + A.key() + "} outside dimension");
  return drift_with_witness(m, A, Face(), i);
}

Eigen::VectorXd local_drift_at(const MmrrwModel& m, std::span<const int> x, int i) {
  if (static_cast<int>(x.size()) != m.d) throw ModelError("state has wrong dimension");
  return drift_with_witness(m, face_of(x), witness_of(x), i);
}

}  // namespace mmrrw
