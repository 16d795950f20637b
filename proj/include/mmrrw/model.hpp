#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mmrrw/face.hpp"

namespace mmrrw {

inline constexpr double kRowSumTol = 1e-12;

struct BlockKey {
  Face from;
  std::uint64_t z = 0;
  Face to;
  auto operator<=>(const BlockKey&) const = default;
};

// Face homogeneous, skip-free Markov modulated reflecting random walk.
//
// A block (A, z, B) is used at a state x with φ(x) = A whenever
// φ(x + z) = B. Which B occurs depends on which coordinates of A sit at
// level 1 (the "witness" E ⊆ A): a coordinate l ∈ A leaves the face iff
// l ∈ E and z_l = -1. Row sums are therefore checked once per witness.
struct MmrrwModel {
  int d = 0;
  std::map<Face, int> bg_sizes;
  std::map<BlockKey, Eigen::MatrixXd> blocks;
  std::map<Face, std::vector<std::string>> labels;  // optional, metadata only

  int bg_size(Face A) const;
  // Adds p to the block (creating a zero block first if needed).
  void add(Face from, const Step& z, Face to, const Eigen::MatrixXd& p);
  void add(Face from, const Step& z, Face to, int i, int j, double p);
  const Eigen::MatrixXd* find(Face from, const Step& z, Face to) const;
};

struct StatePoint {
  std::vector<int> x;
  int i = 0;
  bool operator==(const StatePoint&) const = default;
};

// Target face of step z from face A when the coordinates in E ⊆ A are at level 1.
Face target_face(Face A, const Step& z, Face E);
// Structural compatibility of (A, z, B) with some witness.
bool phi_consistent(Face A, const Step& z, Face B);
// Level-1 witness of a state: {l : x_l == 1}.
Face witness_of(std::span<const int> x);

struct ValidationIssue {
  std::string kind;  // "normalization", "phi-consistency", "skip-free", "shape", ...
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;
  bool ok() const { return errors.empty(); }
};

ValidationReport validate_model(const MmrrwModel& m);
// Throws ModelError listing the first few errors.
void require_valid(const MmrrwModel& m);

// Mean increment α at a generic point of face A (every coordinate of A at level ≥ 2).
Eigen::VectorXd local_drift(const MmrrwModel& m, Face A, int i);
// Mean increment α at a concrete state.
Eigen::VectorXd local_drift_at(const MmrrwModel& m, std::span<const int> x, int i);

// JSON interchange.
nlohmann::json model_to_json(const MmrrwModel& m);
MmrrwModel model_from_json(const nlohmann::json& j);
MmrrwModel load_model(const std::string& path);
void save_model(const MmrrwModel& m, const std::string& path);

}  // namespace mmrrw
