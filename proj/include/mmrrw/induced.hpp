#pragma once

#include <vector>

#include "mmrrw/model.hpp"

namespace mmrrw {

// ℒ^A: the coordinates of A are held at a generic interior level and
// marginalized out. The remaining coordinates are renumbered in ascending
// order; coord_map[k] is the parent index of new coordinate k.
struct InducedChain {
  int parent_dim = 0;
  Face removed;
  MmrrwModel model;
  std::vector<int> coord_map;

  // Parent face F' ∪ A of a face F' of the induced chain.
  Face parent_face(Face local) const;
  // Embeds a local vector into parent coordinates, zero on removed ones.
  Eigen::VectorXd embed(const Eigen::VectorXd& local) const;
};

InducedChain project(const MmrrwModel& m, Face A);

// Strongly connected classes of the support graph of P; closed[k] tells whether
// class k has no edge leaving it.
struct ClassStructure {
  std::vector<std::vector<int>> classes;
  std::vector<bool> closed;
  int closed_count() const;
};
ClassStructure communicating_classes(const Eigen::MatrixXd& P);

// Unique stationary row vector of a stochastic matrix (direct solve).
// Throws SolverError when more than one closed class exists.
Eigen::RowVectorXd stationary_finite(const Eigen::MatrixXd& P);

// Transition matrix of a 0-dimensional chain (sum of all blocks).
Eigen::MatrixXd finite_chain_matrix(const MmrrwModel& m0);
Eigen::RowVectorXd solve_finite_chain(const InducedChain& c);

// Level-structured kernel of a 1-dimensional chain.
// Level 0 is face ∅, levels ≥ 1 are face {1}; A0 up, A1 stay, A2 down.
struct QbdBlocks {
  Eigen::MatrixXd B00, B01, B10;
  Eigen::MatrixXd A0, A1, A2;
};

QbdBlocks assemble_qbd(const InducedChain& c);
QbdBlocks qbd_from_model(const MmrrwModel& m1);
MmrrwModel qbd_to_model(const QbdBlocks& q);
// Row-sum checks of the three block families; empty string if fine.
std::string check_qbd_blocks(const QbdBlocks& q);

}  // namespace mmrrw
