#pragma once

#include <array>
#include <optional>
#include <random>

#include "mmrrw/classify.hpp"

namespace mmrrw {

// Continuous-time version of the model: blocks hold rates instead of
// probabilities. Rates on (A, 0, A) diagonals are ignored.
struct CtmcModel {
  MmrrwModel rates;
  // Largest total outflow over (face, witness, background).
  double max_outflow() const;
};

// P = I + Q/ν face by face. Throws ModelError if ν is below the outflow of
// some state or if the outflow depends on the witness.
MmrrwModel uniformize(const CtmcModel& c, double nu);

// Three M/M/1 queues with vacations and input rejection; the server of queue
// l+1 (cyclically) is suspended while queue l is on vacation. The background of
// face A lists the servers of the empty queues, vacation (-1) before idle (0),
// first empty queue most significant.
CtmcModel three_queue_ctmc(double lambda, double mu, double delta);
MmrrwModel three_queue_mmrrw(double lambda, double mu, double delta, std::optional<double> nu = std::nullopt);
double three_queue_default_nu(double lambda, double mu, double delta);

// Single-queue quantities driving the face drifts.
struct ThreeQueueClosedForm {
  double rho = 0;
  double p_vacation = 0, p_idle = 0, p_busy = 0;
  double interior_rate = 0;   // λ − μ
  double successor_rate = 0;  // λ − (1 − p_vacation) μ, queue behind an empty one
  double ratio = 0;           // (λ − (1 − p_vacation) μ) / (μ − λ)
  double spiral_product = 0;  // ratio³
};
ThreeQueueClosedForm three_queue_closed_form(double lambda, double mu, double delta);

// Product-form single-background walk: at face A coordinate l moves up with
// up[A][l] and down with down[A][l] independently of the others; down must be 0
// for l ∉ A. Missing faces default to the interior probabilities (down set to 0
// off the face).
struct ProductWalk {
  int d = 0;
  std::map<Face, std::vector<std::pair<double, double>>> moves;  // (up, down) per coordinate
};
MmrrwModel product_walk_model(const ProductWalk& w);

// Skip-free walk given directly by step distributions per face (single background).
MmrrwModel orthant_walk(int d, const std::map<Face, std::map<Step, double>>& steps);

// 2D walk with zero interior drift and reflecting boundaries.
MmrrwModel symmetric_walk_2d();

// Random product walk realizing a row of the 3D tables under the given
// coordinate map (table coordinate t -> model coordinate perm[t]).
struct TableInstance {
  MmrrwModel model;
  std::array<int, 3> perm{0, 1, 2};
  // signs chosen for a(A) on every face (model coordinates), for checking
  std::map<Face, std::array<int, 3>> intended;
};
TableInstance random_table_model(const TableRow& row, std::mt19937_64& rng, std::array<int, 3> perm = {0, 1, 2});

// Built-in examples for the CLI: "three-queue", "symmetric-2d", "queue-1d".
std::vector<std::string> example_names();
MmrrwModel builtin_example(const std::string& name, double lambda, double mu, double delta,
                           std::optional<double> nu = std::nullopt);

}  // namespace mmrrw
