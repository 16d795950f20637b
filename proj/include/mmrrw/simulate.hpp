#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmrrw/model.hpp"

namespace mmrrw {

// splitmix64 stream keyed by (seed, stream id); replication r always uses
// stream r, so serial and parallel runs draw identical numbers.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);
  std::uint64_t next();
  double uniform();  // [0, 1)

 private:
  std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t x);

enum class Exec { Serial, Parallel };

// Transition table indexed by the per-coordinate class (0, 1, ≥2) of x, packed
// base 3, and the background state.
class CompiledKernel {
 public:
  explicit CompiledKernel(const MmrrwModel& m);

  int dim() const { return d_; }
  static int class_code(std::span<const int> x);
  // One step in place.
  void step(std::vector<int>& x, int& i, Rng& rng) const;
  bool has_moves(int code, int i) const;

 private:
  struct Outcome {
    double cum;
    std::uint32_t step;  // index into steps_
    int j;
  };
  int d_;
  std::vector<std::size_t> offset_;  // per (code, i) slot, size slots+1
  std::vector<std::size_t> slot_base_;  // per code, first slot
  std::vector<Outcome> out_;
  std::vector<std::vector<int>> steps_;
};

struct PathState {
  std::vector<int> x;
  int i = 0;
};

// Observer called after every step with (t, state); return false to stop.
using PathObserver = std::function<bool(long long, const PathState&)>;

PathState simulate_path(const CompiledKernel& k, PathState start, long long steps, std::uint64_t seed,
                        std::uint64_t stream = 0, const PathObserver& obs = {});

struct GEstimate {
  Eigen::VectorXd mean;
  Eigen::VectorXd ci_halfwidth;  // 95% normal
  int reps = 0;
  long long horizon = 0;
};

// Mean of (X_T − X_0)/T over independent replications.
GEstimate estimate_g(const MmrrwModel& m, const PathState& start, long long horizon, int reps,
                     std::uint64_t seed, Exec exec = Exec::Parallel);
GEstimate estimate_g(const CompiledKernel& k, const PathState& start, long long horizon, int reps,
                     std::uint64_t seed, Exec exec = Exec::Parallel);

struct SignEstimateParams {
  long long batch0 = 10000;
  int batches = 50;
  long long budget = 100000000;
  double abs_tol = 1e-3;
  double rel_tol = 0.2;
  Exec exec = Exec::Parallel;
};

struct SignEstimate {
  Eigen::VectorXd mean;          // parent coordinates, zero outside A
  Eigen::VectorXd ci_halfwidth;
  long long steps = 0;
  bool converged = false;
};

// Time average of the parent mean increment along the induced chain ℒ^A started
// at the origin (batch means, t quantile with 49 degrees of freedom).
SignEstimate estimate_drift_sign(const MmrrwModel& m, Face A, const SignEstimateParams& p, std::uint64_t seed);

// V_A = {x : x_l ≥ K_A for l ∈ A}, scanned from the largest faces down.
struct Partition {
  int d = 0;
  std::map<Face, long long> K;
  std::map<Face, long long> T;
  std::vector<std::pair<Face, long long>> order;  // nonempty faces, scan order
  Face region(std::span<const int> x) const;
};
Partition partition_region(int d, long long base = 10);

struct DiagnosticParams {
  int reps = 200;
  long long horizon = 100000;
  long long base = 10;
  std::uint64_t seed = 1;
  Exec exec = Exec::Parallel;
};

struct Diagnostic {
  std::string call;  // "transient-like", "stable-like", "inconclusive"
  double return_fraction = 0;
  double slope_mean = 0, slope_ci = 0;
  // first return to V_empty after leaving it, over the replications that returned
  double mean_return_time = 0, return_time_ci = 0;
  std::map<Face, double> visit_fraction;
  std::vector<int> start;
};

Diagnostic recurrence_diagnostic(const MmrrwModel& m, const DiagnosticParams& p);

}  // namespace mmrrw
