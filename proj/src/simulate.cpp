#include <cmath>
#include <numeric>

#include "mmrrw/induced.hpp"
#include "mmrrw/simulate.hpp"

namespace mmrrw {

namespace {

template <class F>
void for_reps(int reps, Exec exec, F&& f) {
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < reps; ++r) f(r);
  } else {
    for (int r = 0; r < reps; ++r) f(r);
  }
}

// Two-sided 97.5% t quantile with 49 degrees of freedom.
constexpr double kT49 = 2.0096;

}  // namespace

PathState simulate_path(const CompiledKernel& k, PathState s, long long steps, std::uint64_t seed,
                        std::uint64_t stream, const PathObserver& obs) {
  if (static_cast<int>(s.x.size()) != k.dim()) throw ModelError("simulate_path: start has the wrong dimension");
  Rng rng(seed, stream);
  for (long long t = 1; t <= steps; ++t) {
    k.step(s.x, s.i, rng);
    if (obs && !obs(t, s)) break;
  }
  return s;
}

GEstimate estimate_g(const CompiledKernel& k, const PathState& start, long long horizon, int reps,
                     std::uint64_t seed, Exec exec) {
  if (horizon < 1 || reps < 2) throw ModelError("estimate_g: need horizon >= 1 and reps >= 2");
  const int d = k.dim();
  std::vector<Eigen::VectorXd> inc(reps);
  for_reps(reps, exec, [&](int r) {
    PathState end = simulate_path(k, start, horizon, seed, static_cast<std::uint64_t>(r));
    Eigen::VectorXd v(d);
    for (int l = 0; l < d; ++l) v(l) = static_cast<double>(end.x[l] - start.x[l]) / horizon;
    inc[r] = v;
  });
  GEstimate g;
  g.reps = reps;
  g.horizon = horizon;
  g.mean = Eigen::VectorXd::Zero(d);
  for (const auto& v : inc) g.mean += v;
  g.mean /= reps;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
  for (const auto& v : inc) var += (v - g.mean).cwiseAbs2();
  var /= (reps - 1);
  g.ci_halfwidth = 1.96 * (var / reps).cwiseSqrt();
  return g;
}

GEstimate estimate_g(const MmrrwModel& m, const PathState& start, long long horizon, int reps, std::uint64_t seed,
                     Exec exec) {
  return estimate_g(CompiledKernel(m), start, horizon, reps, seed, exec);
}

SignEstimate estimate_drift_sign(const MmrrwModel& m, Face A, const SignEstimateParams& p, std::uint64_t seed) {
  if (A.empty() || A.size() >= m.d) throw ModelError("estimate_drift_sign: need 1 <= |A| < d");
  InducedChain c = project(m, A);
  CompiledKernel k(c.model);
  const int dl = c.model.d;
  const auto members = A.members();

  // parent α at (local class, background), A-coordinates only
  int codes = 1;
  for (int l = 0; l < dl; ++l) codes *= 3;
  std::vector<std::vector<Eigen::VectorXd>> alpha(codes);
  for (int code = 0; code < codes; ++code) {
    std::vector<int> xp(m.d, 2);
    Face local;
    for (int l = 0, cc = code; l < dl; ++l, cc /= 3) {
      xp[c.coord_map[l]] = cc % 3;
      if (cc % 3) local = local.with(l);
    }
    const int n = c.model.bg_size(local);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd full = local_drift_at(m, xp, i);
      Eigen::VectorXd a(members.size());
      for (std::size_t q = 0; q < members.size(); ++q) a(q) = full(members[q]);
      alpha[code].push_back(a);
    }
  }

  SignEstimate out;
  const int B = std::max(2, p.batches);
  const int na = static_cast<int>(members.size());
  Eigen::VectorXd mean(na), hw(na);
  for (long long L = std::max<long long>(p.batch0, 1), attempt = 0;; L *= 2, ++attempt) {
    std::vector<Eigen::VectorXd> bm(B);
    // independent chains per batch, each with its own burn-in of L steps
    for_reps(B, p.exec, [&](int b) {
      Rng rng(seed, static_cast<std::uint64_t>(attempt) * 100003 + b);
      std::vector<int> x(dl, 0);
      int i = 0;
      for (long long t = 0; t < L; ++t) k.step(x, i, rng);
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(na);
      for (long long t = 0; t < L; ++t) {
        sum += alpha[CompiledKernel::class_code(x)][i];
        k.step(x, i, rng);
      }
      bm[b] = sum / static_cast<double>(L);
    });
    out.steps += 2 * L * B;
    mean.setZero();
    for (const auto& v : bm) mean += v;
    mean /= B;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(na);
    for (const auto& v : bm) var += (v - mean).cwiseAbs2();
    var /= (B - 1);
    hw = kT49 * (var / B).cwiseSqrt();
    bool ok = true;
    for (int q = 0; q < na; ++q)
      if (!(hw(q) < std::max(p.abs_tol, p.rel_tol * std::abs(mean(q))))) ok = false;
    if (ok) {
      out.converged = true;
      break;
    }
    if (out.steps + 4 * L * B > p.budget) break;
  }
  out.mean = Eigen::VectorXd::Zero(m.d);
  out.ci_halfwidth = Eigen::VectorXd::Zero(m.d);
  for (int q = 0; q < na; ++q) {
    out.mean(members[q]) = mean(q);
    out.ci_halfwidth(members[q]) = hw(q);
  }
  return out;
}

Face Partition::region(std::span<const int> x) const {
  for (const auto& [A, K] : order) {
    bool in = true;
    for (int l = 0; l < d && in; ++l)
      if (A.contains(l) && x[l] < K) in = false;
    if (in) return A;
  }
  return Face();
}

Partition partition_region(int d, long long base) {
  if (d < 1 || base < 1) throw ModelError("partition_region: need d >= 1 and base >= 1");
  Partition p;
  p.d = d;
  for (Face A : faces_by_size_desc(d)) {
    if (A.empty()) {
      p.K[A] = 0;
      p.T[A] = 1;
      continue;
    }
    long long K = base * (d - A.size() + 1);
    p.K[A] = K;
    p.T[A] = std::max<long long>(1, K / 2);
    p.order.emplace_back(A, K);
  }
  return p;
}

namespace {

// Lexicographically smallest state of V_∅ with a skip-free neighbour outside V_∅.
std::vector<int> diagnostic_start(const Partition& part) {
  const int d = part.d;
  long long top = 0;
  for (const auto& [A, K] : part.K) top = std::max(top, K);
  std::vector<int> x(d, 0);
  int zs = 1;
  for (int l = 0; l < d; ++l) zs *= 3;
  for (;;) {
    if (part.region(x).empty()) {
      for (int code = 0; code < zs; ++code) {
        std::vector<int> y = x;
        bool valid = true;
        for (int l = 0, c = code; l < d; ++l, c /= 3) {
          y[l] += c % 3 - 1;
          if (y[l] < 0) valid = false;
        }
        if (valid && !part.region(y).empty()) return x;
      }
    }
    int l = d - 1;
    while (l >= 0 && ++x[l] > top) x[l--] = 0;
    if (l < 0) throw SolverError("diagnostic_start: no boundary state of V_empty found");
  }
}

}  // namespace

Diagnostic recurrence_diagnostic(const MmrrwModel& m, const DiagnosticParams& p) {
  if (p.reps < 2 || p.horizon < 100) throw ModelError("recurrence_diagnostic: need reps >= 2 and horizon >= 100");
  CompiledKernel k(m);
  Partition part = partition_region(m.d, p.base);
  Diagnostic out;
  out.start = diagnostic_start(part);
  const int checkpoints = 100;
  const long long every = std::max<long long>(1, p.horizon / checkpoints);

  struct RepResult {
    bool returned = true;
    long long return_time = -1;
    double slope = 0;
    std::vector<long long> visits;
  };
  std::vector<RepResult> res(p.reps);
  for_reps(p.reps, p.exec, [&](int r) {
    RepResult rr;
    rr.visits.assign(std::size_t(1) << m.d, 0);
    bool exited = false, back = false;
    std::vector<double> ts, ns;
    PathState s{out.start, 0};
    simulate_path(k, s, p.horizon, p.seed, static_cast<std::uint64_t>(r), [&](long long t, const PathState& st) {
      ++rr.visits[face_of(st.x).mask()];
      if (!back) {
        bool inside = part.region(st.x).empty();
        if (!exited && !inside) exited = true;
        else if (exited && inside) {
          back = true;
          rr.return_time = t;
        }
      }
      if (t % every == 0 && t > p.horizon / 2) {
        ts.push_back(static_cast<double>(t));
        ns.push_back(std::accumulate(st.x.begin(), st.x.end(), 0.0));
      }
      return true;
    });
    rr.returned = !exited || back;
    if (ts.size() >= 2) {
      double tm = std::accumulate(ts.begin(), ts.end(), 0.0) / ts.size();
      double nm = std::accumulate(ns.begin(), ns.end(), 0.0) / ns.size();
      double sxy = 0, sxx = 0;
      for (std::size_t q = 0; q < ts.size(); ++q) {
        sxy += (ts[q] - tm) * (ns[q] - nm);
        sxx += (ts[q] - tm) * (ts[q] - tm);
      }
      rr.slope = sxx > 0 ? sxy / sxx : 0;
    }
    res[r] = std::move(rr);
  });

  long long total = 0;
  std::map<Face, long long> visits;
  double ret = 0, sm = 0;
  std::vector<double> rts;
  for (const auto& rr : res) {
    ret += rr.returned;
    if (rr.return_time >= 0) rts.push_back(static_cast<double>(rr.return_time));
    sm += rr.slope;
    for (std::size_t f = 0; f < rr.visits.size(); ++f) {
      if (!rr.visits[f]) continue;
      visits[Face(static_cast<std::uint32_t>(f))] += rr.visits[f];
      total += rr.visits[f];
    }
  }
  out.return_fraction = ret / p.reps;
  out.slope_mean = sm / p.reps;
  double var = 0;
  for (const auto& rr : res) var += (rr.slope - out.slope_mean) * (rr.slope - out.slope_mean);
  var /= (p.reps - 1);
  out.slope_ci = 1.96 * std::sqrt(var / p.reps);
  if (!rts.empty()) {
    out.mean_return_time = std::accumulate(rts.begin(), rts.end(), 0.0) / rts.size();
    double v = 0;
    for (double x : rts) v += (x - out.mean_return_time) * (x - out.mean_return_time);
    out.return_time_ci = rts.size() > 1 ? 1.96 * std::sqrt(v / (rts.size() - 1) / rts.size()) : 0;
  }
  for (const auto& [f, c] : visits) out.visit_fraction[f] = static_cast<double>(c) / total;
  // growth must also be visible on the scale of the start region, else a stable path's noise can pass
  const double start_norm = std::accumulate(out.start.begin(), out.start.end(), 0.0);
  const bool grows = out.slope_mean - out.slope_ci > 0 && out.slope_mean * (p.horizon / 2) >= start_norm;
  if (grows) out.call = "transient-like";
  else if (out.return_fraction >= 0.99) out.call = "stable-like";
  else out.call = "inconclusive";
  return out;
}

}  // namespace mmrrw
