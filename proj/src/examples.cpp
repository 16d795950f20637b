#include <algorithm>
#include <cmath>
#include <sstream>

#include "mmrrw/examples.hpp"

namespace mmrrw {

namespace {

std::vector<Face> submasks(Face A) {
  std::vector<Face> out;
  std::uint32_t m = A.mask();
  for (std::uint32_t s = m;; s = (s - 1) & m) {
    out.push_back(Face(s));
    if (s == 0) break;
  }
  return out;
}

// Outflow of (A, i) under witness E; the diagonal of (A, 0, A) does not count.
double outflow(const MmrrwModel& r, Face A, Face E, int i) {
  double out = 0;
  const Face none;
  for (auto it = r.blocks.lower_bound(BlockKey{A, 0, none}); it != r.blocks.end() && it->first.from == A; ++it) {
    Step z = decode_step(it->first.z, r.d);
    if (target_face(A, z, E) != it->first.to) continue;
    bool still = it->first.to == A && std::all_of(z.begin(), z.end(), [](int v) { return v == 0; });
    for (int j = 0; j < it->second.cols(); ++j)
      if (!(still && j == i)) out += it->second(i, j);
  }
  return out;
}

// Adds a single-background step to every target the witnesses can produce.
void add_step(MmrrwModel& m, Face A, const Step& z, double p) {
  Face down;
  for (int l : A.members())
    if (z[l] == -1) down = down.with(l);
  for (Face E : submasks(down)) m.add(A, z, target_face(A, z, E), 0, 0, p);
}

Step unit(int d, int l, int s) {
  Step z(d, 0);
  z[l] = s;
  return z;
}

}  // namespace

double CtmcModel::max_outflow() const {
  double mx = 0;
  for (const auto& [A, n] : rates.bg_sizes)
    for (Face E : submasks(A))
      for (int i = 0; i < n; ++i) mx = std::max(mx, outflow(rates, A, E, i));
  return mx;
}

MmrrwModel uniformize(const CtmcModel& c, double nu) {
  const MmrrwModel& r = c.rates;
  if (!(nu > 0)) throw ModelError("uniformize: rate must be positive");
  MmrrwModel m;
  m.d = r.d;
  m.bg_sizes = r.bg_sizes;
  m.labels = r.labels;
  for (const auto& [A, n] : r.bg_sizes) {
    for (int i = 0; i < n; ++i) {
      double q = -1;
      for (Face E : submasks(A)) {
        double o = outflow(r, A, E, i);
        if (q >= 0 && std::abs(o - q) > 1e-12 * std::max(1.0, q)) {
          std::ostringstream os;
          os << "uniformize: outflow of face {" << A.key() << "} state " << i << " depends on the level-1 witness";
          throw ModelError(os.str());
        }
        q = o;
      }
      if (q > nu * (1 + 1e-12)) {
        std::ostringstream os;
        os << "uniformize: rate " << nu << " is below the outflow " << q << " of face {" << A.key() << "} state " << i;
        throw ModelError(os.str());
      }
      m.add(A, Step(r.d, 0), A, i, i, 1.0 - q / nu);
    }
  }
  for (const auto& [key, Q] : r.blocks) {
    Eigen::MatrixXd P = Q / nu;
    if (key.to == key.from && key.z == encode_step(Step(r.d, 0))) P.diagonal().setZero();
    m.add(key.from, decode_step(key.z, r.d), key.to, P);
  }
  return m;
}

// ---- three queues -------------------------------------------------------------

namespace {

// J of the empty queues of A, vacation = -1, idle = 0
std::array<int, 3> tq_decode(Face A, int i) {
  std::array<int, 3> J{2, 2, 2};
  std::vector<int> empty = Face::full(3).minus(A).members();
  const int k = static_cast<int>(empty.size());
  for (int q = 0; q < k; ++q) J[empty[q]] = ((i >> (k - 1 - q)) & 1) ? 0 : -1;
  for (int l : A.members()) J[l] = J[(l + 2) % 3] == -1 ? 1 : 2;
  return J;
}

int tq_encode(Face A, const std::array<int, 3>& J) {
  std::vector<int> empty = Face::full(3).minus(A).members();
  int i = 0;
  for (int l : empty) i = 2 * i + (J[l] == 0 ? 1 : 0);
  return i;
}

}  // namespace

CtmcModel three_queue_ctmc(double lambda, double mu, double delta) {
  if (!(lambda > 0 && mu > 0 && delta > 0)) throw ModelError("three_queue: rates must be positive");
  CtmcModel c;
  MmrrwModel& r = c.rates;
  r.d = 3;
  for (Face A : faces_by_size_desc(3)) {
    const int n = 1 << (3 - A.size());
    r.bg_sizes[A] = n;
    std::vector<std::string> lab;
    for (int i = 0; i < n; ++i) {
      auto J = tq_decode(A, i);
      std::string s;
      for (int l = 0; l < 3; ++l) s += (l ? "," : "") + std::to_string(J[l]);
      lab.push_back("J=(" + s + ")");
    }
    r.labels[A] = lab;
  }
  for (Face A : faces_by_size_desc(3)) {
    for (int i = 0; i < r.bg_sizes[A]; ++i) {
      auto J = tq_decode(A, i);
      for (int l = 0; l < 3; ++l) {
        if (A.contains(l)) {
          r.add(A, unit(3, l, 1), A, i, i, lambda);
          if (J[l] == 2) {
            r.add(A, unit(3, l, -1), A, i, i, mu);
            auto J2 = J;
            J2[l] = -1;
            Face B = A.without(l);
            r.add(A, unit(3, l, -1), B, i, tq_encode(B, J2), mu);
          }
        } else if (J[l] == 0) {
          Face B = A.with(l);
          r.add(A, unit(3, l, 1), B, i, tq_encode(B, J), lambda);
        } else {
          auto J2 = J;
          J2[l] = 0;
          r.add(A, Step(3, 0), A, i, tq_encode(A, J2), delta);
        }
      }
    }
  }
  return c;
}

double three_queue_default_nu(double lambda, double mu, double delta) { return 3 * (lambda + mu + delta); }

MmrrwModel three_queue_mmrrw(double lambda, double mu, double delta, std::optional<double> nu) {
  return uniformize(three_queue_ctmc(lambda, mu, delta), nu.value_or(three_queue_default_nu(lambda, mu, delta)));
}

ThreeQueueClosedForm three_queue_closed_form(double lambda, double mu, double delta) {
  if (!(mu > lambda)) throw ModelError("three_queue_closed_form: needs mu > lambda");
  ThreeQueueClosedForm f;
  f.rho = lambda / mu;
  // single queue: δ p_vac = μ π_1 = λ p_idle, busy mass π_1 / (1 − ρ)
  const double v = mu / delta, idle = mu / lambda, busy = 1 / (1 - f.rho), tot = v + idle + busy;
  f.p_vacation = v / tot;
  f.p_idle = idle / tot;
  f.p_busy = busy / tot;
  f.interior_rate = lambda - mu;
  f.successor_rate = lambda - (1 - f.p_vacation) * mu;
  f.ratio = f.successor_rate / (mu - lambda);
  f.spiral_product = f.ratio * f.ratio * f.ratio;
  return f;
}

// ---- walks -------------------------------------------------------------------------

MmrrwModel product_walk_model(const ProductWalk& w) {
  const int d = w.d;
  const Face N = Face::full(d);
  auto interior = w.moves.find(N);
  if (interior == w.moves.end()) throw ModelError("product_walk_model: interior probabilities missing");
  MmrrwModel m;
  m.d = d;
  int zs = 1;
  for (int l = 0; l < d; ++l) zs *= 3;
  for (Face A : faces_by_size_desc(d)) m.bg_sizes[A] = 1;
  for (Face A : faces_by_size_desc(d)) {
    auto it = w.moves.find(A);
    std::vector<std::pair<double, double>> mv = it != w.moves.end() ? it->second : interior->second;
    if (static_cast<int>(mv.size()) != d) throw ModelError("product_walk_model: wrong number of coordinates");
    for (int l = 0; l < d; ++l) {
      if (!A.contains(l)) {
        if (it != w.moves.end() && mv[l].second != 0)
          throw ModelError("product_walk_model: coordinate at 0 cannot move down");
        mv[l].second = 0;
      }
      if (mv[l].first < 0 || mv[l].second < 0 || mv[l].first + mv[l].second > 1)
        throw ModelError("product_walk_model: bad probabilities");
    }
    for (int code = 0; code < zs; ++code) {
      Step z = decode_step(static_cast<std::uint64_t>(code), d);
      double p = 1;
      for (int l = 0; l < d; ++l)
        p *= z[l] == 1 ? mv[l].first : z[l] == -1 ? mv[l].second : 1 - mv[l].first - mv[l].second;
      if (p > 0) add_step(m, A, z, p);
    }
  }
  return m;
}

MmrrwModel orthant_walk(int d, const std::map<Face, std::map<Step, double>>& steps) {
  MmrrwModel m;
  m.d = d;
  for (Face A : faces_by_size_desc(d)) m.bg_sizes[A] = 1;
  for (Face A : faces_by_size_desc(d)) {
    double tot = 0;
    auto it = steps.find(A);
    if (it != steps.end())
      for (const auto& [z, p] : it->second) {
        if (static_cast<int>(z.size()) != d) throw ModelError("orthant_walk: step has the wrong length");
        for (int l = 0; l < d; ++l)
          if (!A.contains(l) && z[l] < 0) throw ModelError("orthant_walk: step leaves the orthant");
        if (p < 0) throw ModelError("orthant_walk: negative probability");
        if (p > 0) add_step(m, A, z, p);
        tot += p;
      }
    if (tot > 1 + 1e-12) throw ModelError("orthant_walk: probabilities of face {" + A.key() + "} exceed 1");
    if (tot < 1) add_step(m, A, Step(d, 0), 1 - tot);
  }
  return m;
}

MmrrwModel symmetric_walk_2d() {
  ProductWalk w;
  w.d = 2;
  w.moves[Face::full(2)] = {{0.25, 0.25}, {0.25, 0.25}};
  return product_walk_model(w);
}

TableInstance random_table_model(const TableRow& row, std::mt19937_64& rng, std::array<int, 3> perm) {
  std::uniform_real_distribution<double> U(0, 1);
  auto pick = [&](double lo, double hi) { return lo + (hi - lo) * U(rng); };
  auto coin = [&] { return U(rng) < 0.5 ? -1 : 1; };
  // (up, down) with drift s·m around a base level b
  auto move = [](int s, double m, double b) {
    return s > 0 ? std::pair{b + m, b} : std::pair{b, b + m};
  };

  TableInstance inst;
  inst.perm = perm;
  ProductWalk w;
  w.d = 3;
  const Face N = Face::full(3);
  std::vector<std::pair<double, double>> mv(3);
  std::array<int, 3> sN{};
  for (int t = 0; t < 3; ++t) {
    sN[perm[t]] = row.aN[t];
    mv[perm[t]] = move(row.aN[t], pick(0.05, 0.2), 0.25 - 0.1);
  }
  w.moves[N] = mv;
  inst.intended[N] = sN;

  const auto& faces = table_faces();
  for (int k = 0; k < 6; ++k) {
    const TableEntry& e = row.entries[k];
    Face F;
    for (int t : faces[k].members()) F = F.with(perm[t]);
    std::array<int, 3> s{};
    for (int t : faces[k].members()) s[perm[t]] = e.kind == TableEntry::Signs ? e.signs[t] : coin();
    std::vector<std::pair<double, double>> fm(3);
    for (int l = 0; l < 3; ++l) {
      if (F.contains(l)) fm[l] = move(s[l], pick(0.3, 0.4), 0.05);
      else fm[l] = {F.size() == 2 ? pick(0.005, 0.01) : 1e-4, 0.0};
    }
    w.moves[F] = fm;
    inst.intended[F] = s;
  }
  w.moves[Face()] = {{0.25, 0}, {0.25, 0}, {0.25, 0}};
  inst.model = product_walk_model(w);
  return inst;
}

std::vector<std::string> example_names() { return {"three-queue", "symmetric-2d", "queue-1d"}; }

MmrrwModel builtin_example(const std::string& name, double lambda, double mu, double delta, std::optional<double> nu) {
  if (name == "three-queue") return three_queue_mmrrw(lambda, mu, delta, nu);
  if (name == "symmetric-2d") return symmetric_walk_2d();
  if (name == "queue-1d") {
    ProductWalk w;
    w.d = 1;
    double s = lambda + mu;
    w.moves[Face::full(1)] = {{lambda / s, mu / s}};
    return product_walk_model(w);
  }
  throw ModelError("unknown example '" + name + "'");
}

}  // namespace mmrrw
