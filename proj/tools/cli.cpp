#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mmrrw/examples.hpp"
#include "mmrrw/report.hpp"
#include "mmrrw/truncated.hpp"

namespace mmrrw {

using nlohmann::json;

namespace {

struct Args {
  std::string model_path;
  std::uint64_t seed = 1;
  double tol = kZeroBand;
  std::string out_path;
  std::vector<std::string> assume;
  int reps = 200;
  long long horizon = 1000000;
  int truncation = 0;
  std::string cert_path;
  std::string trajectory_path;
  std::string plot_path;
  int restarts = 64;
  std::string example;
  double lambda = 1, mu = 2, delta = 1;
  std::optional<double> nu;
};

json envelope(const std::string& command, const Args& a, json result) {
  return json{{"tool", "mmrrw"},
              {"version", kVersion},
              {"command", command},
              {"seed", a.seed},
              {"tolerances", json{{"zero_band", a.tol}, {"margin_floor", FeasibilityOptions{}.margin_floor}}},
              {"result", std::move(result)}};
}

void emit(const json& j, const Args& a, std::ostream& out) {
  if (a.out_path.empty()) {
    out << j.dump(2) << "\n";
    return;
  }
  std::ofstream f(a.out_path);
  if (!f) throw std::runtime_error("cannot write " + a.out_path);
  f << j.dump(2) << "\n";
}

ClassifyOptions options(const Args& a, int d) {
  ClassifyOptions o;
  o.zero_band = a.tol;
  o.seed = a.seed;
  o.feas.restarts = a.restarts;
  for (const auto& s : a.assume) {
    auto [A, v] = parse_assume_sign(s, d);
    o.assume_sign[A] = v;
  }
  return o;
}

MmrrwModel load_checked(const Args& a, std::ostream& err, bool& bad) {
  MmrrwModel m = load_model(a.model_path);
  ValidationReport r = validate_model(m);
  bad = !r.ok();
  if (bad)
    for (const auto& e : r.errors) err << "validation: " << e.kind << ": " << e.message << "\n";
  return m;
}

int cmd_validate(const Args& a, std::ostream& out) {
  MmrrwModel m = load_model(a.model_path);
  ValidationReport r = validate_model(m);
  emit(envelope("validate", a, to_json(r)), a, out);
  return r.ok() ? kExitOk : kExitInvalid;
}

int cmd_drift(const Args& a, std::ostream& out, std::ostream& err) {
  bool bad = false;
  MmrrwModel m = load_checked(a, err, bad);
  if (bad) return kExitInvalid;
  ClassifyOptions o = options(a, m.d);
  json faces = json::object();
  for (Face A : faces_by_size_desc(m.d)) {
    if (A.empty()) continue;
    json f;
    Status st = recurrence_status(m, A, o);
    f["status"] = to_string(st);
    if (st == Status::PositiveRecurrent) {
      if (A.size() >= m.d - 1) {
        f["drift"] = to_json(induced_drift(m, A));
      } else if (a.truncation > 0) {
        f["drift"] = to_json(truncated_induced_drift(m, A, a.truncation));
        f["truncation"] = a.truncation;
      }
    }
    faces[A.key()] = f;
  }
  emit(envelope("drift", a, json{{"d", m.d}, {"faces", faces}}), a, out);
  return kExitOk;
}

int cmd_classify(const Args& a, std::ostream& out, std::ostream& err) {
  bool bad = false;
  MmrrwModel m = load_checked(a, err, bad);
  if (bad) return kExitInvalid;
  StabilityVerdict v = classify_auto(m, options(a, m.d));
  emit(envelope("classify", a, to_json(v)), a, out);
  return v.verdict == Verdict::Unknown ? kExitUnknown : kExitOk;
}

int cmd_verify(const Args& a, std::ostream& out, std::ostream& err) {
  bool bad = false;
  MmrrwModel m = load_checked(a, err, bad);
  if (bad) return kExitInvalid;
  std::ifstream f(a.cert_path);
  if (!f) throw ModelError("cannot read certificate " + a.cert_path);
  json j = json::parse(f);
  if (j.contains("result") && j["result"].is_object()) j = j["result"];
  Certificate c = certificate_from_json(j, m.d);
  DriftProfile p = build_profile(m, options(a, m.d));
  CertCheck chk = verify_certificate(c, p);
  json r = to_json(chk);
  r["type"] = certificate_type(c);
  emit(envelope("verify-cert", a, r), a, out);
  for (const auto& v : chk.violations) err << "violated: " << v << "\n";
  return chk.ok ? kExitOk : kExitInternal;
}

int cmd_simulate(const Args& a, std::ostream& out, std::ostream& err) {
  bool bad = false;
  MmrrwModel m = load_checked(a, err, bad);
  if (bad) return kExitInvalid;
  DiagnosticParams dp;
  dp.reps = a.reps;
  dp.horizon = a.horizon;
  dp.seed = a.seed;
  Diagnostic diag = recurrence_diagnostic(m, dp);
  json r{{"diagnostic", to_json(diag)}};

  // interior increments from a start deep enough that no boundary is reachable
  CompiledKernel k(m);
  const long long gh = std::min<long long>(a.horizon, 100000);
  PathState deep{std::vector<int>(m.d, static_cast<int>(gh + 1)), 0};
  r["g_interior"] = to_json(estimate_g(k, deep, gh, std::max(a.reps, 2), mix64(a.seed ^ 0x9e)));

  if (!a.trajectory_path.empty() || !a.plot_path.empty()) {
    std::ofstream traj, plot;
    if (!a.trajectory_path.empty()) traj.open(a.trajectory_path);
    if (!a.plot_path.empty()) {
      plot.open(a.plot_path);
      plot << "step,norm1,face\n";
    }
    auto record = [&](long long t, const PathState& s) {
      Face A = face_of(s.x);
      if (traj.is_open()) {
        traj << t;
        for (int v : s.x) traj << ' ' << v;
        traj << ' ' << (A.empty() ? "{}" : A.key()) << ' ' << s.i << '\n';
      }
      if (plot.is_open()) {
        long long n1 = 0;
        for (int v : s.x) n1 += v;
        plot << t << ',' << n1 << ",\"" << A.key() << "\"\n";
      }
      return true;
    };
    PathState s{diag.start, 0};
    record(0, s);
    simulate_path(k, s, a.horizon, a.seed, 0, record);
  }
  emit(envelope("simulate", a, r), a, out);
  return kExitOk;
}

int cmd_example(const Args& a, std::ostream& out) {
  MmrrwModel m = builtin_example(a.example, a.lambda, a.mu, a.delta, a.nu);
  emit(model_to_json(m), a, out);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stability classification of skip-free Markov modulated reflecting random walks", "mmrrw"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Args a;

  auto common = [&](CLI::App* s, bool model) {
    if (model) s->add_option("--model", a.model_path, "model JSON file")->required()->check(CLI::ExistingFile);
    s->add_option("--seed", a.seed, "64-bit seed");
    s->add_option("--out", a.out_path, "write the report here instead of stdout");
  };
  auto tolerant = [&](CLI::App* s) {
    s->add_option("--tol", a.tol, "zero band for sign tests")->check(CLI::Range(1e-15, 1e-3));
    s->add_option("--assume-sign", a.assume, "FACE=SIGNS, e.g. 1=-,0,0 or 1,2=+,-")->take_all();
    s->add_option("--restarts", a.restarts, "restarts of the U search")->check(CLI::PositiveNumber);
  };

  auto* validate = app.add_subcommand("validate", "check a model file");
  common(validate, true);
  auto* drift = app.add_subcommand("drift", "drift vectors of all faces");
  common(drift, true);
  tolerant(drift);
  drift->add_option("--truncation", a.truncation, "level cap for approximate drifts of small faces")->check(CLI::Range(5, 1000));
  auto* classify = app.add_subcommand("classify", "decide positive recurrence or transience");
  common(classify, true);
  tolerant(classify);
  auto* verify = app.add_subcommand("verify-cert", "re-check a certificate against a model");
  common(verify, true);
  tolerant(verify);
  verify->add_option("--cert", a.cert_path, "certificate or classify report JSON")->required()->check(CLI::ExistingFile);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo recurrence diagnostic");
  common(simulate, true);
  simulate->add_option("--reps", a.reps, "replications")->check(CLI::Range(2, 100000));
  simulate->add_option("--horizon", a.horizon, "steps per replication")->check(CLI::Range(1LL, 1000000000LL));
  simulate->add_option("--trajectory", a.trajectory_path, "dump one path as 'step x_1 .. x_d face bg'");
  simulate->add_option("--plot", a.plot_path, "CSV step,norm1,face for one path");
  auto* example = app.add_subcommand("example", "emit a built-in model");
  common(example, false);
  example->add_option("name", a.example, "three-queue, symmetric-2d, queue-1d")->required();
  example->add_option("--lambda", a.lambda, "arrival rate")->check(CLI::PositiveNumber);
  example->add_option("--mu", a.mu, "service rate")->check(CLI::PositiveNumber);
  example->add_option("--delta", a.delta, "vacation end rate")->check(CLI::PositiveNumber);
  example->add_option("--nu", a.nu, "uniformization rate")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*validate) return cmd_validate(a, out);
    if (*drift) return cmd_drift(a, out, err);
    if (*classify) return cmd_classify(a, out, err);
    if (*verify) return cmd_verify(a, out, err);
    if (*simulate) return cmd_simulate(a, out, err);
    if (*example) return cmd_example(a, out);
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace mmrrw
