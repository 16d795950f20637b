#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "mmrrw/report.hpp"
#include "support.hpp"

using namespace mmrrw;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mmrrw");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string tmp(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "mmrrw_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("certificates round trip through json") {
    std::vector<std::pair<DriftProfile, StabilityVerdict>> cases;
    for (double d : {2.0, 1.0, 0.3}) {
      StabilityVerdict v = classify_auto(three_queue_mmrrw(2, 2.5, d));
      cases.emplace_back(*v.profile, v);
    }
    DriftProfile p = oracle::make_profile(2, {{Face::full(2), {0.1, 0.2}}});
    cases.emplace_back(p, classify_2d(p));
    std::set<std::string> types;
    for (auto& [prof, v] : cases) {
      REQUIRE(v.certificate);
      types.insert(certificate_type(*v.certificate));
      json j = to_json(*v.certificate);
      Certificate back = certificate_from_json(json::parse(j.dump()), prof.d);
      CHECK(to_json(back)["type"] == j["type"]);
      CHECK(verify_certificate(back, prof).ok);
    }
    CHECK(types == std::set<std::string>{"U", "W", "spiral-positive", "spiral-transient"});
  }

  TEST_CASE("profile round trip") {
    StabilityVerdict v = classify_auto(three_queue_mmrrw(1, 2, 1, 9.0));
    DriftProfile back = profile_from_json(json::parse(to_json(*v.profile).dump()));
    CHECK(to_json(back).dump() == to_json(*v.profile).dump());
    CHECK(verify_certificate(*v.certificate, back).ok);
  }

  TEST_CASE("malformed certificates are rejected") {
    CHECK_THROWS_AS(certificate_from_json(json::parse(R"({"type": "U", "U": [[1, 0]]})"), 2), ModelError);
    CHECK_THROWS_AS(certificate_from_json(json::parse(R"({"type": "Z"})"), 2), ModelError);
    CHECK_THROWS_AS(certificate_from_json(json::parse(R"({"U": [[1]]})"), 1), ModelError);
  }

  TEST_CASE("verdict report carries the required fields") {
    json j = to_json(classify_auto(three_queue_mmrrw(1, 2, 1, 9.0)));
    for (const char* k : {"verdict", "rule", "certificate", "margins", "caveats", "drift_profile"}) CHECK(j.contains(k));
    CHECK(j["margins"]["verified"] == true);
  }
}

TEST_SUITE("cli") {
  TEST_CASE("example, classify and verify") {
    const std::string model = tmp("tq.json"), report = tmp("tq_report.json");
    Run ex = cli({"example", "three-queue", "--lambda", "1", "--mu", "2", "--delta", "1", "--out", model});
    REQUIRE(ex.code == kExitOk);
    Run c = cli({"classify", "--model", model, "--out", report});
    CHECK(c.code == kExitOk);
    json r = json::parse(std::ifstream(report));
    CHECK(r["result"]["verdict"] == "PositiveRecurrent");
    CHECK(r["seed"] == 1);
    CHECK(r["version"] == kVersion);
    CHECK(r["tolerances"].contains("zero_band"));
    CHECK(cli({"verify-cert", "--model", model, "--cert", report}).code == kExitOk);

    // flip one entry of U (and its mirror so the symmetry check passes)
    json cert = r["result"]["certificate"];
    REQUIRE(cert["type"] == "U");
    double u = cert["U"][0][1];
    cert["U"][0][1] = -u - 1;
    cert["U"][1][0] = -u - 1;
    const std::string bad = tmp("bad_cert.json");
    write(bad, cert.dump());
    Run v = cli({"verify-cert", "--model", model, "--cert", bad});
    CHECK(v.code == kExitInternal);
    CHECK(v.err.find("violated") != std::string::npos);
  }

  TEST_CASE("unknown verdict has its own exit code") {
    const std::string model = tmp("sym.json");
    REQUIRE(cli({"example", "symmetric-2d", "--out", model}).code == kExitOk);
    Run c = cli({"classify", "--model", model});
    CHECK(c.code == kExitUnknown);
    CHECK(json::parse(c.out)["result"]["verdict"] == "Unknown");
  }

  TEST_CASE("invalid inputs exit with 2") {
    const std::string broken = tmp("broken.json");
    write(broken, R"({"d": 1, "faces": {"": 1, "1": 1}, "blocks": [{"from": "", "z": [1], "to": "1", "p": [[0.5]]}]})");
    Run v = cli({"validate", "--model", broken});
    CHECK(v.code == kExitInvalid);
    CHECK(json::parse(v.out)["result"]["ok"] == false);
    CHECK(cli({"classify", "--model", broken}).code == kExitInvalid);
    const std::string garbage = tmp("garbage.json");
    write(garbage, "{ not json");
    CHECK(cli({"classify", "--model", garbage}).code == kExitInvalid);
    CHECK(cli({"classify", "--model", tmp("missing.json")}).code == kExitInvalid);
    CHECK(cli({"classify", "--model", broken, "--tol", "0.5"}).code == kExitInvalid);
    CHECK(cli({"bogus"}).code == kExitInvalid);
  }

  TEST_CASE("identical inputs give byte identical reports") {
    const std::string model = tmp("tq2.json");
    REQUIRE(cli({"example", "three-queue", "--lambda", "2", "--mu", "2.5", "--delta", "2", "--out", model}).code == 0);
    Run a = cli({"classify", "--model", model, "--seed", "77"});
    Run b = cli({"classify", "--model", model, "--seed", "77"});
    CHECK(a.code == kExitOk);
    CHECK(a.out == b.out);
    Run d1 = cli({"drift", "--model", model});
    CHECK(d1.code == kExitOk);
    CHECK(json::parse(d1.out)["result"]["faces"]["1,2"].contains("drift"));
  }

  TEST_CASE("simulate writes the report, trajectory and plot data") {
    const std::string model = tmp("tq3.json"), traj = tmp("traj.txt"), plot = tmp("plot.csv");
    REQUIRE(cli({"example", "three-queue", "--out", model}).code == 0);
    Run s = cli({"simulate", "--model", model, "--reps", "4", "--horizon", "2000", "--trajectory", traj, "--plot", plot});
    CHECK(s.code == kExitOk);
    json j = json::parse(s.out);
    CHECK(j["result"]["diagnostic"].contains("call"));
    std::ifstream t(traj);
    std::string line;
    int lines = 0;
    while (std::getline(t, line)) ++lines;
    CHECK(lines == 2001);
    std::ifstream p(plot);
    std::getline(p, line);
    CHECK(line == "step,norm1,face");
  }

  TEST_CASE("assume-sign reaches the classifier") {
    const std::string model = tmp("tq4.json");
    REQUIRE(cli({"example", "three-queue", "--lambda", "2", "--mu", "2.5", "--delta", "2", "--out", model}).code == 0);
    Run c = cli({"classify", "--model", model, "--assume-sign", "1=-", "2=-", "3=-"});
    CHECK(c.code == kExitOk);
    CHECK(json::parse(c.out)["result"]["rule"] == "Table1-C1-1-1");
    CHECK(cli({"classify", "--model", model, "--assume-sign", "1=x"}).code == kExitInvalid);
  }
}
