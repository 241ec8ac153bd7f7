#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "testutil.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "ostap-cli-tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run_cli(const std::string& args) {
  fs::path out = scratch_dir() / "stdout.txt";
  fs::path err = scratch_dir() / "stderr.txt";
  std::string cmd = std::string(OSTAP_BIN) + " " + args + " > " + out.string() + " 2> " +
                    err.string();
  int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testutil::read_file(out.string());
  r.err = testutil::read_file(err.string());
  return r;
}

std::string prog(const std::string& name) { return testutil::programs_dir() + "/" + name; }

std::string write_scratch(const std::string& name, const std::string& text) {
  fs::path p = scratch_dir() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string drop_lines(const std::string& text, const std::string& needle) {
  std::string out;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    if (line.find(needle) == std::string::npos) out += line + "\n";
    pos = eol + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("analyze reports are byte-stable") {
  const char* names[] = {"geom", "gamble", "gamble2", "momentum", "miniabra", "fullabra"};
  for (const char* n : names) {
    CAPTURE(n);
    RunResult r = run_cli("analyze " + prog(std::string(n) + ".spp"));
    CHECK(r.code == 0);
    CHECK(r.err == "");
    CHECK(r.out == testutil::read_file(testutil::source_dir() + "/tests/golden/" + n + ".txt"));
  }
}

TEST_CASE("analyze emits structured reports") {
  RunResult r = run_cli("analyze " + prog("gamble.spp") + " --format json");
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["schema"] == 1);
  CHECK(j["status"] == "Solved");
  CHECK(j["martingale"] == "x(i)");
  CHECK(j["fact"]["lhs"] == "a");
  CHECK(j["fact"]["rhs"] == "b*E{[x(tau) = b]}");
  CHECK(j["solved"]["target"] == "E{[x(tau) = b]}");
  CHECK(j["solved"]["closed_form"] == "(a) / (b)");
  CHECK(j["side_conditions"].size() == 2);
  CHECK(j["assumed"] == false);
}

TEST_CASE("analyze validates against simulation on request") {
  RunResult r = run_cli("analyze " + prog("geom.spp") +
                        " --format json --validate --param p=1/2 --trials 2000 --rng-seed 4");
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  REQUIRE(j.contains("validation"));
  CHECK(j["validation"]["pass"] == true);
  CHECK(j["validation"]["trials"] == 2000);
  CHECK(j["validation"]["censored"] == 0);
}

TEST_CASE("exit codes distinguish solved, residual, refused, and errors") {
  CHECK(run_cli("analyze " + prog("geom.spp")).code == 0);

  std::string mini = testutil::read_file(prog("miniabra.spp"));
  std::string residual = write_scratch("residual.spp", drop_lines(mini, "#hint implies"));
  RunResult res = run_cli("analyze " + residual);
  CHECK(res.code == 2);
  CHECK(res.out.find("status: Residual") != std::string::npos);
  CHECK(res.out.find("unknowns") != std::string::npos);

  std::string walk = testutil::read_file(prog("gamble.spp"));
  std::string refused = write_scratch("refused.spp", drop_lines(walk, "#variant"));
  RunResult ref = run_cli("analyze " + refused);
  CHECK(ref.code == 3);
  CHECK(ref.out.find("status: Refused") != std::string::npos);

  // the same program is accepted on trust
  RunResult trusted = run_cli("analyze " + refused + " --assume-ost");
  CHECK(trusted.code == 0);
  CHECK(trusted.out.find("taken on trust") != std::string::npos);

  std::string broken = write_scratch("broken.spp", "while (x do\n");
  RunResult bad = run_cli("analyze " + broken);
  CHECK(bad.code == 1);
  CHECK(bad.err.find("ostap: parse error") != std::string::npos);

  RunResult missing = run_cli("analyze " + std::string("/nonexistent/nope.spp"));
  CHECK(missing.code == 1);
  CHECK(missing.err.find("ostap:") != std::string::npos);

  RunResult badParam = run_cli("simulate " + prog("geom.spp") + " --param p");
  CHECK(badParam.code == 1);
  CHECK(badParam.err.find("ostap:") != std::string::npos);
}

TEST_CASE("flags that override pragmas warn on stderr") {
  RunResult r = run_cli("analyze " + prog("geom.spp") + " --seed x");
  CHECK(r.code == 0);
  CHECK(r.err.find("warning:") != std::string::npos);
}

TEST_CASE("emitted facts feed later runs") {
  std::string factPath = (scratch_dir() / "walk.fact").string();
  RunResult emit = run_cli("analyze " + prog("gamble.spp") + " --emit-fact " + factPath);
  CHECK(emit.code == 0);
  REQUIRE(fs::exists(factPath));

  RunResult reuse = run_cli("analyze " + prog("gamble2.spp") + " --use-fact " + factPath);
  CHECK(reuse.code == 0);
  CHECK(reuse.out.find("E{tau} = a*b - a^2") != std::string::npos);

  // nothing to emit when the analysis is refused
  std::string walk = testutil::read_file(prog("gamble.spp"));
  std::string refused = write_scratch("refused2.spp", drop_lines(walk, "#variant"));
  RunResult none =
      run_cli("analyze " + refused + " --emit-fact " + (scratch_dir() / "no.fact").string());
  CHECK(none.code == 3);
  CHECK(none.err.find("no fact to emit") != std::string::npos);
  CHECK(!fs::exists(scratch_dir() / "no.fact"));
}

TEST_CASE("simulate prints trial statistics") {
  RunResult r = run_cli("simulate " + prog("gamble.spp") +
                        " --param a=3 --param b=10 --trials 500 --rng-seed 2");
  CHECK(r.code == 0);
  CHECK(r.out.find("trials: 500") != std::string::npos);
  CHECK(r.out.find("tau") != std::string::npos);
  CHECK(r.out.find("Pr[x(tau) = b]") != std::string::npos);
  CHECK(r.out.find("increment violations: 0") != std::string::npos);

  RunResult j = run_cli("simulate " + prog("gamble.spp") +
                        " --param a=3 --param b=10 --trials 200 --rng-seed 2 --format json");
  REQUIRE(j.code == 0);
  json doc = json::parse(j.out);
  CHECK(doc["trials"] == 200);
  CHECK(doc["tau"]["count"] == 200);
  CHECK(doc["events"].size() == 2);
  CHECK(doc["increment_violations"] == 0);
  CHECK(doc["max_increment"] == 1.0);
  CHECK(doc["probes"].size() == 3);
}

TEST_CASE("martingale checking from the command line") {
  RunResult yes = run_cli("check-martingale " + prog("gamble.spp") + " --seed x");
  CHECK(yes.code == 0);
  CHECK(yes.out == "martingale: yes\n");

  RunResult no = run_cli("check-martingale " + prog("gamble.spp") + " --seed \"x * x\"");
  CHECK(no.code == 1);
  CHECK(no.out.find("martingale: no") != std::string::npos);
  CHECK(no.out.find("drift") != std::string::npos);
}

TEST_CASE("bench lists the canonical programs in order") {
  fs::path empty = scratch_dir() / "empty";
  fs::create_directories(empty);
  RunResult none = run_cli("bench " + empty.string());
  CHECK(none.code == 0);
  CHECK(none.out.find("program") != std::string::npos);
  CHECK(none.out.find("geom") == std::string::npos);

  fs::path one = scratch_dir() / "one";
  fs::create_directories(one);
  fs::copy_file(prog("geom.spp"), one / "geom.spp", fs::copy_options::overwrite_existing);
  RunResult r = run_cli("bench " + one.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("geom") != std::string::npos);
  CHECK(r.out.find("Solved") != std::string::npos);
  CHECK(r.out.find("SKIPPED") != std::string::npos);

  RunResult full = run_cli("bench " + testutil::programs_dir());
  CHECK(full.code == 0);
  size_t geomAt = full.out.find("geom");
  size_t fullabraAt = full.out.find("fullabra");
  size_t momentumAt = full.out.find("momentum");  // extra row, sorted after the canon
  CHECK(geomAt != std::string::npos);
  CHECK(geomAt < fullabraAt);
  CHECK(fullabraAt < momentumAt);
  CHECK(full.out.find("SKIPPED") == std::string::npos);
}
