#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

using nlohmann::json;

namespace {

const std::string& scratch_dir() {
  static const std::string dir = [] {
    std::string tmpl = "/tmp/nws-cli-XXXXXX";
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    char* made = mkdtemp(buf.data());
    return std::string(made ? made : "/tmp");
  }();
  return dir;
}

std::string out_file(const std::string& name) { return scratch_dir() + "/" + name; }

int run_cli(const std::string& args) {
  std::string cmd = std::string(NWS_CLI_PATH) + " " + args + " >/dev/null 2>/dev/null";
  int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  if (WIFEXITED(rc)) return WEXITSTATUS(rc);
  return -2;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json slurp_json(const std::string& path) { return json::parse(slurp(path)); }

}  // namespace

TEST_CASE("criterion subcommand", "[cli]") {
  std::string f = out_file("crit.json");
  CHECK(run_cli("criterion --a 1 --b 0 --c \"exp(t)\" --t 0:2 --out " + f) == 0);
  json j = slurp_json(f);
  CHECK(j["reducible"].get<bool>());
  CHECK(std::fabs(j["lambda"].get<double>() - 0.5) <= 1e-10);
  CHECK(j["samples"].size() == 16);

  CHECK(run_cli("criterion --a \"exp(t)\" --b \"2*exp(2*t)\" --c \"3*exp(2*t)\" --t 0:1 --out " +
                f) == 0);
  CHECK(std::fabs(slurp_json(f)["lambda"].get<double>() - 2.0) <= 1e-9);

  CHECK(run_cli("criterion --a 1 --b t --c 1 --t 0:2 --out " + f) == 1);
  json neg = slurp_json(f);
  CHECK_FALSE(neg["reducible"].get<bool>());
  CHECK(neg["lambda"].is_null());
}

TEST_CASE("classify subcommand", "[cli]") {
  std::string f = out_file("classify.json");
  CHECK(run_cli("classify --c \"3*(2*t+1)^2\" --t 0:5 --out " + f) == 0);
  json j = slurp_json(f);
  CHECK(j["tag"].get<std::string>() == "power");
  CHECK(j["gauged"].get<bool>());
  CHECK(std::fabs(j["parameters"]["rho"].get<double>() - 2.0) <= 1e-8);
  CHECK(std::fabs(j["parameters"]["mu"].get<double>() - 12.0) <= 1e-7);
  CHECK(std::fabs(j["parameters"]["delta"].get<double>() - 0.5) <= 1e-8);
  CHECK(j["parameters"]["gamma"].get<double>() == 1.0);
  CHECK(j["basis"].size() == 2);

  CHECK(run_cli("classify --a 1 --b 1 --c 1 --t -1:1 --out " + f) == 0);
  json u = slurp_json(f);
  CHECK(u["tag"].get<std::string>() == "exponential");
  CHECK_FALSE(u["gauged"].get<bool>());
  CHECK(u.contains("gauge_label"));
  CHECK(u["basis"].size() == 2);
}

TEST_CASE("transform subcommands", "[cli]") {
  std::string f = out_file("transform.json");
  CHECK(run_cli("transform gauge --a 1 --b 1 --c 1 --t -1:1 --out " + f) == 0);
  json g = slurp_json(f);
  CHECK(g["label"].get<std::string>().find("gauge") != std::string::npos);
  REQUIRE(g["samples"].size() == 9);
  for (const auto& row : g["samples"]) {
    CHECK(std::fabs(row["a"].get<double>() - 1.0) <= 1e-9);
    CHECK(std::fabs(row["b"].get<double>()) <= 1e-9);
    CHECK(row["c"].get<double>() > 0.0);
  }

  CHECK(run_cli("transform to-constant --a 1 --b 1/2 --c \"exp(t)\" --t 0:2 --out " + f) == 0);
  json c = slurp_json(f);
  CHECK(std::fabs(c["lambda"].get<double>() - 1.0) <= 1e-10);
  CHECK(std::fabs(c["delta1"].get<double>() - 1.0) <= 1e-12);
  for (const auto& row : c["samples"]) {
    CHECK(std::fabs(row["a"].get<double>() - 1.0) <= 1e-8);
    CHECK(std::fabs(row["b"].get<double>() - 1.0) <= 1e-8);
    CHECK(std::fabs(row["c"].get<double>() - 1.0) <= 1e-8);
  }

  CHECK(run_cli("transform to-constant --a 1 --b t --c 1 --t 0:2 --out " + f) == 1);
}

TEST_CASE("verify-solution subcommand", "[cli]") {
  std::string f = out_file("verify.json");
  CHECK(run_cli("verify-solution --a 1 --b 1/2 --c \"exp(t)\" --t 0:2 --x -3:3 "
                "--family TW --out " +
                f) == 0);
  json j = slurp_json(f);
  CHECK(j["pass"].get<bool>());
  CHECK(std::fabs(j["lambda"].get<double>() - 1.0) <= 1e-10);
  REQUIRE(j["families"].size() == 1);
  CHECK(j["families"][0]["family"].get<std::string>() == "TW");
  CHECK(j["families"][0]["residual"]["max_abs"].get<double>() <= 1e-8);

  CHECK(run_cli("verify-solution --a 1 --b \"-1/t\" --c \"t^2\" --t 0.5:3 --x -1:1 "
                "--nt 21 --nx 41 --all --out " +
                f) == 0);
  json all = slurp_json(f);
  CHECK(all["pass"].get<bool>());
  CHECK(all["families"].size() == 6);  // the six sign-0 families

  CHECK(run_cli("verify-solution --a 1 --b t --c 1 --t 0:2 --family TW --out " + f) == 1);
  CHECK(run_cli("verify-solution --a 1 --b 0 --c 1 --t 0:2 --out " + f) == 2);  // no family
}

TEST_CASE("verify-operator subcommand", "[cli]") {
  std::string f = out_file("op.json");
  CHECK(run_cli("verify-operator --xi \"-3/x\" --eta \"-3*u/x^2\" --c 1 --out " + f) == 0);
  json j = slurp_json(f);
  CHECK(j["pass"].get<bool>());
  CHECK(j["equations"].size() == 4);

  CHECK(run_cli("verify-operator --xi \"-3/x\" --eta \"-3*u/x^2 + 0.01*u\" --c 1 --out " +
                f) == 1);
  CHECK_FALSE(slurp_json(f)["pass"].get<bool>());

  CHECK(run_cli("verify-operator --eta \"0\" --c 1") == 2);  // --xi is required
}

TEST_CASE("simulate subcommand", "[cli]") {
  std::string f = out_file("sim.json");
  CHECK(run_cli("simulate --a 1 --b 1 --c 1 --t 0:0.5 --x -6:6 --nx 80 --nt 3 "
                "--family TW --tol 1e-2 --out " +
                f) == 0);
  json j = slurp_json(f);
  CHECK(j["pass"].get<bool>());
  CHECK(j["family"].get<std::string>() == "TW");
  CHECK(j["max_error"].get<double>() <= 1e-2);
  CHECK(j["stats"]["steps"].get<long>() > 0);

  CHECK(run_cli("simulate --a 1 --b t --c 1 --t 0:1 --out " + f) == 1);  // not reducible
}

TEST_CASE("sample subcommand", "[cli]") {
  std::string f = out_file("sample.csv");
  CHECK(run_cli("sample --a 1 --b 0 --c 1 --t 0:1 --x 0.3:2 --family Z4 --nt 3 --nx 5 "
                "--out " +
                f) == 0);
  std::istringstream in(slurp(f));
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x,u");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 15);

  std::string fj = out_file("sample.json");
  CHECK(run_cli("sample --a 1 --b 0 --c 1 --t 0:1 --x 0.3:2 --family Z4 --nt 3 --nx 5 "
                "--format json --out " +
                fj) == 0);
  json j = slurp_json(fj);
  CHECK(j["family"].get<std::string>() == "Z4");
  CHECK(j["rows"].size() == 15);
  CHECK_FALSE(j["rows"][0]["u"].is_null());
}

TEST_CASE("parse-check subcommand", "[cli]") {
  std::string f = out_file("parse.json");
  CHECK(run_cli("parse-check --a \"exp(t)\" --c \"3*(2*t+1)^2\" --out " + f) == 0);
  json ok = slurp_json(f);
  CHECK(ok["ok"].get<bool>());
  REQUIRE(ok["checks"].size() == 2);
  CHECK(ok["checks"][0]["status"].get<std::string>() == "ok");

  CHECK(run_cli("parse-check --c \"2*(\" --out " + f) == 2);
  json bad = slurp_json(f);
  CHECK_FALSE(bad["ok"].get<bool>());
  CHECK(bad["checks"][0]["status"].get<std::string>() == "error");

  CHECK(run_cli("parse-check") == 2);
}

TEST_CASE("list-solutions subcommand", "[cli]") {
  std::string f = out_file("list.json");
  CHECK(run_cli("list-solutions --out " + f) == 0);
  json j = slurp_json(f);
  REQUIRE(j.size() == 15);
  CHECK(j[0]["id"].get<std::string>() == "TW");
  CHECK(j[0]["sign"].get<int>() == 1);
}

TEST_CASE("usage errors", "[cli]") {
  CHECK(run_cli("bogus") == 2);
  CHECK(run_cli("criterion --nope 1") == 2);
  CHECK(run_cli("criterion --a 1 --b 0 --c 1 --t 2:1") == 2);  // empty interval
  CHECK(run_cli("") == 2);                                     // a subcommand is required
}

TEST_CASE("reports are byte-identical across runs", "[cli]") {
  std::string f1 = out_file("rep1.json"), f2 = out_file("rep2.json");
  std::string args = "classify --c \"3*exp(2*t)\" --t 0:2 --seed 5 --out ";
  CHECK(run_cli(args + f1) == 0);
  CHECK(run_cli(args + f2) == 0);
  CHECK(slurp(f1) == slurp(f2));

  std::string v1 = out_file("ver1.json"), v2 = out_file("ver2.json");
  std::string vargs =
      "verify-solution --a 1 --b 1/2 --c \"exp(t)\" --t 0:2 --x -2:2 --nt 11 --nx 21 "
      "--family TW --seed 7 --out ";
  CHECK(run_cli(vargs + v1) == 0);
  CHECK(run_cli(vargs + v2) == 0);
  CHECK(slurp(v1) == slurp(v2));
}
