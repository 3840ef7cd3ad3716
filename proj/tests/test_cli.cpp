#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

std::string src_dir() {
  if (const char* env = std::getenv("CLAW_SRC")) return env;
  return CLAW_SRC_DIR;
}

std::string cli_bin() {
  if (const char* env = std::getenv("CLAW_BIN")) return env;
  return std::string(CLAW_SRC_DIR) + "/build/claw";
}

int run(const std::string& args) {
  const std::string cmd = cli_bin() + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WEXITSTATUS(rc);
}

fs::path temp_dir(const std::string& tag) {
  const fs::path d = fs::temp_directory_path() / ("claw_cli_" + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string scenario(const std::string& name) {
  return src_dir() + "/scenarios/" + name + ".json";
}

std::string patched_sec41(const std::string& tag, const std::string& from,
                          const std::string& to) {
  std::string text = slurp(scenario("sec41"));
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, from.size(), to);
  const fs::path p = fs::temp_directory_path() / ("claw_cli_sc_" + tag + ".json");
  std::ofstream(p) << text;
  return p.string();
}

}  // namespace

TEST_CASE("metrics command writes a parseable report and exits 0") {
  const auto out = temp_dir("metrics");
  REQUIRE(run("metrics " + scenario("sec41") + " --out " + out.string()) == 0);
  const nlohmann::json rep = nlohmann::json::parse(slurp(out / "report.json"));
  REQUIRE(rep["command"] == "metrics");
  REQUIRE(std::abs(rep["T_star"].get<double>() - 6.0) < 1e-5);
  REQUIRE(rep["T_bar_psi"] == "inf");
  REQUIRE(rep["hypotheses"]["holds"] == true);
}

TEST_CASE("steer command passes and its outputs are byte-identical across runs") {
  const auto out1 = temp_dir("steer1");
  const auto out2 = temp_dir("steer2");
  REQUIRE(run("steer " + scenario("sec41") + " --out " + out1.string()) == 0);
  REQUIRE(run("steer " + scenario("sec41") + " --out " + out2.string()) == 0);

  const std::string rep = slurp(out1 / "report.json");
  REQUIRE(rep == slurp(out2 / "report.json"));
  REQUIRE(slurp(out1 / "control.json") == slurp(out2 / "control.json"));
  REQUIRE(slurp(out1 / "snapshots/stage_a.csv") == slurp(out2 / "snapshots/stage_a.csv"));

  const nlohmann::json j = nlohmann::json::parse(rep);
  REQUIRE(j["pass"] == true);
  REQUIRE(j["terminal"]["sup_error_total"].get<double>() <= 1e-6);
  for (const auto& bound : j["bounds"]) REQUIRE(bound["pass"] == true);
}

TEST_CASE("hypothesis failures exit with code 2") {
  // T below T* = 6
  const std::string below = patched_sec41("lowT", "\"T\": 6.3", "\"T\": 5.0");
  REQUIRE(run("steer " + below + " --out " + temp_dir("lowT").string()) == 2);
  // --force cannot rescue an infeasible composition either
  REQUIRE(run("steer " + below + " --force --out " + temp_dir("lowTf").string()) == 2);
  // a target slope violating the one-sided bound
  const std::string steep = patched_sec41("steep", "\"amp\": 0.015", "\"amp\": 0.2");
  REQUIRE(run("steer " + steep + " --out " + temp_dir("steep").string()) == 2);
}

TEST_CASE("configuration errors exit with code 1") {
  const std::string unk = patched_sec41("unk", "\"rho\": 0.01", "\"rhoo\": 0.01");
  REQUIRE(run("steer " + unk) == 1);
  REQUIRE(run("metrics /nonexistent.json") != 0);
  REQUIRE(run("frobnicate " + scenario("sec41")) != 0);
}

TEST_CASE("bv command runs the mollification pipeline") {
  const auto out = temp_dir("bv");
  REQUIRE(run("bv " + scenario("bv_burgers") + " --n 25 --dx 0.005 --out " +
              out.string()) == 0);
  const nlohmann::json rep = nlohmann::json::parse(slurp(out / "report.json"));
  REQUIRE(rep["rows"].size() == 1);
  REQUIRE(rep["rows"][0]["n"] == 25);
  REQUIRE(rep["rows"][0]["pass"] == true);
  REQUIRE(rep["rows"][0]["terminal_l1"].get<double>() <=
          rep["rows"][0]["budget"].get<double>());
}

TEST_CASE("trace command writes the boundary-control time series") {
  const auto out = temp_dir("trace");
  REQUIRE(run("trace " + scenario("sec41") + " --out " + out.string()) == 0);
  std::ifstream in(out / "trace.csv");
  std::string header;
  REQUIRE(std::getline(in, header));
  REQUIRE(header == "t,u_a,u_b");
  std::string line, last;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  REQUIRE(rows > 100);
  // terminal trace values are psi(a) = psi(b) = 1
  double t, ua, ub;
  char c;
  std::istringstream ss(last);
  REQUIRE((ss >> t >> c >> ua >> c >> ub));
  REQUIRE(t == Catch::Approx(6.3).margin(1e-12));
  REQUIRE(ua == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(ub == Catch::Approx(1.0).margin(1e-9));
}
