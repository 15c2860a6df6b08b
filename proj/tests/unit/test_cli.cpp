#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli/dispatch.hpp"
#include "cli/manifest.hpp"

using namespace hetbelief::cli;

namespace {

const std::string kData = HETBELIEF_TEST_DATA;

struct Run {
  int code = 0;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "hetbelief");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

nlohmann::json last_error(const std::string& err) {
  std::istringstream lines(err);
  std::string line, last;
  while (std::getline(lines, line)) {
    if (!line.empty()) last = line;
  }
  return nlohmann::json::parse(last);
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "hetbelief_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Cli, StationaryCovScalarRoot) {
  const auto r = run({"stationary-cov", "--config", kData + "/scalar_root.json", "--out",
                      scratch("v.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(scratch("v.csv")), "agent,row,col,value\n0,0,0,0.41421356237309503\n");
  const auto m = nlohmann::json::parse(slurp(scratch("v.csv.manifest.json")));
  EXPECT_EQ(m["subcommand"], "stationary-cov");
  EXPECT_EQ(m["artifacts"][0], scratch("v.csv").string());
  EXPECT_EQ(m["config_hash"].get<std::string>().size(), 64u);
  EXPECT_TRUE(m.contains("wall_clock_seconds"));
  EXPECT_TRUE(m.contains("version"));
}

TEST(Cli, UnknownSubcommand) {
  const auto r = run({"frobnicate"});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("usage:"), std::string::npos);
  EXPECT_EQ(last_error(r.err)["error"], "usage");
}

TEST(Cli, MissingConfig) {
  const auto r = run({"price"});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_EQ(last_error(r.err)["error"], "validation");
  const auto bad = run({"price", "--config", kData + "/does_not_exist.json"});
  EXPECT_EQ(bad.code, kExitValidation);
}

TEST(Cli, BadFlagValue) {
  const auto r = run({"simulate", "--config", kData + "/single_agent.json", "--paths", "many"});
  EXPECT_EQ(r.code, kExitValidation);
  const auto dt = run({"simulate", "--config", kData + "/single_agent.json", "--dt", "-1"});
  EXPECT_EQ(dt.code, kExitValidation);
}

TEST(Cli, DivergentPriceIsNumericalFailure) {
  const auto r = run({"price", "--config", kData + "/divergent.json", "--t-max", "20", "--out",
                      scratch("q.json").string()});
  EXPECT_EQ(r.code, kExitNumerical);
  const auto e = last_error(r.err);
  EXPECT_EQ(e["error"], "numerical");
  EXPECT_NE(e["message"].get<std::string>().find("integrand non-decaying"), std::string::npos);
}

TEST(Cli, PriceQuote) {
  const auto r = run({"price", "--config", kData + "/single_agent.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto q = nlohmann::json::parse(r.out);
  for (const char* key : {"S", "error_estimate", "T_max", "tau_grid_size"}) {
    EXPECT_TRUE(q.contains(key)) << key;
  }
  EXPECT_EQ(q["T_max"], 20.0);
  EXPECT_EQ(q["tau_grid_size"], 20001);
  const auto zpath = scratch("z.json");
  std::ofstream(zpath) << R"({"zbar": [0.3, -0.2]})";
  const auto r2 = run({"price", "--config", kData + "/single_agent.json", "--zbar", zpath.string()});
  ASSERT_EQ(r2.code, 0);
  EXPECT_EQ(r2.out, r.out);
  std::ofstream(zpath) << "[1, 2, 3]";
  EXPECT_EQ(run({"price", "--config", kData + "/single_agent.json", "--zbar", zpath.string()}).code,
            kExitValidation);
}

TEST(Cli, ConfigHashIgnoresKeyOrder) {
  const auto a = run({"stationary-cov", "--config", kData + "/single_agent.json", "--out",
                      scratch("h1.csv").string()});
  const auto b = run({"stationary-cov", "--config", kData + "/reordered.json", "--out",
                      scratch("h2.csv").string()});
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  const auto ma = nlohmann::json::parse(slurp(scratch("h1.csv.manifest.json")));
  const auto mb = nlohmann::json::parse(slurp(scratch("h2.csv.manifest.json")));
  EXPECT_EQ(ma["config_hash"], mb["config_hash"]);
  EXPECT_EQ(config_hash(nlohmann::json::parse(R"({"a":1,"b":[1,2]})")),
            config_hash(nlohmann::json::parse(R"({"b":[1,2],"a":1})")));
  EXPECT_NE(config_hash(nlohmann::json::parse(R"({"a":1})")),
            config_hash(nlohmann::json::parse(R"({"a":2})")));
}

TEST(Cli, SimulateDeterministic) {
  const std::vector<std::string> args{"simulate", "--config", kData + "/two_agent.json", "--seed", "5"};
  const auto a = run(args);
  const auto b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.substr(0, a.out.find('\n')),
            "path_id,t,x,delta,xhat_0_0,N_0,loglamhat_0,xhat_1_0,N_1,loglamhat_1");
  auto other = args;
  other.back() = "6";
  EXPECT_NE(run(other).out, a.out);
  const auto summary = run({"simulate", "--config", kData + "/two_agent.json", "--summary"});
  ASSERT_EQ(summary.code, 0);
  EXPECT_EQ(summary.out.rfind("t,x_mean,x_var,", 0), 0u);
}

TEST(Cli, RatePathAndCovPathAndRiccati) {
  const auto rp = run({"rate-path", "--config", kData + "/single_agent.json", "--paths", "1"});
  ASSERT_EQ(rp.code, 0) << rp.err;
  EXPECT_EQ(rp.out.rfind("path_id,t,r,kappa,logzeta\n0,0,0.47999999999999998,0.20000000000000001,0\n", 0), 0u);
  const auto cp = run({"cov-path", "--config", kData + "/single_agent.json", "--t-max", "0.002"});
  ASSERT_EQ(cp.code, 0) << cp.err;
  EXPECT_EQ(cp.out.rfind("agent,t,V_0_0,V_1_0,V_0_1,V_1_1\n0,0,0,0,0,0\n", 0), 0u);
  const auto rc = run({"riccati", "--config", kData + "/two_agent.json", "--tau-max", "0.5"});
  ASSERT_EQ(rc.code, 0) << rc.err;
  std::istringstream lines(rc.out);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) ++count;
  EXPECT_EQ(count, 502);
}

TEST(Cli, VerifyVtTable) {
  const auto r = run({"verify-vt", "--config", kData + "/single_agent.json", "--paths", "2000",
                      "--dt", "0.01", "--tau-max", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("tau"), std::string::npos);
  std::istringstream lines(r.out);
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) rows += (line.find("PASS") != std::string::npos || line.find("FAIL") != std::string::npos);
  EXPECT_EQ(rows, 6);
}
