#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "qfisher/cli.hpp"
#include "qfisher/qgaussian.hpp"

namespace fs = std::filesystem;
using qfisher::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
  nlohmann::json json() const { return nlohmann::json::parse(out); }
};

Outcome call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / fs::path("qfisher_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                                        ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path file(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(CliInfo, UniformDensityHasZeroTsallisEntropy) {
  const auto r = call({"info", "--density", "uniform", "--q", "2", "--lower", "0", "--upper", "1", "--nodes", "101"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.json();
  EXPECT_EQ(j["command"], "info");
  EXPECT_NEAR(j["result"]["S_q"].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(j["result"]["M_q"].get<double>(), 1.0, 1e-12);
  EXPECT_FALSE(j["result"]["divergence_flag"].get<bool>());
}

TEST(CliInfo, CompactQGaussianValues) {
  const auto r = call({"info", "--dist-q", "2", "--q", "2", "--beta", "2", "--nodes", "4001"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto res = r.json()["result"];
  EXPECT_NEAR(res["M_q"].get<double>(), 0.6, 1e-10);
  EXPECT_NEAR(res["phi"].get<double>(), 0.45, 1e-7);
  EXPECT_NEAR(res["I"].get<double>(), 1.25, 1e-7);
}

TEST(CliInfo, GridFileInput) {
  TempDir dir;
  const auto grid = qfisher::to_grid({1.0, 2.0, 0.5, 1}, 2001);
  write_text(dir.file("g.json"), grid.to_json().dump());
  const auto r = call({"info", "--density", "file", "--input", dir.file("g.json").string(), "--q", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(r.json()["result"]["phi"].get<double>(), 1.0, 1e-6);
  EXPECT_EQ(call({"info", "--density", "file", "--input", dir.file("missing.json").string()}).code, 2);
}

TEST(CliInfo, ReportsDivergentFisherInformation) {
  // q = 3 q-Gaussian with exponent 2 has G ~ s^{1/2} at the edge, so φ_{2,1} is infinite.
  const auto r = call({"info", "--dist-q", "3", "--q", "1", "--beta", "2", "--nodes", "1001"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto res = r.json()["result"];
  EXPECT_TRUE(res["divergence_flag"].get<bool>());
  EXPECT_EQ(res["phi"], "inf");
}

TEST(CliUsage, HolderMismatchIsUsageError) {
  const auto r = call({"info", "--alpha", "3", "--beta", "2"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Hölder"), std::string::npos);
}

TEST(CliUsage, MissingSeedIsUsageError) {
  EXPECT_EQ(call({"reproduce"}).code, 2);
  EXPECT_EQ(call({"crbound"}).code, 2);
  EXPECT_EQ(call({"stam", "--q", "2"}).code, 2);
}

TEST(CliUsage, UnknownInputs) {
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"frobnicate"}).code, 2);
  EXPECT_EQ(call({"info", "--no-such-flag", "1"}).code, 2);
  EXPECT_EQ(call({"info", "--density", "cauchy"}).code, 2);
  EXPECT_EQ(call({"info", "--dist-q", "-1"}).code, 2);
}

TEST(CliUsage, HelpExitsCleanly) {
  const auto r = call({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("diffuse"), std::string::npos);
}

TEST(CliConfig, CommandLineOverridesFile) {
  TempDir dir;
  write_text(dir.file("c.cfg"), "# defaults\nq = 1.5\nnodes = 2001   # trailing comment\n\n");
  const auto r = call({"info", "--config", dir.file("c.cfg").string(), "--q", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cfg = r.json()["config"];
  EXPECT_EQ(cfg["q"], "2");
  EXPECT_EQ(cfg["nodes"], "2001");
}

TEST(CliConfig, BadFilesAreUsageErrors) {
  TempDir dir;
  write_text(dir.file("unknown.cfg"), "colour = blue\n");
  write_text(dir.file("broken.cfg"), "q 2\n");
  EXPECT_EQ(call({"info", "--config", dir.file("unknown.cfg").string()}).code, 2);
  EXPECT_EQ(call({"info", "--config", dir.file("broken.cfg").string()}).code, 2);
  EXPECT_EQ(call({"info", "--config", dir.file("absent.cfg").string()}).code, 2);
}

TEST(CliOutput, WritesFileBeforeOrAfterSubcommand) {
  TempDir dir;
  const auto a = dir.file("a.json"), b = dir.file("b.json");
  const std::vector<std::string> base{"info", "--density", "uniform", "--q", "2", "--nodes", "101"};
  auto args = base;
  args.insert(args.begin(), {"-o", a.string()});
  ASSERT_EQ(call(args).code, 0);
  args = base;
  args.insert(args.end(), {"--output", b.string()});
  const auto r = call(args);
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(read_text(a), read_text(b));
  EXPECT_EQ(nlohmann::json::parse(read_text(a))["command"], "info");
}

TEST(CliOutput, ConfigAfterGlobalOption) {
  TempDir dir;
  write_text(dir.file("c.cfg"), "nodes = 201\n");
  const auto out = dir.file("o.json");
  const auto r = call({"-o", out.string(), "info", "--density", "uniform", "--config", dir.file("c.cfg").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(read_text(out))["config"]["nodes"], "201");
}

TEST(CliCrbound, GaussianLocationIsDeterministic) {
  const std::vector<std::string> args{"crbound", "--model", "gaussian-location", "--theta", "0.5",
                                      "--trials", "2000", "--seed", "7"};
  const auto a = call(args), b = call(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto res = a.json()["result"];
  EXPECT_NEAR(res["lhs"].get<double>(), 1.0, 1e-6);
  EXPECT_NEAR(res["rhs"].get<double>(), 1.0, 1e-6);
  EXPECT_EQ(a.json()["verdict"], "pass");
  auto other = args;
  other.back() = "8";
  EXPECT_NE(call(other).json()["result"]["mc_value"], res["mc_value"]);
}

TEST(CliCrbound, EscortPair) {
  const auto r = call({"crbound", "--model", "escort-pair", "--dist-q", "1.5", "--q", "1.5", "--trials", "0",
                       "--seed", "1", "--nodes", "2001"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.json()["result"]["mc_value"].is_null());
  EXPECT_GE(r.json()["result"]["gap"].get<double>(), -1e-9);
}

TEST(CliQcr, QGaussianPasses) {
  const auto r = call({"qcr", "--q", "2", "--alpha", "2", "--perturbations", "0", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err << r.out;
  EXPECT_NEAR(r.json()["result"]["product"].get<double>(), 1.0, 1e-5);
}

TEST(CliFamilies, StamAndMinimize) {
  const std::vector<std::string> family{"--perturbations", "10", "--levels", "5", "--nodes", "2001", "--seed", "2"};
  auto stam = std::vector<std::string>{"stam", "--q", "2", "--beta", "2"};
  stam.insert(stam.end(), family.begin(), family.end());
  const auto s = call(stam);
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_GT(s.json()["result"]["worst_gap"].get<double>(), 0.0);
  auto minimize = std::vector<std::string>{"minimize", "--constraint", "moment", "--target", "0.2", "--q", "2", "--beta", "2"};
  minimize.insert(minimize.end(), family.begin(), family.end());
  const auto m = call(minimize);
  ASSERT_EQ(m.code, 0) << m.err;
  EXPECT_NEAR(m.json()["result"]["value_G"].get<double>(), 1.25, 1e-6);
}

TEST(CliDiffuse, HeatRunWritesCsvAndVerdict) {
  const auto r = call({"diffuse", "--m", "1", "--beta", "2", "--init", "gaussian", "--t-end", "0.2", "--nodes", "401",
                       "--log-interval", "0.02"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("# m = 1"), std::string::npos);
  EXPECT_NE(r.out.find("t,mass,M_q,S_q,phi,dSdt_fd,rhs_eq5,rel_err\n"), std::string::npos);
  EXPECT_NE(r.out.find("# verdict = pass"), std::string::npos);
}

TEST(CliDiffuse, BoundaryContactIsNumericalError) {
  const auto r = call({"diffuse", "--m", "1", "--beta", "2", "--init", "gaussian", "--t-end", "5", "--extent", "3",
                       "--nodes", "301"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("numerical error"), std::string::npos);
}

TEST(CliDiffuse, InvalidParametersAreUsageErrors) {
  EXPECT_EQ(call({"diffuse", "--beta", "1"}).code, 2);
  EXPECT_EQ(call({"diffuse", "--t0", "2", "--t-end", "1"}).code, 2);
}
