#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <cmath>
#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "qdiff_cli/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = qdiff::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '{') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("qdiff_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                                 ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Cli, HelpAndUsage) {
  const auto help = run({"--help"});
  EXPECT_EQ(help.code, qdiff::cli::kExitOk);
  EXPECT_NE(help.out.find("pattern"), std::string::npos);

  const auto none = run({});
  EXPECT_EQ(none.code, qdiff::cli::kExitUsage);
  const auto j = json::parse(none.err);
  EXPECT_TRUE(j.contains("error"));
}

TEST(Cli, InvalidConfigIsSingleJsonLine) {
  for (const auto& args : std::vector<std::vector<std::string>>{{"pattern", "--state", "bogus"},
                                                                {"pattern", "--order", "3"},
                                                                {"pattern", "--scheme", "sideways"},
                                                                {"pattern", "--grid-u", "1,0,10"},
                                                                {"pattern", "--state", "num2", "--mean-n", "1"},
                                                                {"pattern", "--unknown-flag"},
                                                                {"simulate", "--events", "0"}}) {
    const auto r = run(args);
    EXPECT_EQ(r.code, qdiff::cli::kExitUsage) << args[1];
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
    EXPECT_NO_THROW((void)json::parse(r.err).at("error").at("message"));
  }
}

TEST(Cli, StatesPoissonTable) {
  const auto r = run({"states", "--kind", "poisson", "--mean-n", "1,2,4,9"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  std::set<std::string> means;
  for (std::size_t i = 1; i < rows.size(); ++i) means.insert(rows[i][1]);
  EXPECT_EQ(means.size(), 4U);
  const auto report = json::parse(r.err);
  EXPECT_TRUE(report.at("passed").get<bool>());
  for (const auto& s : report.at("sum_rules")) EXPECT_LT(s.at("second_residual").get<double>(), 1e-9);
}

TEST(Cli, StatesVacuum) {
  const auto r = run({"states", "--kind", "bose", "--mean-n", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 2U);
  EXPECT_EQ(rows[1][2], "0");
  EXPECT_EQ(rows[1][3], "1");
}

TEST(Cli, PatternExamples) {
  const auto num = run({"pattern", "--state", "num2", "--order", "2", "--scheme", "same", "--grid-u", "-3,3,7"});
  ASSERT_EQ(num.code, 0) << num.err;
  for (std::size_t i = 1; i < csv_rows(num.out).size(); ++i) EXPECT_NEAR(std::stod(csv_rows(num.out)[i][3]), 1.0, 1e-12);

  const auto noon = run({"pattern", "--state", "noon", "--n", "4", "--order", "2", "--scheme", "general", "--rho2",
                         "0.001", "--grid-u", "-3,3,7", "--route", "both"});
  ASSERT_EQ(noon.code, 0) << noon.err;
  for (std::size_t i = 1; i < csv_rows(noon.out).size(); ++i) EXPECT_NEAR(std::stod(csv_rows(noon.out)[i][3]), 3.0, 1e-9);
  EXPECT_LT(json::parse(noon.err).at("max_deviation").get<double>(), 1e-9);
}

TEST(Cli, CoherentSecondOrderFollowsSquaredFringe) {
  const auto r = run({"pattern", "--state", "coherent", "--mean-n", "1", "--order", "2", "--scheme", "opposite",
                      "--ratio", "4", "--grid-u", "-6,6,25"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double u = std::stod(rows[i][1]);
    const double s = u == 0.0 ? 1.0 : std::sin(u / 4) / (u / 4);
    EXPECT_NEAR(std::stod(rows[i][4]), std::pow(std::cos(u), 4) * std::pow(s, 4), 1e-12);
  }
}

TEST(Cli, CoherenceExamplesAndNulls) {
  const auto coh = run({"coherence", "--state", "coherent", "--grid-u", "-2,2,9"});
  ASSERT_EQ(coh.code, 0) << coh.err;
  for (std::size_t i = 1; i < csv_rows(coh.out).size(); ++i) EXPECT_NEAR(std::stod(csv_rows(coh.out)[i][3]), 1.0, 1e-12);

  const auto coh4 = run({"coherence", "--state", "cohN", "--n", "4", "--grid-u", "-2,2,9"});
  for (std::size_t i = 1; i < csv_rows(coh4.out).size(); ++i) EXPECT_NEAR(std::stod(csv_rows(coh4.out)[i][3]), 0.75, 1e-12);

  const auto dif = run({"coherence", "--state", "difN", "--n", "2", "--grid-u", "0,1,2"});
  EXPECT_NEAR(std::stod(csv_rows(dif.out)[1][3]), 0.75, 1e-12);

  // u = 4 pi is a zero of the single-slit envelope at ratio 4.
  const auto zeros = run({"coherence", "--state", "coherent", "--grid-u", "12.566370614359172,13,2"});
  ASSERT_EQ(zeros.code, 0) << zeros.err;
  const auto rows = csv_rows(zeros.out);
  EXPECT_EQ(rows[1][3], "null");
  EXPECT_EQ(rows[1][5], "0");
  EXPECT_NE(rows[2][3], "null");
}

TEST(Cli, OutputFilesCarrySidecar) {
  TempDir dir;
  const auto csv = dir.file("p.csv");
  const auto r = run({"pattern", "--state", "dif", "--mean-n", "2", "--order", "2", "--route", "engine", "--avg",
                      "mc:500", "--seed", "9", "--grid-u", "-1,1,5", "--out", csv, "--plot"});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_TRUE(fs::exists(csv));
  ASSERT_TRUE(fs::exists(csv + ".meta.json"));
  EXPECT_TRUE(fs::exists(dir.file("p.csv.gp")) || fs::exists(dir.file("p.gp")));
  const auto meta = json::parse(slurp(csv + ".meta.json"));
  EXPECT_EQ(meta.at("seed").get<std::uint64_t>(), 9U);
  EXPECT_EQ(meta.at("subcommand").get<std::string>(), "pattern");
  EXPECT_NE(slurp(csv).find("stderr_estimate"), std::string::npos);

  // Re-running from the recorded argv reproduces the file byte for byte.
  const auto first = slurp(csv);
  std::vector<std::string> argv = meta.at("argv").get<std::vector<std::string>>();
  ASSERT_EQ(run(argv).code, 0);
  EXPECT_EQ(slurp(csv), first);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  TempDir dir;
  const auto cfg = dir.file("run.json");
  std::ofstream(cfg) << R"({"state": "coherent", "mean-n": 2, "order": 2, "grid-u": "0,1,2"})";
  const auto from_file = run({"pattern", "--config", cfg});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_NEAR(std::stod(csv_rows(from_file.out)[1][3]), 16.0, 1e-12);

  const auto overridden = run({"pattern", "--config", cfg, "--mean-n", "1"});
  ASSERT_EQ(overridden.code, 0) << overridden.err;
  EXPECT_NEAR(std::stod(csv_rows(overridden.out)[1][3]), 4.0, 1e-12);

  const auto missing = run({"pattern", "--config", dir.file("absent.json")});
  EXPECT_EQ(missing.code, qdiff::cli::kExitUsage);
}

TEST(Cli, SimulateIsDeterministicAndReportsFit) {
  const std::vector<std::string> args = {"simulate", "--state", "chaotic", "--order", "2", "--events", "20000",
                                         "--bins", "40", "--seed", "3"};
  const auto a = run(args);
  const auto b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto rows = csv_rows(a.out);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"bin_lo", "bin_hi", "count", "expected"}));
  EXPECT_EQ(rows.size(), 41U);
  EXPECT_TRUE(json::parse(a.err).contains("p_value"));
}

TEST(Cli, Widths) {
  const auto r = run({"widths"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 3U);
  EXPECT_NEAR(std::stod(rows[1][1]), 1.0, 1e-4);
  EXPECT_NEAR(std::stod(rows[2][1]), 0.5, 1e-4);
}

TEST(Cli, VerifySubsetAndInjectedFault) {
  const auto ok = run({"verify", "--only", "identity"});
  EXPECT_EQ(ok.code, qdiff::cli::kExitOk) << ok.out;
  const auto report = json::parse(ok.out);
  ASSERT_EQ(report.at("checks").size(), 1U);
  EXPECT_LT(report["checks"][0].at("residual").get<double>(), 1e-9);

  const auto broken = run({"verify", "--only", "patterns,shape-squaring", "--inject-bug", "swap-BC"});
  EXPECT_EQ(broken.code, qdiff::cli::kExitCheckFailed);
  EXPECT_FALSE(json::parse(broken.out).at("passed").get<bool>());

  EXPECT_EQ(run({"verify", "--only", "nonsense"}).code, qdiff::cli::kExitUsage);
}

TEST(Cli, VerifyFullSuite) {
  const auto r = run({"verify"});
  EXPECT_EQ(r.code, qdiff::cli::kExitOk) << r.out;
}
