#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "jlese/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "jlese");
  std::ostringstream out, err;
  const int code = jlese::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> lines;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  }
  return lines;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() /
                   ("jlese_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                    "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, CeilingsDefaultGrid) {
  const auto r = run({"ceilings"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(r.out);
  ASSERT_EQ(lines.size(), 20u);
  EXPECT_EQ(lines[0], "e,L1,L2,binding");
  EXPECT_EQ(r.out.rfind("# ", 0), 0u);
}

TEST(Cli, CeilingsAtCertainty) {
  const auto r = run({"ceilings", "--e-grid", "1"});
  ASSERT_EQ(r.code, 0);
  // (pY + pYlow) / (2 (1 + eps)) = 1500 / 2.1
  EXPECT_EQ(data_lines(r.out)[1].substr(0, 14), "1,714.2857143,");
}

TEST(Cli, EmptyGridIsUsageError) {
  EXPECT_EQ(run({"ceilings", "--e-grid", ""}).code, 2);
  EXPECT_EQ(run({"sweep-mv", "--gamma-grid", "0:1"}).code, 2);
}

TEST(Cli, UnknownFlagOrSubcommandIsUsageError) {
  EXPECT_EQ(run({"ceilings", "--bogus", "1"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"ceilings", "--delta", "1.5"}).code, 2);
}

TEST(Cli, HelpIsSuccess) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("sweep-group-size"), std::string::npos);
}

TEST(Cli, GroupSizeReference) {
  const auto r = run({"sweep-group-size"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(r.out);
  ASSERT_EQ(lines.size(), 101u);
  EXPECT_EQ(lines[0], "n,optimal_E,at_boundary,limit_E");
  EXPECT_EQ(lines[1], "1,100,0,50");
  EXPECT_EQ(lines[2], "2,75,0,50");
  double prev = 1e9;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const double e = std::stod(lines[i].substr(lines[i].find(',') + 1));
    EXPECT_LE(e, prev);
    prev = e;
  }
}

TEST(Cli, GroupSizeSingleRow) {
  const auto r = run({"sweep-group-size", "--n-min", "2", "--n-max", "2"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(data_lines(r.out).size(), 2u);
}

TEST(Cli, SweepMvShape) {
  const auto r = run({"sweep-mv", "--gamma-grid", "0,0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(r.out);
  EXPECT_EQ(lines[0], "b,c,gamma,optimal_E,at_boundary");
  EXPECT_EQ(lines.size(), 1u + 3 * 5 * 2);
  EXPECT_EQ(lines[1].substr(0, 10), "0.3,800,0,");
}

TEST(Cli, SweepYieldScenarios) {
  const auto r = run({"sweep-yield", "--gamma-grid", "0.25"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(r.out);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "scenario,gamma,optimal_E");
  EXPECT_EQ(lines[1].rfind("\"Ybar=1000,Ylow=500\",0.25,", 0), 0u);
  EXPECT_EQ(lines[2].rfind("\"Ybar=600,Ylow=300\",0.25,", 0), 0u);
  EXPECT_EQ(run({"sweep-yield", "--yields", "1000-500"}).code, 2);
}

TEST(Cli, SimulateCertainSuccess) {
  const auto r = run({"simulate", "--e", "1", "--n", "3", "--trials", "1000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(r.out);
  EXPECT_EQ(lines[0],
            "e,n,trials,seed,empirical_mean,analytic_mean,empirical_var,analytic_var,z_mean");
  EXPECT_EQ(lines[1].substr(lines[1].rfind(',') + 1), "0");
}

TEST(Cli, SimulateDefaultPasses) {
  EXPECT_EQ(run({"simulate"}).code, 0);
}

TEST(Cli, SimulateZeroTrialsIsUsageError) {
  EXPECT_EQ(run({"simulate", "--trials", "0"}).code, 2);
}

TEST(Cli, OutputFilesAreByteDeterministic) {
  const auto dir = temp_dir();
  for (const char* name : {"a", "b"}) {
    const auto r = run({"sweep-mv", "--gamma-grid", "0:1:0.25", "--out",
                        (dir / (std::string(name) + ".csv")).string(), "--plot-data",
                        (dir / (std::string(name) + ".dat")).string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
  }
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(slurp(dir / "a.dat"), slurp(dir / "b.dat"));
  for (const auto& line : data_lines(slurp(dir / "a.dat"))) {
    EXPECT_EQ(line.find(','), std::string::npos) << line;
  }
  fs::remove_all(dir);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto dir = temp_dir();
  {
    std::ofstream cfg(dir / "run.toml");
    cfg << "[ceilings]\ne-grid = \"0.5\"\ndelta = 0.0\nepsilon = 0.0\n";
  }
  const auto from_cfg = run({"--config", (dir / "run.toml").string(), "ceilings"});
  ASSERT_EQ(from_cfg.code, 0) << from_cfg.err;
  EXPECT_EQ(data_lines(from_cfg.out)[1], "0.5,562.5,187.5,187.5");
  const auto overridden =
      run({"--config", (dir / "run.toml").string(), "ceilings", "--delta", "0.9"});
  ASSERT_EQ(overridden.code, 0);
  EXPECT_EQ(data_lines(overridden.out)[1].substr(0, 15), "0.5,562.5,283.0");
  fs::remove_all(dir);
}

TEST(Cli, ScoreToy) {
  const auto r = run({"score", "--metrics", JLESE_DATA_DIR "/toy_metrics.csv", "--schema",
                      JLESE_DATA_DIR "/toy_schema.yaml"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(r.out);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[1], "F1,0.0000");
  EXPECT_EQ(lines[2], "F2,100.0000");
}

TEST(Cli, ScoreErrors) {
  const auto dir = temp_dir();
  const std::string schema = JLESE_DATA_DIR "/toy_schema.yaml";
  {
    std::ofstream(dir / "empty.csv");
    std::ofstream(dir / "gap.csv") << "farmer_id,metric_id,value\nF1,soil_health,1\nF2,other,2\n";
    std::ofstream(dir / "bad.csv") << "farmer_id,metric_id,value\nF1,soil_health,x\n";
  }
  EXPECT_EQ(run({"score", "--metrics", (dir / "empty.csv").string(), "--schema", schema}).code,
            2);
  const auto gap = run({"score", "--metrics", (dir / "gap.csv").string(), "--schema", schema});
  EXPECT_EQ(gap.code, 3);
  const auto bad = run({"score", "--metrics", (dir / "bad.csv").string(), "--schema", schema});
  EXPECT_EQ(bad.code, 3);
  EXPECT_NE(bad.err.find("bad.csv:2"), std::string::npos) << bad.err;
  EXPECT_EQ(run({"score", "--metrics", (dir / "missing.csv").string(), "--schema", schema}).code,
            2);
  fs::remove_all(dir);
}
