#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "signfem/cli.hpp"

namespace fs = std::filesystem;
using namespace signfem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    unsetenv(cli::kOutputDirEnv);
    dir_ = fs::temp_directory_path() /
           ("signfem_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override {
    unsetenv(cli::kOutputDirEnv);
    fs::remove_all(dir_);
  }

  int invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "signfem");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    log_.str("");
    return cli::main(static_cast<int>(argv.size()), argv.data(), out_, log_);
  }

  std::string out(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream log_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream s(line);
    std::string cell;
    while (std::getline(s, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

}  // namespace

TEST_F(CliTest, PolynomialUniformTableRatesTendToOne) {
  ASSERT_EQ(invoke({"converge", "--problem", "polynomial", "--mu", "-3", "--mode", "uniform", "--steps", "4",
                    "--initial-n", "8", "-o", out("run")}),
            cli::kOk)
      << log_.str();
  const auto rows = read_csv(dir_ / "run" / "table.csv");
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"k", "dof", "e_l2", "cv_l2", "e_h1", "cv_h1", "eta", "effectivity"}));
  EXPECT_EQ(rows[1][1], "289");
  EXPECT_EQ(rows[1][3], "");
  EXPECT_EQ(rows[1][5], "");
  for (std::size_t i = 2; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 8u);
    const double cv = std::stod(rows[i][5]);
    EXPECT_NEAR(cv, 1.0, 0.05) << "row " << i;
    EXPECT_GT(std::stol(rows[i][1]), std::stol(rows[i - 1][1]));
  }
  EXPECT_TRUE(fs::exists(dir_ / "run" / "table.txt"));
  for (int k = 1; k <= 4; ++k) {
    EXPECT_TRUE(fs::exists(dir_ / "run" / "indicators" / ("level_00" + std::to_string(k) + ".txt")));
  }
}

TEST_F(CliTest, RunLogEchoesSingularConstants) {
  ASSERT_EQ(invoke({"converge", "--problem", "singular", "--mu", "-5", "--steps", "1", "-o", out("s")}), cli::kOk);
  const std::string log = slurp(dir_ / "s" / "run.log");
  EXPECT_NE(log.find("lambda = 0.4601"), std::string::npos) << log;
  EXPECT_NE(log.find("c1 = "), std::string::npos);
  EXPECT_NE(log.find("d2 = "), std::string::npos);
}

TEST_F(CliTest, IdenticalConfigGivesIdenticalFiles) {
  for (const char* name : {"a", "b"}) {
    ASSERT_EQ(invoke({"converge", "--problem", "singular", "--mu", "-100", "--mode", "adaptive", "--steps", "6",
                      "-o", out(name)}),
              cli::kOk);
  }
  for (const auto& entry : fs::recursive_directory_iterator(dir_ / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), dir_ / "a");
    EXPECT_EQ(slurp(entry.path()), slurp(dir_ / "b" / rel)) << rel;
  }
}

TEST_F(CliTest, ConfigFileSuppliesValuesAndFlagsOverride) {
  write_text(dir_ / "run.cfg",
             "# comment line\nproblem = singular\nmu = -5\nsteps = 2   # trailing\noutput_dir = " + out("file") +
                 "\n");
  ASSERT_EQ(invoke({"converge", "--config", out("run.cfg")}), cli::kOk) << log_.str();
  EXPECT_EQ(read_csv(dir_ / "file" / "table.csv").size(), 3u);
  EXPECT_NE(slurp(dir_ / "file" / "run.log").find("a_minus = -5"), std::string::npos);

  ASSERT_EQ(invoke({"converge", "--config", out("run.cfg"), "--steps", "3", "-o", out("flag")}), cli::kOk);
  EXPECT_EQ(read_csv(dir_ / "flag" / "table.csv").size(), 4u);
  EXPECT_FALSE(fs::exists(dir_ / "flag" / "indicators" / "level_004.txt"));
}

TEST_F(CliTest, EnvironmentOverridesFileButNotFlag) {
  write_text(dir_ / "run.cfg", "steps = 1\noutput_dir = " + out("file") + "\n");
  setenv(cli::kOutputDirEnv, out("env").c_str(), 1);
  ASSERT_EQ(invoke({"converge", "--config", out("run.cfg")}), cli::kOk);
  EXPECT_TRUE(fs::exists(dir_ / "env" / "table.csv"));
  EXPECT_FALSE(fs::exists(dir_ / "file"));

  ASSERT_EQ(invoke({"converge", "--config", out("run.cfg"), "--output-dir", out("flag")}), cli::kOk);
  EXPECT_TRUE(fs::exists(dir_ / "flag" / "table.csv"));
}

TEST_F(CliTest, ConfigErrorsNameTheField) {
  EXPECT_EQ(invoke({"converge", "--mu", "2", "-o", out("x")}), cli::kConfigError);
  EXPECT_NE(log_.str().find("mu:"), std::string::npos) << log_.str();

  EXPECT_EQ(invoke({"converge", "--mark-threshold", "1", "-o", out("x")}), cli::kConfigError);
  EXPECT_NE(log_.str().find("mark_threshold"), std::string::npos);

  EXPECT_EQ(invoke({"converge", "--steps", "0", "-o", out("x")}), cli::kConfigError);
  EXPECT_NE(log_.str().find("steps"), std::string::npos);

  EXPECT_EQ(invoke({"converge", "--mode", "sideways", "-o", out("x")}), cli::kConfigError);
  EXPECT_NE(log_.str().find("mode:"), std::string::npos);

  EXPECT_EQ(invoke({"converge", "--mu", "abc"}), cli::kConfigError);
  EXPECT_NE(log_.str().find("--mu"), std::string::npos);

  write_text(dir_ / "bad.cfg", "stepz = 3\n");
  EXPECT_EQ(invoke({"converge", "--config", out("bad.cfg")}), cli::kConfigError);
  EXPECT_NE(log_.str().find("stepz"), std::string::npos);

  write_text(dir_ / "malformed.cfg", "steps 3\n");
  EXPECT_EQ(invoke({"converge", "--config", out("malformed.cfg")}), cli::kConfigError);
  EXPECT_NE(log_.str().find(":1:"), std::string::npos);

  EXPECT_EQ(invoke({}), cli::kConfigError);
  EXPECT_FALSE(fs::exists(dir_ / "x"));
}

TEST_F(CliTest, SingularSystemExitsThreeAndNamesLevel) {
  EXPECT_EQ(invoke({"converge", "--problem", "polynomial", "--mu", "-1", "-o", out("s")}), cli::kSingular);
  EXPECT_NE(log_.str().find("level 1"), std::string::npos) << log_.str();
  EXPECT_EQ(invoke({"solve", "--problem", "polynomial", "--mu", "-1", "-o", out("s")}), cli::kSingular);
  EXPECT_NE(log_.str().find("level 1"), std::string::npos);
}

TEST_F(CliTest, IoFailuresExitFour) {
  EXPECT_EQ(invoke({"converge", "--config", out("missing.cfg")}), cli::kIoError);
  write_text(dir_ / "plainfile", "x");
  EXPECT_EQ(invoke({"converge", "--steps", "1", "-o", (dir_ / "plainfile" / "sub").string()}), cli::kIoError);
}

TEST_F(CliTest, CoercivityReportForSquare) {
  ASSERT_EQ(invoke({"verify-coercivity", "--geometry", "square", "--mu", "-0.5", "--levels", "3", "-o", out("c")}),
            cli::kOk)
      << log_.str();
  const std::string report = slurp(dir_ / "c" / "coercivity.txt");
  EXPECT_NE(report.find("K_R_h <= bound: pass"), std::string::npos) << report;
  EXPECT_NE(report.find("alpha_min > 0: pass"), std::string::npos);
  EXPECT_NE(report.find("5.0000000000e-01"), std::string::npos);
}

TEST_F(CliTest, CoercivityFailureIsReported) {
  EXPECT_EQ(invoke({"verify-coercivity", "--geometry", "square", "--mu", "-1", "--levels", "1", "-o", out("c")}),
            cli::kFailure);
  EXPECT_NE(slurp(dir_ / "c" / "coercivity.txt").find("alpha_min > 0: fail"), std::string::npos);
}

TEST_F(CliTest, SolveWritesSolutionAndSummary) {
  ASSERT_EQ(invoke({"solve", "--problem", "polynomial", "--mu", "-3", "--initial-n", "4", "--dump-matrix", "-o",
                    out("p")}),
            cli::kOk);
  std::ifstream sol(dir_ / "p" / "solution.txt");
  int lines = 0;
  for (std::string l; std::getline(sol, l);) ++lines;
  EXPECT_EQ(lines, 81);
  EXPECT_NE(slurp(dir_ / "p" / "summary.txt").find("dof 81"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "p" / "matrix.txt"));
}

TEST_F(CliTest, LoadDegreeOverrideKeepsRates) {
  ASSERT_EQ(invoke({"converge", "--steps", "2", "--load-degree", "6", "-o", out("q")}), cli::kOk);
  const auto rows = read_csv(dir_ / "q" / "table.csv");
  EXPECT_NEAR(std::stod(rows[2][5]), 1.04, 0.01);
  EXPECT_EQ(invoke({"converge", "--load-degree", "5", "-o", out("q")}), cli::kConfigError);
  EXPECT_NE(log_.str().find("load_degree"), std::string::npos);
}

TEST_F(CliTest, DumpMeshCounts) {
  ASSERT_EQ(invoke({"dump-mesh", "--geometry", "lshape", "--initial-n", "2", "--refinements", "1", "-o", out("m")}),
            cli::kOk);
  const std::string mesh = slurp(dir_ / "m" / "mesh.txt");
  EXPECT_EQ(mesh.rfind("vertices 81 triangles 128", 0), 0u) << mesh.substr(0, 40);
}

TEST(ConfigFile, ParsesKeysAndRejectsMalformedLines) {
  const fs::path p = fs::temp_directory_path() / "signfem_cfg_parse.cfg";
  {
    std::ofstream f(p);
    f << "  mark-threshold = 0.25 \n\n# only comment\ninitial_n=4\n";
  }
  const auto values = cli::read_config_file(p);
  ASSERT_EQ(values.size(), 2u);
  EXPECT_EQ(values.at("mark_threshold"), "0.25");
  EXPECT_EQ(values.at("initial_n"), "4");
  {
    std::ofstream f(p);
    f << "= 3\n";
  }
  EXPECT_THROW(cli::read_config_file(p), cli::ConfigError);
  fs::remove(p);
  EXPECT_THROW(cli::read_config_file(p), IoError);
}

TEST(RunConfig, DefaultStartingGrid) {
  cli::RunConfig c;
  EXPECT_EQ(c.starting_n(), 8);
  c.mode = RefinementMode::Adaptive;
  EXPECT_EQ(c.starting_n(), 4);
  c.command = cli::Command::VerifyCoercivity;
  EXPECT_EQ(c.starting_n(), 2);
  c.initial_n = 5;
  EXPECT_EQ(c.starting_n(), 5);
  EXPECT_TRUE(c.validate().empty());
}
