#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int status = -1;
  std::string out;
  std::string err;
};

CliResult cli(const std::string& args) {
  const auto* info = testing::UnitTest::GetInstance()->current_test_info();
  const fs::path dir = fs::path(testing::TempDir()) / ("translab_cli_io_" + std::string(info->name()));
  fs::create_directories(dir);
  const std::string cmd = std::string("'") + TRANSLAB_CLI_PATH + "' " + args + " >'" + (dir / "out").string() + "' 2>'" +
                          (dir / "err").string() + "'";
  const int raw = std::system(cmd.c_str());
  const auto read = [](const fs::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, read(dir / "out"), read(dir / "err")};
}

std::string config(const std::string& name) { return std::string("'") + TRANSLAB_CONFIG_DIR + "/" + name + "'"; }

fs::path fresh(const std::string& name) {
  const fs::path p = fs::path(testing::TempDir()) / ("translab_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Cli, HelpListsEverySubcommandAndFlag) {
  const CliResult r = cli("--help");
  EXPECT_EQ(r.status, 0);
  for (const char* word :
       {"conservation", "mollify", "renorm", "stability", "solve", "validate-config", "--config", "--out", "--set", "--quiet"})
    EXPECT_NE(r.out.find(word), std::string::npos) << word;
}

TEST(Cli, ValidateConfigEchoesResolvedValues) {
  const CliResult r = cli("validate-config " + config("default.cfg"));
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("grid.nx = 256"), std::string::npos);
  EXPECT_NE(r.out.find("mollify.eps = 0.1, 0.05, 0.025"), std::string::npos);
}

TEST(Cli, ConfigFlagAndOverrides) {
  const CliResult r = cli("validate-config --config " + config("quick.cfg") + " --set grid.nx=80 --set time.nt=9");
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("grid.nx = 80"), std::string::npos);
  EXPECT_NE(r.out.find("time.nt = 9"), std::string::npos);
}

TEST(Cli, InvalidConfigExitsWithTwoAndNamesTheField) {
  const CliResult r = cli("conservation " + config("broken.cfg"));
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("conservation.tolerance: must be positive (got -0.001)"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(cli("").status, 2);
  EXPECT_EQ(cli("frobnicate").status, 2);
  EXPECT_EQ(cli("solve --bogus").status, 2);
  EXPECT_EQ(cli("validate-config /nonexistent/none.cfg").status, 2);
  EXPECT_EQ(cli("validate-config --set nodot=1").status, 2);
}

TEST(Cli, FailingCheckExitsWithOne) {
  const fs::path out = fresh("coarse");
  const CliResult r = cli("conservation " + config("coarse.cfg") + " --out '" + out.string() + "'");
  EXPECT_EQ(r.status, 1) << r.err;
  EXPECT_NE(r.out.find("FAIL drift_p2"), std::string::npos);
  EXPECT_NE(r.out.find("conservation: FAIL"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "summary.json"));
}

TEST(Cli, ZeroVelocityStudiesPassAndWriteOutputs) {
  const fs::path out = fresh("zero");
  const CliResult c = cli("conservation " + config("zero-velocity.cfg") + " --out '" + (out / "c").string() + "'");
  EXPECT_EQ(c.status, 0) << c.out << c.err;
  EXPECT_TRUE(fs::exists(out / "c" / "conservation.csv"));
  EXPECT_TRUE(fs::exists(out / "c" / "flow_probes.csv"));
  const CliResult m = cli("mollify " + config("zero-velocity.cfg") + " --quiet --out '" + (out / "m").string() + "'");
  EXPECT_EQ(m.status, 0) << m.err;
  EXPECT_TRUE(m.out.empty());
  EXPECT_TRUE(fs::exists(out / "m" / "remainder.csv"));
}

TEST(Cli, OutputRootFromEnvironment) {
  const fs::path root = fresh("env");
  const std::string cmd = "TRANSLAB_OUT_ROOT='" + root.string() + "' '" + TRANSLAB_CLI_PATH +
                          "' solve --set solve.nx=16 --set solve.ny=16 --set solve.nt=10 --set solve.dump_every=5 --quiet";
  EXPECT_EQ(WEXITSTATUS(std::system(cmd.c_str())), 0);
  EXPECT_TRUE(fs::exists(root / "solve" / "layer_000010.csv"));
}
