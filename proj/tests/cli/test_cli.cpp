#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kBinary = HJB_PLANNER_BIN;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hjb_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Runs the CLI with stdout captured to `capture`; returns the exit status.
int run(const std::string& args, const fs::path& capture) {
  const std::string cmd = kBinary.string() + " " + args + " > " + capture.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

}  // namespace

TEST(Cli, RateQuery) {
  const auto dir = scratch("rate");
  ASSERT_EQ(run("rate --n 2 --sigma 1 --r 1", dir / "out"), 0);
  EXPECT_EQ(slurp(dir / "out"), "r,rate\n1,0.24249961258080194\n");
}

TEST(Cli, CostQuery) {
  const auto dir = scratch("cost");
  ASSERT_EQ(run("cost --n 2 --sigma 1 --radius 1 --r0 0", dir / "out"), 0);
  EXPECT_EQ(slurp(dir / "out").substr(0, 17), "r0,expected_cost\n");
  EXPECT_NE(run("cost --radius 1 --r0 2", dir / "err"), 0);
  EXPECT_NE(slurp(dir / "err").find("start beyond stopping boundary"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  const auto dir = scratch("usage");
  EXPECT_NE(run("", dir / "a"), 0);
  EXPECT_NE(run("sweep --r-grid 1:2", dir / "b"), 0);
  EXPECT_NE(run("rate --n 0", dir / "c"), 0);
  EXPECT_NE(run("simulate --bogus 1", dir / "d"), 0);
}

TEST(Cli, ConfigFileBelowFlags) {
  const auto dir = scratch("config");
  std::ofstream(dir / "run.cfg") << "# defaults for this study\nn = 3\nsigma=2\nseed=11\npaths=10\ntrace=true\n";
  const std::string out = (dir / "sim").string();
  ASSERT_EQ(run("simulate --config " + (dir / "run.cfg").string() + " --sigma 1 --out " + out, dir / "log"), 0)
      << slurp(dir / "log");
  const auto manifest = slurp(dir / "sim" / "run.txt");
  EXPECT_NE(manifest.find("n=3\n"), std::string::npos);
  EXPECT_NE(manifest.find("sigma=1\n"), std::string::npos);
  EXPECT_NE(manifest.find("seed=11\n"), std::string::npos);
  EXPECT_NE(manifest.find("trace=true\n"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "sim" / "trace_path0.csv"));
  EXPECT_EQ(slurp(dir / "sim" / "trace_path0.csv").substr(0, 19), "t,y_1,y_2,y_3,cost\n");

  // The manifest reproduces the run.
  const std::string again = (dir / "again").string();
  ASSERT_EQ(run("simulate --config " + (dir / "sim" / "run.txt").string() + " --out " + again, dir / "log2"), 0);
  EXPECT_EQ(slurp(dir / "sim" / "summary.csv"), slurp(dir / "again" / "summary.csv"));
}

TEST(Cli, SimulateTruncationIsNotAnError) {
  const auto dir = scratch("trunc");
  ASSERT_EQ(run("simulate --paths 1 --max-steps 3 --out " + (dir / "s").string(), dir / "log"), 0);
  EXPECT_NE(slurp(dir / "s" / "summary.csv").find("nan,nan,0,1,"), std::string::npos);
}

TEST(Cli, VerifyStatus) {
  const auto dir = scratch("verify");
  EXPECT_EQ(run("verify --n 2 --sigma 1 --radius 1 --out " + (dir / "ok").string(), dir / "ok.log"), 0);
  EXPECT_NE(run("verify --n 2 --sigma 1 --radius 1 --inject-fault --out " + (dir / "bad").string(), dir / "bad.log"), 0);
  EXPECT_NE(slurp(dir / "bad.log").find("bound violation"), std::string::npos);
}

TEST(Cli, ThreadCountDoesNotChangeOutput) {
  const auto dir = scratch("threads");
  const std::string args = "sweep --n 2,10 --sigma 0.5,1 --r-grid 0:4:40 --out ";
  ASSERT_EQ(run(args + (dir / "a").string(), dir / "la"), 0);
  const std::string cmd = "HJB_PLANNER_THREADS=3 " + kBinary.string() + " " + args + (dir / "b").string() + " > /dev/null";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_EQ(slurp(dir / "a" / "sweep.csv"), slurp(dir / "b" / "sweep.csv"));
}
