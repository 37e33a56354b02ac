#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "galu/datagen.hpp"
#include "galu/experiments/serialization.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(GALU_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("galu_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// CSV text without the trailing wall-clock column.
std::string without_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + '\n';
  return out;
}

}  // namespace

TEST(Cli, MemorizeSucceedsAndWritesOutputs) {
  const fs::path out = scratch("mem");
  EXPECT_EQ(run("memorize --m 100 --d 10 --trials 1 --threads 1 --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "results.csv"));
  EXPECT_TRUE(fs::exists(out / "config.json"));
  EXPECT_TRUE(fs::exists(out / "summary.txt"));
  EXPECT_NE(slurp(out / "config.json").find("\"m\": [\n    100"), std::string::npos);
  fs::remove_all(out);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("nosuchcommand"), 1);
  EXPECT_EQ(run("memorize --m abc"), 1);
  EXPECT_EQ(run("memorize --activation tanh --out " + scratch("u1").string()), 1);
  EXPECT_EQ(run("memorize --trials 0 --out " + scratch("u2").string()), 1);
  EXPECT_EQ(run("memorize --config /nonexistent.json --out " + scratch("u3").string()), 1);
  EXPECT_EQ(run("memorize --loss l1 --out " + scratch("u4").string()), 1);
}

TEST(Cli, ConfigFileWithUnknownKeyRejected) {
  const fs::path dir = scratch("cfg");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << R"({"m": [50], "learning_rate": 1})";
  EXPECT_EQ(run("memorize --config " + (dir / "bad.json").string() + " --out " + (dir / "o").string()), 1);
  std::ofstream(dir / "good.json") << R"({"m": [50], "d": [10], "trials": 1, "threads": 1})";
  EXPECT_EQ(run("memorize --config " + (dir / "good.json").string() + " --out " + (dir / "o").string()), 0);
  fs::remove_all(dir);
}

TEST(Cli, CapacityErrorExitsThree) {
  EXPECT_EQ(run("underparam --m 200000 --d 1000 --ratios 1 --trials 1 --threads 1 --out " +
                scratch("cap").string()),
            3);
}

TEST(Cli, RerunsAreDeterministicExceptTiming) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const std::string args = "underparam --m 200 --d 10 --ratios 0.25,0.5 --trials 2 --seed 11 ";
  ASSERT_EQ(run(args + "--threads 1 --out " + a.string()), 0);
  ASSERT_EQ(run(args + "--threads 2 --out " + b.string()), 0);
  const std::string csv_a = slurp(a / "results.csv"), csv_b = slurp(b / "results.csv");
  EXPECT_FALSE(csv_a.empty());
  EXPECT_EQ(without_timing(csv_a), without_timing(csv_b));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, SeedChangesResults) {
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  const std::string args = "underparam --m 200 --d 10 --ratios 0.5 --trials 1 --threads 1 ";
  ASSERT_EQ(run(args + "--seed 1 --out " + a.string()), 0);
  ASSERT_EQ(run(args + "--seed 2 --out " + b.string()), 0);
  EXPECT_NE(without_timing(slurp(a / "results.csv")), without_timing(slurp(b / "results.csv")));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, SavedModelsReloadToSameOutputs) {
  const fs::path out = scratch("models");
  ASSERT_EQ(run("linsep --m 500 --d 5 --k 4 --m-test 100 --iterations 200 --threads 1 --out " +
                out.string()),
            0);
  int models = 0;
  for (const auto& entry : fs::directory_iterator(out / "models")) {
    const galu::experiments::SavedModel m = galu::experiments::load_model(entry.path().string());
    const galu::Matrix xs = galu::gen_gaussian(20, 5, 3).xs;
    const nlohmann::json again = galu::experiments::model_to_json(m);
    const galu::experiments::SavedModel m2 = galu::experiments::model_from_json(again);
    EXPECT_LE((m.predict(xs) - m2.predict(xs)).cwiseAbs().maxCoeff(), 1e-15);
    ++models;
  }
  EXPECT_EQ(models, 2);
  fs::remove_all(out);
}

TEST(Cli, NegatedIndicatorMakesTheoryCheckFail) {
  EXPECT_EQ(run("theory-check --negate-indicator --out " + scratch("canary").string()), 2);
}

TEST(Cli, TheoryCheckPasses) {
  const fs::path out = scratch("theory");
  EXPECT_EQ(run("theory-check --out " + out.string()), 0);
  EXPECT_NE(slurp(out / "summary.txt").find("PASS"), std::string::npos);
  EXPECT_EQ(slurp(out / "summary.txt").find("FAIL"), std::string::npos);
  fs::remove_all(out);
}
