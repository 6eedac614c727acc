// Drives the polya_lab binary end to end: exit codes, error JSON, files,
// replay and the thread-count environment variable.

#include <nlohmann/json.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("polya_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string& args, const std::string& env = "") const {
    const fs::path out = dir_ / "stdout", err = dir_ / "stderr";
    const std::string cmd = env + (env.empty() ? "" : " ") + std::string(POLYA_LAB_PATH) + " " + args + " >" +
                            out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Outcome r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  static std::string without_timing(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line))
      if (line.find("wall_time_s") == std::string::npos) out << line << '\n';
    return out.str();
  }

  fs::path dir_;
};

nlohmann::json error_of(const Outcome& r) { return nlohmann::json::parse(r.err).at("error"); }

}  // namespace

TEST_F(Cli, CountSucceeds) {
  const Outcome r = run("count -n 10");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\n10,719,"), std::string::npos);
  EXPECT_TRUE(r.err.empty());
}

TEST_F(Cli, ConstantsPrintsJsonByDefault) {
  const Outcome r = run("constants");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  for (const char* key : {"rho", "b", "c", "residual", "N"}) EXPECT_TRUE(j["summary"].contains(key)) << key;
}

TEST_F(Cli, BudgetErrorIsMachineReadable) {
  const Outcome r = run("count -n 2001");
  EXPECT_EQ(r.code, 3);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(error_of(r)["type"], "budget");
  const Outcome ok = run("count -n 2001 --allow-large --format json");
  EXPECT_EQ(ok.code, 0);
  EXPECT_NE(ok.err.find("warning"), std::string::npos);
  EXPECT_EQ(nlohmann::json::parse(ok.out)["warnings"].size(), 1u);
}

TEST_F(Cli, UsageErrors) {
  Outcome r = run("frobnicate");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_of(r)["type"], "usage");
  r = run("");
  EXPECT_EQ(r.code, 2);
  r = run("count");  // -n missing
  EXPECT_EQ(r.code, 2);
  r = run("montecarlo -n 10 --trials 0");
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(error_of(r)["type"], "invalid_argument");
  r = run("joint-dist -n 8 --depths 3,1");
  EXPECT_EQ(r.code, 3);
}

TEST_F(Cli, NumericErrorExitCode) {
  const Outcome r = run("loctime --kappa 1 --density --x 0,1");
  EXPECT_EQ(r.code, 5);
  EXPECT_EQ(error_of(r)["type"], "numeric");
}

TEST_F(Cli, IoErrorNamesPath) {
  const Outcome r = run("witness --out /nonexistent-dir/x.csv");
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(error_of(r)["message"].get<std::string>().find("/nonexistent-dir/x.csv"), std::string::npos);
}

TEST_F(Cli, GlobalFlagsEitherSide) {
  const Outcome a = run("--seed 7 sample -n 6 --count 4");
  const Outcome b = run("sample -n 6 --count 4 --seed 7");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(without_timing(a.out), without_timing(b.out));
  EXPECT_NE(a.out.find("# seed: 7"), std::string::npos);
}

TEST_F(Cli, SameSeedSameThreadsSameReport) {
  const std::string args = "montecarlo -n 30 --trials 2500 -k 3 --seed 42 --threads 2";
  const Outcome a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(without_timing(a.out), without_timing(b.out));
}

TEST_F(Cli, ThreadEnvironmentVariable) {
  const Outcome r = run("sample -n 8 --count 3 --format json", "POLYA_THREADS=3");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["config"]["threads"], 3);
  const Outcome flag = run("sample -n 8 --count 3 --format json --threads 2", "POLYA_THREADS=3");
  EXPECT_EQ(nlohmann::json::parse(flag.out)["config"]["threads"], 2);
  // Trees do not depend on the worker count.
  EXPECT_EQ(nlohmann::json::parse(r.out)["tables"], nlohmann::json::parse(flag.out)["tables"]);
}

TEST_F(Cli, ReplayReproducesReport) {
  for (const char* fmt : {"csv", "json"}) {
    const fs::path first = dir_ / (std::string("first.") + fmt), second = dir_ / (std::string("second.") + fmt);
    const Outcome a = run(std::string("sample -n 12 --count 30 --seed 3 --format ") + fmt + " --out " + first.string());
    ASSERT_EQ(a.code, 0) << a.err;
    const Outcome b = run("--replay " + first.string() + " --out " + second.string());
    ASSERT_EQ(b.code, 0) << b.err;
    std::string x = without_timing(slurp(first)), y = without_timing(slurp(second));
    // Only the recorded destination differs.
    const auto strip_out = [](std::string s, const std::string& path) {
      for (auto pos = s.find(path); pos != std::string::npos; pos = s.find(path)) s.erase(pos, path.size());
      return s;
    };
    EXPECT_EQ(strip_out(x, first.string()), strip_out(y, second.string())) << fmt;
  }
}

TEST_F(Cli, TightnessGridSyntax) {
  const Outcome r = run("tightness -n 3 -r 0 --h 1");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\n3,0,1,1/2,0.5,"), std::string::npos);
  const Outcome grid = run("tightness -n 8:10 -r 0:1 --h 1,2 --format json");
  ASSERT_EQ(grid.code, 0) << grid.err;
  EXPECT_EQ(nlohmann::json::parse(grid.out)["tables"]["moments"]["rows"].size(), 3u * 2u * 2u);
}

TEST_F(Cli, SampleOneTreePerLine) {
  const Outcome r = run("sample -n 7 --count 5 --seed 1");
  ASSERT_EQ(r.code, 0);
  const auto pos = r.out.find("tree\n");
  ASSERT_NE(pos, std::string::npos);
  std::istringstream rest(r.out.substr(pos + 5));
  std::string line;
  int lines = 0;
  while (std::getline(rest, line)) {
    EXPECT_EQ(line.size(), 14u);  // seven "()" pairs
    ++lines;
  }
  EXPECT_EQ(lines, 5);
}

TEST_F(Cli, LocTimeCsv) {
  const Outcome r = run("loctime --kappa 0.5 --t 0:1:0.5");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("kappa,t,re,im"), std::string::npos);
  EXPECT_NE(r.out.find("\n0.5,0.0,1.0,0.0,"), std::string::npos);
  const Outcome bad = run("loctime --kappa 0.5 --t 1 --joint --d 2");
  EXPECT_EQ(bad.code, 2);
}
