#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "driftx/dataset_io.hpp"
#include "driftx/toy.hpp"
#include "driftx_cli/cli.hpp"

namespace fs = std::filesystem;
using namespace driftx;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "driftx");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("driftx_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ToyDistribution dist;
    dist.labelled = true;
    write_dataset_csv(path("data.csv"), sample_toy(dist, 400, Seed{3}));
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
  }

  fs::path dir_;
};

std::vector<std::string> csv_row(const std::string& csv, int row) {
  std::istringstream in(csv);
  std::string line;
  for (int i = 0; i <= row; ++i) std::getline(in, line);
  std::vector<std::string> cells;
  std::istringstream cols(line);
  for (std::string c; std::getline(cols, c, ',');) cells.push_back(c);
  return cells;
}

}  // namespace

TEST_F(CliTest, HelpExitsZero) {
  const Result r = run_cli({"train", "--help"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_NE(r.out.find("--steps"), std::string::npos);
  EXPECT_EQ(run_cli({"--help"}).code, cli::kExitOk);
}

TEST_F(CliTest, MissingRequiredFlag) {
  const Result r = run_cli({"select-landmarks", "--budget", "5", "--input", path("data.csv"), "--output",
                            path("lm.csv")});
  EXPECT_EQ(r.code, cli::kExitValidation);
  EXPECT_NE(r.err.find("--seed"), std::string::npos);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
  EXPECT_FALSE(fs::exists(path("lm.csv")));
}

TEST_F(CliTest, UnknownSubcommand) {
  const Result r = run_cli({"frobnicate"});
  EXPECT_EQ(r.code, cli::kExitValidation);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run_cli({}).code, cli::kExitValidation);
}

TEST_F(CliTest, ToolBinaryExitCodes) {
  const std::string tool = DRIFTX_TOOL_PATH;
  const auto status = [&](const std::string& args) {
    const int raw = std::system((tool + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(raw);
  };
  EXPECT_EQ(status("--help"), 0);
  EXPECT_EQ(status("frobnicate"), 1);
  EXPECT_EQ(status("precompute --landmarks " + path("none.csv") + " --data " + path("data.csv") + " --output " +
                   path("b.dxsm")),
            2);
}

TEST_F(CliTest, BadFlagValues) {
  EXPECT_EQ(run_cli({"select-landmarks", "--budget", "abc", "--seed", "1", "--input", path("data.csv")}).code,
            cli::kExitValidation);
  EXPECT_EQ(run_cli({"select-landmarks", "--budget", "5", "--seed", "1", "--strategy", "magic", "--input",
                     path("data.csv")})
                .code,
            cli::kExitValidation);
  EXPECT_EQ(run_cli({"train", "--seed", "1", "--out", path("run"), "--mode", "walk"}).code, cli::kExitValidation);
  EXPECT_FALSE(fs::exists(path("run")));
}

TEST_F(CliTest, RuntimeFailureExitsTwo) {
  const Result r = run_cli({"select-landmarks", "--budget", "5", "--seed", "1", "--input", path("missing.csv")});
  EXPECT_EQ(r.code, cli::kExitRuntime);
  const Result infeasible =
      run_cli({"select-landmarks", "--budget", "5000", "--seed", "1", "--input", path("data.csv")});
  EXPECT_EQ(infeasible.code, cli::kExitRuntime);
}

TEST_F(CliTest, UnknownConfigKey) {
  write("cfg.json", R"({"budget": 5, "bogus": 1})");
  const Result r = run_cli({"select-landmarks", "--config", path("cfg.json"), "--seed", "1", "--input",
                            path("data.csv")});
  EXPECT_EQ(r.code, cli::kExitValidation);
  EXPECT_NE(r.err.find("bogus"), std::string::npos);
}

TEST_F(CliTest, ConfigSuppliesRequiredFlags) {
  write("cfg.json", R"({"budget": 7, "seed": 2, "input": ")" + path("data.csv") + R"("})");
  const Result r = run_cli({"select-landmarks", "--config", path("cfg.json")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 8);
}

TEST_F(CliTest, FlagBeatsConfigBeatsDefault) {
  write("cfg.json", R"({"b": 8, "r": 6, "n-plus": 50, "sweep": "d=2", "mode": "projected"})");
  const Result r = run_cli({"bench", "--config", path("cfg.json"), "--b", "4"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto header = csv_row(r.out, 0);
  const auto row = csv_row(r.out, 1);
  ASSERT_EQ(header[1], "B");
  EXPECT_EQ(row[0], "projected");
  EXPECT_EQ(row[1], "4");  // flag
  EXPECT_EQ(row[2], "50");  // config
  EXPECT_EQ(row[5], "6");  // config
  EXPECT_EQ(row[3], "4");  // default: N- follows B
  EXPECT_EQ(row[6], "1");
  write("cfg2.json", R"({"n-plus": 50, "sweep": "d=3", "mode": "exact"})");
  const Result d = run_cli({"bench", "--config", path("cfg2.json")});
  ASSERT_EQ(d.code, cli::kExitOk) << d.err;
  const auto drow = csv_row(d.out, 1);
  EXPECT_EQ(drow[1], "256");  // default
  EXPECT_EQ(drow[4], "3");
  EXPECT_EQ(drow[5], "200");
}

TEST_F(CliTest, ComposeCheckPasses) {
  const Result r = run_cli({"compose-check", "--data", path("data.csv"), "--shards", "4", "--budget", "50", "--seed", "7"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_LE(std::stod(r.out), 1e-10);
}

TEST_F(CliTest, PipelineRerunsAreByteIdentical) {
  const auto pipeline = [&](const std::string& tag) {
    const std::string lm = path(tag + "_lm.csv"), bank = path(tag + "_bank.dxsm"), rep = path(tag + "_rep.json");
    EXPECT_EQ(run_cli({"select-landmarks", "--strategy", "kcenter", "--scope", "per-class", "--budget", "6", "--seed",
                       "4", "--input", path("data.csv"), "--output", lm})
                  .code,
              0);
    EXPECT_EQ(run_cli({"precompute", "--landmarks", lm, "--data", path("data.csv"), "--shard-by-class", "--output",
                       bank})
                  .code,
              0);
    const Result fid = run_cli({"fidelity", "--data", path("data.csv"), "--bank", bank, "--queries",
                                path("data.csv"), "--report", rep});
    EXPECT_EQ(fid.code, 0) << fid.err;
    const Result mlp = run_cli({"train", "--mode", "mlp", "--steps", "30", "--batch", "32", "--eval-every", "10",
                                "--eval-samples", "100", "--n-data", "300", "--landmarks", "20", "--seed", "9",
                                "--svg", "--out", path(tag + "_mlp")});
    EXPECT_EQ(mlp.code, 0) << mlp.err;
    const Result part = run_cli({"train", "--mode", "particle", "--attraction", "exact", "--steps", "12",
                                 "--particles", "40", "--n-data", "200", "--snapshot-every", "5", "--eval-samples",
                                 "100", "--seed", "9", "--out", path(tag + "_part")});
    EXPECT_EQ(part.code, 0) << part.err;
    const Result cc = run_cli({"compose-check", "--data", path("data.csv"), "--seed", "3"});
    std::string all = slurp(lm) + slurp(bank) + slurp(rep) + cc.out;
    for (const auto& run : {tag + "_mlp", tag + "_part"}) {
      std::vector<fs::path> files;
      for (const auto& e : fs::recursive_directory_iterator(path(run))) {
        if (e.is_regular_file()) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) all += fs::relative(f, path(run)).string() + "\n" + slurp(f);
    }
    return all;
  };
  const std::string a = pipeline("a");
  const std::string b = pipeline("b");
  EXPECT_GT(a.size(), 1000u);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(fs::exists(path("a_mlp/snapshots/step_30.svg")));
  EXPECT_TRUE(fs::exists(path("a_part/snapshots/step_10.csv")));
  EXPECT_NE(slurp(path("a_mlp/loss.csv")).find("step,loss,energy_distance"), std::string::npos);
}
