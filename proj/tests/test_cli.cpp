#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include <json.hpp>

#include "support.hpp"

namespace {

using testing_support::read_file;
using testing_support::TempDir;
using testing_support::write_file;

const std::string kCli = STRADDLE_CLI;
const std::string kSource = STRADDLE_SOURCE_DIR;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome cli(const std::string& args, const TempDir& dir) {
  const std::string out = dir.file("stdout.txt"), err = dir.file("stderr.txt");
  const int status = std::system((kCli + " " + args + " >" + out + " 2>" + err).c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(out), read_file(err)};
}

/// A short synthetic experiment that trains in a few seconds.
nlohmann::json small_config(const std::string& out_dir) {
  auto j = nlohmann::json::parse(read_file(kSource + "/configs/exp-1.1.json"));
  j["name"] = "cli-small";
  j["data"]["synth"]["n_days"] = 330;
  j["test_start"] = "2012-08";
  j["iterations"] = 2;
  j["epochs"] = 2;
  j["output_dir"] = out_dir;
  j["models"] = nlohmann::json::array({
      {{"id", "LR"}, {"kind", "logistic_regression"}, {"params", nlohmann::json::object()}},
      {{"id", "RF"}, {"kind", "random_forest"}, {"params", {{"n_estimators", 9}}}},
  });
  return j;
}

}  // namespace

TEST(Cli, UnknownKeyIsConfigError) {
  TempDir dir("cli");
  auto j = small_config(dir.file("run"));
  j["bogus"] = 1;
  write_file(dir.file("c.json"), j.dump());
  const auto r = cli("dry-run --config " + dir.file("c.json"), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bogus"), std::string::npos) << r.err;
}

TEST(Cli, BadFieldValueNamesField) {
  TempDir dir("cli");
  auto j = small_config(dir.file("run"));
  j["test_start"] = "2012-13";
  write_file(dir.file("c.json"), j.dump());
  const auto r = cli("dry-run --config " + dir.file("c.json"), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("test_start"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrorsExitTwo) {
  TempDir dir("cli");
  EXPECT_EQ(cli("", dir).code, 2);
  EXPECT_EQ(cli("run", dir).code, 2);
  EXPECT_EQ(cli("run --config " + dir.file("missing.json"), dir).code, 2);
}

TEST(Cli, DryRunListsSplitsOfBundledConfig) {
  TempDir dir("cli");
  const auto r = cli("dry-run --config " + kSource + "/configs/exp-1.1.json", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("iterations: "), std::string::npos);
  EXPECT_NE(r.out.find("\n0,2011-11-01,2013-12-31,2014-01-01,2014-01-31,2014-02-01,2014-02-28\n"), std::string::npos)
      << r.out;
}

TEST(Cli, BundledConfigsValidate) {
  TempDir dir("cli");
  for (const char* name : {"exp-1.1", "exp-1.2", "exp-2.1", "exp-2.2"}) {
    const auto r = cli(std::string("dry-run --config ") + kSource + "/configs/" + name + ".json", dir);
    EXPECT_EQ(r.code, 0) << name << ": " << r.err;
  }
  const auto j = nlohmann::json::parse(read_file(kSource + "/configs/exp-2.1.json"));
  const auto features = j.at("features").get<std::vector<std::string>>();
  for (const char* f : {"spxHigh", "spxLow", "vixHigh", "vixLow", "pmSettled"})
    EXPECT_NE(std::find(features.begin(), features.end(), f), features.end()) << f;
}

TEST(Cli, RunWritesArtifactsAndManifestReplays) {
  TempDir dir("cli");
  write_file(dir.file("c.json"), small_config(dir.file("run")).dump());
  const auto r = cli("run --config " + dir.file("c.json") + " --threads 2", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"samples.csv", "results.jsonl", "report.json", "metrics_table.csv", "splits.csv",
                        "manifest.json", "warnings.txt", "plots/cumulative_profit.csv",
                        "plots/per_window_profit.csv", "plots/profit_distribution.csv", "plots/metric_boxes.csv"})
    EXPECT_TRUE(std::filesystem::exists(dir.file("run") + "/" + f)) << f;

  const auto table = read_file(dir.file("run") + "/metrics_table.csv");
  for (const char* row : {"\naccuracy,", "\nbalanced_accuracy,", "\nroc_auc_weighted,", "\navg_trades,"})
    EXPECT_NE(table.find(row), std::string::npos) << row;

  const auto replay = cli("run --config " + dir.file("run") + "/manifest.json --out " + dir.file("replay"), dir);
  ASSERT_EQ(replay.code, 0) << replay.err;
  for (const char* f : {"results.jsonl", "report.json", "metrics_table.csv", "plots/cumulative_profit.csv"})
    EXPECT_EQ(read_file(dir.file("run") + "/" + f), read_file(dir.file("replay") + "/" + f)) << f;

  const auto tl = cli("timeline --run " + dir.file("run") + " --model RF", dir);
  ASSERT_EQ(tl.code, 0) << tl.err;
  EXPECT_EQ(tl.out.rfind("week,date,prediction,action\n", 0), 0u);
}

TEST(Cli, TimelineMissingArtifactsIsDataError) {
  TempDir dir("cli");
  const auto r = cli("timeline --run " + dir.file("nothing-here"), dir);
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("missing run artifacts"), std::string::npos);
}

TEST(Cli, TimelineFromPredictionsFile) {
  TempDir dir("cli");
  write_file(dir.file("p.csv"), "date,probability\n2019-03-01,0.53780\n2019-05-10,0.44936\n2019-06-14,0.25678\n");
  const auto r = cli("timeline --predictions " + dir.file("p.csv"), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out,
            "week,date,prediction,action\n"
            "1,2019-03-01,0.53780,trade!\n"
            "2,2019-05-10,0.44936,don't trade!\n"
            "3,2019-06-14,0.25678,don't trade!\n");
}

TEST(Cli, SynthWritesIngestableCsv) {
  TempDir dir("cli");
  const auto r = cli("synth --out " + dir.file("data") + " --seed 3", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"options.csv", "spx.csv", "vix.csv"})
    EXPECT_TRUE(std::filesystem::exists(dir.file("data") + "/" + f)) << f;
}
