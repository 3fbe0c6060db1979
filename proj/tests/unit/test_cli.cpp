#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "srf/binary_io.hpp"
#include "srf/json_io.hpp"

namespace fs = std::filesystem;
using srf::json;

namespace {

struct Run {
  int code;
  std::string output;
};

Run srf_cli(const std::string& args, const std::string& prefix = "") {
  const std::string cmd = prefix + " " + SRF_CLI_PATH + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[512];
  while (pipe && fgets(buf, sizeof buf, pipe)) out += buf;
  const int status = pipe ? pclose(pipe) : -1;
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("srf_cli_test_" + name);
  fs::remove_all(d);
  return d;
}

json read_json(const fs::path& p) { return json::parse(srf::io::read_text(p)); }

// A 40-slot dataset and a tiny architecture keep the end-to-end runs short.
class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = scratch("pipeline");
    fs::create_directories(root_);
    srf::io::write_text(root_ / "tiny.json", R"({
      "model": {"front_channels": [4, 4, 4, 4, 4, 4, 4, 4], "gru_hidden": 8, "head_channels": 2,
                "tail_channels": [4, 4, 1]},
      "train": {"batch_size": 8, "val_snrs_db": [0, 10]}
    })");
    const auto r = srf_cli("generate --out " + (root_ / "data").string() +
                           " --profile CDL-A --realizations 10 --slots 1 --seed 3 --jobs 2");
    ASSERT_EQ(r.code, 0) << r.output;
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static std::string data() { return (root_ / "data").string(); }
  static std::string config() { return "--config " + (root_ / "tiny.json").string(); }

  static fs::path root_;
};

fs::path CliPipeline::root_;

}  // namespace

TEST(Cli, MissingOutputIsAUsageError) {
  EXPECT_EQ(srf_cli("generate --desk").code, 2);
  EXPECT_EQ(srf_cli("").code, 2);
  EXPECT_EQ(srf_cli("train --data x").code, 2);
}

TEST(Cli, DeskFlagConflictsWithExplicitSize) {
  const auto d = scratch("conflict");
  const auto r = srf_cli("generate --desk --realizations 3 --out " + d.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("--desk"), std::string::npos);
}

TEST(Cli, DeskGenerateIsDeterministic) {
  const auto a = scratch("desk_a"), b = scratch("desk_b");
  ASSERT_EQ(srf_cli("generate --desk --seed 7 --out " + a.string()).code, 0);
  ASSERT_EQ(srf_cli("generate --desk --seed 7 --jobs 1 --out " + b.string()).code, 0);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.path().filename() == "run.json") continue;  // timestamps
    EXPECT_EQ(srf::io::file_hash(entry.path()), srf::io::file_hash(b / entry.path().filename()));
    ++files;
  }
  EXPECT_EQ(files, 81u);  // 80 realizations + manifest
  const auto manifest = read_json(a / "manifest.json");
  EXPECT_EQ(manifest.at("settings").size(), 8u);
  EXPECT_EQ(read_json(a / "run.json").at("status"), "completed");
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, SeedFromEnvironmentUnlessOverridden) {
  const auto a = scratch("env_a"), b = scratch("env_b");
  ASSERT_EQ(srf_cli("generate --profile CDL-D --realizations 10 --slots 1 --out " + a.string(), "SRF_SEED=41").code, 0);
  ASSERT_EQ(srf_cli("generate --profile CDL-D --realizations 10 --slots 1 --seed 5 --out " + b.string(), "SRF_SEED=41")
                .code,
            0);
  EXPECT_EQ(read_json(a / "manifest.json").at("master_seed"), 41);
  EXPECT_EQ(read_json(b / "manifest.json").at("master_seed"), 5);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_F(CliPipeline, TrainRecordsMixtureAndAllAlias) {
  const auto out = root_ / "train_all";
  const auto r = srf_cli("train --data " + data() + " --out " + out.string() + " " + config() +
                         " --snr-mix all --epochs 1");
  ASSERT_EQ(r.code, 0) << r.output;
  const auto run = read_json(out / "run.json");
  EXPECT_EQ(run.at("status"), "completed");
  EXPECT_EQ(run.at("config").at("train").at("snr_mixture_db"), json({-5, 0, 5, 10, 15, 20}));
  EXPECT_EQ(run.at("config").at("train").at("batch_size"), 8);  // from the config file
  EXPECT_TRUE(fs::exists(out / "model.srfn"));
  EXPECT_TRUE(fs::exists(out / "history.csv"));

  const auto out2 = root_ / "train_default";
  ASSERT_EQ(srf_cli("train --data " + data() + " --out " + out2.string() + " " + config() +
                    " --snr-mix 0,10,15 --epochs 1 --batch 4")
                .code,
            0);
  const auto run2 = read_json(out2 / "run.json");
  EXPECT_EQ(run2.at("config").at("train").at("snr_mixture_db"), json({0, 10, 15}));
  EXPECT_EQ(run2.at("config").at("train").at("batch_size"), 4);  // flag beats config file
}

TEST_F(CliPipeline, TrainAndEvalAreReproducible) {
  const auto a = root_ / "rep_a", b = root_ / "rep_b";
  for (const auto& d : {a, b}) {
    ASSERT_EQ(srf_cli("train --data " + data() + " --out " + d.string() + " " + config() + " --epochs 2").code, 0);
    const auto r = srf_cli("eval --data " + data() + " --model " + (d / "model.srfn").string() +
                           " --estimators ls,lmmse,sisrafnet --split val --out " + (d / "eval").string());
    ASSERT_EQ(r.code, 0) << r.output;
  }
  EXPECT_EQ(srf::io::file_hash(a / "model.srfn"), srf::io::file_hash(b / "model.srfn"));
  fs::path csv;
  for (const auto& e : fs::directory_iterator(a / "eval")) {
    if (e.path().extension() == ".csv") csv = e.path();
  }
  ASSERT_FALSE(csv.empty());
  EXPECT_EQ(srf::io::file_hash(csv), srf::io::file_hash(b / "eval" / csv.filename()));
  const auto text = srf::io::read_text(csv);
  for (const char* name : {"\nls,", "\nlmmse,", "\nsisrafnet,"}) EXPECT_NE(text.find(name), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 3 * 6);
}

TEST_F(CliPipeline, DatasetHashMismatchNamesBothHashes) {
  const auto r = srf_cli("train --data " + data() + " --out " + (root_ / "hash").string() + " " + config() +
                         " --expect-dataset-hash deadbeef");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.output.find("deadbeef"), std::string::npos);
  EXPECT_NE(r.output.find("manifest hash"), std::string::npos);
}

TEST_F(CliPipeline, MissingModelAndPatternMismatch) {
  auto r = srf_cli("eval --data " + data() + " --model /nonexistent/m.srfn --out " + (root_ / "e").string());
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.output.find("/nonexistent/m.srfn"), std::string::npos);

  const auto out = root_ / "p1";
  ASSERT_EQ(srf_cli("train --data " + data() + " --out " + out.string() + " " + config() + " --epochs 1").code, 0);
  r = srf_cli("eval --data " + data() + " --model " + (out / "model.srfn").string() + " --pattern P4 --out " +
              (root_ / "e").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("P4"), std::string::npos);
}

TEST_F(CliPipeline, InterruptLeavesCheckpointAndAbortedStatus) {
  const auto out = root_ / "interrupted";
  // SIGINT after a few seconds of a run that would otherwise take far longer.
  const auto r = srf_cli("train --data " + data() + " --out " + out.string() + " " + config() +
                             " --epochs 100000 --patience 100000",
                         "timeout --preserve-status -s INT 4");
  EXPECT_EQ(r.code, 130) << r.output;
  EXPECT_EQ(read_json(out / "run.json").at("status"), "aborted");
  EXPECT_TRUE(fs::exists(out / "checkpoint.srfn"));
  EXPECT_FALSE(fs::exists(out / "model.srfn"));
}

TEST_F(CliPipeline, BoostChoosesBudgetManySnrs) {
  const auto out = root_ / "boost";
  const auto r = srf_cli("boost --data " + data() + " --out " + out.string() + " " + config() +
                         " --pool=-5,0,5,10,15,20 --budget 3 --candidate-epochs 1 --slot-stride 4");
  ASSERT_EQ(r.code, 0) << r.output;
  const auto j = read_json(out / "boost_run.json");
  EXPECT_EQ(j.at("chosen_set_db").size(), 3u);
  EXPECT_EQ(j.at("per_step_scores").size(), 3u);
  EXPECT_EQ(j.at("steps").at(0).at("candidates").size(), 6u);
}

TEST(Cli, BenchReportsTableFields) {
  const auto out = scratch("bench") / "bench.json";
  const auto r = srf_cli("bench --iters 100 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto j = read_json(out);
  EXPECT_EQ(j.at("iters"), 100);
  EXPECT_EQ(j.at("mem_slots"), 1);
  EXPECT_GT(j.at("median_ms").get<double>(), 0.0);
  EXPECT_GE(j.at("mega_flops").get<double>(), 100.0);
  EXPECT_EQ(srf_cli("bench --iters 10").code, 2);
  fs::remove_all(out.parent_path());
}
