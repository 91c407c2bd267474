// Copyright 2026 The LMT Docking Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "lmt/dataset.hpp"
#include "lmt/docking_env.hpp"
#include "lmt/io.hpp"
#include "lmt/teacher.hpp"
#include "test_util.hpp"

namespace lmt {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result lmt_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json read_json(const fs::path& p) { return json::parse(test::read_file(p)); }

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

TEST(Cli, TrainWithOneLeafIsTheGlobalFit) {
  test::TempDir dir("cli_train1");
  const auto r = lmt_cli({"train", "--samples", "500", "--max-leaves", "1", "--seed", "3", "--out",
                          (dir / "t.lmt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Tree t = load_tree(dir / "t.lmt");
  EXPECT_EQ(t.leaf_count(), 1u);
  EXPECT_EQ(t.seed(), 3u);
  EXPECT_TRUE(fs::exists(dir / "t.lmt.stats.json"));
  const json m = read_json(dir / "t.lmt.manifest.json");
  EXPECT_EQ(m["command"], "train");
  EXPECT_EQ(m["seed"], 3);
  EXPECT_EQ(m["seed_source"], "flag");
  EXPECT_EQ(m["config"]["build"]["max_leaves"], 1);
  EXPECT_EQ(m["outputs"].size(), 2u);
  EXPECT_TRUE(m.contains("tool_version"));
  EXPECT_TRUE(m.contains("wall_clock_seconds"));
}

TEST(Cli, TrainIsByteIdenticalForAFixedSeed) {
  test::TempDir dir("cli_det");
  for (const char* name : {"a.lmt", "b.lmt"}) {
    const auto r = lmt_cli({"train", "--samples", "3000", "--max-leaves", "20", "--seed", "11",
                            "--out", (dir / name).string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(test::read_file(dir / "a.lmt"), test::read_file(dir / "b.lmt"));
  const auto r = lmt_cli({"train", "--samples", "3000", "--max-leaves", "20", "--seed", "12",
                          "--out", (dir / "c.lmt").string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(test::read_file(dir / "a.lmt"), test::read_file(dir / "c.lmt"));
}

TEST(Cli, TrainFromDatasetFile) {
  test::TempDir dir("cli_ds");
  const TeacherPolicy teacher(ScriptedController{});
  Rng rng(1);
  const FeatureBounds b = FeatureBounds::docking_defaults();
  save_dataset(label(teacher, sample_random(b, 800, rng), b), dir / "d.csv");
  const auto r = lmt_cli({"train", "--dataset", (dir / "d.csv").string(), "--max-leaves", "4",
                          "--min-leaf", "20", "--out", (dir / "t.lmt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Tree t = load_tree(dir / "t.lmt");
  EXPECT_LE(t.leaf_count(), 4u);
  EXPECT_EQ(t.config().min_leaf_samples, 20u);
  EXPECT_EQ(t.input_bounds(), b);
}

TEST(Cli, MissingDatasetExitsTwoAndWritesNothing) {
  test::TempDir dir("cli_missing");
  const auto r = lmt_cli({"train", "--dataset", (dir / "nope.csv").string(), "--out",
                          (dir / "sub" / "t.lmt").string()});
  EXPECT_EQ(r.code, cli::kExitMissingInput);
  EXPECT_NE(r.err.find("not found"), std::string::npos);
  EXPECT_TRUE(fs::is_empty(dir.path()));
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(lmt_cli({"train", "--out", "x.lmt"}).code, cli::kExitFailure);
  EXPECT_EQ(lmt_cli({"frobnicate"}).code, cli::kExitFailure);
  EXPECT_EQ(lmt_cli({"train"}).code, cli::kExitFailure);
  EXPECT_EQ(lmt_cli({"--help"}).code, 0);
}

TEST(Cli, DistillWritesAllArtifacts) {
  test::TempDir dir("cli_distill");
  const fs::path out = dir / "run";
  const auto r = lmt_cli({"distill", "--initial-n", "3000", "--rounds", "2", "--episodes-per-round",
                          "6", "--max-steps", "200", "--max-leaves", "15", "--seed", "5", "--jobs",
                          "2", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("round 2:"), std::string::npos);
  for (const char* f : {"tree.lmt", "dataset.csv", "rounds.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  EXPECT_EQ(count_lines(test::read_file(out / "rounds.csv")), 3u);
  const Dataset d = load_dataset(out / "dataset.csv");
  EXPECT_GE(d.size(), 3000u);
  const json m = read_json(out / "manifest.json");
  EXPECT_EQ(m["config"]["rounds"], 2);
  EXPECT_EQ(m["jobs"], 2);
  EXPECT_EQ(m["outputs"].size(), 3u);
}

TEST(Cli, FailedDistillLeavesNoPartialOutput) {
  test::TempDir dir("cli_badmlp");
  {
    std::ofstream os(dir / "bad.txt");
    os << "lmt-mlp 1\ninput_dim 9\nbounds none\nlayers 1\nlayer 5 9 swish\n";
  }
  const fs::path out = dir / "run";
  const auto r = lmt_cli({"distill", "--teacher", "mlp:" + (dir / "bad.txt").string(), "--initial-n",
                          "100", "--out", out.string()});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(fs::exists(out));

  const auto missing = lmt_cli({"distill", "--teacher", "mlp:" + (dir / "none.txt").string(),
                                "--out", out.string()});
  EXPECT_EQ(missing.code, cli::kExitMissingInput);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, MlpTeacherFromFile) {
  test::TempDir dir("cli_mlp");
  const std::array<std::size_t, 1> hidden{8};
  save_mlp(MlpPolicy::random(2, hidden), dir / "w.txt");
  const auto r = lmt_cli({"train", "--samples", "500", "--teacher", "mlp:" + (dir / "w.txt").string(),
                          "--max-leaves", "3", "--out", (dir / "t.lmt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
}

class CliWithTree : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto r = lmt_cli({"train", "--samples", "5000", "--max-leaves", "30", "--seed", "1",
                            "--out", tree_path().string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  fs::path tree_path() const { return dir_ / "t.lmt"; }
  test::TempDir dir_{"cli_fixture"};
};

TEST_F(CliWithTree, EvalDefaultsAndReports) {
  const fs::path out = dir_ / "eval";
  const auto r = lmt_cli({"eval", "--tree", tree_path().string(), "--episodes", "3", "--seeds", "4",
                          "--export-paths", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("MAE"), std::string::npos);
  EXPECT_NE(r.out.find("failure gap"), std::string::npos);
  EXPECT_EQ(count_lines(test::read_file(out / "errors.csv")), 6u);
  EXPECT_EQ(count_lines(test::read_file(out / "comparison.csv")), 5u);
  EXPECT_TRUE(fs::exists(out / "paths" / "start_3_tree.csv"));
  const json m = read_json(out / "manifest.json");
  EXPECT_EQ(m["config"]["max_steps"], 800);
  EXPECT_EQ(m["inputs"]["tree"], tree_path().string());
}

TEST_F(CliWithTree, EvalMissingTreeExitsTwo) {
  const auto r = lmt_cli({"eval", "--tree", (dir_ / "none.lmt").string(), "--out", (dir_ / "e").string()});
  EXPECT_EQ(r.code, cli::kExitMissingInput);
  EXPECT_FALSE(fs::exists(dir_ / "e"));
}

TEST_F(CliWithTree, ExplainState) {
  const auto r = lmt_cli({"explain", "--tree", tree_path().string(), "--state",
                          "50, 2, 0.1, 1.0, 0, 0, 0, 12, 1.5", "--manifest",
                          (dir_ / "m.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("leaf "), std::string::npos);
  for (auto name : kActionNames) EXPECT_NE(r.out.find("\n" + std::string(name) + " "), std::string::npos);

  const auto bad = lmt_cli({"explain", "--tree", tree_path().string(), "--state", "1,2,3,4,5,6,7,8",
                            "--manifest", (dir_ / "m2.json").string()});
  EXPECT_EQ(bad.code, cli::kExitFailure);
  EXPECT_FALSE(fs::exists(dir_ / "m2.json"));
  const auto both = lmt_cli({"explain", "--tree", tree_path().string(), "--state", "1,2,3,4,5,6,7,8,9",
                             "--trajectory", "x.csv"});
  EXPECT_EQ(both.code, cli::kExitFailure);
}

TEST_F(CliWithTree, ExplainTrajectoryHasOneRowPerStep) {
  // A constant full-astern tree never docks, so the episode runs to the cap.
  const Tree astern = test::constant_tree(unscale_action(PhysicalAction{-70, -70, 0, 0, 0}));
  save_tree(astern, dir_ / "astern.lmt");
  const fs::path run_dir = dir_ / "run";
  const auto r = lmt_cli({"run", "--controller", "tree:" + (dir_ / "astern.lmt").string(), "--out",
                          run_dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(test::read_file(run_dir / "episode_0.csv")), 801u);
  const auto e = lmt_cli({"explain", "--tree", tree_path().string(), "--trajectory",
                          (run_dir / "episode_0.csv").string(), "--out", (dir_ / "timeline.csv").string()});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_EQ(count_lines(test::read_file(dir_ / "timeline.csv")), 801u);
  EXPECT_TRUE(fs::exists(dir_ / "timeline.csv.manifest.json"));
}

TEST_F(CliWithTree, RunWithExplainerAndDeterminism) {
  test::TempDir other("cli_mlp_run");
  const std::array<std::size_t, 1> hidden{8};
  save_mlp(MlpPolicy::random(4, hidden), other / "w.txt");
  std::string first;
  for (const char* name : {"r1", "r2"}) {
    const auto r = lmt_cli({"run", "--controller", "mlp:" + (other / "w.txt").string(), "--explain-with",
                            tree_path().string(), "--episodes", "2", "--max-steps", "50", "--seed",
                            "8", "--out", (dir_ / name).string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string text = test::read_file(dir_ / name / "episode_1.csv");
    if (first.empty()) first = text; else EXPECT_EQ(text, first);
  }
  std::istringstream is(first);
  std::string header;
  std::getline(is, header);
  std::size_t attribution_cols = 0;
  for (std::size_t p = header.find(",I_"); p != std::string::npos; p = header.find(",I_", p + 1)) ++attribution_cols;
  EXPECT_EQ(attribution_cols, 45u);
  EXPECT_NE(header.find("leaf_id"), std::string::npos);
  EXPECT_EQ(count_lines(test::read_file(dir_ / "r1" / "outcomes.csv")), 3u);
}

TEST_F(CliWithTree, ContactEpisodeEndsWithContactFlag) {
  EnvConfig env = EnvConfig::defaults();
  save_env_config(env, dir_ / "env.json");
  // Full ahead from starts that face the berth runs into the quay for most seeds.
  const Tree push = test::constant_tree(unscale_action(PhysicalAction{100, 100, 0, 0, 0}));
  save_tree(push, dir_ / "push.lmt");
  const auto r = lmt_cli({"run", "--controller", "tree:" + (dir_ / "push.lmt").string(), "--env",
                          (dir_ / "env.json").string(), "--episodes", "8", "--out", (dir_ / "c").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string outcomes = test::read_file(dir_ / "c" / "outcomes.csv");
  EXPECT_NE(outcomes.find("contact"), std::string::npos);
  const auto header = trajectory_csv_header(false);
  const auto col = static_cast<std::size_t>(
      std::find(header.begin(), header.end(), "contact_event") - header.begin());
  std::istringstream summary(outcomes);
  std::string line;
  std::getline(summary, line);
  while (std::getline(summary, line)) {
    const auto f = split(line, ',');
    const std::string ep = test::read_file(dir_ / "c" / ("episode_" + f[0] + ".csv"));
    std::istringstream is(ep);
    std::vector<std::string> rows;
    for (std::string row; std::getline(is, row);) rows.push_back(row);
    ASSERT_GE(rows.size(), 2u);
    EXPECT_EQ(split(rows.back(), ',')[col], f[2] == "contact" ? "1" : "0");
    for (std::size_t k = 1; k + 1 < rows.size(); ++k) EXPECT_EQ(split(rows[k], ',')[col], "0");
  }
}

TEST_F(CliWithTree, JobsDoNotChangeResults) {
  for (const char* jobs : {"1", "4"}) {
    const auto r = lmt_cli({"eval", "--tree", tree_path().string(), "--episodes", "6", "--seeds", "6",
                            "--max-steps", "300", "--jobs", jobs, "--out", (dir_ / ("j" + std::string(jobs))).string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(test::read_file(dir_ / "j1" / "errors.csv"), test::read_file(dir_ / "j4" / "errors.csv"));
  EXPECT_EQ(test::read_file(dir_ / "j1" / "comparison.csv"),
            test::read_file(dir_ / "j4" / "comparison.csv"));
}

TEST(Cli, SeedFallsBackToEnvironment) {
  test::TempDir dir("cli_envseed");
  ::setenv("LMT_SEED", "77", 1);
  const auto r = lmt_cli({"train", "--samples", "300", "--max-leaves", "2", "--out", (dir / "t.lmt").string()});
  const auto bad = [&] {
    ::setenv("LMT_SEED", "seven", 1);
    return lmt_cli({"train", "--samples", "300", "--out", (dir / "u.lmt").string()});
  }();
  ::unsetenv("LMT_SEED");
  ASSERT_EQ(r.code, 0) << r.err;
  const json m = read_json(dir / "t.lmt.manifest.json");
  EXPECT_EQ(m["seed"], 77);
  EXPECT_EQ(m["seed_source"], "LMT_SEED");
  EXPECT_EQ(bad.code, cli::kExitFailure);

  const auto d = lmt_cli({"train", "--samples", "300", "--max-leaves", "2", "--out", (dir / "v.lmt").string()});
  ASSERT_EQ(d.code, 0);
  EXPECT_EQ(read_json(dir / "v.lmt.manifest.json")["seed_source"], "default");
}

TEST(Cli, EnvTemplateRoundTrips) {
  test::TempDir dir("cli_env");
  const auto r = lmt_cli({"export-env-template", "--out", (dir / "env.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const EnvConfig back = load_env_config(dir / "env.json");
  std::stringstream a, b;
  write_env_config(back, a);
  write_env_config(EnvConfig::defaults(), b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_TRUE(fs::exists(dir / "env.json.manifest.json"));
}

}  // namespace
}  // namespace lmt
