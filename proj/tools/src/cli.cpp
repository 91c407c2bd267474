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

#include "cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "lmt/dataset.hpp"
#include "lmt/docking_env.hpp"
#include "lmt/eval.hpp"
#include "lmt/io.hpp"
#include "lmt/teacher.hpp"
#include "lmt/tree.hpp"

#ifndef LMT_VERSION
#define LMT_VERSION "0.0.0"
#endif

namespace lmt::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct MissingInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const fs::path& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw MissingInput(what + " not found: " + path.string());
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::string& source) {
  if (flag) {
    source = "flag";
    return *flag;
  }
  const char* env = std::getenv("LMT_SEED");
  if (env != nullptr && *env != '\0') {
    std::uint64_t value = 0;
    const char* end = env + std::strlen(env);
    auto [ptr, ec] = std::from_chars(env, end, value);
    if (ec != std::errc{} || ptr != end) {
      throw UsageError(std::string("LMT_SEED is not an unsigned integer: ") + env);
    }
    source = "LMT_SEED";
    return value;
  }
  source = "default";
  return 0;
}

// Tracks files written by a command so a failure can undo them. Files are
// recorded only after they were written, so pre-existing files that the run
// never touched survive a failure.
class Outputs {
 public:
  Outputs() = default;
  Outputs(const Outputs&) = delete;
  Outputs& operator=(const Outputs&) = delete;
  ~Outputs() {
    if (!committed_) rollback();
  }

  void make_directory(const fs::path& dir) {
    if (fs::exists(dir)) {
      if (!fs::is_directory(dir)) throw Error(ErrorKind::kIo, dir.string() + " is not a directory");
      return;
    }
    std::vector<fs::path> missing;
    for (fs::path p = dir; !p.empty() && !fs::exists(p); p = p.parent_path()) {
      missing.push_back(p);
      if (p == p.parent_path()) break;
    }
    fs::create_directories(dir);
    dirs_.insert(dirs_.end(), missing.begin(), missing.end());
  }

  void write(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    if (path.has_parent_path()) make_directory(path.parent_path());
    write_text_file_atomic(path, body);
    files_.push_back(path);
  }

  json listing() const {
    json a = json::array();
    for (const auto& f : files_) a.push_back(f.string());
    return a;
  }

  void commit() { committed_ = true; }

 private:
  void rollback() noexcept {
    std::error_code ec;
    for (const auto& f : files_) fs::remove(f, ec);
    for (const auto& d : dirs_) {
      if (fs::is_directory(d, ec) && fs::is_empty(d, ec)) fs::remove(d, ec);
    }
  }

  std::vector<fs::path> files_;
  std::vector<fs::path> dirs_;  // deepest first
  bool committed_ = false;
};

struct Common {
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 0;
  std::string manifest;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Master seed; falls back to LMT_SEED, then 0");
  app->add_option("--jobs", c.jobs, "Worker threads (0 = one per core, 1 = sequential)")
      ->capture_default_str();
  app->add_option("--manifest", c.manifest, "Where to write the run manifest");
}

void add_build_flags(CLI::App* app, BuildConfig& b) {
  app->add_option("--max-leaves", b.max_leaves, "Leaf budget N")->capture_default_str();
  app->add_option("--min-leaf-samples,--min-leaf", b.min_leaf_samples, "Minimum samples per leaf M")
      ->capture_default_str();
  app->add_option("--grid-size", b.grid_size, "Thresholds per feature and node")
      ->capture_default_str();
  app->add_option("--randomization-amplitude", b.randomization_amplitude,
                  "Amplitude of threshold jitter and node-selection noise")
      ->capture_default_str();
  app->add_option("--ridge", b.ridge, "Ridge penalty of the leaf fits")->capture_default_str();
}

json to_json(const BuildConfig& b) {
  return {{"max_leaves", b.max_leaves},
          {"min_leaf_samples", b.min_leaf_samples},
          {"grid_size", b.grid_size},
          {"randomization_amplitude", b.randomization_amplitude},
          {"ridge", b.ridge},
          {"seed", b.seed}};
}

json to_json(const FeatureBounds& b) { return {{"lo", b.lo}, {"hi", b.hi}}; }

json to_json(const EnvConfig& env) {
  std::ostringstream os;
  write_env_config(env, os);
  return json::parse(os.str());
}

json to_json(const TreeStats& s) {
  json hist = json::object();
  for (const auto& [lo, n] : s.samples_per_leaf) hist[std::to_string(lo)] = n;
  return {{"leaf_count", s.leaf_count},
          {"min_depth", s.min_depth},
          {"max_depth", s.max_depth},
          {"samples_per_leaf", hist}};
}

EnvConfig resolve_env(const std::string& path) {
  if (path.empty()) return EnvConfig::defaults();
  require_file(path, "env config");
  EnvConfig env = load_env_config(path);
  env.validate();
  return env;
}

TeacherPolicy resolve_teacher(const std::string& spec) {
  if (spec.rfind("mlp:", 0) == 0) require_file(spec.substr(4), "teacher weights");
  return TeacherPolicy::resolve(spec);
}

Tree resolve_tree(const std::string& path) {
  if (path.empty()) throw UsageError("--tree is required");
  require_file(path, "tree file");
  return load_tree(path);
}

void check_build(const BuildConfig& b, std::size_t n_features, std::ostream& err) {
  if (!b.validate(n_features)) {
    err << "warning: min-leaf-samples " << b.min_leaf_samples << " is below n_features + 1; "
        << "leaf fits rely on the ridge term\n";
  }
}

// Collects the manifest while a command runs and writes it last.
class Run {
 public:
  Run(std::string command, const std::vector<std::string>& argv, const Common& common)
      : command_(std::move(command)), common_(common), start_(std::chrono::steady_clock::now()) {
    manifest_["command"] = command_;
    manifest_["tool_version"] = LMT_VERSION;
    manifest_["argv"] = argv;
    seed_ = resolve_seed(common.seed, seed_source_);
    manifest_["seed"] = seed_;
    manifest_["seed_source"] = seed_source_;
    manifest_["jobs"] = common.jobs;
    manifest_["config"] = json::object();
    manifest_["inputs"] = json::object();
  }

  std::uint64_t seed() const { return seed_; }
  std::size_t jobs() const { return common_.jobs; }
  Outputs& outputs() { return outputs_; }
  json& config() { return manifest_["config"]; }
  void input(const std::string& key, const std::string& path) { manifest_["inputs"][key] = path; }

  /// `out` is the primary output: a directory gets manifest.json inside, a
  /// file gets a sibling <file>.manifest.json.
  void finish(const fs::path& out, bool out_is_dir) {
    fs::path path;
    if (!common_.manifest.empty()) {
      path = common_.manifest;
    } else if (out.empty()) {
      path = "lmt-" + command_ + ".manifest.json";
    } else if (out_is_dir) {
      path = out / "manifest.json";
    } else {
      path = out;
      path += ".manifest.json";
    }
    manifest_["outputs"] = outputs_.listing();
    manifest_["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    outputs_.write(path, [&](std::ostream& os) { os << manifest_.dump(2) << '\n'; });
    outputs_.commit();
  }

 private:
  std::string command_;
  Common common_;
  std::chrono::steady_clock::time_point start_;
  json manifest_;
  std::uint64_t seed_ = 0;
  std::string seed_source_;
  Outputs outputs_;
};

// ---------------------------------------------------------------------------

struct TrainArgs {
  Common common;
  BuildConfig build;
  std::string dataset;
  std::string teacher = "scripted";
  std::size_t samples = 0;
  double contact_probability = 0.0;
  std::string out;
};

int cmd_train(const TrainArgs& a, const std::vector<std::string>& argv, std::ostream& out,
              std::ostream& err) {
  Run run("train", argv, a.common);
  BuildConfig build = a.build;
  build.seed = run.seed();

  Dataset data;
  if (!a.dataset.empty()) {
    require_file(a.dataset, "dataset");
    data = load_dataset(a.dataset);
    run.input("dataset", a.dataset);
  } else if (a.samples > 0) {
    const TeacherPolicy teacher = resolve_teacher(a.teacher);
    const FeatureBounds bounds = FeatureBounds::docking_defaults();
    Rng rng(sampling_seed(run.seed()));
    data = label(teacher, sample_random(bounds, a.samples, rng, a.contact_probability), bounds);
    run.config()["teacher"] = a.teacher;
    run.config()["samples"] = a.samples;
    run.config()["contact_probability"] = a.contact_probability;
    run.config()["bounds"] = to_json(bounds);
  } else {
    throw UsageError("train needs --dataset or --samples");
  }
  data.validate();
  check_build(build, static_cast<std::size_t>(data.X.cols()), err);
  run.config()["build"] = to_json(build);

  Tree tree = build_tree(data.X, data.Y, build);
  tree.set_input_bounds(data.bounds);
  const TreeStats stats = tree.stats();

  fs::path tree_path = a.out;
  fs::path stats_path = tree_path;
  stats_path += ".stats.json";
  run.outputs().write(tree_path, [&](std::ostream& os) { write_tree(tree, os); });
  run.outputs().write(stats_path, [&](std::ostream& os) {
    json s = to_json(stats);
    s["training_loss"] = tree.training_loss();
    s["n_samples"] = data.size();
    os << s.dump(2) << '\n';
  });
  run.finish(tree_path, false);

  out << "trained " << stats.leaf_count << " leaves on " << data.size() << " samples, depth "
      << stats.min_depth << ".." << stats.max_depth << ", loss " << format_double(tree.training_loss())
      << "\nwrote " << tree_path.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct DistillArgs {
  Common common;
  DistillConfig config;
  std::string teacher = "scripted";
  std::string env;
  std::string out;
};

int cmd_distill(const DistillArgs& a, const std::vector<std::string>& argv, std::ostream& out,
                std::ostream& err) {
  Run run("distill", argv, a.common);
  const TeacherPolicy teacher = resolve_teacher(a.teacher);
  const EnvConfig env = resolve_env(a.env);
  if (!a.env.empty()) run.input("env", a.env);
  if (a.teacher.rfind("mlp:", 0) == 0) run.input("teacher", a.teacher.substr(4));

  DistillConfig config = a.config;
  config.seed = run.seed();
  config.jobs = run.jobs();
  config.build.seed = run.seed();
  if (config.rounds == 0) throw UsageError("--rounds must be at least 1");
  check_build(config.build, kNumFeatures, err);

  json& c = run.config();
  c["teacher"] = a.teacher;
  c["initial_n"] = config.initial_n;
  c["rounds"] = config.rounds;
  c["episodes_per_round"] = config.episodes_per_round;
  c["max_steps"] = config.max_steps;
  c["contact_probability"] = config.contact_probability;
  c["build"] = to_json(config.build);
  c["bounds"] = to_json(config.bounds);
  c["env"] = to_json(env);

  const DistillResult result = distill_loop(teacher, env, config);

  const fs::path dir = a.out;
  run.outputs().make_directory(dir);
  run.outputs().write(dir / "tree.lmt", [&](std::ostream& os) { write_tree(result.tree, os); });
  run.outputs().write(dir / "dataset.csv",
                      [&](std::ostream& os) { write_dataset(result.dataset, os); });
  run.outputs().write(dir / "rounds.csv",
                      [&](std::ostream& os) { write_round_metrics(result.rounds, os); });
  run.finish(dir, true);

  for (const RoundMetrics& m : result.rounds) {
    out << "round " << m.round << ": " << m.dataset_size << " rows, " << m.leaves
        << " leaves, mse " << format_double(m.training_mse) << ", tree failures " << m.failures
        << "/" << m.episodes << ", harvested " << m.harvested_rows << '\n';
  }
  out << "wrote " << (dir / "tree.lmt").string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  Common common;
  std::string tree;
  std::string teacher = "scripted";
  std::string env;
  std::size_t episodes = 200;
  std::size_t seeds = 0;
  std::size_t max_steps = kDefaultMaxSteps;
  bool export_paths = false;
  std::string out;
};

int cmd_eval(const EvalArgs& a, const std::vector<std::string>& argv, std::ostream& out,
             std::ostream&) {
  Run run("eval", argv, a.common);
  const Tree tree = resolve_tree(a.tree);
  run.input("tree", a.tree);
  const TeacherPolicy teacher = resolve_teacher(a.teacher);
  const EnvConfig env = resolve_env(a.env);
  if (!a.env.empty()) run.input("env", a.env);
  if (a.episodes == 0 && a.seeds == 0) throw UsageError("nothing to do: --episodes and --seeds are 0");
  if (a.export_paths && a.out.empty()) throw UsageError("--export-paths needs --out");
  if (a.max_steps == 0) throw UsageError("--max-steps must be positive");

  json& c = run.config();
  c["teacher"] = a.teacher;
  c["episodes"] = a.episodes;
  c["seeds"] = a.seeds;
  c["max_steps"] = a.max_steps;
  c["env"] = to_json(env);

  const fs::path dir = a.out;
  if (!dir.empty()) run.outputs().make_directory(dir);

  if (a.episodes > 0) {
    const ErrorReport report =
        error_analysis(tree, teacher, env, a.episodes, a.max_steps, run.seed(), run.jobs());
    print_error_report(report, out);
    if (!dir.empty()) {
      run.outputs().write(dir / "errors.csv",
                          [&](std::ostream& os) { write_error_report_csv(report, os); });
    }
  }
  if (a.seeds > 0) {
    const auto starts = evaluation_seeds(run.seed(), a.seeds);
    std::vector<PathPair> paths;
    const ComparisonReport report = compare_paths(tree, teacher, env, starts, a.max_steps,
                                                  run.jobs(), a.export_paths ? &paths : nullptr);
    print_comparison(report, out);
    if (!dir.empty()) {
      run.outputs().write(dir / "comparison.csv",
                          [&](std::ostream& os) { write_comparison_csv(report, os); });
    }
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const std::string stem = "paths/start_" + std::to_string(i);
      run.outputs().write(dir / (stem + "_teacher.csv"),
                          [&](std::ostream& os) { write_trajectory_csv(paths[i].teacher, os, false); });
      run.outputs().write(dir / (stem + "_tree.csv"),
                          [&](std::ostream& os) { write_trajectory_csv(paths[i].tree, os, false); });
    }
  }
  run.finish(dir, true);
  return kExitOk;
}

// ---------------------------------------------------------------------------

StateVector parse_state(const std::string& text) {
  const auto fields = split(text, ',');
  if (fields.size() != kNumFeatures) {
    throw Error(ErrorKind::kDimensionMismatch, "state needs " + std::to_string(kNumFeatures) +
                                                   " comma-separated values, got " +
                                                   std::to_string(fields.size()));
  }
  StateVector s;
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    std::string f = fields[i];
    f.erase(std::remove_if(f.begin(), f.end(), [](unsigned char ch) { return std::isspace(ch); }),
            f.end());
    s.values[i] = parse_double(f);
  }
  return s;
}

struct ExplainArgs {
  Common common;
  std::string tree;
  std::string state;
  std::string trajectory;
  std::string out;
};

int cmd_explain(const ExplainArgs& a, const std::vector<std::string>& argv, std::ostream& out,
                std::ostream&) {
  Run run("explain", argv, a.common);
  if (a.state.empty() == a.trajectory.empty()) {
    throw UsageError("explain needs exactly one of --state or --trajectory");
  }
  const Tree tree = resolve_tree(a.tree);
  run.input("tree", a.tree);
  if (tree.n_features() != kNumFeatures) {
    throw Error(ErrorKind::kDimensionMismatch, "explain expects a tree over the 9 docking features");
  }

  if (!a.state.empty()) {
    const StateVector state = parse_state(a.state);
    run.config()["state"] = state.values;
    std::ostringstream text;
    print_explanation(tree, state, text);
    out << text.str();
    if (!a.out.empty()) run.outputs().write(a.out, [&](std::ostream& os) { os << text.str(); });
  } else {
    require_file(a.trajectory, "trajectory file");
    run.input("trajectory", a.trajectory);
    std::ifstream is(a.trajectory);
    const std::vector<StateVector> states = read_trajectory_states(is);
    const auto rows = explanation_timeline(tree, states);
    if (a.out.empty()) {
      write_timeline_csv(rows, out);
    } else {
      run.outputs().write(a.out, [&](std::ostream& os) { write_timeline_csv(rows, os); });
      out << "wrote " << rows.size() << " timeline rows to " << a.out << '\n';
    }
  }
  run.finish(a.out, false);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct RunArgs {
  Common common;
  std::string controller = "scripted";
  std::string explain_with;
  std::string env;
  std::size_t episodes = 1;
  std::size_t max_steps = kDefaultMaxSteps;
  std::string out;
};

int cmd_run(const RunArgs& a, const std::vector<std::string>& argv, std::ostream& out,
            std::ostream&) {
  Run run("run", argv, a.common);
  if (a.episodes == 0) throw UsageError("--episodes must be at least 1");
  if (a.max_steps == 0) throw UsageError("--max-steps must be positive");

  std::shared_ptr<const Tree> controller_tree;
  std::optional<TeacherPolicy> controller_teacher;
  if (a.controller.rfind("tree:", 0) == 0) {
    controller_tree = std::make_shared<const Tree>(resolve_tree(a.controller.substr(5)));
    run.input("controller", a.controller.substr(5));
  } else {
    controller_teacher.emplace(resolve_teacher(a.controller));
    if (a.controller.rfind("mlp:", 0) == 0) run.input("controller", a.controller.substr(4));
  }
  std::optional<Tree> explainer;
  if (!a.explain_with.empty()) {
    explainer.emplace(resolve_tree(a.explain_with));
    run.input("explain_with", a.explain_with);
  }
  const EnvConfig env = resolve_env(a.env);
  if (!a.env.empty()) run.input("env", a.env);
  const Controller controller =
      controller_tree ? make_controller(*controller_tree) : make_controller(*controller_teacher);

  json& c = run.config();
  c["controller"] = a.controller;
  c["episodes"] = a.episodes;
  c["max_steps"] = a.max_steps;
  c["env"] = to_json(env);

  const fs::path dir = a.out;
  run.outputs().make_directory(dir);
  std::ostringstream summary;
  summary << "episode,start_seed,outcome,steps\n";
  for (std::size_t i = 0; i < a.episodes; ++i) {
    const std::uint64_t start = episode_seed(run.seed(), i);
    DockingEnv sim(env);
    sim.reset(start);
    const Trajectory t =
        run_episode(sim, controller, a.max_steps, explainer ? &*explainer : nullptr);
    run.outputs().write(dir / ("episode_" + std::to_string(i) + ".csv"), [&](std::ostream& os) {
      write_trajectory_csv(t, os, explainer.has_value());
    });
    summary << i << ',' << start << ',' << to_string(t.outcome) << ',' << t.steps.size() << '\n';
    out << "episode " << i << ": " << to_string(t.outcome) << " after " << t.steps.size()
        << " steps\n";
  }
  run.outputs().write(dir / "outcomes.csv", [&](std::ostream& os) { os << summary.str(); });
  run.finish(dir, true);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TemplateArgs {
  Common common;
  std::string out;
};

int cmd_export_env_template(const TemplateArgs& a, const std::vector<std::string>& argv,
                            std::ostream& out, std::ostream&) {
  Run run("export-env-template", argv, a.common);
  const EnvConfig env = EnvConfig::defaults();
  run.outputs().write(a.out, [&](std::ostream& os) { write_env_config(env, os); });
  run.finish(a.out, false);
  out << "wrote " << a.out << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linear model tree distillation and explanation for vessel docking", "lmt"};
  app.require_subcommand(1);
  app.set_version_flag("--version", LMT_VERSION);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Build a tree from a dataset or fresh samples");
  add_common(train_cmd, train.common);
  add_build_flags(train_cmd, train.build);
  train_cmd->add_option("--dataset", train.dataset, "Dataset CSV");
  train_cmd->add_option("--teacher", train.teacher, "Labeling teacher when sampling")
      ->capture_default_str();
  train_cmd->add_option("--samples", train.samples, "Random samples to draw when no dataset is given");
  train_cmd->add_option("--contact-probability", train.contact_probability,
                        "Probability of contact = 1 in sampled states");
  train_cmd->add_option("--out", train.out, "Tree file")->required();

  DistillArgs distill;
  auto* distill_cmd = app.add_subcommand("distill", "Iterative distillation with failure harvesting");
  add_common(distill_cmd, distill.common);
  add_build_flags(distill_cmd, distill.config.build);
  distill_cmd->add_option("--teacher", distill.teacher, "'scripted' or 'mlp:<weights>'")
      ->capture_default_str();
  distill_cmd->add_option("--env", distill.env, "Environment config JSON");
  distill_cmd->add_option("--initial-n", distill.config.initial_n, "Initial random samples")
      ->capture_default_str();
  distill_cmd->add_option("--rounds", distill.config.rounds, "Build rounds")->capture_default_str();
  distill_cmd->add_option("--episodes-per-round", distill.config.episodes_per_round,
                          "Tree-driven episodes per harvest")
      ->capture_default_str();
  distill_cmd->add_option("--max-steps", distill.config.max_steps, "Episode truncation")
      ->capture_default_str();
  distill_cmd->add_option("--contact-probability", distill.config.contact_probability,
                          "Probability of contact = 1 in sampled states");
  distill_cmd->add_option("--out", distill.out, "Output directory")->required();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Output errors and paired outcome comparison");
  add_common(eval_cmd, eval.common);
  eval_cmd->add_option("--tree", eval.tree, "Tree file")->required();
  eval_cmd->add_option("--teacher", eval.teacher, "'scripted' or 'mlp:<weights>'")
      ->capture_default_str();
  eval_cmd->add_option("--env", eval.env, "Environment config JSON");
  eval_cmd->add_option("--episodes", eval.episodes, "Teacher-driven episodes for the error table")
      ->capture_default_str();
  eval_cmd->add_option("--seeds", eval.seeds, "Paired starts for the outcome comparison")
      ->capture_default_str();
  eval_cmd->add_option("--max-steps", eval.max_steps, "Episode truncation")->capture_default_str();
  eval_cmd->add_flag("--export-paths", eval.export_paths, "Write paired trajectories");
  eval_cmd->add_option("--out", eval.out, "Output directory for CSV reports");

  ExplainArgs explain;
  auto* explain_cmd = app.add_subcommand("explain", "Decision path and attributions");
  add_common(explain_cmd, explain.common);
  explain_cmd->add_option("--tree", explain.tree, "Tree file")->required();
  explain_cmd->add_option("--state", explain.state, "Nine comma-separated raw observation values");
  explain_cmd->add_option("--trajectory", explain.trajectory, "Trajectory CSV from `run`");
  explain_cmd->add_option("--out", explain.out, "Output file");

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Simulate episodes, optionally with a parallel explainer");
  add_common(run_cmd, run_args.common);
  run_cmd->add_option("--controller", run_args.controller,
                      "'scripted', 'mlp:<weights>' or 'tree:<file>'")
      ->capture_default_str();
  run_cmd->add_option("--explain-with", run_args.explain_with, "Tree used as explainer");
  run_cmd->add_option("--env", run_args.env, "Environment config JSON");
  run_cmd->add_option("--episodes", run_args.episodes, "Episodes to run")->capture_default_str();
  run_cmd->add_option("--max-steps", run_args.max_steps, "Episode truncation")->capture_default_str();
  run_cmd->add_option("--out", run_args.out, "Output directory")->required();

  TemplateArgs tmpl;
  auto* tmpl_cmd = app.add_subcommand("export-env-template", "Write the default environment config");
  add_common(tmpl_cmd, tmpl.common);
  tmpl_cmd->add_option("--out", tmpl.out, "Output JSON file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitFailure;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train, args, out, err);
    if (distill_cmd->parsed()) return cmd_distill(distill, args, out, err);
    if (eval_cmd->parsed()) return cmd_eval(eval, args, out, err);
    if (explain_cmd->parsed()) return cmd_explain(explain, args, out, err);
    if (run_cmd->parsed()) return cmd_run(run_args, args, out, err);
    if (tmpl_cmd->parsed()) return cmd_export_env_template(tmpl, args, out, err);
  } catch (const MissingInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitMissingInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace lmt::cli
