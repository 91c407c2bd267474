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

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lmt/docking_env.hpp"
#include "lmt/teacher.hpp"
#include "lmt/tree.hpp"

namespace lmt {

struct OutputError {
  double mae = 0.0;             // physical units
  double std = 0.0;             // of per-step absolute errors, physical units
  double mae_normalized = 0.0;  // same statistic on normalized outputs
  double mae_percent = 0.0;     // of the full output span
  double std_percent = 0.0;
};

struct ErrorReport {
  std::array<OutputError, kNumOutputs> outputs{};
  std::size_t n_samples = 0;
  std::size_t episodes = 0;
};

/// Teacher drives every episode; at each visited state the tree is queried
/// on the same observation and |tree - teacher| is accumulated per output.
ErrorReport error_analysis(const Tree& tree, const TeacherPolicy& teacher, const EnvConfig& env,
                           std::size_t n_episodes, std::size_t max_steps = kDefaultMaxSteps,
                           std::uint64_t seed = 0, std::size_t jobs = 1);

struct PairedOutcome {
  std::uint64_t start_seed = 0;
  Outcome teacher = Outcome::kTimeout;
  Outcome tree = Outcome::kTimeout;
  std::size_t teacher_steps = 0;
  std::size_t tree_steps = 0;
};

struct ComparisonReport {
  std::vector<PairedOutcome> pairs;
  double teacher_success_percent = 0.0;
  double tree_success_percent = 0.0;
  double teacher_failure_percent = 0.0;
  double tree_failure_percent = 0.0;
  double failure_gap = 0.0;  // tree - teacher, percentage points
};

struct PathPair {
  Trajectory teacher;
  Trajectory tree;
};

/// One teacher and one tree episode per start seed. Trajectories are kept
/// in `paths` (seed order) when it is non-null.
ComparisonReport compare_paths(const Tree& tree, const TeacherPolicy& teacher, const EnvConfig& env,
                               std::span<const std::uint64_t> start_seeds,
                               std::size_t max_steps = kDefaultMaxSteps, std::size_t jobs = 1,
                               std::vector<PathPair>* paths = nullptr);

/// Start seeds used by evaluation commands: episode_seed(seed, 0..n-1).
std::vector<std::uint64_t> evaluation_seeds(std::uint64_t seed, std::size_t n);

struct TimelineRow {
  std::size_t step = 0;
  NodeId leaf_id = -1;
  std::vector<PathStep> path;
  Attribution attribution;
  Vector intercept;  // leaf constant term, not part of the attribution
};

std::vector<TimelineRow> explanation_timeline(const Tree& tree, std::span<const StateVector> states);
std::vector<TimelineRow> explanation_timeline(const Tree& tree, const Trajectory& trajectory);

/// "x_rel<=0.25;u>-0.1" style rendering of a decision path.
std::string format_path(std::span<const PathStep> path);

struct LatencySummary {
  std::size_t queries = 0;
  double mean_us = 0.0;
  double p99_us = 0.0;
};

/// Wall clock per predict + explain call on uniform random normalized inputs.
LatencySummary latency_benchmark(const Tree& tree, std::size_t n_queries, std::uint64_t seed = 0);

void print_error_report(const ErrorReport& report, std::ostream& os);
void write_error_report_csv(const ErrorReport& report, std::ostream& os);
void print_comparison(const ComparisonReport& report, std::ostream& os);
void write_comparison_csv(const ComparisonReport& report, std::ostream& os);
void write_timeline_csv(std::span<const TimelineRow> rows, std::ostream& os);
void print_explanation(const Tree& tree, const StateVector& state, std::ostream& os);

}  // namespace lmt
