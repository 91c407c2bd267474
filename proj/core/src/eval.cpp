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

#include "lmt/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "lmt/dataset.hpp"
#include "lmt/parallel.hpp"
#include "lmt/random.hpp"

namespace lmt {

namespace {

double percent(std::size_t count, std::size_t total) {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(total);
}

// Keeps benchmarked calls observable to the optimizer.
volatile double latency_sink = 0.0;

}  // namespace

ErrorReport error_analysis(const Tree& tree, const TeacherPolicy& teacher, const EnvConfig& env,
                           std::size_t n_episodes, std::size_t max_steps, std::uint64_t seed,
                           std::size_t jobs) {
  if (n_episodes < 1) throw Error(ErrorKind::kInvalidArgument, "error_analysis: n_episodes must be >= 1");
  const Controller teacher_ctl = make_controller(teacher);
  const Controller tree_ctl = make_controller(tree);

  // Normalized absolute errors per episode, kept in seed order so the
  // reduction below is independent of scheduling.
  std::vector<std::vector<NormalizedAction>> errors(n_episodes);
  parallel_for(n_episodes, jobs, [&](std::size_t i) {
    DockingEnv world(env);
    world.reset(episode_seed(seed, i));
    const Trajectory t = run_episode(world, teacher_ctl, max_steps);
    auto& out = errors[i];
    out.reserve(t.steps.size());
    for (const TrajectoryStep& s : t.steps) {
      const NormalizedAction student = tree_ctl(s.state);
      NormalizedAction e{};
      for (std::size_t o = 0; o < kNumOutputs; ++o) e[o] = std::abs(student[o] - s.action[o]);
      out.push_back(e);
    }
  });

  ErrorReport r;
  r.episodes = n_episodes;
  std::array<double, kNumOutputs> sum{};
  for (const auto& ep : errors) {
    r.n_samples += ep.size();
    for (const auto& e : ep) {
      for (std::size_t o = 0; o < kNumOutputs; ++o) sum[o] += e[o];
    }
  }
  if (r.n_samples == 0) return r;
  const double n = static_cast<double>(r.n_samples);
  for (std::size_t o = 0; o < kNumOutputs; ++o) {
    const double half = 0.5 * kActionRanges[o].span();
    const double mean = sum[o] / n;
    double ss = 0.0;
    for (const auto& ep : errors) {
      for (const auto& e : ep) ss += (e[o] - mean) * (e[o] - mean);
    }
    OutputError& oe = r.outputs[o];
    oe.mae_normalized = mean;
    oe.mae = mean * half;
    oe.std = std::sqrt(ss / n) * half;
    oe.mae_percent = 100.0 * oe.mae / kActionRanges[o].span();
    oe.std_percent = 100.0 * oe.std / kActionRanges[o].span();
  }
  return r;
}

std::vector<std::uint64_t> evaluation_seeds(std::uint64_t seed, std::size_t n) {
  std::vector<std::uint64_t> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = episode_seed(seed, i);
  return s;
}

ComparisonReport compare_paths(const Tree& tree, const TeacherPolicy& teacher, const EnvConfig& env,
                               std::span<const std::uint64_t> start_seeds, std::size_t max_steps,
                               std::size_t jobs, std::vector<PathPair>* paths) {
  if (start_seeds.empty()) throw Error(ErrorKind::kInvalidArgument, "compare_paths: no start seeds");
  const Controller teacher_ctl = make_controller(teacher);
  const Controller tree_ctl = make_controller(tree);
  const std::size_t n = start_seeds.size();

  std::vector<PathPair> runs(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    DockingEnv a(env);
    a.reset(start_seeds[i]);
    runs[i].teacher = run_episode(a, teacher_ctl, max_steps);
    DockingEnv b(env);
    b.reset(start_seeds[i]);
    runs[i].tree = run_episode(b, tree_ctl, max_steps);
  });

  ComparisonReport r;
  std::size_t teacher_ok = 0;
  std::size_t tree_ok = 0;
  for (std::size_t i = 0; i < n; ++i) {
    PairedOutcome p;
    p.start_seed = start_seeds[i];
    p.teacher = runs[i].teacher.outcome;
    p.tree = runs[i].tree.outcome;
    p.teacher_steps = runs[i].teacher.steps.size();
    p.tree_steps = runs[i].tree.steps.size();
    teacher_ok += p.teacher == Outcome::kSuccess;
    tree_ok += p.tree == Outcome::kSuccess;
    r.pairs.push_back(p);
  }
  r.teacher_success_percent = percent(teacher_ok, n);
  r.tree_success_percent = percent(tree_ok, n);
  r.teacher_failure_percent = percent(n - teacher_ok, n);
  r.tree_failure_percent = percent(n - tree_ok, n);
  r.failure_gap = r.tree_failure_percent - r.teacher_failure_percent;
  if (paths != nullptr) *paths = std::move(runs);
  return r;
}

std::vector<TimelineRow> explanation_timeline(const Tree& tree, std::span<const StateVector> states) {
  if (states.empty()) throw Error(ErrorKind::kInvalidArgument, "explanation_timeline: empty trajectory");
  std::vector<TimelineRow> rows;
  rows.reserve(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    std::array<double, kNumFeatures> x = states[k].values;
    if (!tree.input_bounds().empty()) tree.input_bounds().normalize(states[k].values, x);
    Explanation e = tree.explain(x);
    rows.push_back({k, e.leaf_id, std::move(e.path), std::move(e.attribution),
                    tree.leaf(e.leaf_id).model.intercepts});
  }
  return rows;
}

std::vector<TimelineRow> explanation_timeline(const Tree& tree, const Trajectory& trajectory) {
  std::vector<StateVector> states;
  states.reserve(trajectory.steps.size());
  for (const TrajectoryStep& s : trajectory.steps) states.push_back(s.state);
  auto rows = explanation_timeline(tree, states);
  for (std::size_t k = 0; k < rows.size(); ++k) rows[k].step = trajectory.steps[k].step;
  return rows;
}

std::string format_path(std::span<const PathStep> path) {
  std::string out;
  for (const PathStep& p : path) {
    if (!out.empty()) out += ';';
    out += p.feature_index < kNumFeatures ? std::string(kFeatureNames[p.feature_index])
                                          : "x" + std::to_string(p.feature_index);
    out += p.went_left ? "<=" : ">";
    out += format_double(p.threshold);
  }
  return out;
}

LatencySummary latency_benchmark(const Tree& tree, std::size_t n_queries, std::uint64_t seed) {
  if (n_queries < 1000) throw Error(ErrorKind::kInvalidArgument, "latency_benchmark: need >= 1000 queries");
  const std::size_t p = tree.n_features();
  Rng rng(seed);
  std::vector<double> inputs(n_queries * p);
  for (double& v : inputs) v = rng.uniform(-1.0, 1.0);

  std::vector<double> times(n_queries);
  std::vector<double> out(tree.n_outputs());
  double sink = 0.0;
  using clock = std::chrono::steady_clock;
  for (std::size_t i = 0; i < n_queries; ++i) {
    const std::span<const double> x(inputs.data() + i * p, p);
    const auto t0 = clock::now();
    tree.predict(x, out);
    const Explanation e = tree.explain(x);
    const auto t1 = clock::now();
    sink += out[0] + e.attribution.relative_importance(0, 0);
    times[i] = std::chrono::duration<double, std::micro>(t1 - t0).count();
  }
  latency_sink = sink;

  LatencySummary s;
  s.queries = n_queries;
  double total = 0.0;
  for (double t : times) total += t;
  s.mean_us = total / static_cast<double>(n_queries);
  const std::size_t k = std::min(n_queries - 1, (n_queries * 99) / 100);
  std::nth_element(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(k), times.end());
  s.p99_us = times[k];
  return s;
}

// ---------------------------------------------------------------------------
// Reports

void print_error_report(const ErrorReport& r, std::ostream& os) {
  os << "Output error analysis (" << r.episodes << " episodes, " << r.n_samples << " states)\n";
  os << std::left << std::setw(8) << "output" << std::right << std::setw(12) << "MAE"
     << std::setw(10) << "MAE %" << std::setw(12) << "std" << std::setw(10) << "std %"
     << "  unit\n";
  for (std::size_t o = 0; o < kNumOutputs; ++o) {
    const OutputError& e = r.outputs[o];
    os << std::left << std::setw(8) << kActionNames[o] << std::right << std::fixed
       << std::setprecision(3) << std::setw(12) << e.mae << std::setw(10) << e.mae_percent
       << std::setw(12) << e.std << std::setw(10) << e.std_percent << "  "
       << (o < 3 ? "kN" : "deg") << '\n';
  }
  os.unsetf(std::ios::floatfield);
}

void write_error_report_csv(const ErrorReport& r, std::ostream& os) {
  os << "output,mae,std,mae_percent,std_percent,mae_normalized,n_samples,episodes\n";
  for (std::size_t o = 0; o < kNumOutputs; ++o) {
    const OutputError& e = r.outputs[o];
    os << kActionNames[o] << ',' << format_double(e.mae) << ',' << format_double(e.std) << ','
       << format_double(e.mae_percent) << ',' << format_double(e.std_percent) << ','
       << format_double(e.mae_normalized) << ',' << r.n_samples << ',' << r.episodes << '\n';
  }
}

void print_comparison(const ComparisonReport& r, std::ostream& os) {
  os << "Paired starts: " << r.pairs.size() << '\n' << std::fixed << std::setprecision(1);
  os << "  teacher success " << r.teacher_success_percent << "%  failure "
     << r.teacher_failure_percent << "%\n";
  os << "  tree    success " << r.tree_success_percent << "%  failure " << r.tree_failure_percent
     << "%\n";
  os << "  failure gap (tree - teacher): " << r.failure_gap << " pp\n";
  os.unsetf(std::ios::floatfield);
}

void write_comparison_csv(const ComparisonReport& r, std::ostream& os) {
  os << "start_seed,teacher_outcome,teacher_steps,tree_outcome,tree_steps\n";
  for (const PairedOutcome& p : r.pairs) {
    os << p.start_seed << ',' << to_string(p.teacher) << ',' << p.teacher_steps << ','
       << to_string(p.tree) << ',' << p.tree_steps << '\n';
  }
}

void write_timeline_csv(std::span<const TimelineRow> rows, std::ostream& os) {
  os << "step,leaf_id,path";
  for (auto out : kActionNames) {
    for (auto feat : kFeatureNames) os << ",I_" << out << '_' << feat;
  }
  for (auto out : kActionNames) os << ",degenerate_" << out;
  for (auto out : kActionNames) os << ",C_" << out;
  os << '\n';
  for (const TimelineRow& row : rows) {
    os << row.step << ',' << row.leaf_id << ',' << format_path(row.path);
    const Matrix& I = row.attribution.relative_importance;
    for (Eigen::Index o = 0; o < I.rows(); ++o) {
      for (Eigen::Index f = 0; f < I.cols(); ++f) os << ',' << format_double(I(o, f));
    }
    for (std::uint8_t d : row.attribution.degenerate) os << ',' << int{d};
    for (Eigen::Index o = 0; o < row.intercept.size(); ++o) os << ',' << format_double(row.intercept(o));
    os << '\n';
  }
}

void print_explanation(const Tree& tree, const StateVector& state, std::ostream& os) {
  std::array<double, kNumFeatures> x = state.values;
  if (!tree.input_bounds().empty()) tree.input_bounds().normalize(state.values, x);
  const Explanation e = tree.explain(x);
  std::array<double, kNumOutputs> clamped{};
  tree.predict(x, clamped);
  const PhysicalAction phys = scale_action(clamped);

  os << "leaf " << e.leaf_id << "\npath:";
  if (e.path.empty()) os << " (root leaf)";
  os << '\n';
  for (const PathStep& p : e.path) {
    os << "  " << kFeatureNames[p.feature_index] << (p.went_left ? " <= " : " > ")
       << format_double(p.threshold) << '\n';
  }
  os << "action:";
  const auto a = phys.as_array();
  for (std::size_t o = 0; o < kNumOutputs; ++o) os << ' ' << kActionNames[o] << '=' << format_double(a[o]);
  os << "\nattribution (signed, rows: outputs, columns: features)\n";
  os << std::setw(8) << "";
  for (auto f : kFeatureNames) os << std::setw(10) << f;
  os << std::setw(11) << "intercept" << '\n' << std::fixed << std::setprecision(4);
  const Matrix& I = e.attribution.relative_importance;
  for (Eigen::Index o = 0; o < I.rows(); ++o) {
    os << std::left << std::setw(8) << kActionNames[static_cast<std::size_t>(o)] << std::right;
    for (Eigen::Index f = 0; f < I.cols(); ++f) os << std::setw(10) << I(o, f);
    os << std::setw(11) << tree.leaf(e.leaf_id).model.intercepts(o);
    if (e.attribution.is_degenerate(static_cast<std::size_t>(o))) os << "  (degenerate)";
    os << '\n';
  }
  os.unsetf(std::ios::floatfield);
}

}  // namespace lmt
