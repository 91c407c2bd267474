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

#include "lmt/dataset.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "lmt/io.hpp"
#include "lmt/parallel.hpp"

namespace lmt {

namespace {

constexpr std::uint64_t kSampleTag = 0x73616d706c65ULL;
constexpr std::uint64_t kBuildTag = 0x6275696c64ULL;
constexpr std::uint64_t kEpisodeTag = 0x65706973ULL;
constexpr std::uint64_t kStartTag = 0x7374617274ULL;

constexpr std::string_view kDatasetMagic = "# lmt-dataset 1";

}  // namespace

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kRandom: return "random";
    case Provenance::kEpisode: return "episode";
    case Provenance::kFailureHarvest: return "failure-harvest";
  }
  return "unknown";
}

Provenance parse_provenance(std::string_view s) {
  if (s == "random") return Provenance::kRandom;
  if (s == "episode") return Provenance::kEpisode;
  if (s == "failure-harvest") return Provenance::kFailureHarvest;
  throw Error(ErrorKind::kMalformedFile, "unknown provenance tag '" + std::string(s) + "'");
}

void Dataset::append(const Dataset& other) {
  if (other.size() == 0) return;
  if (size() == 0 && bounds.empty()) {
    *this = other;
    return;
  }
  if (!(bounds == other.bounds)) {
    throw Error(ErrorKind::kInvalidArgument, "cannot append datasets with different bounds");
  }
  if (X.cols() != other.X.cols() || Y.cols() != other.Y.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "cannot append datasets of different widths");
  }
  const Eigen::Index n = X.rows();
  X.conservativeResize(n + other.X.rows(), Eigen::NoChange);
  Y.conservativeResize(n + other.Y.rows(), Eigen::NoChange);
  X.bottomRows(other.X.rows()) = other.X;
  Y.bottomRows(other.Y.rows()) = other.Y;
  tags.insert(tags.end(), other.tags.begin(), other.tags.end());
}

void Dataset::validate() const {
  if (X.rows() != Y.rows() || static_cast<std::size_t>(X.rows()) != tags.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "dataset: X, Y and tags disagree on row count");
  }
  bounds.validate();
  if (static_cast<std::size_t>(X.cols()) != bounds.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "dataset: bounds do not match feature count");
  }
  if (!X.allFinite() || !Y.allFinite()) throw Error(ErrorKind::kNonFinite, "dataset: non-finite values");
  if (X.size() > 0 && (X.maxCoeff() > 1.0 || X.minCoeff() < -1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "dataset: normalized features outside [-1, 1]");
  }
  if (Y.size() > 0 && (Y.maxCoeff() > 1.0 || Y.minCoeff() < -1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "dataset: normalized actions outside [-1, 1]");
  }
}

Matrix sample_random(const FeatureBounds& bounds, std::size_t n, Rng& rng,
                     double contact_probability) {
  bounds.validate();
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "sample_random: n must be >= 1");
  const bool has_contact = bounds.size() == kNumFeatures;
  Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(bounds.size()));
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    for (std::size_t f = 0; f < bounds.size(); ++f) {
      double v;
      if (has_contact && f == kContactFeature) {
        v = rng.uniform() < contact_probability ? 1.0 : 0.0;
      } else {
        v = rng.uniform(bounds.lo[f], bounds.hi[f]);
      }
      X(r, static_cast<Eigen::Index>(f)) = v;
    }
  }
  return X;
}

Dataset label(const TeacherPolicy& teacher, const Matrix& raw_states, const FeatureBounds& bounds,
              Provenance tag) {
  bounds.validate();
  if (static_cast<std::size_t>(raw_states.cols()) != kNumFeatures || bounds.size() != kNumFeatures) {
    throw Error(ErrorKind::kDimensionMismatch, "label: observations must have 9 features");
  }
  if (!raw_states.allFinite()) throw Error(ErrorKind::kNonFinite, "label: non-finite observation");
  Dataset d;
  d.bounds = bounds;
  d.X.resize(raw_states.rows(), static_cast<Eigen::Index>(kNumFeatures));
  d.Y.resize(raw_states.rows(), static_cast<Eigen::Index>(kNumOutputs));
  d.tags.assign(static_cast<std::size_t>(raw_states.rows()), tag);
  for (Eigen::Index r = 0; r < raw_states.rows(); ++r) {
    StateVector s;
    for (std::size_t f = 0; f < kNumFeatures; ++f) s.values[f] = raw_states(r, static_cast<Eigen::Index>(f));
    bounds.normalize(s.values, std::span<double>(d.X.data() + r * d.X.cols(), kNumFeatures));
    const NormalizedAction a = teacher.act(s);
    for (std::size_t o = 0; o < kNumOutputs; ++o) d.Y(r, static_cast<Eigen::Index>(o)) = a[o];
  }
  return d;
}

std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t index) {
  return derive_seed(seed, {kStartTag, index});
}

HarvestResult harvest_failures(const Tree& tree, const TeacherPolicy& teacher,
                               const EnvConfig& env, std::size_t n_episodes, std::uint64_t seed,
                               std::size_t max_steps, std::size_t jobs) {
  if (tree.input_bounds().empty()) {
    throw Error(ErrorKind::kInvalidArgument, "harvest: tree carries no input bounds");
  }
  const Controller controller = make_controller(tree);
  std::vector<Trajectory> failed(n_episodes);
  std::vector<std::uint8_t> is_failure(n_episodes, 0);
  parallel_for(n_episodes, jobs, [&](std::size_t i) {
    DockingEnv world(env);
    world.reset(episode_seed(seed, i));
    Trajectory t = run_episode(world, controller, max_steps);
    if (t.outcome != Outcome::kSuccess) {
      is_failure[i] = 1;
      failed[i] = std::move(t);
    }
  });

  HarvestResult out;
  out.episodes = n_episodes;
  std::size_t rows = 0;
  for (std::size_t i = 0; i < n_episodes; ++i) {
    if (is_failure[i]) {
      ++out.failures;
      rows += failed[i].steps.size();
    }
  }
  Matrix raw(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(kNumFeatures));
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < n_episodes; ++i) {
    if (!is_failure[i]) continue;
    for (const TrajectoryStep& s : failed[i].steps) {
      for (std::size_t f = 0; f < kNumFeatures; ++f) raw(r, static_cast<Eigen::Index>(f)) = s.state.values[f];
      ++r;
    }
  }
  out.rows = label(teacher, raw, tree.input_bounds(), Provenance::kFailureHarvest);
  return out;
}

std::uint64_t sampling_seed(std::uint64_t master) { return derive_seed(master, {kSampleTag}); }
std::uint64_t round_build_seed(std::uint64_t master, std::size_t round) {
  return derive_seed(master, {kBuildTag, round});
}
std::uint64_t round_episode_seed(std::uint64_t master, std::size_t round) {
  return derive_seed(master, {kEpisodeTag, round});
}

DistillResult distill_loop(const TeacherPolicy& teacher, const EnvConfig& env,
                           const DistillConfig& config) {
  if (config.rounds < 1) throw Error(ErrorKind::kInvalidArgument, "distill: rounds must be >= 1");
  if (config.initial_n < 1) throw Error(ErrorKind::kInvalidArgument, "distill: initial_n must be >= 1");

  Rng rng(sampling_seed(config.seed));
  const Matrix raw = sample_random(config.bounds, config.initial_n, rng, config.contact_probability);

  DistillResult result;
  result.dataset = label(teacher, raw, config.bounds, Provenance::kRandom);

  for (std::size_t round = 0; round < config.rounds; ++round) {
    BuildConfig build = config.build;
    build.seed = round_build_seed(config.seed, round);
    Tree tree = build_tree(result.dataset.X, result.dataset.Y, build);
    tree.set_input_bounds(config.bounds);

    RoundMetrics m;
    m.round = round + 1;
    m.dataset_size = result.dataset.size();
    m.training_loss = tree.training_loss();
    m.training_mse = m.training_loss / static_cast<double>(m.dataset_size * kNumOutputs);
    m.leaves = tree.leaf_count();

    HarvestResult h = harvest_failures(tree, teacher, env, config.episodes_per_round,
                                       round_episode_seed(config.seed, round), config.max_steps,
                                       config.jobs);
    m.episodes = h.episodes;
    m.failures = h.failures;
    m.failure_rate = h.failure_rate();
    if (round + 1 < config.rounds) {
      m.harvested_rows = h.rows.size();
      result.dataset.append(h.rows);
    }
    result.rounds.push_back(m);
    result.tree = std::move(tree);
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV

void write_dataset(const Dataset& d, std::ostream& os) {
  d.validate();
  os << kDatasetMagic << '\n';
  os << "# bounds";
  for (std::size_t i = 0; i < d.bounds.size(); ++i) {
    os << ' ' << format_double(d.bounds.lo[i]) << ' ' << format_double(d.bounds.hi[i]);
  }
  os << '\n';
  if (static_cast<std::size_t>(d.X.cols()) != kNumFeatures ||
      static_cast<std::size_t>(d.Y.cols()) != kNumOutputs) {
    throw Error(ErrorKind::kDimensionMismatch, "dataset file holds 9 features and 5 actions");
  }
  for (auto n : kFeatureNames) os << n << ',';
  for (auto n : kActionNames) os << n << ',';
  os << "tag\n";
  for (Eigen::Index r = 0; r < d.X.rows(); ++r) {
    for (Eigen::Index c = 0; c < d.X.cols(); ++c) os << format_double(d.X(r, c)) << ',';
    for (Eigen::Index c = 0; c < d.Y.cols(); ++c) os << format_double(d.Y(r, c)) << ',';
    os << to_string(d.tags[static_cast<std::size_t>(r)]) << '\n';
  }
}

Dataset read_dataset(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  auto fail = [&](const std::string& msg) -> Error {
    return Error(ErrorKind::kMalformedFile, "dataset line " + std::to_string(line_no) + ": " + msg);
  };

  if (!next_line() || line != kDatasetMagic) throw fail("missing '# lmt-dataset 1' header");
  if (!next_line() || line.rfind("# bounds", 0) != 0) throw fail("missing '# bounds' line");
  Dataset d;
  {
    std::istringstream ss(line.substr(8));
    std::vector<double> vals;
    for (std::string tok; ss >> tok;) vals.push_back(parse_double(tok));
    if (vals.size() != 2 * kNumFeatures) {
      throw Error(ErrorKind::kDimensionMismatch, "dataset: bounds line needs 9 lo/hi pairs");
    }
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      d.bounds.lo.push_back(vals[2 * i]);
      d.bounds.hi.push_back(vals[2 * i + 1]);
    }
  }
  if (!next_line()) throw fail("missing column header");
  const auto header = split(line, ',');
  if (header.size() != kNumFeatures + kNumOutputs + 1) {
    throw Error(ErrorKind::kDimensionMismatch,
                "dataset: expected 9 feature, 5 action and 1 tag column, found " +
                    std::to_string(header.size()) + " columns");
  }
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    if (header[i] != kFeatureNames[i]) throw fail("unexpected feature column '" + header[i] + "'");
  }
  for (std::size_t i = 0; i < kNumOutputs; ++i) {
    if (header[kNumFeatures + i] != kActionNames[i]) throw fail("unexpected action column '" + header[kNumFeatures + i] + "'");
  }
  if (header.back() != "tag") throw fail("last column must be 'tag'");

  std::vector<double> xs, ys;
  while (next_line()) {
    const auto fields = split(line, ',');
    if (fields.size() != header.size()) throw fail("wrong number of columns");
    for (std::size_t i = 0; i < kNumFeatures; ++i) xs.push_back(parse_double(fields[i]));
    for (std::size_t i = 0; i < kNumOutputs; ++i) ys.push_back(parse_double(fields[kNumFeatures + i]));
    d.tags.push_back(parse_provenance(fields.back()));
  }
  const auto n = static_cast<Eigen::Index>(d.tags.size());
  d.X = Eigen::Map<Matrix>(xs.data(), n, static_cast<Eigen::Index>(kNumFeatures));
  d.Y = Eigen::Map<Matrix>(ys.data(), n, static_cast<Eigen::Index>(kNumOutputs));
  d.validate();
  return d;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  write_text_file_atomic(path, [&](std::ostream& os) { write_dataset(data, os); });
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIo, "cannot open dataset " + path.string());
  return read_dataset(is);
}

void write_round_metrics(const std::vector<RoundMetrics>& rounds, std::ostream& os) {
  os << "round,dataset_size,training_loss,training_mse,leaves,episodes,failures,failure_rate,"
        "harvested_rows\n";
  for (const RoundMetrics& m : rounds) {
    os << m.round << ',' << m.dataset_size << ',' << format_double(m.training_loss) << ','
       << format_double(m.training_mse) << ',' << m.leaves << ',' << m.episodes << ','
       << m.failures << ',' << format_double(m.failure_rate) << ',' << m.harvested_rows << '\n';
  }
}

}  // namespace lmt
