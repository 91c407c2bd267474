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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "lmt/docking_env.hpp"
#include "lmt/features.hpp"
#include "lmt/random.hpp"
#include "lmt/teacher.hpp"
#include "lmt/tree.hpp"

namespace lmt {

enum class Provenance : std::uint8_t { kRandom, kEpisode, kFailureHarvest };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view s);

/// Normalized distillation data: X holds observations mapped into [-1, 1]
/// with `bounds`, Y the teacher's normalized actions.
struct Dataset {
  Matrix X;
  Matrix Y;
  FeatureBounds bounds;
  std::vector<Provenance> tags;

  std::size_t size() const { return static_cast<std::size_t>(X.rows()); }
  /// Appends rows; bounds must match.
  void append(const Dataset& other);
  /// Throws on inconsistent shapes, non-finite or out-of-range values.
  void validate() const;
};

/// Index of the binary contact flag in the observation.
inline constexpr std::size_t kContactFeature = 6;

/// n uniform draws inside `bounds` (raw units). For 9-feature bounds the
/// contact flag is drawn from {0, 1} with `contact_probability`.
Matrix sample_random(const FeatureBounds& bounds, std::size_t n, Rng& rng,
                     double contact_probability = 0.0);

/// Y[i] = teacher(X[i]) on raw observations; X is stored normalized.
Dataset label(const TeacherPolicy& teacher, const Matrix& raw_states, const FeatureBounds& bounds,
              Provenance tag = Provenance::kRandom);

struct HarvestResult {
  Dataset rows;
  std::size_t episodes = 0;
  std::size_t failures = 0;
  double failure_rate() const {
    return episodes == 0 ? 0.0 : static_cast<double>(failures) / static_cast<double>(episodes);
  }
};

/// Seed of the i-th episode start in a harvest/evaluation batch.
std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t index);

/// Runs `n_episodes` with the tree in control from seeded starts. Every
/// state visited in an episode that ends in contact or timeout is labeled by
/// the teacher and returned tagged failure-harvest.
HarvestResult harvest_failures(const Tree& tree, const TeacherPolicy& teacher,
                               const EnvConfig& env, std::size_t n_episodes, std::uint64_t seed,
                               std::size_t max_steps = kDefaultMaxSteps, std::size_t jobs = 1);

struct DistillConfig {
  std::size_t initial_n = 200000;
  std::size_t rounds = 3;
  std::size_t episodes_per_round = 200;
  std::size_t max_steps = kDefaultMaxSteps;
  BuildConfig build;
  FeatureBounds bounds = FeatureBounds::docking_defaults();
  double contact_probability = 0.0;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

struct RoundMetrics {
  std::size_t round = 0;
  std::size_t dataset_size = 0;
  double training_loss = 0.0;  // sum of leaf SSE
  double training_mse = 0.0;   // per sample and output
  std::size_t leaves = 0;
  std::size_t episodes = 0;
  std::size_t failures = 0;
  double failure_rate = 0.0;
  std::size_t harvested_rows = 0;
};

struct DistillResult {
  Tree tree;
  Dataset dataset;
  std::vector<RoundMetrics> rounds;
};

/// Seeds used by distill_loop, exposed so runs can be replayed piecewise.
std::uint64_t sampling_seed(std::uint64_t master);
std::uint64_t round_build_seed(std::uint64_t master, std::size_t round);
std::uint64_t round_episode_seed(std::uint64_t master, std::size_t round);

/// Random sample + label + build, then per round: run the tree, harvest
/// failed episodes, append, rebuild. Earlier rows are never modified.
DistillResult distill_loop(const TeacherPolicy& teacher, const EnvConfig& env,
                           const DistillConfig& config);

void write_dataset(const Dataset& data, std::ostream& os);
Dataset read_dataset(std::istream& is);
void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

void write_round_metrics(const std::vector<RoundMetrics>& rounds, std::ostream& os);

}  // namespace lmt
