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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "lmt/features.hpp"
#include "lmt/linear_leaf.hpp"

namespace lmt {

using NodeId = std::int32_t;

struct BuildConfig {
  std::size_t max_leaves = 681;
  std::size_t min_leaf_samples = 50;
  std::size_t grid_size = 10;
  double randomization_amplitude = 0.02;
  double ridge = 1e-6;
  std::uint64_t seed = 0;

  /// Throws kInvalidArgument on out-of-range fields. Returns false when
  /// min_leaf_samples is below n_features + 1 (legal, but leaves are then
  /// fitted on rank-deficient data).
  bool validate(std::size_t n_features) const;

  friend bool operator==(const BuildConfig&, const BuildConfig&) = default;
};

struct SplitCandidate {
  std::size_t feature_index = 0;
  double threshold = 0.0;
  double improvement = 0.0;  // parent loss - (left loss + right loss)
  std::size_t left_count = 0;
  std::size_t right_count = 0;
};

struct BranchNode {
  std::size_t feature_index = 0;
  double threshold = 0.0;
  NodeId left = -1;
  NodeId right = -1;
  std::size_t depth = 0;
};

struct LeafNode {
  LeafModel model;
  std::size_t n_samples = 0;
  std::size_t depth = 0;
  double training_loss = 0.0;
  std::optional<SplitCandidate> best_candidate;
};

using TreeNode = std::variant<BranchNode, LeafNode>;

struct PathStep {
  std::size_t feature_index;
  double threshold;
  bool went_left;
};

struct Explanation {
  NodeId leaf_id = -1;
  std::vector<PathStep> path;
  Attribution attribution;
  Vector raw_output;  // unclamped leaf prediction
};

struct TreeStats {
  std::size_t leaf_count = 0;
  std::size_t min_depth = 0;
  std::size_t max_depth = 0;
  /// Leaves per power-of-two sample-count bucket, keyed by bucket lower bound.
  std::map<std::size_t, std::size_t> samples_per_leaf;
};

/// Binary tree with univariate `x[f] <= t` routing and a linear model in
/// every leaf. Features are whatever the tree was trained on; for the docking
/// task those are normalized observations and `input_bounds` records the box
/// used to normalize them.
class Tree {
 public:
  Tree() = default;
  Tree(std::vector<TreeNode> nodes, NodeId root, std::size_t n_features, std::size_t n_outputs,
       BuildConfig config);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  NodeId root() const { return root_; }
  std::size_t n_features() const { return n_features_; }
  std::size_t n_outputs() const { return n_outputs_; }
  const BuildConfig& config() const { return config_; }
  std::uint64_t seed() const { return config_.seed; }

  const FeatureBounds& input_bounds() const { return input_bounds_; }
  void set_input_bounds(FeatureBounds bounds);

  std::size_t leaf_count() const;
  std::vector<NodeId> leaf_ids() const;
  const LeafNode& leaf(NodeId id) const;

  NodeId find_leaf(std::span<const double> x) const;

  /// Routed leaf prediction clamped to [-1, 1].
  void predict(std::span<const double> x, std::span<double> out) const;
  Vector predict(std::span<const double> x) const;
  Matrix predict(const Matrix& X) const;

  /// Decision path and attribution of the unclamped leaf output.
  Explanation explain(std::span<const double> x) const;

  TreeStats stats() const;

  /// Sum of the cached leaf training losses.
  double training_loss() const;

 private:
  void check_input(std::span<const double> x) const;

  std::vector<TreeNode> nodes_;
  NodeId root_ = -1;
  std::size_t n_features_ = 0;
  std::size_t n_outputs_ = 0;
  BuildConfig config_;
  FeatureBounds input_bounds_;
};

/// Counter-addressed random offsets for one node's threshold grid, so every
/// (feature, grid index) gets a fixed draw regardless of evaluation order.
struct ThresholdStream {
  std::uint64_t seed = 0;
  std::uint64_t node_key = 0;

  double offset(std::size_t feature, std::size_t grid_index, double amplitude) const;
};

/// t_n = min + (n + r_n) (max - min) / grid_size for n = 0..grid_size, each r_n
/// uniform in [-amplitude, amplitude]. Empty when the feature is constant.
std::vector<double> candidate_thresholds(std::span<const double> feature_values,
                                         std::size_t grid_size, double amplitude,
                                         const ThresholdStream& rng, std::size_t feature_index = 0);

/// Best split of the node holding all rows of X/Y, or nullopt when the node
/// has fewer than 2M samples or no valid partition improves its loss.
std::optional<SplitCandidate> find_best_split(const Matrix& X, const Matrix& Y,
                                              const BuildConfig& config,
                                              const ThresholdStream& rng);

/// Same search over a subset of rows; `parent_loss` is the node's own loss.
std::optional<SplitCandidate> find_best_split(const Matrix& X, const Matrix& Y,
                                              std::span<const std::int64_t> rows,
                                              double parent_loss, const BuildConfig& config,
                                              const ThresholdStream& rng);

struct FrontierEntry {
  NodeId node = -1;
  double improvement = 0.0;
};

/// argmax over the frontier of (1 + r) * improvement with r uniform in
/// [-amplitude, amplitude] drawn per node; ties go to the lowest node id.
NodeId select_next_node(std::span<const FrontierEntry> frontier, double amplitude,
                        std::uint64_t seed, std::uint64_t iteration);

/// Total training loss after the initial fit and after each split.
struct BuildTrace {
  std::vector<double> total_loss;
};

Tree build_tree(const Matrix& X, const Matrix& Y, const BuildConfig& config,
                BuildTrace* trace = nullptr);

// Text serialization. Layout is documented in docs/file_formats.md.
void write_tree(const Tree& tree, std::ostream& os);
Tree read_tree(std::istream& is);
void save_tree(const Tree& tree, const std::filesystem::path& path);
Tree load_tree(const std::filesystem::path& path);
/// Loads and checks the tree against the expected task dimensions.
Tree load_tree(const std::filesystem::path& path, std::size_t n_features, std::size_t n_outputs);

}  // namespace lmt
