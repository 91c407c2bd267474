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

#include "lmt/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

#include "lmt/random.hpp"

namespace lmt {

namespace {

constexpr std::uint64_t kThresholdTag = 0x7468726573686f6cULL;
constexpr std::uint64_t kSelectTag = 0x73656c6563746e64ULL;
// Number of stats-scored candidates re-scored on the actual partitions.
constexpr std::size_t kMaxRescored = 16;

bool improves(double improvement, double parent_loss) {
  return improvement > 1e-12 * (parent_loss + 1.0);
}

}  // namespace

bool BuildConfig::validate(std::size_t n_features) const {
  if (max_leaves < 1) throw Error(ErrorKind::kInvalidArgument, "max_leaves must be >= 1");
  if (min_leaf_samples < 1) throw Error(ErrorKind::kInvalidArgument, "min_leaf_samples must be >= 1");
  if (grid_size < 1) throw Error(ErrorKind::kInvalidArgument, "grid_size must be >= 1");
  if (!(randomization_amplitude >= 0.0 && randomization_amplitude < 0.5)) {
    throw Error(ErrorKind::kInvalidArgument, "randomization_amplitude must be in [0, 0.5)");
  }
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
    throw Error(ErrorKind::kInvalidArgument, "ridge must be finite and non-negative");
  }
  return min_leaf_samples >= n_features + 1;
}

// ---------------------------------------------------------------------------
// Tree queries

Tree::Tree(std::vector<TreeNode> nodes, NodeId root, std::size_t n_features,
           std::size_t n_outputs, BuildConfig config)
    : nodes_(std::move(nodes)),
      root_(root),
      n_features_(n_features),
      n_outputs_(n_outputs),
      config_(config) {}

void Tree::set_input_bounds(FeatureBounds bounds) {
  if (!bounds.empty()) {
    bounds.validate();
    if (bounds.size() != n_features_) {
      throw Error(ErrorKind::kDimensionMismatch, "input bounds do not match tree feature count");
    }
  }
  input_bounds_ = std::move(bounds);
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) {
    return std::holds_alternative<LeafNode>(n);
  }));
}

std::vector<NodeId> Tree::leaf_ids() const {
  std::vector<NodeId> ids;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (std::holds_alternative<LeafNode>(nodes_[i])) ids.push_back(static_cast<NodeId>(i));
  }
  return ids;
}

const LeafNode& Tree::leaf(NodeId id) const {
  const auto* leaf = std::get_if<LeafNode>(&nodes_.at(static_cast<std::size_t>(id)));
  if (leaf == nullptr) throw Error(ErrorKind::kInvalidArgument, "node is not a leaf");
  return *leaf;
}

void Tree::check_input(std::span<const double> x) const {
  if (x.size() != n_features_) {
    throw Error(ErrorKind::kDimensionMismatch, "tree expects " + std::to_string(n_features_) +
                                                   " features, got " + std::to_string(x.size()));
  }
}

NodeId Tree::find_leaf(std::span<const double> x) const {
  check_input(x);
  NodeId id = root_;
  while (const auto* b = std::get_if<BranchNode>(&nodes_[static_cast<std::size_t>(id)])) {
    id = x[b->feature_index] <= b->threshold ? b->left : b->right;
  }
  return id;
}

void Tree::predict(std::span<const double> x, std::span<double> out) const {
  const LeafNode& l = leaf(find_leaf(x));
  predict_leaf(l.model, x, out);
  for (double& v : out) v = std::clamp(v, -1.0, 1.0);
}

Vector Tree::predict(std::span<const double> x) const {
  Vector out(static_cast<Eigen::Index>(n_outputs_));
  predict(x, std::span<double>(out.data(), n_outputs_));
  return out;
}

Matrix Tree::predict(const Matrix& X) const {
  Matrix out(X.rows(), static_cast<Eigen::Index>(n_outputs_));
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    predict(row_span(X, r), std::span<double>(out.data() + r * out.cols(), n_outputs_));
  }
  return out;
}

Explanation Tree::explain(std::span<const double> x) const {
  check_input(x);
  Explanation e;
  NodeId id = root_;
  while (const auto* b = std::get_if<BranchNode>(&nodes_[static_cast<std::size_t>(id)])) {
    const bool left = x[b->feature_index] <= b->threshold;
    e.path.push_back({b->feature_index, b->threshold, left});
    id = left ? b->left : b->right;
  }
  e.leaf_id = id;
  const LeafNode& l = leaf(id);
  e.raw_output = predict_leaf(l.model, x);
  e.attribution = attribute(l.model, x);
  return e;
}

TreeStats Tree::stats() const {
  TreeStats s;
  s.min_depth = std::numeric_limits<std::size_t>::max();
  for (const TreeNode& n : nodes_) {
    const auto* l = std::get_if<LeafNode>(&n);
    if (l == nullptr) continue;
    ++s.leaf_count;
    s.min_depth = std::min(s.min_depth, l->depth);
    s.max_depth = std::max(s.max_depth, l->depth);
    std::size_t bucket = 1;
    while (bucket * 2 <= l->n_samples) bucket *= 2;
    ++s.samples_per_leaf[l->n_samples == 0 ? 0 : bucket];
  }
  if (s.leaf_count == 0) s.min_depth = 0;
  return s;
}

double Tree::training_loss() const {
  double total = 0.0;
  for (const TreeNode& n : nodes_) {
    if (const auto* l = std::get_if<LeafNode>(&n)) total += l->training_loss;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Split search

double ThresholdStream::offset(std::size_t feature, std::size_t grid_index,
                               double amplitude) const {
  return counter_uniform(seed, {kThresholdTag, node_key, feature, grid_index}, amplitude);
}

std::vector<double> candidate_thresholds(std::span<const double> feature_values,
                                         std::size_t grid_size, double amplitude,
                                         const ThresholdStream& rng, std::size_t feature_index) {
  if (feature_values.empty() || grid_size == 0) return {};
  const auto [lo_it, hi_it] = std::minmax_element(feature_values.begin(), feature_values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) return {};
  const double range = hi - lo;
  std::vector<double> out(grid_size + 1);
  for (std::size_t n = 0; n <= grid_size; ++n) {
    const double r = rng.offset(feature_index, n, amplitude);
    out[n] = lo + (static_cast<double>(n) + r) * range / static_cast<double>(grid_size);
  }
  return out;
}

namespace {

struct ScoredSplit {
  std::size_t feature;
  std::size_t grid_index;
  double threshold;
  double score;  // left + right loss
  std::size_t left_count;
  std::size_t right_count;
};

bool lexicographically_before(const ScoredSplit& a, const ScoredSplit& b) {
  return std::tie(a.feature, a.threshold) < std::tie(b.feature, b.threshold);
}

void partition_rows(const Matrix& X, std::span<const std::int64_t> rows, std::size_t feature,
                    double threshold, std::vector<std::int64_t>& left,
                    std::vector<std::int64_t>& right) {
  left.clear();
  right.clear();
  const auto f = static_cast<Eigen::Index>(feature);
  for (std::int64_t r : rows) {
    (X(r, f) <= threshold ? left : right).push_back(r);
  }
}

double direct_score(const Matrix& X, const Matrix& Y, std::span<const std::int64_t> rows,
                    std::size_t feature, double threshold, double ridge) {
  std::vector<std::int64_t> left, right;
  partition_rows(X, rows, feature, threshold, left, right);
  const LeafModel lm = fit_leaf(X, Y, left, ridge);
  const LeafModel rm = fit_leaf(X, Y, right, ridge);
  return leaf_loss(lm, X, Y, left) + leaf_loss(rm, X, Y, right);
}

}  // namespace

std::optional<SplitCandidate> find_best_split(const Matrix& X, const Matrix& Y,
                                              std::span<const std::int64_t> rows,
                                              double parent_loss, const BuildConfig& config,
                                              const ThresholdStream& rng) {
  const std::size_t m = config.min_leaf_samples;
  const std::size_t n = rows.size();
  if (n < 2 * m || n == 0) return std::nullopt;
  const auto p = static_cast<std::size_t>(X.cols());
  const auto q = static_cast<std::size_t>(Y.cols());

  // Shift every sample by the node mean before accumulating moments.
  std::vector<double> shift_x(p, 0.0), shift_y(q, 0.0);
  for (std::int64_t r : rows) {
    for (std::size_t i = 0; i < p; ++i) shift_x[i] += X(r, static_cast<Eigen::Index>(i));
    for (std::size_t o = 0; o < q; ++o) shift_y[o] += Y(r, static_cast<Eigen::Index>(o));
  }
  for (auto& v : shift_x) v /= static_cast<double>(n);
  for (auto& v : shift_y) v /= static_cast<double>(n);

  std::vector<std::vector<double>> thresholds(p);
  std::vector<double> column(n);
  for (std::size_t f = 0; f < p; ++f) {
    for (std::size_t k = 0; k < n; ++k) column[k] = X(rows[k], static_cast<Eigen::Index>(f));
    thresholds[f] = candidate_thresholds(column, config.grid_size,
                                         config.randomization_amplitude, rng, f);
  }

  // Bucket b of feature f holds samples with t[b-1] < x <= t[b].
  const std::size_t stride = LeafStats::packed_size(p, q);
  std::vector<std::size_t> bucket_base(p + 1, 0);
  for (std::size_t f = 0; f < p; ++f) {
    const std::size_t nb = thresholds[f].empty() ? 0 : thresholds[f].size() + 1;
    bucket_base[f + 1] = bucket_base[f] + nb * stride;
  }
  std::vector<double> buckets(bucket_base[p], 0.0);
  std::vector<double> packed(stride), xs(p), ys(q);
  for (std::int64_t r : rows) {
    for (std::size_t i = 0; i < p; ++i) xs[i] = X(r, static_cast<Eigen::Index>(i)) - shift_x[i];
    for (std::size_t o = 0; o < q; ++o) ys[o] = Y(r, static_cast<Eigen::Index>(o)) - shift_y[o];
    LeafStats::pack_sample(xs, ys, packed);
    for (std::size_t f = 0; f < p; ++f) {
      const auto& t = thresholds[f];
      if (t.empty()) continue;
      const double v = X(r, static_cast<Eigen::Index>(f));
      const auto b = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), v) - t.begin());
      double* dst = buckets.data() + bucket_base[f] + b * stride;
      for (std::size_t k = 0; k < stride; ++k) dst[k] += packed[k];
    }
  }

  LeafStats total(p, q);
  std::vector<ScoredSplit> scored;
  for (std::size_t f = 0; f < p; ++f) {
    const auto& t = thresholds[f];
    if (t.empty()) continue;
    if (total.count() == 0.0) {
      for (std::size_t b = 0; b <= t.size(); ++b) {
        total.add_packed({buckets.data() + bucket_base[f] + b * stride, stride});
      }
    }
    LeafStats left(p, q);
    for (std::size_t k = 0; k < t.size(); ++k) {
      left.add_packed({buckets.data() + bucket_base[f] + k * stride, stride});
      const auto lc = static_cast<std::size_t>(left.count());
      const std::size_t rc = n - lc;
      if (lc < m || rc < m) continue;
      double sse_l = 0.0, sse_r = 0.0;
      left.solve(config.ridge, shift_x, shift_y, &sse_l);
      total.minus(left).solve(config.ridge, shift_x, shift_y, &sse_r);
      scored.push_back({f, k, t[k], sse_l + sse_r, lc, rc});
    }
  }
  if (scored.empty()) return std::nullopt;

  // Moment-based scores pick the shortlist; the winner is decided on losses
  // recomputed from the actual partitions.
  std::stable_sort(scored.begin(), scored.end(),
                   [](const ScoredSplit& a, const ScoredSplit& b) { return a.score < b.score; });
  double scale = 0.0;
  {
    double sse_total = 0.0;
    total.solve(config.ridge, shift_x, shift_y, &sse_total);
    scale = std::max({sse_total, parent_loss, scored.front().score});
  }
  const double tol = 1e-9 * scale + 1e-12;
  std::size_t shortlist = 1;
  while (shortlist < scored.size() && shortlist < kMaxRescored &&
         scored[shortlist].score <= scored.front().score + tol) {
    ++shortlist;
  }

  const ScoredSplit* best = nullptr;
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < shortlist; ++i) {
    const ScoredSplit& s = scored[i];
    const double loss = direct_score(X, Y, rows, s.feature, s.threshold, config.ridge);
    if (best == nullptr || loss < best_loss ||
        (loss == best_loss && lexicographically_before(s, *best))) {
      best = &s;
      best_loss = loss;
    }
  }

  const double improvement = parent_loss - best_loss;
  if (!improves(improvement, parent_loss)) return std::nullopt;
  return SplitCandidate{best->feature, best->threshold, improvement, best->left_count,
                        best->right_count};
}

std::optional<SplitCandidate> find_best_split(const Matrix& X, const Matrix& Y,
                                              const BuildConfig& config,
                                              const ThresholdStream& rng) {
  if (X.rows() != Y.rows()) throw Error(ErrorKind::kDimensionMismatch, "X/Y row count mismatch");
  std::vector<std::int64_t> rows(static_cast<std::size_t>(X.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  if (rows.size() < 2 * config.min_leaf_samples || rows.empty()) return std::nullopt;
  const LeafModel model = fit_leaf(X, Y, rows, config.ridge);
  return find_best_split(X, Y, rows, leaf_loss(model, X, Y, rows), config, rng);
}

NodeId select_next_node(std::span<const FrontierEntry> frontier, double amplitude,
                        std::uint64_t seed, std::uint64_t iteration) {
  if (frontier.empty()) throw Error(ErrorKind::kInvalidArgument, "select_next_node: empty frontier");
  NodeId best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const FrontierEntry& e : frontier) {
    const double r = counter_uniform(
        seed, {kSelectTag, iteration, static_cast<std::uint64_t>(e.node)}, amplitude);
    const double score = (1.0 + r) * e.improvement;
    if (best < 0 || score > best_score || (score == best_score && e.node < best)) {
      best = e.node;
      best_score = score;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Building

Tree build_tree(const Matrix& X, const Matrix& Y, const BuildConfig& config, BuildTrace* trace) {
  if (X.rows() != Y.rows()) throw Error(ErrorKind::kDimensionMismatch, "X/Y row count mismatch");
  if (X.cols() == 0 || Y.cols() == 0) {
    throw Error(ErrorKind::kDimensionMismatch, "X and Y need at least one column");
  }
  config.validate(static_cast<std::size_t>(X.cols()));
  if (static_cast<std::size_t>(X.rows()) < config.min_leaf_samples || X.rows() == 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "dataset has " + std::to_string(X.rows()) + " samples, fewer than min_leaf_samples " +
                    std::to_string(config.min_leaf_samples));
  }
  if (!X.allFinite() || !Y.allFinite()) throw Error(ErrorKind::kNonFinite, "dataset has non-finite values");

  std::vector<TreeNode> nodes;
  std::vector<std::vector<std::int64_t>> node_rows;

  auto make_leaf = [&](std::vector<std::int64_t> rows, std::size_t depth) -> NodeId {
    const auto id = static_cast<NodeId>(nodes.size());
    LeafNode leaf;
    leaf.model = fit_leaf(X, Y, rows, config.ridge);
    leaf.n_samples = rows.size();
    leaf.depth = depth;
    leaf.training_loss = leaf_loss(leaf.model, X, Y, rows);
    const ThresholdStream rng{config.seed, static_cast<std::uint64_t>(id)};
    leaf.best_candidate = find_best_split(X, Y, rows, leaf.training_loss, config, rng);
    nodes.emplace_back(std::move(leaf));
    node_rows.push_back(std::move(rows));
    return id;
  };

  std::vector<std::int64_t> all(static_cast<std::size_t>(X.rows()));
  std::iota(all.begin(), all.end(), 0);
  // The root needs no candidate when it can never be split.
  const NodeId root = make_leaf(std::move(all), 0);
  if (config.max_leaves == 1) std::get<LeafNode>(nodes[0]).best_candidate.reset();

  double total_loss = std::get<LeafNode>(nodes[0]).training_loss;
  if (trace != nullptr) trace->total_loss = {total_loss};

  std::size_t leaves = 1;
  std::vector<FrontierEntry> frontier;
  for (std::uint64_t iteration = 0; leaves < config.max_leaves; ++iteration) {
    frontier.clear();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto* l = std::get_if<LeafNode>(&nodes[i]);
      if (l != nullptr && l->best_candidate) {
        frontier.push_back({static_cast<NodeId>(i), l->best_candidate->improvement});
      }
    }
    if (frontier.empty()) break;

    const NodeId chosen = select_next_node(frontier, config.randomization_amplitude, config.seed,
                                           iteration);
    const auto idx = static_cast<std::size_t>(chosen);
    const LeafNode parent = std::get<LeafNode>(nodes[idx]);
    const SplitCandidate split = *parent.best_candidate;

    std::vector<std::int64_t> left_rows, right_rows;
    partition_rows(X, node_rows[idx], split.feature_index, split.threshold, left_rows, right_rows);
    node_rows[idx].clear();
    node_rows[idx].shrink_to_fit();

    const NodeId left = make_leaf(std::move(left_rows), parent.depth + 1);
    const NodeId right = make_leaf(std::move(right_rows), parent.depth + 1);
    nodes[idx] = BranchNode{split.feature_index, split.threshold, left, right, parent.depth};
    ++leaves;

    total_loss += std::get<LeafNode>(nodes[static_cast<std::size_t>(left)]).training_loss +
                  std::get<LeafNode>(nodes[static_cast<std::size_t>(right)]).training_loss -
                  parent.training_loss;
    if (trace != nullptr) trace->total_loss.push_back(total_loss);
  }

  // Candidates are build-time state; a finished tree does not expose them
  // as splittable once the leaf budget is spent.
  if (leaves >= config.max_leaves) {
    for (TreeNode& n : nodes) {
      if (auto* l = std::get_if<LeafNode>(&n)) l->best_candidate.reset();
    }
  }

  return Tree(std::move(nodes), root, static_cast<std::size_t>(X.cols()),
              static_cast<std::size_t>(Y.cols()), config);
}

}  // namespace lmt
