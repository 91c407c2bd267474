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

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lmt/io.hpp"
#include "lmt/tree.hpp"

namespace lmt {

namespace {

constexpr int kTreeFormatVersion = 1;
constexpr std::string_view kTreeMagic = "lmt-tree";

}  // namespace

void write_tree(const Tree& tree, std::ostream& os) {
  const BuildConfig& c = tree.config();
  os << kTreeMagic << ' ' << kTreeFormatVersion << '\n';
  os << "n_features " << tree.n_features() << '\n';
  os << "n_outputs " << tree.n_outputs() << '\n';
  os << "config max_leaves " << c.max_leaves << " min_leaf_samples " << c.min_leaf_samples
     << " grid_size " << c.grid_size << " randomization_amplitude "
     << format_double(c.randomization_amplitude) << " ridge " << format_double(c.ridge)
     << " seed " << c.seed << '\n';
  os << "bounds";
  if (tree.input_bounds().empty()) {
    os << " none";
  } else {
    for (std::size_t i = 0; i < tree.input_bounds().size(); ++i) {
      os << ' ' << format_double(tree.input_bounds().lo[i]) << ' '
         << format_double(tree.input_bounds().hi[i]);
    }
  }
  os << '\n';
  os << "root " << tree.root() << '\n';
  os << "nodes " << tree.nodes().size() << '\n';
  for (std::size_t id = 0; id < tree.nodes().size(); ++id) {
    const TreeNode& node = tree.nodes()[id];
    if (const auto* b = std::get_if<BranchNode>(&node)) {
      os << "branch " << id << ' ' << b->feature_index << ' ' << format_double(b->threshold) << ' '
         << b->left << ' ' << b->right << ' ' << b->depth << '\n';
    } else {
      const auto& l = std::get<LeafNode>(node);
      os << "leaf " << id << ' ' << l.n_samples << ' ' << l.depth << ' '
         << format_double(l.training_loss);
      for (Eigen::Index o = 0; o < l.model.intercepts.size(); ++o) {
        os << ' ' << format_double(l.model.intercepts(o));
      }
      for (Eigen::Index o = 0; o < l.model.coefficients.rows(); ++o) {
        for (Eigen::Index i = 0; i < l.model.coefficients.cols(); ++i) {
          os << ' ' << format_double(l.model.coefficients(o, i));
        }
      }
      os << '\n';
    }
  }
  os << "end\n";
}

Tree read_tree(std::istream& is) {
  LineReader in(is, "tree");
  auto header = in.tokens();
  if (header.size() != 2 || header[0] != kTreeMagic) in.fail("missing 'lmt-tree' header");
  if (parse_int(header[1]) != kTreeFormatVersion) {
    throw Error(ErrorKind::kVersionMismatch,
                "tree file version " + header[1] + " is not supported (expected " +
                    std::to_string(kTreeFormatVersion) + ")");
  }
  const auto n_features = static_cast<std::size_t>(in.keyed_int("n_features"));
  const auto n_outputs = static_cast<std::size_t>(in.keyed_int("n_outputs"));
  if (n_features == 0 || n_outputs == 0) in.fail("zero feature or output count");

  BuildConfig config;
  {
    auto t = in.tokens();
    if (t.size() != 13 || t[0] != "config" || t[1] != "max_leaves" || t[3] != "min_leaf_samples" ||
        t[5] != "grid_size" || t[7] != "randomization_amplitude" || t[9] != "ridge" ||
        t[11] != "seed") {
      in.fail("malformed config line");
    }
    config.max_leaves = static_cast<std::size_t>(parse_int(t[2]));
    config.min_leaf_samples = static_cast<std::size_t>(parse_int(t[4]));
    config.grid_size = static_cast<std::size_t>(parse_int(t[6]));
    config.randomization_amplitude = parse_double(t[8]);
    config.ridge = parse_double(t[10]);
    config.seed = std::stoull(t[12]);
  }

  FeatureBounds bounds;
  {
    auto t = in.tokens();
    if (t.empty() || t[0] != "bounds") in.fail("missing bounds line");
    if (!(t.size() == 2 && t[1] == "none")) {
      if (t.size() != 1 + 2 * n_features) {
        in.fail("tree bounds do not match n_features");
      }
      for (std::size_t i = 0; i < n_features; ++i) {
        bounds.lo.push_back(parse_double(t[1 + 2 * i]));
        bounds.hi.push_back(parse_double(t[2 + 2 * i]));
      }
    }
  }
  const auto root = static_cast<NodeId>(in.keyed_int("root"));
  const auto count = static_cast<std::size_t>(in.keyed_int("nodes"));
  if (count == 0) in.fail("tree has no nodes");

  std::vector<TreeNode> nodes;
  nodes.reserve(count);
  for (std::size_t id = 0; id < count; ++id) {
    auto t = in.tokens();
    if (t.size() < 2 || static_cast<std::size_t>(parse_int(t[1])) != id) {
      in.fail("node " + std::to_string(id) + " missing or out of order");
    }
    if (t[0] == "branch") {
      if (t.size() != 7) in.fail("branch line has wrong field count");
      BranchNode b;
      b.feature_index = static_cast<std::size_t>(parse_int(t[2]));
      b.threshold = parse_double(t[3]);
      b.left = static_cast<NodeId>(parse_int(t[4]));
      b.right = static_cast<NodeId>(parse_int(t[5]));
      b.depth = static_cast<std::size_t>(parse_int(t[6]));
      if (b.feature_index >= n_features) in.fail("branch feature index out of range");
      nodes.emplace_back(b);
    } else if (t[0] == "leaf") {
      if (t.size() != 5 + n_outputs + n_outputs * n_features) {
        in.fail("leaf " + std::to_string(id) + " does not match n_features/n_outputs");
      }
      LeafNode l;
      l.n_samples = static_cast<std::size_t>(parse_int(t[2]));
      l.depth = static_cast<std::size_t>(parse_int(t[3]));
      l.training_loss = parse_double(t[4]);
      l.model = LeafModel::zeros(n_outputs, n_features);
      l.model.n_train_samples = l.n_samples;
      std::size_t k = 5;
      for (std::size_t o = 0; o < n_outputs; ++o) {
        l.model.intercepts(static_cast<Eigen::Index>(o)) = parse_double(t[k++]);
      }
      for (std::size_t o = 0; o < n_outputs; ++o) {
        for (std::size_t i = 0; i < n_features; ++i) {
          l.model.coefficients(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i)) =
              parse_double(t[k++]);
        }
      }
      if (!l.model.coefficients.allFinite() || !l.model.intercepts.allFinite()) {
        throw Error(ErrorKind::kNonFinite, "leaf " + std::to_string(id) + " has non-finite values");
      }
      nodes.emplace_back(std::move(l));
    } else {
      in.fail("unknown node kind '" + t[0] + "'");
    }
  }
  {
    auto t = in.tokens();
    if (t.size() != 1 || t[0] != "end") in.fail("missing 'end' marker");
  }

  const auto n = static_cast<NodeId>(nodes.size());
  if (root < 0 || root >= n) in.fail("root id out of range");
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    if (const auto* b = std::get_if<BranchNode>(&nodes[id])) {
      const auto self = static_cast<NodeId>(id);
      if (b->left < 0 || b->left >= n || b->right < 0 || b->right >= n || b->left == b->right ||
          b->left == self || b->right == self) {
        in.fail("branch " + std::to_string(id) + " has invalid children");
      }
    }
  }

  Tree tree(std::move(nodes), root, n_features, n_outputs, config);
  if (!bounds.empty()) tree.set_input_bounds(std::move(bounds));
  return tree;
}

void save_tree(const Tree& tree, const std::filesystem::path& path) {
  write_text_file_atomic(path, [&](std::ostream& os) { write_tree(tree, os); });
}

Tree load_tree(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIo, "cannot open tree file " + path.string());
  return read_tree(is);
}

Tree load_tree(const std::filesystem::path& path, std::size_t n_features, std::size_t n_outputs) {
  Tree tree = load_tree(path);
  if (tree.n_features() != n_features || tree.n_outputs() != n_outputs) {
    throw Error(ErrorKind::kDimensionMismatch,
                "tree has " + std::to_string(tree.n_features()) + " features / " +
                    std::to_string(tree.n_outputs()) + " outputs, task needs " +
                    std::to_string(n_features) + " / " + std::to_string(n_outputs));
  }
  return tree;
}

}  // namespace lmt
