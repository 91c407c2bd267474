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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "lmt/common.hpp"
#include "lmt/random.hpp"
#include "lmt/signals.hpp"
#include "lmt/tree.hpp"
#include "oracles.hpp"

namespace lmt::test {

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
  }
  return m;
}

inline oracle::Mat to_rows(const Matrix& m) {
  oracle::Mat out(static_cast<std::size_t>(m.rows()), oracle::Vec(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m(r, c);
    }
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

/// Single-leaf 9 -> 5 tree that always outputs `action`.
inline Tree constant_tree(const NormalizedAction& action) {
  LeafModel m = LeafModel::zeros(kNumOutputs, kNumFeatures);
  for (std::size_t o = 0; o < kNumOutputs; ++o) m.intercepts(static_cast<Eigen::Index>(o)) = action[o];
  LeafNode leaf;
  leaf.model = std::move(m);
  leaf.n_samples = 1;
  std::vector<TreeNode> nodes;
  nodes.emplace_back(std::move(leaf));
  return Tree(std::move(nodes), 0, kNumFeatures, kNumOutputs, BuildConfig{});
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() /
            ("lmt_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

}  // namespace lmt::test
