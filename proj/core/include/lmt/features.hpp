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
#include <span>
#include <vector>

#include "lmt/common.hpp"

namespace lmt {

/// Per-feature [lo, hi] box. Normalization maps it affinely onto [-1, 1]
/// and clamps; it is shared by the dataset, the network teacher and the tree
/// controller so all of them see the same inputs.
struct FeatureBounds {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t size() const { return lo.size(); }
  bool empty() const { return lo.empty(); }

  /// Throws kInvalidArgument unless every pair is finite with lo < hi.
  void validate() const;

  void normalize(std::span<const double> raw, std::span<double> out) const;
  void denormalize(std::span<const double> normalized, std::span<double> out) const;

  /// Default sampling box for the docking observation, in observation order.
  static FeatureBounds docking_defaults();

  friend bool operator==(const FeatureBounds&, const FeatureBounds&) = default;
};

}  // namespace lmt
