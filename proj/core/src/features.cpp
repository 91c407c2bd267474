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

#include "lmt/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace lmt {

void FeatureBounds::validate() const {
  if (lo.size() != hi.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "feature bounds: lo/hi length mismatch");
  }
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(lo[i] < hi[i])) {
      throw Error(ErrorKind::kInvalidArgument,
                  "feature bounds: feature " + std::to_string(i) + " needs finite lo < hi");
    }
  }
}

void FeatureBounds::normalize(std::span<const double> raw, std::span<double> out) const {
  if (raw.size() != lo.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "normalize: expected " + std::to_string(lo.size()) +
                                                   " features, got " + std::to_string(raw.size()));
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double mid = 0.5 * (lo[i] + hi[i]);
    const double half = 0.5 * (hi[i] - lo[i]);
    out[i] = std::clamp((raw[i] - mid) / half, -1.0, 1.0);
  }
}

void FeatureBounds::denormalize(std::span<const double> normalized, std::span<double> out) const {
  if (normalized.size() != lo.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "denormalize: expected " +
                                                   std::to_string(lo.size()) + " features, got " +
                                                   std::to_string(normalized.size()));
  }
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    const double mid = 0.5 * (lo[i] + hi[i]);
    const double half = 0.5 * (hi[i] - lo[i]);
    out[i] = mid + normalized[i] * half;
  }
}

FeatureBounds FeatureBounds::docking_defaults() {
  constexpr double pi = std::numbers::pi;
  // x_rel, y_rel, psi_err, u, v, r, contact, d_obs, psi_obs
  return FeatureBounds{
      {-400.0, -400.0, -pi, -2.0, -2.0, -0.2, 0.0, 0.0, -pi},
      {400.0, 400.0, pi, 5.0, 2.0, 0.2, 1.0, 600.0, pi},
  };
}

}  // namespace lmt
