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
#include <span>

#include "lmt/common.hpp"

namespace lmt {

/// The 9-feature docking observation in its fixed order.
struct StateVector {
  std::array<double, kNumFeatures> values{};

  double x_rel() const { return values[0]; }
  double y_rel() const { return values[1]; }
  double psi_err() const { return values[2]; }
  double u() const { return values[3]; }
  double v() const { return values[4]; }
  double r() const { return values[5]; }
  double contact() const { return values[6]; }
  double d_obs() const { return values[7]; }
  double psi_obs() const { return values[8]; }

  std::span<const double> span() const { return values; }
  friend bool operator==(const StateVector&, const StateVector&) = default;
};

/// Thruster commands in [-1, 1], order f1, f2, f3, alpha1, alpha2.
using NormalizedAction = std::array<double, kNumOutputs>;

/// Thruster commands in kN and degrees.
struct PhysicalAction {
  double f1 = 0.0;      // kN, port azimuth
  double f2 = 0.0;      // kN, starboard azimuth
  double f3 = 0.0;      // kN, bow tunnel
  double alpha1 = 0.0;  // deg
  double alpha2 = 0.0;  // deg

  std::array<double, kNumOutputs> as_array() const { return {f1, f2, f3, alpha1, alpha2}; }
  static PhysicalAction from_array(std::span<const double> a) {
    return {a[0], a[1], a[2], a[3], a[4]};
  }
};

struct ActionRange {
  double lo;
  double hi;
  double span() const { return hi - lo; }
};

/// Physical range of every action component.
inline constexpr std::array<ActionRange, kNumOutputs> kActionRanges = {{
    {-70.0, 100.0},
    {-70.0, 100.0},
    {-50.0, 50.0},
    {-90.0, 90.0},
    {-90.0, 90.0},
}};

/// Affine map [-1, 1] -> physical range; inputs are clamped first.
PhysicalAction scale_action(std::span<const double> normalized);
/// Exact inverse of scale_action (no clamping).
NormalizedAction unscale_action(const PhysicalAction& physical);

}  // namespace lmt
