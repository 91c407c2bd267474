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
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lmt/features.hpp"
#include "lmt/signals.hpp"

namespace lmt {

enum class Activation { kRelu, kTanh };

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
  Activation activation = Activation::kRelu;
};

/// Feedforward policy: rectifier hidden layers, tanh output. Inputs are the
/// observation normalized with `input_bounds`.
class MlpPolicy {
 public:
  MlpPolicy() = default;
  MlpPolicy(std::vector<DenseLayer> layers, FeatureBounds input_bounds);

  /// Random net with the given hidden widths; weights ~ U(-s, s) with
  /// s = scale / sqrt(fan_in).
  static MlpPolicy random(std::uint64_t seed, std::span<const std::size_t> hidden,
                          std::size_t input_dim = kNumFeatures,
                          std::size_t output_dim = kNumOutputs, double scale = 1.0);

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  const FeatureBounds& input_bounds() const { return input_bounds_; }

  /// Forward pass on an already-normalized input.
  Eigen::VectorXd forward(std::span<const double> x) const;
  /// Normalizes a raw observation, then runs the forward pass.
  NormalizedAction act(const StateVector& state) const;

 private:
  std::vector<DenseLayer> layers_;
  FeatureBounds input_bounds_;
};

void write_mlp(const MlpPolicy& policy, std::ostream& os);
MlpPolicy read_mlp(std::istream& is);
void save_mlp(const MlpPolicy& policy, const std::filesystem::path& path);
/// Loads a docking policy; requires a 9-wide input and 5-wide output.
MlpPolicy load_mlp(const std::filesystem::path& path);

/// Vessel quantities the scripted controller needs for force allocation and
/// feed-forward. Defaults match the default simulator vessel.
struct ScriptedParams {
  double mass_surge = 3.0e6;     // kg
  double mass_sway = 4.5e6;      // kg
  double inertia_yaw = 7.0e8;    // kg m^2
  double damping_surge = 8.0e4;  // N s/m
  double damping_sway = 3.0e5;   // N s/m
  double azimuth_x = -22.0;      // m, stern thrusters
  double azimuth_y = 3.0;        // m, half spacing of the stern pair
  double tunnel_x = 20.0;        // m, bow thruster

  double max_speed = 1.2;        // m/s cruise toward the berth
  double approach_radius = 30.0; // m, along-axis speed ramps down inside this
  double cross_radius = 30.0;    // m, cross-axis speed ramps down inside this
  double heading_blend_radius = 60.0;  // m, berth heading dominates inside
  double approach_slope = 0.3;   // stay astern of the berth by this times |cross offset|
  double velocity_gain = 0.1;    // 1/s
  double yaw_bandwidth = 0.15;   // rad/s
  double yaw_damping_ratio = 1.0;
  double max_surge_force = 120e3;   // N
  double max_sway_force = 100e3;    // N
  double max_yaw_moment = 2.5e6;    // N m
  double steering_pivot = 25e3;     // N, constant forward load on azimuth 1
};

/// Deterministic docking guidance. A velocity field in the berth frame
/// closes the cross offset and the along-axis offset with separate ramps, so
/// the vessel settles onto the berth axis from astern; heading is blended
/// from the field's course to the berth heading.
/// Velocity and heading errors give PD force demands, which are allocated
/// as: azimuth 1 steers (fixed forward load, angle from lateral demand),
/// azimuth 2 propels (angle 0), the tunnel balances sway against yaw.
class ScriptedController {
 public:
  explicit ScriptedController(ScriptedParams params = {}) : params_(params) {}

  const ScriptedParams& params() const { return params_; }

  struct ForceDemand {
    double surge;  // N
    double sway;   // N
    double yaw;    // N m
  };
  ForceDemand demand(const StateVector& state) const;
  PhysicalAction allocate(const ForceDemand& demand) const;
  NormalizedAction act(const StateVector& state) const;

 private:
  ScriptedParams params_;
};

/// Any callable mapping a raw observation to a normalized action.
struct CustomPolicy {
  std::string name;
  std::function<NormalizedAction(const StateVector&)> fn;
};

/// The black box being distilled. Outputs are clamped into [-1, 1].
class TeacherPolicy {
 public:
  /// Throws kDimensionMismatch unless the network maps 9 inputs to 5 outputs.
  explicit TeacherPolicy(MlpPolicy mlp);
  explicit TeacherPolicy(ScriptedController scripted) : impl_(std::move(scripted)) {}
  explicit TeacherPolicy(CustomPolicy custom) : impl_(std::move(custom)) {}

  NormalizedAction act(const StateVector& state) const;
  std::string name() const;

  /// "scripted" or "mlp:<path>".
  static TeacherPolicy resolve(const std::string& spec);

 private:
  std::variant<MlpPolicy, ScriptedController, CustomPolicy> impl_;
};

}  // namespace lmt
