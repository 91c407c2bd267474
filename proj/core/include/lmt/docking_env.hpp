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
#include <optional>
#include <string>
#include <vector>

#include "lmt/signals.hpp"
#include "lmt/teacher.hpp"
#include "lmt/tree.hpp"

namespace lmt {

/// World frame is north-east; body frame is x forward, y starboard.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Segment {
  Vec2 a;
  Vec2 b;
};

struct VesselPose {
  double north = 0.0;    // m
  double east = 0.0;     // m
  double heading = 0.0;  // rad, wrapped to (-pi, pi]
};

struct VesselVelocity {
  double u = 0.0;  // m/s surge
  double v = 0.0;  // m/s sway
  double r = 0.0;  // rad/s yaw rate
};

struct GeneralizedForce {
  double surge = 0.0;  // N
  double sway = 0.0;   // N
  double yaw = 0.0;    // N m
};

struct EnvConfig {
  VesselPose berth{0.0, 0.0, 0.0};
  std::vector<Segment> quay;  // world-frame wall segments
  std::vector<Vec2> footprint;  // convex hull polygon, body frame
  double timestep = 0.5;

  double mass_surge = 3.0e6;
  double mass_sway = 4.5e6;
  double inertia_yaw = 7.0e8;
  double damping_surge = 8.0e4;
  double damping_sway = 3.0e5;
  double damping_yaw = 8.0e7;

  Vec2 azimuth1{-22.0, -3.0};  // port
  Vec2 azimuth2{-22.0, 3.0};   // starboard
  Vec2 tunnel{20.0, 0.0};

  double success_position_tol = 1.0;    // m
  double success_heading_tol_deg = 5.0;
  double success_speed_tol = 0.2;       // m/s

  // Random starts: polar offset from the berth, bearing measured from the
  // berth heading, vessel pointed roughly at the berth.
  double start_min_radius = 60.0;
  double start_max_radius = 300.0;
  double start_sector_min_deg = 190.0;
  double start_sector_max_deg = 280.0;
  double start_heading_spread_deg = 45.0;
  double start_max_surge = 2.0;
  double start_max_quay_distance = 400.0;

  /// Corner berth, 50 m x 12 m vessel, default dynamics.
  static EnvConfig defaults();
  /// Throws kInvalidArgument on non-physical values.
  void validate() const;
};

EnvConfig read_env_config(std::istream& is);
void write_env_config(const EnvConfig& config, std::ostream& os);
EnvConfig load_env_config(const std::filesystem::path& path);
void save_env_config(const EnvConfig& config, const std::filesystem::path& path);

enum class Outcome { kSuccess, kContact, kTimeout };
std::string_view to_string(Outcome outcome);

struct StepResult {
  StateVector observation;
  bool contact = false;
  bool success = false;
};

double wrap_to_pi(double angle);

/// Generalized force of the three thrusters at their mounting points.
GeneralizedForce thrust_to_force(const PhysicalAction& action, const EnvConfig& config);

/// One docking episode's world. Not safe for concurrent mutation; use one
/// instance per episode.
class DockingEnv {
 public:
  explicit DockingEnv(EnvConfig config);

  const EnvConfig& config() const { return config_; }

  StateVector reset(const VesselPose& pose, const VesselVelocity& velocity = {});
  /// Seeded random start; reproducible for a given seed.
  StateVector reset(std::uint64_t seed);

  StepResult step(const NormalizedAction& action);
  StateVector observe() const;

  const VesselPose& pose() const { return pose_; }
  const VesselVelocity& velocity() const { return velocity_; }
  bool terminated() const { return terminated_; }
  bool in_contact() const { return contact_; }
  std::size_t steps_taken() const { return steps_; }

  /// Footprint corners in world coordinates for the given pose.
  std::vector<Vec2> hull(const VesselPose& pose) const;
  bool hull_touches_quay(const VesselPose& pose) const;
  /// Distance from a world point to the closest quay point.
  double quay_distance(Vec2 point) const;
  bool success_predicate(const StateVector& obs) const;

 private:
  EnvConfig config_;
  VesselPose pose_;
  VesselVelocity velocity_;
  bool contact_ = false;
  bool terminated_ = false;
  bool started_ = false;
  std::size_t steps_ = 0;
};

struct AttributionRecord {
  NodeId leaf_id = -1;
  Attribution attribution;
};

struct TrajectoryStep {
  std::size_t step = 0;
  VesselPose pose;           // before the action
  StateVector state;         // observation the controller acted on
  NormalizedAction action{};
  PhysicalAction physical;
  bool contact = false;      // events raised by this step
  bool success = false;
  std::optional<AttributionRecord> explanation;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  Outcome outcome = Outcome::kTimeout;
  VesselPose start_pose;
  VesselVelocity start_velocity;
  VesselPose final_pose;
  StateVector final_state;
};

using Controller = std::function<NormalizedAction(const StateVector&)>;

Controller make_controller(const TeacherPolicy& teacher);
/// Normalizes the raw observation with the tree's input bounds, then predicts.
Controller make_controller(const Tree& tree);

/// Leaf and attribution of the tree for a raw observation.
AttributionRecord explain_state(const Tree& tree, const StateVector& state);

inline constexpr std::size_t kDefaultMaxSteps = 800;

/// Runs observe -> act -> step from the env's current state until success,
/// contact or max_steps. With an explainer every step also records the
/// explainer's attribution of the state the controller acted on.
Trajectory run_episode(DockingEnv& env, const Controller& controller,
                       std::size_t max_steps = kDefaultMaxSteps,
                       const Tree* explainer = nullptr);

/// Plot-ready CSV, one row per step. Attribution columns are present iff
/// `with_attributions`.
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& os, bool with_attributions);
std::vector<std::string> trajectory_csv_header(bool with_attributions);

/// Reads the observation columns back from a trajectory CSV.
std::vector<StateVector> read_trajectory_states(std::istream& is);

}  // namespace lmt
