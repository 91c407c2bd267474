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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "lmt/docking_env.hpp"
#include "lmt/io.hpp"
#include "lmt/teacher.hpp"
#include "test_util.hpp"

namespace lmt {
namespace {

constexpr double kPi = std::numbers::pi;

NormalizedAction physical(double f1, double f2, double f3, double a1, double a2) {
  return unscale_action(PhysicalAction{f1, f2, f3, a1, a2});
}

const NormalizedAction kNoThrust = physical(0, 0, 0, 0, 0);

EnvConfig single_wall(Segment s) {
  EnvConfig c = EnvConfig::defaults();
  c.quay = {s};
  return c;
}

TEST(DockingEnv, AtBerthObservation) {
  DockingEnv env(EnvConfig::defaults());
  const StateVector obs = env.reset(VesselPose{0, 0, 0});
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(obs.values[i], 0.0) << kFeatureNames[i];
  EXPECT_DOUBLE_EQ(obs.d_obs(), 10.0);
  EXPECT_DOUBLE_EQ(obs.psi_obs(), kPi / 2);
  EXPECT_TRUE(env.success_predicate(obs));
}

TEST(DockingEnv, ObserveExamples) {
  DockingEnv env(EnvConfig::defaults());
  // Pointing east, 60 m south and 30 m west of the berth: the berth lies
  // 30 m ahead and 60 m to port.
  const StateVector a = env.reset(VesselPose{-60, -30, kPi / 2});
  EXPECT_NEAR(a.x_rel(), 30.0, 1e-12);
  EXPECT_NEAR(a.y_rel(), -60.0, 1e-12);
  EXPECT_NEAR(a.psi_err(), -kPi / 2, 1e-12);

  // Berth 40 m ahead and 5 m to starboard.
  const StateVector b = env.reset(VesselPose{-40, -5, 0}, VesselVelocity{1.0, -0.2, 0.01});
  EXPECT_NEAR(b.x_rel(), 40.0, 1e-12);
  EXPECT_NEAR(b.y_rel(), 5.0, 1e-12);
  EXPECT_EQ(b.u(), 1.0);
  EXPECT_EQ(b.v(), -0.2);
  EXPECT_EQ(b.r(), 0.01);
  EXPECT_NEAR(b.d_obs(), 15.0, 1e-12);

  // Heading error wraps into (-pi, pi].
  const StateVector c = env.reset(VesselPose{-100, -30, 3.0});
  EXPECT_NEAR(c.psi_err(), wrap_to_pi(-3.0), 1e-12);
  EXPECT_GT(c.psi_err(), -kPi);
  EXPECT_LE(c.psi_err(), kPi);
}

TEST(DockingEnv, ObstacleBearingInBodyFrame) {
  // One wall 50 m dead ahead of an east-pointing vessel.
  DockingEnv ahead(single_wall(Segment{{-10, 50}, {10, 50}}));
  const StateVector a = ahead.reset(VesselPose{0, 0, kPi / 2});
  EXPECT_NEAR(a.d_obs(), 50.0, 1e-12);
  EXPECT_NEAR(a.psi_obs(), 0.0, 1e-12);

  // The same wall seen from a north-pointing vessel is 90 deg to starboard.
  const StateVector b = ahead.reset(VesselPose{0, 0, 0});
  EXPECT_NEAR(b.psi_obs(), kPi / 2, 1e-12);

  // A wall to the west is on the port side.
  DockingEnv port(single_wall(Segment{{-100, -40}, {100, -40}}));
  const StateVector c = port.reset(VesselPose{0, 0, 0});
  EXPECT_NEAR(c.d_obs(), 40.0, 1e-12);
  EXPECT_NEAR(c.psi_obs(), -kPi / 2, 1e-12);

  // Nearest point is a segment end.
  DockingEnv corner(single_wall(Segment{{30, 40}, {100, 40}}));
  const StateVector d = corner.reset(VesselPose{0, 0, 0});
  EXPECT_NEAR(d.d_obs(), 50.0, 1e-12);
  EXPECT_NEAR(d.psi_obs(), std::atan2(40.0, 30.0), 1e-12);
}

TEST(ThrustToForce, Examples) {
  const EnvConfig c = EnvConfig::defaults();
  const GeneralizedForce ahead = thrust_to_force(PhysicalAction{100, 100, 0, 0, 0}, c);
  EXPECT_DOUBLE_EQ(ahead.surge, 200e3);
  EXPECT_NEAR(ahead.sway, 0.0, 1e-9);
  EXPECT_NEAR(ahead.yaw, 0.0, 1e-6);

  // Port azimuth alone pushing ahead turns the bow to starboard.
  const GeneralizedForce port = thrust_to_force(PhysicalAction{100, 0, 0, 0, 0}, c);
  EXPECT_DOUBLE_EQ(port.surge, 100e3);
  EXPECT_NEAR(port.yaw, 3.0 * 100e3, 1e-6);

  // Azimuth rotated to starboard: sway force at the stern, bow swings to port.
  const GeneralizedForce side = thrust_to_force(PhysicalAction{50, 0, 0, 90, 0}, c);
  EXPECT_NEAR(side.surge, 0.0, 1e-9);
  EXPECT_NEAR(side.sway, 50e3, 1e-9);
  EXPECT_NEAR(side.yaw, -22.0 * 50e3, 1e-6);

  const GeneralizedForce tunnel = thrust_to_force(PhysicalAction{0, 0, 50, 0, 0}, c);
  EXPECT_EQ(tunnel.surge, 0.0);
  EXPECT_DOUBLE_EQ(tunnel.sway, 50e3);
  EXPECT_DOUBLE_EQ(tunnel.yaw, 20.0 * 50e3);
}

TEST(DockingEnv, SeededResetIsDeterministic) {
  DockingEnv a(EnvConfig::defaults());
  DockingEnv b(EnvConfig::defaults());
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    EXPECT_EQ(a.reset(seed), b.reset(seed));
    EXPECT_EQ(a.pose().north, b.pose().north);
    EXPECT_EQ(a.pose().heading, b.pose().heading);
  }
  EXPECT_NE(a.reset(1), a.reset(2));
}

TEST(DockingEnv, SeededStartsAreCollisionFreeAndInRange) {
  DockingEnv env(EnvConfig::defaults());
  const EnvConfig& c = env.config();
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const StateVector obs = env.reset(seed);
    EXPECT_FALSE(env.hull_touches_quay(env.pose()));
    EXPECT_EQ(obs.contact(), 0.0);
    EXPECT_LE(obs.d_obs(), c.start_max_quay_distance);
    const double range = std::hypot(obs.x_rel(), obs.y_rel());
    EXPECT_GE(range, c.start_min_radius - 1e-9);
    EXPECT_LE(range, c.start_max_radius + 1e-9);
  }
}

TEST(DockingEnv, StartInContactIsRejected) {
  DockingEnv env(EnvConfig::defaults());
  try {
    env.reset(VesselPose{0, 8, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kStartInContact);
  }
  EXPECT_THROW(env.reset(VesselPose{std::nan(""), 0, 0}), Error);
}

TEST(DockingEnv, StepBeforeResetThrows) {
  DockingEnv env(EnvConfig::defaults());
  EXPECT_THROW(env.step(kNoThrust), Error);
}

TEST(DockingEnv, ZeroThrustAtRestStaysPut) {
  DockingEnv env(EnvConfig::defaults());
  const StateVector first = env.reset(VesselPose{-100, -20, 0.3});
  // The normalized image of 0 kN is not exactly representable, so allow
  // round-off sized drift.
  for (int k = 0; k < 50; ++k) {
    const StepResult r = env.step(kNoThrust);
    for (std::size_t i = 0; i < kNumFeatures; ++i) EXPECT_NEAR(r.observation.values[i], first.values[i], 1e-12);
    EXPECT_FALSE(r.contact);
  }
}

TEST(DockingEnv, TunnelAloneGivesSwayAndYaw) {
  DockingEnv env(EnvConfig::defaults());
  env.reset(VesselPose{-100, -30, 0});
  const StepResult r = env.step(physical(0, 0, 20, 0, 0));
  EXPECT_NEAR(r.observation.u(), 0.0, 1e-15);
  EXPECT_GT(r.observation.v(), 0.0);
  EXPECT_GT(r.observation.r(), 0.0);
  const EnvConfig& c = env.config();
  const double dt = c.timestep;
  EXPECT_NEAR(r.observation.v(), dt * 20e3 / (c.mass_sway + dt * c.damping_sway), 1e-12);
  EXPECT_NEAR(r.observation.r(), dt * 20.0 * 20e3 / (c.inertia_yaw + dt * c.damping_yaw), 1e-12);
}

TEST(DockingEnv, ContactIsAbsorbing) {
  DockingEnv env(EnvConfig::defaults());
  env.reset(VesselPose{-20, 0, 0});
  const NormalizedAction push = physical(100, 100, 50, 90, 90);  // hard to starboard, toward the wall
  bool hit = false;
  for (int k = 0; k < 400 && !hit; ++k) {
    const StepResult r = env.step(push);
    EXPECT_FALSE(r.success);
    hit = r.contact;
    if (hit) EXPECT_EQ(r.observation.contact(), 1.0);
  }
  ASSERT_TRUE(hit);
  EXPECT_TRUE(env.terminated());
  EXPECT_TRUE(env.in_contact());
  EXPECT_EQ(env.observe().contact(), 1.0);
  try {
    env.step(kNoThrust);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEpisodeTerminated);
  }
  // A new episode clears the flag.
  EXPECT_EQ(env.reset(VesselPose{-100, -20, 0}).contact(), 0.0);
}

TEST(DockingEnv, SuccessPredicateBoundaries) {
  DockingEnv env(EnvConfig::defaults());
  StateVector s{};
  s.values[0] = 0.6;
  s.values[1] = 0.8;  // exactly 1 m
  EXPECT_TRUE(env.success_predicate(s));
  s.values[1] = 0.81;
  EXPECT_FALSE(env.success_predicate(s));
  s = StateVector{};
  s.values[2] = 4.9 * kPi / 180;
  EXPECT_TRUE(env.success_predicate(s));
  s.values[2] = -5.1 * kPi / 180;
  EXPECT_FALSE(env.success_predicate(s));
  s = StateVector{};
  s.values[3] = 0.12;
  s.values[4] = 0.16;  // 0.2 m/s
  EXPECT_TRUE(env.success_predicate(s));
  s.values[4] = 0.17;
  EXPECT_FALSE(env.success_predicate(s));
}

// ---------------------------------------------------------------------------

TEST(Physics, KineticEnergyNeverGrowsWithoutThrust) {
  DockingEnv env(EnvConfig::defaults());
  const EnvConfig& c = env.config();
  auto energy = [&](const VesselVelocity& v) {
    return 0.5 * (c.mass_surge * v.u * v.u + c.mass_sway * v.v * v.v + c.inertia_yaw * v.r * v.r);
  };
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    env.reset(VesselPose{-150, -60, rng.uniform(-1, 1)},
              VesselVelocity{rng.uniform(-2, 2), rng.uniform(-1, 1), rng.uniform(-0.05, 0.05)});
    double e = energy(env.velocity());
    for (int k = 0; k < 40 && !env.terminated(); ++k) {
      env.step(kNoThrust);
      const double next = energy(env.velocity());
      EXPECT_LE(next, e);
      e = next;
    }
  }
}

TEST(Physics, ObstacleDistanceIsLipschitzInDisplacement) {
  DockingEnv env(EnvConfig::defaults());
  const TeacherPolicy teacher(ScriptedController{});
  Rng rng(5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    StateVector obs = env.reset(seed);
    VesselPose pose = env.pose();
    for (int k = 0; k < 300 && !env.terminated(); ++k) {
      NormalizedAction a{};
      for (double& v : a) v = rng.uniform(-1, 1);
      const StepResult r = env.step(a);
      const double moved = std::hypot(env.pose().north - pose.north, env.pose().east - pose.east);
      EXPECT_LE(std::abs(r.observation.d_obs() - obs.d_obs()), moved + 1e-9);
      obs = r.observation;
      pose = env.pose();
    }
  }
}

// Rigidly moving the whole scene (berth, quay, vessel) leaves every
// observation unchanged.
TEST(Physics, ObservationsAreFrameInvariant) {
  const EnvConfig base = EnvConfig::defaults();
  const double theta = 0.7;
  const Vec2 shift{1234.5, -321.0};
  auto move = [&](Vec2 p) {
    return Vec2{shift.x + std::cos(theta) * p.x - std::sin(theta) * p.y,
                shift.y + std::sin(theta) * p.x + std::cos(theta) * p.y};
  };
  EnvConfig moved = base;
  const Vec2 berth = move({base.berth.north, base.berth.east});
  moved.berth = VesselPose{berth.x, berth.y, base.berth.heading + theta};
  for (Segment& s : moved.quay) s = Segment{move(s.a), move(s.b)};

  DockingEnv a(base);
  DockingEnv b(moved);
  const TeacherPolicy teacher(ScriptedController{});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    a.reset(seed);
    const Vec2 start = move({a.pose().north, a.pose().east});
    b.reset(VesselPose{start.x, start.y, a.pose().heading + theta}, a.velocity());
    StateVector oa = a.observe();
    StateVector ob = b.observe();
    for (int k = 0; k < 400 && !a.terminated() && !b.terminated(); ++k) {
      for (std::size_t i = 0; i < kNumFeatures; ++i) {
        const double tol = i == 2 || i == 8 ? 1e-9 : 1e-7;
        ASSERT_NEAR(oa.values[i], ob.values[i], tol) << "seed " << seed << " step " << k << " " << kFeatureNames[i];
      }
      const NormalizedAction act = teacher.act(oa);
      oa = a.step(act).observation;
      ob = b.step(act).observation;
    }
  }
}

// ---------------------------------------------------------------------------

TEST(RunEpisode, ScriptedTeacherDocksFromMostStarts) {
  DockingEnv env(EnvConfig::defaults());
  const Controller teacher = make_controller(TeacherPolicy(ScriptedController{}));
  int successes = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    env.reset(seed);
    const Trajectory t = run_episode(env, teacher);
    ASSERT_FALSE(t.steps.empty());
    EXPECT_LE(t.steps.size(), kDefaultMaxSteps);
    if (t.outcome == Outcome::kSuccess) {
      ++successes;
      EXPECT_TRUE(t.steps.back().success);
      EXPECT_TRUE(env.success_predicate(t.final_state));
    }
    for (std::size_t k = 0; k + 1 < t.steps.size(); ++k) {
      EXPECT_FALSE(t.steps[k].success);
      EXPECT_FALSE(t.steps[k].contact);
      EXPECT_EQ(t.steps[k].step, k);
    }
  }
  EXPECT_GE(successes, 18);
}

TEST(RunEpisode, FullAsternTimesOut) {
  DockingEnv env(EnvConfig::defaults());
  const Tree astern = test::constant_tree(physical(-70, -70, 0, 0, 0));
  env.reset(VesselPose{-100, 0, 0});
  const Trajectory t = run_episode(env, make_controller(astern), 120);
  EXPECT_EQ(t.outcome, Outcome::kTimeout);
  EXPECT_EQ(t.steps.size(), 120u);
  EXPECT_LT(t.final_state.u(), 0.0);
  EXPECT_GT(t.final_state.x_rel(), 100.0);
}

TEST(RunEpisode, ExplainerAttributionsAreNormalized) {
  DockingEnv env(EnvConfig::defaults());
  Rng rng(12);
  const FeatureBounds bounds = FeatureBounds::docking_defaults();
  Matrix X(3000, 9), Y(3000, 5);
  const TeacherPolicy teacher(ScriptedController{});
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    StateVector s;
    for (std::size_t f = 0; f < 9; ++f) s.values[f] = rng.uniform(bounds.lo[f], bounds.hi[f]);
    const NormalizedAction a = teacher.act(s);
    std::array<double, 9> x{};
    bounds.normalize(s.values, x);
    for (Eigen::Index f = 0; f < 9; ++f) X(i, f) = x[static_cast<std::size_t>(f)];
    for (Eigen::Index o = 0; o < 5; ++o) Y(i, o) = a[static_cast<std::size_t>(o)];
  }
  BuildConfig cfg;
  cfg.max_leaves = 20;
  Tree tree = build_tree(X, Y, cfg);
  tree.set_input_bounds(bounds);

  env.reset(3);
  const Trajectory t = run_episode(env, make_controller(teacher), 200, &tree);
  ASSERT_FALSE(t.steps.empty());
  for (const TrajectoryStep& s : t.steps) {
    ASSERT_TRUE(s.explanation.has_value());
    const AttributionRecord& e = *s.explanation;
    std::array<double, 9> x{};
    bounds.normalize(s.state.values, x);
    EXPECT_EQ(e.leaf_id, tree.find_leaf(x));
    for (std::size_t o = 0; o < 5; ++o) {
      if (e.attribution.is_degenerate(o)) continue;
      EXPECT_NEAR(e.attribution.relative_importance.row(static_cast<Eigen::Index>(o)).cwiseAbs().sum(), 1.0, 1e-12);
    }
  }
}

TEST(TrajectoryCsv, HeaderAndRoundTrip) {
  const auto plain = trajectory_csv_header(false);
  const auto full = trajectory_csv_header(true);
  std::size_t attribution_cols = 0;
  for (const auto& h : full) attribution_cols += h.rfind("I_", 0) == 0 ? 1 : 0;
  EXPECT_EQ(attribution_cols, 45u);
  EXPECT_EQ(full.size(), plain.size() + 46);
  EXPECT_EQ(std::count(full.begin(), full.end(), "leaf_id"), 1);

  DockingEnv env(EnvConfig::defaults());
  env.reset(7);
  const Trajectory t = run_episode(env, make_controller(TeacherPolicy(ScriptedController{})), 60);
  std::stringstream ss;
  write_trajectory_csv(t, ss, false);
  const auto states = read_trajectory_states(ss);
  ASSERT_EQ(states.size(), t.steps.size());
  for (std::size_t k = 0; k < states.size(); ++k) EXPECT_EQ(states[k], t.steps[k].state);
}

TEST(EnvConfigIo, RoundTripAndValidation) {
  EnvConfig c = EnvConfig::defaults();
  c.timestep = 0.25;
  c.quay.push_back(Segment{{1, 2}, {3, 4.5}});
  std::stringstream ss;
  write_env_config(c, ss);
  const EnvConfig back = read_env_config(ss);
  std::stringstream again;
  write_env_config(back, again);
  EXPECT_EQ(ss.str(), again.str());
  EXPECT_EQ(back.timestep, 0.25);
  EXPECT_EQ(back.quay.size(), 3u);

  EnvConfig bad = EnvConfig::defaults();
  bad.timestep = 0.0;
  EXPECT_THROW(DockingEnv{bad}, Error);
  bad = EnvConfig::defaults();
  bad.footprint = {{0, 0}, {1, 1}};
  EXPECT_THROW(DockingEnv{bad}, Error);
}

}  // namespace
}  // namespace lmt
