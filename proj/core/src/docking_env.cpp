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

#include "lmt/docking_env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lmt/random.hpp"

namespace lmt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

// Saturation guards on body velocities.
constexpr double kMaxSurge = 10.0;
constexpr double kMaxSway = 5.0;
constexpr double kMaxYawRate = 1.0;

double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool on_segment(Vec2 p, Vec2 a, Vec2 b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const double d1 = cross(q1, q2, p1);
  const double d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1);
  const double d4 = cross(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  if (d1 == 0 && on_segment(p1, q1, q2)) return true;
  if (d2 == 0 && on_segment(p2, q1, q2)) return true;
  if (d3 == 0 && on_segment(q1, p1, p2)) return true;
  if (d4 == 0 && on_segment(q2, p1, p2)) return true;
  return false;
}

bool inside_convex(const std::vector<Vec2>& poly, Vec2 p) {
  bool pos = false, neg = false;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const double c = cross(poly[i], poly[(i + 1) % poly.size()], p);
    pos = pos || c > 0;
    neg = neg || c < 0;
  }
  return !(pos && neg);
}

Vec2 closest_point(Vec2 p, const Segment& s) {
  const double dx = s.b.x - s.a.x;
  const double dy = s.b.y - s.a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return {s.a.x + t * dx, s.a.y + t * dy};
}

}  // namespace

double wrap_to_pi(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kSuccess: return "success";
    case Outcome::kContact: return "contact";
    case Outcome::kTimeout: return "timeout";
  }
  return "unknown";
}

EnvConfig EnvConfig::defaults() {
  EnvConfig c;
  // Side wall along the starboard side with 4 m clearance, end wall 10 m
  // ahead of the bow.
  c.quay = {
      Segment{{-150.0, 10.0}, {35.0, 10.0}},
      Segment{{35.0, 10.0}, {35.0, -40.0}},
  };
  c.footprint = {{25.0, 0.0}, {18.0, 6.0}, {-25.0, 6.0}, {-25.0, -6.0}, {18.0, -6.0}};
  return c;
}

void EnvConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::kInvalidArgument, std::string("env config: ") + name + " must be > 0");
    }
  };
  positive(timestep, "timestep");
  positive(mass_surge, "mass_surge");
  positive(mass_sway, "mass_sway");
  positive(inertia_yaw, "inertia_yaw");
  if (damping_surge < 0 || damping_sway < 0 || damping_yaw < 0) {
    throw Error(ErrorKind::kInvalidArgument, "env config: damping must be non-negative");
  }
  positive(success_position_tol, "success_position_tol");
  positive(success_heading_tol_deg, "success_heading_tol_deg");
  positive(success_speed_tol, "success_speed_tol");
  positive(start_max_radius, "start_max_radius");
  if (start_min_radius < 0 || start_min_radius > start_max_radius) {
    throw Error(ErrorKind::kInvalidArgument, "env config: need 0 <= start_min_radius <= start_max_radius");
  }
  if (footprint.size() < 3) {
    throw Error(ErrorKind::kInvalidArgument, "env config: footprint needs at least 3 vertices");
  }
  double area = 0.0;
  for (std::size_t i = 0; i < footprint.size(); ++i) {
    const Vec2 a = footprint[i];
    const Vec2 b = footprint[(i + 1) % footprint.size()];
    if (!std::isfinite(a.x) || !std::isfinite(a.y)) {
      throw Error(ErrorKind::kInvalidArgument, "env config: footprint vertex not finite");
    }
    area += a.x * b.y - b.x * a.y;
  }
  if (!(std::abs(area) > 1e-9)) {
    throw Error(ErrorKind::kInvalidArgument, "env config: footprint is degenerate");
  }
  for (const Segment& s : quay) {
    if (!std::isfinite(s.a.x) || !std::isfinite(s.a.y) || !std::isfinite(s.b.x) ||
        !std::isfinite(s.b.y)) {
      throw Error(ErrorKind::kInvalidArgument, "env config: quay segment not finite");
    }
  }
  if (quay.empty()) throw Error(ErrorKind::kInvalidArgument, "env config: no quay segments");
}

GeneralizedForce thrust_to_force(const PhysicalAction& a, const EnvConfig& c) {
  auto azimuth = [](double f_kn, double alpha_deg, Vec2 at, GeneralizedForce& acc) {
    const double f = f_kn * 1e3;
    const double fx = f * std::cos(alpha_deg * kDeg);
    const double fy = f * std::sin(alpha_deg * kDeg);
    acc.surge += fx;
    acc.sway += fy;
    acc.yaw += at.x * fy - at.y * fx;
  };
  GeneralizedForce out;
  azimuth(a.f1, a.alpha1, c.azimuth1, out);
  azimuth(a.f2, a.alpha2, c.azimuth2, out);
  const double t = a.f3 * 1e3;
  out.sway += t;
  out.yaw += c.tunnel.x * t;
  return out;
}

DockingEnv::DockingEnv(EnvConfig config) : config_(std::move(config)) { config_.validate(); }

std::vector<Vec2> DockingEnv::hull(const VesselPose& pose) const {
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  std::vector<Vec2> out;
  out.reserve(config_.footprint.size());
  for (const Vec2& p : config_.footprint) {
    out.push_back({pose.north + c * p.x - s * p.y, pose.east + s * p.x + c * p.y});
  }
  return out;
}

bool DockingEnv::hull_touches_quay(const VesselPose& pose) const {
  const auto poly = hull(pose);
  for (const Segment& seg : config_.quay) {
    if (inside_convex(poly, seg.a) || inside_convex(poly, seg.b)) return true;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      if (segments_intersect(poly[i], poly[(i + 1) % poly.size()], seg.a, seg.b)) return true;
    }
  }
  return false;
}

double DockingEnv::quay_distance(Vec2 point) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Segment& seg : config_.quay) {
    const Vec2 q = closest_point(point, seg);
    best = std::min(best, std::hypot(q.x - point.x, q.y - point.y));
  }
  return best;
}

StateVector DockingEnv::observe() const {
  const double c = std::cos(pose_.heading);
  const double s = std::sin(pose_.heading);
  const double dn = config_.berth.north - pose_.north;
  const double de = config_.berth.east - pose_.east;

  StateVector obs;
  obs.values[0] = c * dn + s * de;
  obs.values[1] = -s * dn + c * de;
  obs.values[2] = wrap_to_pi(config_.berth.heading - pose_.heading);
  obs.values[3] = velocity_.u;
  obs.values[4] = velocity_.v;
  obs.values[5] = velocity_.r;
  obs.values[6] = contact_ ? 1.0 : 0.0;

  const Vec2 origin{pose_.north, pose_.east};
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_point = origin;
  for (const Segment& seg : config_.quay) {
    const Vec2 q = closest_point(origin, seg);
    const double d = std::hypot(q.x - origin.x, q.y - origin.y);
    if (d < best) {
      best = d;
      best_point = q;
    }
  }
  const double on = best_point.x - origin.x;
  const double oe = best_point.y - origin.y;
  obs.values[7] = best;
  obs.values[8] = best > 0.0 ? std::atan2(-s * on + c * oe, c * on + s * oe) : 0.0;
  return obs;
}

bool DockingEnv::success_predicate(const StateVector& obs) const {
  return std::hypot(obs.x_rel(), obs.y_rel()) <= config_.success_position_tol &&
         std::abs(obs.psi_err()) <= config_.success_heading_tol_deg * kDeg &&
         std::hypot(obs.u(), obs.v()) <= config_.success_speed_tol;
}

StateVector DockingEnv::reset(const VesselPose& pose, const VesselVelocity& velocity) {
  VesselPose p = pose;
  p.heading = wrap_to_pi(p.heading);
  if (!std::isfinite(p.north) || !std::isfinite(p.east) || !std::isfinite(p.heading) ||
      !std::isfinite(velocity.u) || !std::isfinite(velocity.v) || !std::isfinite(velocity.r)) {
    throw Error(ErrorKind::kNonFinite, "reset: start state not finite");
  }
  if (hull_touches_quay(p)) {
    throw Error(ErrorKind::kStartInContact, "reset: start pose overlaps the quay");
  }
  pose_ = p;
  velocity_ = velocity;
  contact_ = false;
  terminated_ = false;
  started_ = true;
  steps_ = 0;
  return observe();
}

StateVector DockingEnv::reset(std::uint64_t seed) {
  Rng rng(seed);
  const VesselPose& b = config_.berth;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double radius = rng.uniform(config_.start_min_radius, config_.start_max_radius);
    const double bearing = b.heading + rng.uniform(config_.start_sector_min_deg,
                                                   config_.start_sector_max_deg) * kDeg;
    VesselPose p;
    p.north = b.north + radius * std::cos(bearing);
    p.east = b.east + radius * std::sin(bearing);
    const double los = std::atan2(b.east - p.east, b.north - p.north);
    const double spread = config_.start_heading_spread_deg * kDeg;
    p.heading = wrap_to_pi(los + rng.uniform(-spread, spread));
    VesselVelocity v;
    v.u = rng.uniform(0.0, config_.start_max_surge);
    if (quay_distance({p.north, p.east}) > config_.start_max_quay_distance) continue;
    if (hull_touches_quay(p)) continue;
    return reset(p, v);
  }
  throw Error(ErrorKind::kStartInContact, "reset: no collision-free start found in the start region");
}

StepResult DockingEnv::step(const NormalizedAction& action) {
  if (!started_) throw Error(ErrorKind::kEpisodeTerminated, "step before reset");
  if (terminated_) throw Error(ErrorKind::kEpisodeTerminated, "step on a terminated episode");

  const GeneralizedForce tau = thrust_to_force(scale_action(action), config_);
  const double dt = config_.timestep;
  // Damping is taken implicitly: (M + dt D) nu' = M nu + dt tau.
  VesselVelocity nv;
  nv.u = (config_.mass_surge * velocity_.u + dt * tau.surge) /
         (config_.mass_surge + dt * config_.damping_surge);
  nv.v = (config_.mass_sway * velocity_.v + dt * tau.sway) /
         (config_.mass_sway + dt * config_.damping_sway);
  nv.r = (config_.inertia_yaw * velocity_.r + dt * tau.yaw) /
         (config_.inertia_yaw + dt * config_.damping_yaw);
  nv.u = std::clamp(nv.u, -kMaxSurge, kMaxSurge);
  nv.v = std::clamp(nv.v, -kMaxSway, kMaxSway);
  nv.r = std::clamp(nv.r, -kMaxYawRate, kMaxYawRate);

  const double c = std::cos(pose_.heading);
  const double s = std::sin(pose_.heading);
  pose_.north += dt * (c * nv.u - s * nv.v);
  pose_.east += dt * (s * nv.u + c * nv.v);
  pose_.heading = wrap_to_pi(pose_.heading + dt * nv.r);
  velocity_ = nv;
  ++steps_;

  StepResult out;
  if (hull_touches_quay(pose_)) {
    contact_ = true;
    terminated_ = true;
    out.contact = true;
  }
  out.observation = observe();
  if (!contact_ && success_predicate(out.observation)) {
    terminated_ = true;
    out.success = true;
  }
  return out;
}

Controller make_controller(const TeacherPolicy& teacher) {
  return [teacher](const StateVector& s) { return teacher.act(s); };
}

Controller make_controller(const Tree& tree) {
  if (tree.n_features() != kNumFeatures || tree.n_outputs() != kNumOutputs) {
    throw Error(ErrorKind::kDimensionMismatch, "controller tree must map 9 features to 5 outputs");
  }
  return [&tree](const StateVector& s) {
    std::array<double, kNumFeatures> x = s.values;
    if (!tree.input_bounds().empty()) tree.input_bounds().normalize(s.values, x);
    NormalizedAction a{};
    tree.predict(x, a);
    return a;
  };
}

AttributionRecord explain_state(const Tree& tree, const StateVector& state) {
  std::array<double, kNumFeatures> x = state.values;
  if (!tree.input_bounds().empty()) tree.input_bounds().normalize(state.values, x);
  Explanation e = tree.explain(x);
  return {e.leaf_id, std::move(e.attribution)};
}

Trajectory run_episode(DockingEnv& env, const Controller& controller, std::size_t max_steps,
                       const Tree* explainer) {
  Trajectory traj;
  traj.start_pose = env.pose();
  traj.start_velocity = env.velocity();
  StateVector obs = env.observe();
  traj.outcome = Outcome::kTimeout;
  for (std::size_t k = 0; k < max_steps && !env.terminated(); ++k) {
    TrajectoryStep row;
    row.step = k;
    row.pose = env.pose();
    row.state = obs;
    row.action = controller(obs);
    row.physical = scale_action(row.action);
    if (explainer != nullptr) row.explanation = explain_state(*explainer, obs);
    const StepResult res = env.step(row.action);
    row.contact = res.contact;
    row.success = res.success;
    obs = res.observation;
    traj.steps.push_back(std::move(row));
    if (res.contact) traj.outcome = Outcome::kContact;
    if (res.success) traj.outcome = Outcome::kSuccess;
  }
  traj.final_pose = env.pose();
  traj.final_state = obs;
  return traj;
}

}  // namespace lmt
