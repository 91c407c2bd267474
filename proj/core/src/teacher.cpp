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

#include "lmt/teacher.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <string>

#include "lmt/io.hpp"
#include "lmt/random.hpp"

namespace lmt {

// ---------------------------------------------------------------------------
// Action scaling

PhysicalAction scale_action(std::span<const double> normalized) {
  if (normalized.size() != kNumOutputs) {
    throw Error(ErrorKind::kDimensionMismatch, "action must have 5 components");
  }
  std::array<double, kNumOutputs> out{};
  for (std::size_t i = 0; i < kNumOutputs; ++i) {
    const double a = std::clamp(normalized[i], -1.0, 1.0);
    const auto& range = kActionRanges[i];
    out[i] = 0.5 * (range.lo + range.hi) + 0.5 * range.span() * a;
  }
  return PhysicalAction::from_array(out);
}

NormalizedAction unscale_action(const PhysicalAction& physical) {
  const auto p = physical.as_array();
  NormalizedAction out{};
  for (std::size_t i = 0; i < kNumOutputs; ++i) {
    const auto& range = kActionRanges[i];
    out[i] = (p[i] - 0.5 * (range.lo + range.hi)) / (0.5 * range.span());
  }
  return out;
}

// ---------------------------------------------------------------------------
// MLP

MlpPolicy::MlpPolicy(std::vector<DenseLayer> layers, FeatureBounds input_bounds)
    : layers_(std::move(layers)), input_bounds_(std::move(input_bounds)) {
  if (layers_.empty()) throw Error(ErrorKind::kDimensionMismatch, "network has no layers");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const DenseLayer& l = layers_[k];
    if (l.bias.size() != l.weights.rows()) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "layer " + std::to_string(k) + ": bias length does not match weight rows");
    }
    if (k > 0 && l.weights.cols() != layers_[k - 1].weights.rows()) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "layer " + std::to_string(k) + ": input width does not match previous layer");
    }
    if (!l.weights.allFinite() || !l.bias.allFinite()) {
      throw Error(ErrorKind::kNonFinite, "layer " + std::to_string(k) + " has non-finite values");
    }
    const bool last = k + 1 == layers_.size();
    const Activation expected = last ? Activation::kTanh : Activation::kRelu;
    if (l.activation != expected) {
      throw Error(ErrorKind::kUnsupportedActivation,
                  last ? "output layer must use tanh" : "hidden layers must use relu");
    }
  }
  if (!input_bounds_.empty()) {
    input_bounds_.validate();
    if (input_bounds_.size() != input_dim()) {
      throw Error(ErrorKind::kDimensionMismatch, "input bounds do not match network input width");
    }
  }
}

MlpPolicy MlpPolicy::random(std::uint64_t seed, std::span<const std::size_t> hidden,
                            std::size_t input_dim, std::size_t output_dim, double scale) {
  Rng rng(seed);
  std::vector<DenseLayer> layers;
  std::size_t fan_in = input_dim;
  auto make = [&](std::size_t out, Activation act) {
    DenseLayer l;
    const double s = scale / std::sqrt(static_cast<double>(fan_in));
    l.weights.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(fan_in));
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = rng.uniform(-s, s);
    }
    l.bias.resize(static_cast<Eigen::Index>(out));
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = rng.uniform(-s, s);
    l.activation = act;
    layers.push_back(std::move(l));
    fan_in = out;
  };
  for (std::size_t h : hidden) make(h, Activation::kRelu);
  make(output_dim, Activation::kTanh);
  FeatureBounds bounds;
  if (input_dim == kNumFeatures) bounds = FeatureBounds::docking_defaults();
  return MlpPolicy(std::move(layers), std::move(bounds));
}

std::size_t MlpPolicy::input_dim() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weights.cols());
}

std::size_t MlpPolicy::output_dim() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.back().weights.rows());
}

Eigen::VectorXd MlpPolicy::forward(std::span<const double> x) const {
  if (x.size() != input_dim()) {
    throw Error(ErrorKind::kDimensionMismatch, "network expects " + std::to_string(input_dim()) +
                                                   " inputs, got " + std::to_string(x.size()));
  }
  Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  for (const DenseLayer& l : layers_) {
    Eigen::VectorXd z = l.weights * h + l.bias;
    if (l.activation == Activation::kRelu) {
      h = z.cwiseMax(0.0);
    } else {
      h = z.array().tanh().matrix();
    }
  }
  return h;
}

NormalizedAction MlpPolicy::act(const StateVector& state) const {
  if (output_dim() != kNumOutputs) {
    throw Error(ErrorKind::kDimensionMismatch, "network output is not 5-wide");
  }
  std::array<double, kNumFeatures> x{};
  if (input_bounds_.empty()) {
    x = state.values;
  } else {
    input_bounds_.normalize(state.values, x);
  }
  const Eigen::VectorXd y = forward(x);
  NormalizedAction out{};
  for (std::size_t i = 0; i < kNumOutputs; ++i) out[i] = y(static_cast<Eigen::Index>(i));
  return out;
}

namespace {

constexpr std::string_view kMlpMagic = "lmt-mlp";
constexpr int kMlpVersion = 1;

std::string_view activation_tag(Activation a) { return a == Activation::kRelu ? "relu" : "tanh"; }

}  // namespace

void write_mlp(const MlpPolicy& policy, std::ostream& os) {
  os << kMlpMagic << ' ' << kMlpVersion << '\n';
  os << "input_dim " << policy.input_dim() << '\n';
  os << "bounds";
  if (policy.input_bounds().empty()) {
    os << " none";
  } else {
    for (std::size_t i = 0; i < policy.input_bounds().size(); ++i) {
      os << ' ' << format_double(policy.input_bounds().lo[i]) << ' '
         << format_double(policy.input_bounds().hi[i]);
    }
  }
  os << '\n';
  os << "layers " << policy.layers().size() << '\n';
  for (const DenseLayer& l : policy.layers()) {
    os << "layer " << l.weights.rows() << ' ' << l.weights.cols() << ' '
       << activation_tag(l.activation) << '\n';
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      os << 'w';
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) os << ' ' << format_double(l.weights(r, c));
      os << '\n';
    }
    os << 'b';
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) os << ' ' << format_double(l.bias(r));
    os << '\n';
  }
  os << "end\n";
}

MlpPolicy read_mlp(std::istream& is) {
  LineReader in(is, "weights");
  auto header = in.tokens();
  if (header.size() != 2 || header[0] != kMlpMagic) in.fail("missing 'lmt-mlp' header");
  if (parse_int(header[1]) != kMlpVersion) {
    throw Error(ErrorKind::kVersionMismatch, "weights file version " + header[1] + " not supported");
  }
  const auto input_dim = static_cast<std::size_t>(in.keyed_int("input_dim"));
  FeatureBounds bounds;
  {
    auto t = in.tokens();
    if (t.empty() || t[0] != "bounds") in.fail("missing bounds line");
    if (!(t.size() == 2 && t[1] == "none")) {
      if (t.size() != 1 + 2 * input_dim) {
        throw Error(ErrorKind::kDimensionMismatch, "bounds do not match input_dim");
      }
      for (std::size_t i = 0; i < input_dim; ++i) {
        bounds.lo.push_back(parse_double(t[1 + 2 * i]));
        bounds.hi.push_back(parse_double(t[2 + 2 * i]));
      }
    }
  }
  const auto n_layers = static_cast<std::size_t>(in.keyed_int("layers"));
  if (n_layers == 0) in.fail("network has no layers");
  std::vector<DenseLayer> layers;
  std::size_t expected_in = input_dim;
  for (std::size_t k = 0; k < n_layers; ++k) {
    auto t = in.tokens();
    if (t.size() != 4 || t[0] != "layer") in.fail("expected 'layer <out> <in> <activation>'");
    const auto out = static_cast<std::size_t>(parse_int(t[1]));
    const auto inw = static_cast<std::size_t>(parse_int(t[2]));
    if (inw != expected_in) {
      throw Error(ErrorKind::kDimensionMismatch, "layer " + std::to_string(k) + " input width " +
                                                     t[2] + " does not chain (expected " +
                                                     std::to_string(expected_in) + ")");
    }
    DenseLayer l;
    if (t[3] == "relu") {
      l.activation = Activation::kRelu;
    } else if (t[3] == "tanh") {
      l.activation = Activation::kTanh;
    } else {
      throw Error(ErrorKind::kUnsupportedActivation, "unsupported activation '" + t[3] + "'");
    }
    l.weights.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(inw));
    for (std::size_t r = 0; r < out; ++r) {
      auto row = in.tokens();
      if (row.size() != inw + 1 || row[0] != "w") {
        throw Error(ErrorKind::kDimensionMismatch, "weight row " + std::to_string(r) + " of layer " +
                                                       std::to_string(k) + " has wrong width");
      }
      for (std::size_t c = 0; c < inw; ++c) {
        l.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_double(row[c + 1]);
      }
    }
    auto b = in.tokens();
    if (b.size() != out + 1 || b[0] != "b") {
      throw Error(ErrorKind::kDimensionMismatch, "bias of layer " + std::to_string(k) + " has wrong width");
    }
    l.bias.resize(static_cast<Eigen::Index>(out));
    for (std::size_t r = 0; r < out; ++r) l.bias(static_cast<Eigen::Index>(r)) = parse_double(b[r + 1]);
    layers.push_back(std::move(l));
    expected_in = out;
  }
  auto end = in.tokens();
  if (end.size() != 1 || end[0] != "end") in.fail("missing 'end' marker");
  return MlpPolicy(std::move(layers), std::move(bounds));
}

void save_mlp(const MlpPolicy& policy, const std::filesystem::path& path) {
  write_text_file_atomic(path, [&](std::ostream& os) { write_mlp(policy, os); });
}

MlpPolicy load_mlp(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIo, "cannot open weights file " + path.string());
  MlpPolicy policy = read_mlp(is);
  if (policy.input_dim() != kNumFeatures || policy.output_dim() != kNumOutputs) {
    throw Error(ErrorKind::kDimensionMismatch,
                "docking policy must map 9 inputs to 5 outputs, file has " +
                    std::to_string(policy.input_dim()) + " -> " + std::to_string(policy.output_dim()));
  }
  return policy;
}

// ---------------------------------------------------------------------------
// Scripted controller

namespace {

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::remainder(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

double soft_limit(double value, double limit) { return limit * std::tanh(value / limit); }

}  // namespace

ScriptedController::ForceDemand ScriptedController::demand(const StateVector& s) const {
  const ScriptedParams& p = params_;
  // Heading relative to the berth axis, and the berth offset in axis frame
  // (along > 0: berth ahead along the axis, cross > 0: berth to starboard).
  const double theta = -s.psi_err();
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const double along = ct * s.x_rel() - st * s.y_rel();
  const double cross = st * s.x_rel() + ct * s.y_rel();

  // Berth-frame velocity field; linear in the offsets near the berth.
  const double vmax = p.max_speed;
  double va = vmax * std::tanh((along - p.approach_slope * std::abs(cross)) / p.approach_radius);
  double vc = vmax * std::tanh(cross / p.cross_radius);
  const double speed = std::hypot(va, vc);
  if (speed > vmax) {
    va *= vmax / speed;
    vc *= vmax / speed;
  }
  const double u_ref = ct * va + st * vc;
  const double v_ref = -st * va + ct * vc;

  // Far out, face along the course; close in, hold the berth heading.
  const double d2 = along * along + cross * cross;
  const double w = d2 / (d2 + p.heading_blend_radius * p.heading_blend_radius);
  const double course = std::atan2(vc, va);
  const double theta_ref = std::atan2(w * std::sin(course), w * std::cos(course) + (1.0 - w));
  const double yaw_err = wrap_angle(theta_ref - theta);

  const double surge = p.mass_surge * p.velocity_gain * (u_ref - s.u()) + p.damping_surge * u_ref;
  const double sway = p.mass_sway * p.velocity_gain * (v_ref - s.v()) + p.damping_sway * v_ref;
  const double wn = p.yaw_bandwidth;
  const double yaw =
      p.inertia_yaw * (wn * wn * yaw_err - 2.0 * p.yaw_damping_ratio * wn * s.r());

  return {soft_limit(surge, p.max_surge_force), soft_limit(sway, p.max_sway_force),
          soft_limit(yaw, p.max_yaw_moment)};
}

PhysicalAction ScriptedController::allocate(const ForceDemand& dem) const {
  const ScriptedParams& p = params_;
  const double pivot = p.steering_pivot;
  // Azimuth 1 delivers (pivot, S), azimuth 2 delivers (surge - pivot, 0).
  // Their yaw moment is x_s S + y (2 pivot - surge); the tunnel T and S
  // then solve S + T = sway, x_s S + x_b T = yaw - y (2 pivot - surge).
  // Unsaturated, S = sway - T exactly.
  const double yaw_left = dem.yaw - p.azimuth_y * (2.0 * pivot - dem.surge);
  const double lever = p.tunnel_x - p.azimuth_x;
  const double tunnel_n = std::clamp((yaw_left - p.azimuth_x * dem.sway) / lever,
                                     kActionRanges[2].lo * 1e3, kActionRanges[2].hi * 1e3);
  // With the tunnel saturated, yaw keeps priority and sway takes the rest.
  const double steer_lateral = (yaw_left - p.tunnel_x * tunnel_n) / p.azimuth_x;

  const double f1 = std::hypot(steer_lateral, pivot);
  const double alpha1 = std::atan2(steer_lateral, pivot);
  const double f2 = dem.surge - pivot;

  return {std::clamp(f1 * 1e-3, kActionRanges[0].lo, kActionRanges[0].hi),
          std::clamp(f2 * 1e-3, kActionRanges[1].lo, kActionRanges[1].hi), tunnel_n * 1e-3,
          alpha1 * 180.0 / std::numbers::pi, 0.0};
}

NormalizedAction ScriptedController::act(const StateVector& state) const {
  if (state.contact() >= 0.5) return unscale_action(PhysicalAction{});
  return unscale_action(allocate(demand(state)));
}

// ---------------------------------------------------------------------------
// Teacher

TeacherPolicy::TeacherPolicy(MlpPolicy mlp) {
  if (mlp.input_dim() != kNumFeatures || mlp.output_dim() != kNumOutputs) {
    throw Error(ErrorKind::kDimensionMismatch,
                "teacher network must map " + std::to_string(kNumFeatures) + " inputs to " +
                    std::to_string(kNumOutputs) + " outputs, got " + std::to_string(mlp.input_dim()) +
                    " -> " + std::to_string(mlp.output_dim()));
  }
  impl_ = std::move(mlp);
}

NormalizedAction TeacherPolicy::act(const StateVector& state) const {
  NormalizedAction a = std::visit(
      [&](const auto& impl) -> NormalizedAction {
        using T = std::decay_t<decltype(impl)>;
        if constexpr (std::is_same_v<T, CustomPolicy>) {
          return impl.fn(state);
        } else {
          return impl.act(state);
        }
      },
      impl_);
  for (double& v : a) v = std::clamp(v, -1.0, 1.0);
  return a;
}

std::string TeacherPolicy::name() const {
  return std::visit(
      [](const auto& impl) -> std::string {
        using T = std::decay_t<decltype(impl)>;
        if constexpr (std::is_same_v<T, MlpPolicy>) {
          return "mlp";
        } else if constexpr (std::is_same_v<T, ScriptedController>) {
          return "scripted";
        } else {
          return impl.name;
        }
      },
      impl_);
}

TeacherPolicy TeacherPolicy::resolve(const std::string& spec) {
  if (spec == "scripted") return TeacherPolicy(ScriptedController{});
  if (spec.rfind("mlp:", 0) == 0) return TeacherPolicy(load_mlp(spec.substr(4)));
  throw Error(ErrorKind::kInvalidArgument,
              "unknown teacher '" + spec + "' (expected 'scripted' or 'mlp:<path>')");
}

}  // namespace lmt
