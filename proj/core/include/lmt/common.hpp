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
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace lmt {

/// Sample matrices are stored one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr std::size_t kNumFeatures = 9;
inline constexpr std::size_t kNumOutputs = 5;

/// Observation order: relative berth pose, body velocities, contact flag,
/// nearest obstacle distance and bearing.
inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "x_rel", "y_rel", "psi_err", "u", "v", "r", "contact", "d_obs", "psi_obs"};

/// Action order: azimuth forces, tunnel force, azimuth angles.
inline constexpr std::array<std::string_view, kNumOutputs> kActionNames = {
    "f1", "f2", "f3", "alpha1", "alpha2"};

enum class ErrorKind {
  kInvalidArgument,
  kDimensionMismatch,
  kMalformedFile,
  kVersionMismatch,
  kUnsupportedActivation,
  kNonFinite,
  kIo,
  kEpisodeTerminated,
  kStartInContact,
};

std::string_view to_string(ErrorKind kind);

/// Every library failure is reported through this exception; `kind()`
/// distinguishes the failure modes callers are expected to handle.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Shortest text with at least 17 significant digits; parses back bit-exact.
std::string format_double(double value);

/// Strict parse of a whole token; throws kMalformedFile on junk.
double parse_double(std::string_view token);
long long parse_int(std::string_view token);

}  // namespace lmt
