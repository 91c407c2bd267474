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
#include <cstdint>
#include <span>
#include <vector>

#include "lmt/common.hpp"

namespace lmt {

/// Multi-output affine model y = coefficients * x + intercepts, one row per
/// output. Operates on normalized features and outputs.
struct LeafModel {
  Matrix coefficients;  // n_outputs x n_features
  Vector intercepts;    // n_outputs
  std::size_t n_train_samples = 0;

  std::size_t n_features() const { return static_cast<std::size_t>(coefficients.cols()); }
  std::size_t n_outputs() const { return static_cast<std::size_t>(coefficients.rows()); }

  static LeafModel zeros(std::size_t n_outputs, std::size_t n_features);
};

/// Signed relative importance of each feature for each output. A row whose
/// contributions are all zero is flagged degenerate and left at zero.
struct Attribution {
  Matrix relative_importance;  // n_outputs x n_features
  std::vector<std::uint8_t> degenerate;

  bool is_degenerate(std::size_t output) const { return degenerate[output] != 0; }
};

/// Sufficient statistics of a sample set for least-squares fitting, stored
/// relative to a shift point to limit cancellation. Layout of the packed
/// buffer: count, sum x, sum y, upper triangle of x x^T, x y^T, y*y.
class LeafStats {
 public:
  LeafStats(std::size_t n_features, std::size_t n_outputs);

  static std::size_t packed_size(std::size_t n_features, std::size_t n_outputs);
  /// Writes the packed contribution of one (already shifted) sample into `out`.
  static void pack_sample(std::span<const double> x, std::span<const double> y,
                          std::span<double> out);

  void add_packed(std::span<const double> packed);
  void add(std::span<const double> x, std::span<const double> y);
  void add(const LeafStats& other);
  LeafStats minus(const LeafStats& other) const;

  double count() const { return data_[0]; }
  std::size_t n_features() const { return p_; }
  std::size_t n_outputs() const { return q_; }
  std::span<const double> packed() const { return data_; }
  std::span<double> packed() { return data_; }

  /// Ridge fit of the shifted samples. `shift_x`/`shift_y` are the offsets
  /// that were subtracted before accumulation; the returned model is in the
  /// original coordinates. `sse` receives the training loss of that fit.
  LeafModel solve(double ridge, std::span<const double> shift_x, std::span<const double> shift_y,
                  double* sse) const;

 private:
  std::size_t p_;
  std::size_t q_;
  std::vector<double> data_;
};

/// Ridge-regularized least squares per output; intercepts are not penalized.
LeafModel fit_leaf(const Matrix& X, const Matrix& Y, double ridge);

/// Same fit restricted to the given rows.
LeafModel fit_leaf(const Matrix& X, const Matrix& Y, std::span<const std::int64_t> rows,
                   double ridge);

void predict_leaf(const LeafModel& model, std::span<const double> x, std::span<double> out);
Vector predict_leaf(const LeafModel& model, std::span<const double> x);

/// Sum over samples and outputs of squared residuals.
double leaf_loss(const LeafModel& model, const Matrix& X, const Matrix& Y);
double leaf_loss(const LeafModel& model, const Matrix& X, const Matrix& Y,
                 std::span<const std::int64_t> rows);

/// I_f = a_f x_f / sum_j |a_j x_j| per output; the intercept is excluded.
Attribution attribute(const LeafModel& model, std::span<const double> x);

inline std::span<const double> row_span(const Matrix& m, Eigen::Index row) {
  return {m.data() + row * m.cols(), static_cast<std::size_t>(m.cols())};
}

}  // namespace lmt
