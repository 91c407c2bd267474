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

#include "lmt/linear_leaf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lmt {

namespace {

// Packed offsets.
struct Layout {
  std::size_t p, q;
  std::size_t sx() const { return 1; }
  std::size_t sy() const { return 1 + p; }
  std::size_t xx() const { return 1 + p + q; }
  std::size_t xy() const { return xx() + p * (p + 1) / 2; }
  std::size_t yy() const { return xy() + p * q; }
  std::size_t size() const { return yy() + q; }
};

void check_dims(const Matrix& X, const Matrix& Y) {
  if (X.rows() != Y.rows()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "sample count mismatch: X has " + std::to_string(X.rows()) + " rows, Y has " +
                    std::to_string(Y.rows()));
  }
}

}  // namespace

LeafModel LeafModel::zeros(std::size_t n_outputs, std::size_t n_features) {
  LeafModel m;
  m.coefficients = Matrix::Zero(static_cast<Eigen::Index>(n_outputs),
                                static_cast<Eigen::Index>(n_features));
  m.intercepts = Vector::Zero(static_cast<Eigen::Index>(n_outputs));
  return m;
}

LeafStats::LeafStats(std::size_t n_features, std::size_t n_outputs)
    : p_(n_features), q_(n_outputs), data_(packed_size(n_features, n_outputs), 0.0) {}

std::size_t LeafStats::packed_size(std::size_t n_features, std::size_t n_outputs) {
  return Layout{n_features, n_outputs}.size();
}

void LeafStats::pack_sample(std::span<const double> x, std::span<const double> y,
                            std::span<double> out) {
  const Layout L{x.size(), y.size()};
  out[0] = 1.0;
  std::copy(x.begin(), x.end(), out.begin() + L.sx());
  std::copy(y.begin(), y.end(), out.begin() + L.sy());
  double* xx = out.data() + L.xx();
  for (std::size_t i = 0; i < L.p; ++i) {
    for (std::size_t j = i; j < L.p; ++j) *xx++ = x[i] * x[j];
  }
  double* xy = out.data() + L.xy();
  for (std::size_t i = 0; i < L.p; ++i) {
    for (std::size_t o = 0; o < L.q; ++o) *xy++ = x[i] * y[o];
  }
  double* yy = out.data() + L.yy();
  for (std::size_t o = 0; o < L.q; ++o) yy[o] = y[o] * y[o];
}

void LeafStats::add_packed(std::span<const double> packed) {
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += packed[k];
}

void LeafStats::add(std::span<const double> x, std::span<const double> y) {
  std::vector<double> buf(data_.size());
  pack_sample(x, y, buf);
  add_packed(buf);
}

void LeafStats::add(const LeafStats& other) { add_packed(other.data_); }

LeafStats LeafStats::minus(const LeafStats& other) const {
  LeafStats out = *this;
  for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] -= other.data_[k];
  return out;
}

LeafModel LeafStats::solve(double ridge, std::span<const double> shift_x,
                           std::span<const double> shift_y, double* sse) const {
  const Layout L{p_, q_};
  const double n = data_[0];
  if (!(n > 0.0)) throw Error(ErrorKind::kInvalidArgument, "cannot fit a leaf on zero samples");
  const auto P = static_cast<Eigen::Index>(p_);
  const auto Q = static_cast<Eigen::Index>(q_);

  Vector mx(P), my(Q);
  for (Eigen::Index i = 0; i < P; ++i) mx(i) = data_[L.sx() + i] / n;
  for (Eigen::Index o = 0; o < Q; ++o) my(o) = data_[L.sy() + o] / n;

  Eigen::MatrixXd cxx(P, P);
  {
    const double* xx = data_.data() + L.xx();
    for (Eigen::Index i = 0; i < P; ++i) {
      for (Eigen::Index j = i; j < P; ++j) {
        const double v = *xx++ - n * mx(i) * mx(j);
        cxx(i, j) = v;
        cxx(j, i) = v;
      }
    }
  }
  Eigen::MatrixXd cxy(P, Q);
  {
    const double* xy = data_.data() + L.xy();
    for (Eigen::Index i = 0; i < P; ++i) {
      for (Eigen::Index o = 0; o < Q; ++o) cxy(i, o) = *xy++ - n * mx(i) * my(o);
    }
  }

  Eigen::MatrixXd sys = cxx;
  sys.diagonal().array() += ridge;
  Eigen::MatrixXd at;  // P x Q
  bool solved = false;
  if (ridge > 0.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(sys);
    if (llt.info() == Eigen::Success) {
      at = llt.solve(cxy);
      solved = at.allFinite();
    }
  }
  if (!solved) at = sys.completeOrthogonalDecomposition().solve(cxy);

  LeafModel model;
  model.coefficients = at.transpose();
  model.intercepts.resize(Q);
  for (Eigen::Index o = 0; o < Q; ++o) {
    double c = my(o) + shift_y[static_cast<std::size_t>(o)];
    for (Eigen::Index i = 0; i < P; ++i) {
      c -= at(i, o) * (mx(i) + shift_x[static_cast<std::size_t>(i)]);
    }
    model.intercepts(o) = c;
  }
  model.n_train_samples = static_cast<std::size_t>(std::llround(n));

  if (sse != nullptr) {
    double total = 0.0;
    for (Eigen::Index o = 0; o < Q; ++o) {
      const double cyy = data_[L.yy() + o] - n * my(o) * my(o);
      const auto a = at.col(o);
      const double v = cyy - 2.0 * a.dot(cxy.col(o)) + a.dot(cxx * a);
      total += std::max(v, 0.0);
    }
    *sse = total;
  }
  return model;
}

namespace {

template <typename RowFn>
LeafModel fit_rows(const Matrix& X, const Matrix& Y, std::size_t count, RowFn row_at,
                   double ridge) {
  if (count == 0) throw Error(ErrorKind::kInvalidArgument, "cannot fit a leaf on zero samples");
  const auto p = static_cast<std::size_t>(X.cols());
  const auto q = static_cast<std::size_t>(Y.cols());
  std::vector<double> sx(p, 0.0), sy(q, 0.0);
  for (std::size_t k = 0; k < count; ++k) {
    const Eigen::Index r = row_at(k);
    for (std::size_t i = 0; i < p; ++i) sx[i] += X(r, static_cast<Eigen::Index>(i));
    for (std::size_t o = 0; o < q; ++o) sy[o] += Y(r, static_cast<Eigen::Index>(o));
  }
  for (auto& v : sx) v /= static_cast<double>(count);
  for (auto& v : sy) v /= static_cast<double>(count);

  LeafStats stats(p, q);
  std::vector<double> xs(p), ys(q), buf(LeafStats::packed_size(p, q));
  for (std::size_t k = 0; k < count; ++k) {
    const Eigen::Index r = row_at(k);
    for (std::size_t i = 0; i < p; ++i) xs[i] = X(r, static_cast<Eigen::Index>(i)) - sx[i];
    for (std::size_t o = 0; o < q; ++o) ys[o] = Y(r, static_cast<Eigen::Index>(o)) - sy[o];
    LeafStats::pack_sample(xs, ys, buf);
    stats.add_packed(buf);
  }
  return stats.solve(ridge, sx, sy, nullptr);
}

}  // namespace

LeafModel fit_leaf(const Matrix& X, const Matrix& Y, double ridge) {
  check_dims(X, Y);
  if (ridge < 0.0) throw Error(ErrorKind::kInvalidArgument, "ridge must be non-negative");
  return fit_rows(X, Y, static_cast<std::size_t>(X.rows()),
                  [](std::size_t k) { return static_cast<Eigen::Index>(k); }, ridge);
}

LeafModel fit_leaf(const Matrix& X, const Matrix& Y, std::span<const std::int64_t> rows,
                   double ridge) {
  check_dims(X, Y);
  if (ridge < 0.0) throw Error(ErrorKind::kInvalidArgument, "ridge must be non-negative");
  return fit_rows(X, Y, rows.size(),
                  [rows](std::size_t k) { return static_cast<Eigen::Index>(rows[k]); }, ridge);
}

void predict_leaf(const LeafModel& model, std::span<const double> x, std::span<double> out) {
  const auto p = model.coefficients.cols();
  if (static_cast<Eigen::Index>(x.size()) != p) {
    throw Error(ErrorKind::kDimensionMismatch, "feature vector has " + std::to_string(x.size()) +
                                                   " entries, model expects " + std::to_string(p));
  }
  for (Eigen::Index o = 0; o < model.coefficients.rows(); ++o) {
    const double* a = model.coefficients.data() + o * p;
    double acc = model.intercepts(o);
    for (Eigen::Index i = 0; i < p; ++i) acc += a[i] * x[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(o)] = acc;
  }
}

Vector predict_leaf(const LeafModel& model, std::span<const double> x) {
  Vector out(model.coefficients.rows());
  predict_leaf(model, x, std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

namespace {

template <typename RowFn>
double loss_rows(const LeafModel& model, const Matrix& X, const Matrix& Y, std::size_t count,
                 RowFn row_at) {
  std::vector<double> pred(static_cast<std::size_t>(Y.cols()));
  double total = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const Eigen::Index r = row_at(k);
    predict_leaf(model, row_span(X, r), pred);
    for (Eigen::Index o = 0; o < Y.cols(); ++o) {
      const double e = Y(r, o) - pred[static_cast<std::size_t>(o)];
      total += e * e;
    }
  }
  return total;
}

}  // namespace

double leaf_loss(const LeafModel& model, const Matrix& X, const Matrix& Y) {
  check_dims(X, Y);
  return loss_rows(model, X, Y, static_cast<std::size_t>(X.rows()),
                   [](std::size_t k) { return static_cast<Eigen::Index>(k); });
}

double leaf_loss(const LeafModel& model, const Matrix& X, const Matrix& Y,
                 std::span<const std::int64_t> rows) {
  check_dims(X, Y);
  return loss_rows(model, X, Y, rows.size(),
                   [rows](std::size_t k) { return static_cast<Eigen::Index>(rows[k]); });
}

Attribution attribute(const LeafModel& model, std::span<const double> x) {
  const auto p = model.coefficients.cols();
  const auto q = model.coefficients.rows();
  if (static_cast<Eigen::Index>(x.size()) != p) {
    throw Error(ErrorKind::kDimensionMismatch, "feature vector has " + std::to_string(x.size()) +
                                                   " entries, model expects " + std::to_string(p));
  }
  Attribution out;
  out.relative_importance = Matrix::Zero(q, p);
  out.degenerate.assign(static_cast<std::size_t>(q), 0);
  for (Eigen::Index o = 0; o < q; ++o) {
    double denom = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
      denom += std::abs(model.coefficients(o, i) * x[static_cast<std::size_t>(i)]);
    }
    if (!(denom > 0.0) || !std::isfinite(denom)) {
      out.degenerate[static_cast<std::size_t>(o)] = 1;
      continue;
    }
    for (Eigen::Index i = 0; i < p; ++i) {
      out.relative_importance(o, i) =
          model.coefficients(o, i) * x[static_cast<std::size_t>(i)] / denom;
    }
  }
  return out;
}

}  // namespace lmt
