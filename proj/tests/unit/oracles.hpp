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

// Reference implementations used by the tests. They deliberately avoid Eigen
// and the library's own solvers: plain vectors, naive loops, textbook
// Gaussian elimination.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;  // row-major, rows of equal width
using Vec = std::vector<double>;

// Solves A w = b by Gaussian elimination with partial pivoting.
inline Vec solve(Mat A, Vec b) {
  const std::size_t n = A.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    }
    if (A[piv][col] == 0.0) throw std::runtime_error("oracle::solve: singular system");
    std::swap(A[piv], A[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = A[r][col] / A[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  Vec w(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= A[i][c] * w[c];
    w[i] = s / A[i][i];
  }
  return w;
}

struct Linear {
  Mat coef;       // outputs x features
  Vec intercept;  // outputs
};

// Ridge regression with an unpenalized intercept: builds the augmented normal
// equations [X 1]^T [X 1] + diag(ridge, ..., ridge, 0) and solves them once
// per output.
inline Linear ridge_fit(const Mat& X, const Mat& Y, double ridge) {
  const std::size_t n = X.size();
  const std::size_t p = X.front().size();
  const std::size_t q = Y.front().size();
  Mat A(p + 1, Vec(p + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a <= p; ++a) {
      const double xa = a < p ? X[i][a] : 1.0;
      for (std::size_t b = 0; b <= p; ++b) {
        const double xb = b < p ? X[i][b] : 1.0;
        A[a][b] += xa * xb;
      }
    }
  }
  for (std::size_t a = 0; a < p; ++a) A[a][a] += ridge;
  Linear out{Mat(q, Vec(p)), Vec(q)};
  for (std::size_t o = 0; o < q; ++o) {
    Vec rhs(p + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a <= p; ++a) rhs[a] += (a < p ? X[i][a] : 1.0) * Y[i][o];
    }
    const Vec w = solve(A, rhs);
    for (std::size_t a = 0; a < p; ++a) out.coef[o][a] = w[a];
    out.intercept[o] = w[p];
  }
  return out;
}

inline double sse(const Linear& m, const Mat& X, const Mat& Y) {
  double total = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    for (std::size_t o = 0; o < m.intercept.size(); ++o) {
      double pred = m.intercept[o];
      for (std::size_t f = 0; f < X[i].size(); ++f) pred += m.coef[o][f] * X[i][f];
      const double r = Y[i][o] - pred;
      total += r * r;
    }
  }
  return total;
}

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double improvement = 0.0;
  std::size_t left = 0;
  std::size_t right = 0;
};

// Exhaustive scan over caller-supplied thresholds: refits both children from
// scratch for every (feature, threshold) pair. Ties go to the lower feature
// index, then the lower threshold.
inline std::optional<Split> exhaustive_split(const Mat& X, const Mat& Y,
                                             const std::vector<Vec>& thresholds,
                                             std::size_t min_leaf, double ridge) {
  const std::size_t n = X.size();
  if (n < 2 * min_leaf) return std::nullopt;
  const double parent = sse(ridge_fit(X, Y, ridge), X, Y);
  std::optional<Split> best;
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < thresholds.size(); ++f) {
    for (double t : thresholds[f]) {
      Mat XL, YL, XR, YR;
      for (std::size_t i = 0; i < n; ++i) {
        if (X[i][f] <= t) {
          XL.push_back(X[i]);
          YL.push_back(Y[i]);
        } else {
          XR.push_back(X[i]);
          YR.push_back(Y[i]);
        }
      }
      if (XL.size() < min_leaf || XR.size() < min_leaf) continue;
      const double loss = sse(ridge_fit(XL, YL, ridge), XL, YL) + sse(ridge_fit(XR, YR, ridge), XR, YR);
      const bool better = !best || loss < best_loss ||
                          (loss == best_loss && (f < best->feature ||
                                                 (f == best->feature && t < best->threshold)));
      if (better) {
        best = Split{f, t, parent - loss, XL.size(), XR.size()};
        best_loss = loss;
      }
    }
  }
  if (!best || !(best->improvement > 1e-12 * (parent + 1.0))) return std::nullopt;
  return best;
}

// Dense network evaluated with explicit loops: relu on hidden layers, tanh on
// the output layer.
struct Layer {
  Mat W;  // out x in
  Vec b;
};

inline Vec mlp_forward(const std::vector<Layer>& layers, const Vec& x) {
  Vec h = x;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Layer& l = layers[k];
    Vec z(l.W.size(), 0.0);
    for (std::size_t i = 0; i < l.W.size(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < h.size(); ++j) s += l.W[i][j] * h[j];
      z[i] = s + l.b[i];
    }
    const bool last = k + 1 == layers.size();
    for (double& v : z) v = last ? std::tanh(v) : (v > 0.0 ? v : 0.0);
    h = std::move(z);
  }
  return h;
}

}  // namespace oracle
