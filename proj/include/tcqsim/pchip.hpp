// Copyright 2026 The tcqsim Authors
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

// Shape-preserving piecewise cubic Hermite interpolation (Fritsch-Carlson
// slopes with the weighted harmonic mean of Fritsch-Butland at interior
// knots and the one-sided three-point rule at the ends).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tcqsim/errors.hpp"

namespace tcq {

class MonotoneCubic {
 public:
  MonotoneCubic() = default;

  MonotoneCubic(std::span<const double> x, std::span<const double> y) : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
    if (x_.size() != y_.size()) throw ShapeError("MonotoneCubic: x and y differ in length");
    if (x_.size() < 2) throw ShapeError("MonotoneCubic: need at least two knots");
    for (std::size_t i = 1; i < x_.size(); ++i)
      if (!(x_[i] > x_[i - 1])) throw RangeError("MonotoneCubic: knots must be strictly increasing");
    slopes();
  }

  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  std::span<const double> knots() const { return x_; }
  std::span<const double> values() const { return y_; }

  double operator()(double x) const {
    if (x < x_.front() || x > x_.back())
      throw RangeError("MonotoneCubic: " + std::to_string(x) + " outside [" + std::to_string(x_.front()) + ", " +
                       std::to_string(x_.back()) + "]");
    std::size_t k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
    k = std::clamp<std::size_t>(k, 1, x_.size() - 1) - 1;
    const double h = x_[k + 1] - x_[k];
    const double s = (x - x_[k]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y_[k] + (s3 - 2 * s2 + s) * h * d_[k] + (-2 * s3 + 3 * s2) * y_[k + 1] +
           (s3 - s2) * h * d_[k + 1];
  }

 private:
  void slopes() {
    const std::size_t n = x_.size();
    std::vector<double> h(n - 1), m(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      m[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    if (n == 2) {
      d_[0] = d_[1] = m[0];
      return;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (m[k - 1] == 0.0 || m[k] == 0.0 || (m[k - 1] > 0) != (m[k] > 0)) continue;
      const double w1 = 2 * h[k] + h[k - 1];
      const double w2 = h[k] + 2 * h[k - 1];
      d_[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
    }
    d_[0] = end_slope(h[0], h[1], m[0], m[1]);
    d_[n - 1] = end_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
  }

  static double end_slope(double h0, double h1, double m0, double m1) {
    double d = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if ((d > 0) != (m0 > 0) || d == 0.0)
      d = 0.0;
    else if ((m0 > 0) != (m1 > 0) && std::abs(d) > std::abs(3 * m0))
      d = 3 * m0;
    return d;
  }

  std::vector<double> x_, y_, d_;
};

}  // namespace tcq
