//
// Copyright 2026 The FedFreq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//


#ifndef FEDFREQ_TESTS_ORACLES_HPP_
#define FEDFREQ_TESTS_ORACLES_HPP_

// Slow, independent reference implementations used to check the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

// Dense orthonormal Hadamard matrix by the Sylvester recursion.
inline std::vector<std::vector<double>> dense_hadamard(std::size_t w) {
  std::vector<std::vector<double>> h{{1.0}};
  while (h.size() < w) {
    const std::size_t k = h.size();
    std::vector<std::vector<double>> next(2 * k, std::vector<double>(2 * k));
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double v = h[i][j] / std::sqrt(2.0);
        next[i][j] = v;
        next[i][j + k] = v;
        next[i + k][j] = v;
        next[i + k][j + k] = -v;
      }
    }
    h = std::move(next);
  }
  return h;
}

inline std::vector<double> mat_vec(const std::vector<std::vector<double>>& m,
                                   const std::vector<double>& v) {
  std::vector<double> out(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
  }
  return out;
}

// Pascal's triangle binomial coefficient.
inline std::uint64_t pascal(std::size_t n, std::size_t k) {
  std::vector<std::uint64_t> row(n + 1, 0);
  row[0] = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = i; j > 0; --j) row[j] += row[j - 1];
  }
  return k <= n ? row[k] : 0;
}

// Every count vector of length d with total n, via odometer over [0, n]^d
// with a sum filter. Exponential; tiny d and n only.
inline std::vector<std::vector<std::uint64_t>> all_histograms(std::size_t d,
                                                              std::size_t n) {
  std::vector<std::vector<std::uint64_t>> out;
  std::vector<std::uint64_t> c(d, 0);
  for (;;) {
    std::uint64_t s = 0;
    for (auto x : c) s += x;
    if (s == n) out.push_back(c);
    std::size_t k = 0;
    while (k < d && c[k] == n) c[k++] = 0;
    if (k == d) break;
    ++c[k];
  }
  return out;
}

// Projection onto {v >= 0, sum v = total} by bisection on the shift tau in
// max(v - tau, 0).
inline std::vector<double> simplex_bisect(const std::vector<double>& v,
                                          double total) {
  double lo = *std::min_element(v.begin(), v.end()) - total - 1.0;
  double hi = *std::max_element(v.begin(), v.end());
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double s = 0.0;
    for (double x : v) s += std::max(x - mid, 0.0);
    (s > total ? lo : hi) = mid;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::max(v[i] - 0.5 * (lo + hi), 0.0);
  }
  return out;
}

// Standard error of a sample mean.
inline double std_error(double sum, double sum_sq, std::size_t count) {
  const double mean = sum / static_cast<double>(count);
  const double var =
      (sum_sq / static_cast<double>(count) - mean * mean) *
      static_cast<double>(count) / static_cast<double>(count - 1);
  return std::sqrt(std::max(var, 0.0) / static_cast<double>(count));
}

}  // namespace oracle

#endif  // FEDFREQ_TESTS_ORACLES_HPP_
