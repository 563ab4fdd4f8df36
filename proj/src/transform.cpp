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


#include "fedfreq/transform.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <fmt/format.h>

#include "fedfreq/errors.hpp"

namespace fedfreq::transform {

bool is_power_of_two(std::size_t w) { return std::has_single_bit(w); }

std::size_t floor_power_of_two(std::size_t x) {
  if (x == 0) throw InputError("floor_power_of_two(0)");
  return std::bit_floor(x);
}

std::size_t ceil_power_of_two(std::size_t x) {
  if (x == 0) throw InputError("ceil_power_of_two(0)");
  return std::bit_ceil(x);
}

HadamardOrder::HadamardOrder(std::size_t w) : w_(w) {
  if (!is_power_of_two(w)) {
    throw InputError(fmt::format("Hadamard order {} is not a power of two", w));
  }
}

unsigned HadamardOrder::log2() const {
  return static_cast<unsigned>(std::countr_zero(w_));
}

void wht_unnormalized_inplace(std::span<double> v) {
  const std::size_t w = HadamardOrder(v.size()).size();
  for (std::size_t h = 1; h < w; h *= 2) {
    for (std::size_t i = 0; i < w; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double x = v[j];
        const double y = v[j + h];
        v[j] = x + y;
        v[j + h] = x - y;
      }
    }
  }
}

void wht_inplace(std::span<double> v) {
  wht_unnormalized_inplace(v);
  const double scale = 1.0 / std::sqrt(static_cast<double>(v.size()));
  for (double& x : v) x *= scale;
}

std::vector<double> wht(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  wht_inplace(out);
  return out;
}

int hadamard_sign(std::size_t row, std::size_t col) {
  return (std::popcount(row & col) & 1) ? -1 : 1;
}

double flatten_bound_check(std::span<const double> v) {
  const std::vector<double> out = wht(v);
  double m = 0.0;
  for (double x : out) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace fedfreq::transform
