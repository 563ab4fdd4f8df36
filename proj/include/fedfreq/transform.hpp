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


#ifndef FEDFREQ_TRANSFORM_HPP_
#define FEDFREQ_TRANSFORM_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace fedfreq::transform {

bool is_power_of_two(std::size_t w);

// Largest power of two <= x (x >= 1).
std::size_t floor_power_of_two(std::size_t x);

// Smallest power of two >= x (x >= 1).
std::size_t ceil_power_of_two(std::size_t x);

// A validated transform length w = 2^k.
class HadamardOrder {
 public:
  explicit HadamardOrder(std::size_t w);
  std::size_t size() const { return w_; }
  unsigned log2() const;

 private:
  std::size_t w_;
};

// Orthonormal Walsh-Hadamard transform, in place: v <- H_w v where
// H_1 = [1] and each doubling step carries a 1/sqrt(2) factor, so every
// entry of H_w is +-1/sqrt(w) and H_w H_w = I. Iterative butterfly,
// O(w log w). Throws InputError unless v.size() is a power of two.
void wht_inplace(std::span<double> v);

std::vector<double> wht(std::span<const double> v);

// Unnormalized butterfly (entries of the implied matrix are +-1).
void wht_unnormalized_inplace(std::span<double> v);

// Sign of entry (row, col) of the unnormalized Hadamard matrix:
// (-1)^popcount(row & col).
int hadamard_sign(std::size_t row, std::size_t col);

// ||wht(v)||_inf. For v = c * e_j this is |c| / sqrt(w), which bounds the
// per-coordinate sensitivity of a flattened one-hot block.
double flatten_bound_check(std::span<const double> v);

}  // namespace fedfreq::transform

#endif  // FEDFREQ_TRANSFORM_HPP_
