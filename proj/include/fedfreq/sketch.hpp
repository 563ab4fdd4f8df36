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


#ifndef FEDFREQ_SKETCH_HPP_
#define FEDFREQ_SKETCH_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fedfreq/core.hpp"

namespace fedfreq::sketch {

inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

// x -> (a*x + b) mod (2^61 - 1), a in [1, p), b in [0, p). The family is
// pairwise independent over the prime field; bucket and sign functions are
// read off the low bits of the field value.
struct PairwiseHash {
  std::uint64_t a = 1;
  std::uint64_t b = 0;

  std::uint64_t operator()(std::uint64_t x) const;
  static PairwiseHash draw(Rng& rng);
};

// One repetition: bucket h(j) = H_b(j) mod w, sign s(j) = +1 if H_s(j) is
// even else -1.
struct RepetitionHash {
  PairwiseHash bucket;
  PairwiseHash sign;
};

struct SketchConfig {
  std::size_t d = 1;
  std::size_t w = 1;  // power of two
  std::size_t t = 1;  // odd
  std::uint64_t seed = 0;

  void validate() const;
};

// ceil(log2(d / gamma)) rounded up to the next odd integer (at least 1).
std::size_t default_repetitions(std::size_t d, double gamma);

// t blocks of w reals, block-major.
class SketchVector {
 public:
  SketchVector(std::size_t t, std::size_t w);

  std::size_t t() const { return t_; }
  std::size_t w() const { return w_; }
  std::span<double> block(std::size_t rep);
  std::span<const double> block(std::size_t rep) const;
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  SketchVector& operator+=(const SketchVector& other);
  SketchVector& operator*=(double scale);

  friend bool operator==(const SketchVector&, const SketchVector&) = default;

 private:
  std::size_t t_;
  std::size_t w_;
  std::vector<double> data_;
};

// Count-sketch S = [S_1; ...; S_t] with (S_i)_{k,j} = s_i(j) * 1{h_i(j) = k},
// held as t hash pairs rather than a dense wt x d matrix.
class SketchMatrix {
 public:
  static SketchMatrix build(const SketchConfig& config);
  // Fixed hashes, for tests and reproductions of specific matrices.
  static SketchMatrix from_hashes(std::size_t d, std::size_t w,
                                  std::vector<RepetitionHash> hashes);

  std::size_t d() const { return d_; }
  std::size_t w() const { return w_; }
  std::size_t t() const { return hashes_.size(); }
  std::span<const RepetitionHash> hashes() const { return hashes_; }

  std::size_t bucket(std::size_t rep, Item item) const;
  int sign(std::size_t rep, Item item) const;

  SketchVector sketch_item(Item item) const;
  SketchVector sketch_histogram(const Histogram& hist) const;

  // s_k(j) * block_k[h_k(j)] for every repetition k.
  std::vector<double> per_repetition_estimates(const SketchVector& sketched,
                                               Item j) const;
  double unsketch_point(const SketchVector& sketched, Item j) const;
  EstimatedHistogram unsketch_all(const SketchVector& sketched) const;

  friend bool operator==(const SketchMatrix& a, const SketchMatrix& b);

 private:
  SketchMatrix(std::size_t d, std::size_t w, std::vector<RepetitionHash> h);
  void check_item(Item item) const;
  void check_shape(const SketchVector& v) const;

  std::size_t d_;
  std::size_t w_;
  std::vector<RepetitionHash> hashes_;
};

inline SketchMatrix build_sketch_matrix(const SketchConfig& config) {
  return SketchMatrix::build(config);
}

}  // namespace fedfreq::sketch

#endif  // FEDFREQ_SKETCH_HPP_
