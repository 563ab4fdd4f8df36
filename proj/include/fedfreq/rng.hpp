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


#ifndef FEDFREQ_RNG_HPP_
#define FEDFREQ_RNG_HPP_

#include <cstdint>
#include <random>

namespace fedfreq {

// Deterministic, splittable random source.
//
// The stream is std::mt19937_64 seeded with splitmix64(seed). Child streams
// are keyed: child(k) is seeded with
//   splitmix64(seed ^ splitmix64(k + 0x9e3779b97f4a7c15))
// so a child depends only on (parent seed, key), never on how many values
// the parent has produced. Parallel work derives one child per work unit.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  Rng child(std::uint64_t key) const;

  std::uint64_t seed() const { return seed_; }

  result_type operator()() { return engine_(); }
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  // Uniform integer in [0, bound), unbiased. bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound);

  // Binomial(trials, p). Small trial counts are summed Bernoulli draws,
  // larger ones go through std::binomial_distribution.
  std::uint64_t binomial(std::uint64_t trials, double p);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace fedfreq

#endif  // FEDFREQ_RNG_HPP_
