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


#ifndef FEDFREQ_BASELINES_HPP_
#define FEDFREQ_BASELINES_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fedfreq/core.hpp"

// Local-DP frequency oracles used as comparison points: k-ary randomized
// response and a one-coefficient Hadamard response. Both bypass SecAgg.
namespace fedfreq::baselines {

enum class MechanismKind { kKrr, kHadamardResponse };

struct LocalMechanism {
  MechanismKind kind = MechanismKind::kKrr;
  double epsilon = 1.0;
  std::size_t d = 2;
  std::size_t K = 2;  // Hadamard order, smallest power of two >= d

  static LocalMechanism krr(double epsilon, std::size_t d);
  static LocalMechanism hadamard(double epsilon, std::size_t d);

  // KRR: probability of reporting the true item, e^eps / (e^eps + d - 1).
  double keep_probability() const;
  // KRR: probability of each specific other item, 1 / (e^eps + d - 1).
  double other_probability() const;
  // HR: probability the released bit is flipped, 1 / (e^eps + 1).
  double flip_probability() const;
  // Bits one report costs on the wire.
  std::uint64_t report_bits() const;
};

Item krr_randomize(Item item, const LocalMechanism& mech, Rng& rng);

// (c_j - n q) / (p - q), unbiased; sums to n exactly.
EstimatedHistogram krr_estimate(std::span<const Item> reports,
                                const LocalMechanism& mech);

struct HrReport {
  std::uint32_t row = 0;
  int bit = 1;  // +1 or -1
};

// Uniform row r in [0, K); the true bit is the (unnormalized) Hadamard
// entry (-1)^popcount(r & item), released as is with probability
// e^eps / (e^eps + 1) and flipped otherwise.
HrReport hr_randomize(Item item, const LocalMechanism& mech, Rng& rng);

// c_r = K (e^eps + 1) / (e^eps - 1) * (sum of the bits reported for row r)
// is unbiased for the Hadamard coefficient sum_j H(r, j) mu_j; the inverse
// transform (1/K) H c is restricted to the first d coordinates.
EstimatedHistogram hr_estimate(std::span<const HrReport> reports,
                               const LocalMechanism& mech);

// Row-stochastic channel matrices for small d, used to certify the local
// DP constraint. KRR is d x d; HR is d x 2K with column 2r + (bit < 0).
std::vector<std::vector<double>> krr_channel(const LocalMechanism& mech);
std::vector<std::vector<double>> hr_channel(const LocalMechanism& mech);

// max over outputs of (max over inputs / min over inputs) of the channel.
double max_likelihood_ratio(const std::vector<std::vector<double>>& channel);

}  // namespace fedfreq::baselines

#endif  // FEDFREQ_BASELINES_HPP_
