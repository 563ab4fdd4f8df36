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


#include "fedfreq/baselines.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "fedfreq/transform.hpp"

namespace fedfreq::baselines {

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError(fmt::format("local epsilon must be >= 0, got {}", epsilon));
  }
}

void check_item(Item item, const LocalMechanism& mech) {
  if (item.index >= mech.d) {
    throw InputError(fmt::format("item {} outside [0, {})", item.index, mech.d));
  }
}

}  // namespace

LocalMechanism LocalMechanism::krr(double epsilon, std::size_t d) {
  check_epsilon(epsilon);
  if (d < 2) throw ConfigError("randomized response needs d >= 2");
  return LocalMechanism{MechanismKind::kKrr, epsilon, d, d};
}

LocalMechanism LocalMechanism::hadamard(double epsilon, std::size_t d) {
  check_epsilon(epsilon);
  if (d < 1) throw ConfigError("Hadamard response needs d >= 1");
  return LocalMechanism{MechanismKind::kHadamardResponse, epsilon, d,
                        transform::ceil_power_of_two(d)};
}

double LocalMechanism::keep_probability() const {
  // e^eps / (e^eps + d - 1) written to stay exact for large eps.
  return 1.0 / (1.0 + static_cast<double>(d - 1) * std::exp(-epsilon));
}

double LocalMechanism::other_probability() const {
  return std::exp(-epsilon) /
         (1.0 + static_cast<double>(d - 1) * std::exp(-epsilon));
}

double LocalMechanism::flip_probability() const {
  return 1.0 / (std::exp(epsilon) + 1.0);
}

std::uint64_t LocalMechanism::report_bits() const {
  if (kind == MechanismKind::kKrr) {
    return static_cast<std::uint64_t>(std::bit_width(d - 1));
  }
  return static_cast<std::uint64_t>(std::bit_width(K - 1)) + 1;
}

Item krr_randomize(Item item, const LocalMechanism& mech, Rng& rng) {
  check_item(item, mech);
  if (rng.uniform01() < mech.keep_probability()) return item;
  // Uniform over the d - 1 other symbols.
  auto other = static_cast<std::uint32_t>(rng.uniform_below(mech.d - 1));
  if (other >= item.index) ++other;
  return Item{other};
}

EstimatedHistogram krr_estimate(std::span<const Item> reports,
                                const LocalMechanism& mech) {
  std::vector<double> counts(mech.d, 0.0);
  for (const Item& r : reports) {
    check_item(r, mech);
    counts[r.index] += 1.0;
  }
  const double p = mech.keep_probability();
  const double q = mech.other_probability();
  if (!(p - q > 0.0)) {
    throw ConfigError("randomized response with epsilon = 0 is not invertible");
  }
  const double n = static_cast<double>(reports.size());
  for (double& c : counts) c = (c - n * q) / (p - q);
  return EstimatedHistogram(std::move(counts));
}

HrReport hr_randomize(Item item, const LocalMechanism& mech, Rng& rng) {
  check_item(item, mech);
  const auto row = static_cast<std::uint32_t>(rng.uniform_below(mech.K));
  int bit = transform::hadamard_sign(row, item.index);
  if (rng.uniform01() < mech.flip_probability()) bit = -bit;
  return HrReport{row, bit};
}

EstimatedHistogram hr_estimate(std::span<const HrReport> reports,
                               const LocalMechanism& mech) {
  const double gain = std::expm1(mech.epsilon);
  const double scale = (std::exp(mech.epsilon) + 1.0) / gain;
  if (!(gain > 0.0) || !std::isfinite(scale)) {
    throw ConfigError(fmt::format(
        "Hadamard response debiasing undefined at epsilon = {}", mech.epsilon));
  }
  // Each report lands in row r with probability 1/K, so K * scale * (sum of
  // row-r bits) is unbiased for c_r whatever the cohort size.
  std::vector<double> coeff(mech.K, 0.0);
  for (const HrReport& r : reports) {
    if (r.row >= mech.K || (r.bit != 1 && r.bit != -1)) {
      throw InputError("malformed Hadamard response report");
    }
    coeff[r.row] += r.bit;
  }
  const double gain_k = static_cast<double>(mech.K) * scale;
  for (double& c : coeff) c *= gain_k;
  transform::wht_unnormalized_inplace(coeff);
  const double inv_k = 1.0 / static_cast<double>(mech.K);
  std::vector<double> out(mech.d);
  for (std::size_t j = 0; j < mech.d; ++j) out[j] = coeff[j] * inv_k;
  return EstimatedHistogram(std::move(out));
}

std::vector<std::vector<double>> krr_channel(const LocalMechanism& mech) {
  std::vector<std::vector<double>> ch(
      mech.d, std::vector<double>(mech.d, mech.other_probability()));
  for (std::size_t x = 0; x < mech.d; ++x) ch[x][x] = mech.keep_probability();
  return ch;
}

std::vector<std::vector<double>> hr_channel(const LocalMechanism& mech) {
  const double flip = mech.flip_probability();
  const double inv_k = 1.0 / static_cast<double>(mech.K);
  std::vector<std::vector<double>> ch(mech.d,
                                      std::vector<double>(2 * mech.K, 0.0));
  for (std::size_t x = 0; x < mech.d; ++x) {
    for (std::size_t r = 0; r < mech.K; ++r) {
      const int truth = transform::hadamard_sign(r, x);
      ch[x][2 * r] = inv_k * (truth > 0 ? 1.0 - flip : flip);
      ch[x][2 * r + 1] = inv_k * (truth < 0 ? 1.0 - flip : flip);
    }
  }
  return ch;
}

double max_likelihood_ratio(const std::vector<std::vector<double>>& channel) {
  if (channel.empty()) return 1.0;
  double worst = 1.0;
  for (std::size_t y = 0; y < channel.front().size(); ++y) {
    double hi = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& row : channel) {
      hi = std::max(hi, row[y]);
      lo = std::min(lo, row[y]);
    }
    if (hi == 0.0) continue;
    worst = std::max(worst, lo > 0.0 ? hi / lo
                                     : std::numeric_limits<double>::infinity());
  }
  return worst;
}

}  // namespace fedfreq::baselines
