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


#ifndef FEDFREQ_CORE_HPP_
#define FEDFREQ_CORE_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedfreq/errors.hpp"
#include "fedfreq/rng.hpp"

namespace fedfreq {

// One user's datum: an index into the domain [0, d). The one-hot vector
// e_index is never materialized.
struct Item {
  std::uint32_t index = 0;

  friend auto operator<=>(const Item&, const Item&) = default;
};

std::vector<Item> make_items(std::span<const std::uint32_t> indices);

// Non-negative integer counts over a size-d domain.
class Histogram {
 public:
  explicit Histogram(std::vector<std::uint64_t> counts);
  static Histogram zeros(std::size_t d);

  std::size_t d() const { return counts_.size(); }
  std::uint64_t n() const { return n_; }
  std::span<const std::uint64_t> counts() const { return counts_; }
  std::uint64_t operator[](std::size_t j) const { return counts_[j]; }

  Histogram operator+(const Histogram& other) const;

  friend bool operator==(const Histogram&, const Histogram&) = default;

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t n_ = 0;
};

// Real-valued estimate of a histogram. Entries are always finite.
class EstimatedHistogram {
 public:
  explicit EstimatedHistogram(std::vector<double> values);
  static EstimatedHistogram from(const Histogram& h);

  std::size_t d() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }
  double sum() const;

 private:
  std::vector<double> values_;
};

enum class Distribution {
  kGeometric,
  kZipf,
  kUniformHistogramPrior,
  kExplicit,
};

std::string_view to_string(Distribution distribution);
Distribution parse_distribution(std::string_view name);

// Synthetic population description. `parameter` is the decay for
// kGeometric (in (0,1)) and the exponent for kZipf (> 0); it is unused
// otherwise. For kExplicit, `items` is the population and n must match.
struct DataSpec {
  Distribution distribution = Distribution::kZipf;
  double parameter = 1.0;
  std::vector<Item> items;
  std::size_t d = 1;
  std::size_t n = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Per-item probability masses over [0, d), renormalized after truncation.
// Zipf ranks are 1-indexed: P(k) proportional to (k+1)^-exponent.
std::vector<double> item_masses(const DataSpec& spec);

std::vector<Item> generate_items(const DataSpec& spec, Rng& rng);
std::vector<Item> generate_items(const DataSpec& spec);

Histogram histogram_of(std::span<const Item> items, std::size_t d);

enum class LossKind { kLinf, kL2Squared };

double loss(const EstimatedHistogram& est, const Histogram& truth,
            LossKind kind);

// Loss after dividing both vectors by truth.n() (no scaling when n = 0).
double normalized_loss(const EstimatedHistogram& est, const Histogram& truth,
                       LossKind kind);

// Euclidean projection onto {v >= 0, sum(v) = total}. Sort based, exact.
EstimatedHistogram project_to_scaled_simplex(const EstimatedHistogram& est,
                                             double total);

// Median of an odd-length or even-length sample (mean of the two middle
// values in the even case). Reorders `values`.
double median_inplace(std::span<double> values);

}  // namespace fedfreq

#endif  // FEDFREQ_CORE_HPP_
