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


#include "fedfreq/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include <fmt/format.h>

namespace fedfreq {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::child(std::uint64_t key) const {
  return Rng(splitmix64(seed_ ^ splitmix64(key + 0x9e3779b97f4a7c15ULL)));
}

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
  if (bound == 0) throw InputError("uniform_below: bound must be positive");
  // Reject the low (2^64 mod bound) values so every residue is equally likely.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return r % bound;
  }
}

std::uint64_t Rng::binomial(std::uint64_t trials, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InputError(fmt::format("binomial: p = {} outside [0, 1]", p));
  }
  if (trials <= 32) {
    std::uint64_t k = 0;
    for (std::uint64_t i = 0; i < trials; ++i) k += uniform01() < p ? 1 : 0;
    return k;
  }
  std::binomial_distribution<std::uint64_t> dist(trials, p);
  return dist(engine_);
}

std::vector<Item> make_items(std::span<const std::uint32_t> indices) {
  std::vector<Item> items;
  items.reserve(indices.size());
  for (auto i : indices) items.push_back(Item{i});
  return items;
}

Histogram::Histogram(std::vector<std::uint64_t> counts)
    : counts_(std::move(counts)) {
  if (counts_.empty()) throw InputError("histogram needs d >= 1");
  n_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

Histogram Histogram::zeros(std::size_t d) {
  return Histogram(std::vector<std::uint64_t>(d, 0));
}

Histogram Histogram::operator+(const Histogram& other) const {
  if (other.d() != d()) throw InputError("histogram dimension mismatch");
  std::vector<std::uint64_t> out(counts_);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += other.counts_[j];
  return Histogram(std::move(out));
}

EstimatedHistogram::EstimatedHistogram(std::vector<double> values)
    : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) throw InputError("estimate has a non-finite entry");
  }
}

EstimatedHistogram EstimatedHistogram::from(const Histogram& h) {
  std::vector<double> v(h.counts().begin(), h.counts().end());
  return EstimatedHistogram(std::move(v));
}

double EstimatedHistogram::sum() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

std::string_view to_string(Distribution distribution) {
  switch (distribution) {
    case Distribution::kGeometric:
      return "geometric";
    case Distribution::kZipf:
      return "zipf";
    case Distribution::kUniformHistogramPrior:
      return "uniform_prior";
    case Distribution::kExplicit:
      return "explicit";
  }
  return "unknown";
}

Distribution parse_distribution(std::string_view name) {
  if (name == "geometric") return Distribution::kGeometric;
  if (name == "zipf") return Distribution::kZipf;
  if (name == "uniform_prior") return Distribution::kUniformHistogramPrior;
  if (name == "explicit") return Distribution::kExplicit;
  throw ConfigError(fmt::format("unknown distribution '{}'", name));
}

void DataSpec::validate() const {
  if (d < 1) throw ConfigError("data spec: d must be >= 1");
  switch (distribution) {
    case Distribution::kGeometric:
      if (!(parameter > 0.0 && parameter < 1.0)) {
        throw ConfigError(fmt::format(
            "geometric decay must lie in (0, 1), got {}", parameter));
      }
      break;
    case Distribution::kZipf:
      if (!(parameter > 0.0) || !std::isfinite(parameter)) {
        throw ConfigError(
            fmt::format("zipf exponent must be > 0, got {}", parameter));
      }
      break;
    case Distribution::kUniformHistogramPrior:
      break;
    case Distribution::kExplicit:
      if (items.size() != n) {
        throw ConfigError(fmt::format(
            "explicit data has {} items but n = {}", items.size(), n));
      }
      for (const Item& it : items) {
        if (it.index >= d) {
          throw ConfigError(
              fmt::format("explicit item {} outside [0, {})", it.index, d));
        }
      }
      break;
  }
}

std::vector<double> item_masses(const DataSpec& spec) {
  spec.validate();
  std::vector<double> mass(spec.d, 0.0);
  switch (spec.distribution) {
    case Distribution::kGeometric: {
      double w = 1.0;
      for (std::size_t k = 0; k < spec.d; ++k) {
        mass[k] = w;
        w *= spec.parameter;
      }
      break;
    }
    case Distribution::kZipf:
      for (std::size_t k = 0; k < spec.d; ++k) {
        mass[k] = std::pow(static_cast<double>(k + 1), -spec.parameter);
      }
      break;
    case Distribution::kUniformHistogramPrior:
    case Distribution::kExplicit:
      // Marginal of a uniformly random histogram is uniform by symmetry;
      // explicit data has its empirical masses.
      if (spec.distribution == Distribution::kExplicit && spec.n > 0) {
        for (const Item& it : spec.items) mass[it.index] += 1.0;
      } else {
        std::fill(mass.begin(), mass.end(), 1.0);
      }
      break;
  }
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (double& m : mass) m /= total;
  return mass;
}

namespace {

void shuffle(std::vector<Item>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[rng.uniform_below(i)]);
  }
}

// Uniform draw from {h in N^d : sum h = n}: choose the d-1 bar positions
// among n+d-1 slots by selection sampling.
std::vector<Item> sample_uniform_histogram(std::size_t d, std::size_t n,
                                           Rng& rng) {
  std::vector<Item> items;
  items.reserve(n);
  std::size_t slots = n + d - 1;
  std::size_t bars_left = d - 1;
  std::uint32_t bin = 0;
  for (std::size_t s = 0; s < slots; ++s) {
    const std::size_t remaining = slots - s;
    if (rng.uniform_below(remaining) < bars_left) {
      --bars_left;
      ++bin;
    } else {
      items.push_back(Item{bin});
    }
  }
  shuffle(items, rng);
  return items;
}

}  // namespace

std::vector<Item> generate_items(const DataSpec& spec, Rng& rng) {
  spec.validate();
  switch (spec.distribution) {
    case Distribution::kExplicit:
      return spec.items;
    case Distribution::kUniformHistogramPrior:
      return sample_uniform_histogram(spec.d, spec.n, rng);
    case Distribution::kGeometric:
    case Distribution::kZipf:
      break;
  }
  const std::vector<double> mass = item_masses(spec);
  std::vector<double> cdf(mass.size());
  std::partial_sum(mass.begin(), mass.end(), cdf.begin());
  cdf.back() = 1.0;
  std::vector<Item> items;
  items.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double u = rng.uniform01();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto k = static_cast<std::uint32_t>(
        std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1));
    items.push_back(Item{k});
  }
  return items;
}

std::vector<Item> generate_items(const DataSpec& spec) {
  Rng rng(spec.seed);
  return generate_items(spec, rng);
}

Histogram histogram_of(std::span<const Item> items, std::size_t d) {
  std::vector<std::uint64_t> counts(d, 0);
  for (const Item& it : items) {
    if (it.index >= d) {
      throw InputError(fmt::format("item {} outside [0, {})", it.index, d));
    }
    ++counts[it.index];
  }
  return Histogram(std::move(counts));
}

double loss(const EstimatedHistogram& est, const Histogram& truth,
            LossKind kind) {
  if (est.d() != truth.d()) {
    throw InputError(fmt::format("loss: estimate has d = {}, truth d = {}",
                                 est.d(), truth.d()));
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < est.d(); ++j) {
    const double diff = est[j] - static_cast<double>(truth[j]);
    if (kind == LossKind::kLinf) {
      acc = std::max(acc, std::abs(diff));
    } else {
      acc += diff * diff;
    }
  }
  return acc;
}

double normalized_loss(const EstimatedHistogram& est, const Histogram& truth,
                       LossKind kind) {
  const double raw = loss(est, truth, kind);
  if (truth.n() == 0) return raw;
  const double n = static_cast<double>(truth.n());
  return kind == LossKind::kLinf ? raw / n : raw / (n * n);
}

EstimatedHistogram project_to_scaled_simplex(const EstimatedHistogram& est,
                                             double total) {
  if (!(total >= 0.0)) throw InputError("simplex total must be >= 0");
  const std::size_t d = est.d();
  if (total == 0.0) return EstimatedHistogram(std::vector<double>(d, 0.0));

  std::vector<double> sorted(est.values().begin(), est.values().end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double prefix = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    prefix += sorted[j];
    const double candidate = (prefix - total) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) tau = candidate;
  }
  std::vector<double> out(d);
  for (std::size_t j = 0; j < d; ++j) out[j] = std::max(est[j] - tau, 0.0);
  return EstimatedHistogram(std::move(out));
}

double median_inplace(std::span<double> values) {
  if (values.empty()) throw InputError("median of an empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

}  // namespace fedfreq
