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


#include "fedfreq/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "fedfreq/transform.hpp"

namespace fedfreq::sketch {

namespace {

__extension__ using u128 = unsigned __int128;

std::uint64_t mod_mersenne61(u128 x) {
  std::uint64_t lo = static_cast<std::uint64_t>(x & kMersenne61);
  std::uint64_t hi = static_cast<std::uint64_t>(x >> 61);
  std::uint64_t r = lo + hi;
  r = (r & kMersenne61) + (r >> 61);
  return r >= kMersenne61 ? r - kMersenne61 : r;
}

}  // namespace

std::uint64_t PairwiseHash::operator()(std::uint64_t x) const {
  const u128 prod =
      static_cast<u128>(a) * (x % kMersenne61) + b;
  return mod_mersenne61(prod);
}

PairwiseHash PairwiseHash::draw(Rng& rng) {
  PairwiseHash h;
  h.a = 1 + rng.uniform_below(kMersenne61 - 1);
  h.b = rng.uniform_below(kMersenne61);
  return h;
}

void SketchConfig::validate() const {
  if (d < 1) throw ConfigError("sketch: d must be >= 1");
  if (!transform::is_power_of_two(w)) {
    throw ConfigError(fmt::format("sketch: w = {} is not a power of two", w));
  }
  if (t < 1 || t % 2 == 0) {
    throw ConfigError(fmt::format("sketch: t = {} must be odd", t));
  }
}

std::size_t default_repetitions(std::size_t d, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ConfigError("failure probability gamma must lie in (0, 1)");
  }
  const double raw = std::log2(static_cast<double>(d) / gamma);
  auto t = static_cast<std::size_t>(std::max(1.0, std::ceil(raw)));
  if (t % 2 == 0) ++t;
  return t;
}

SketchVector::SketchVector(std::size_t t, std::size_t w)
    : t_(t), w_(w), data_(t * w, 0.0) {}

std::span<double> SketchVector::block(std::size_t rep) {
  return std::span<double>(data_).subspan(rep * w_, w_);
}

std::span<const double> SketchVector::block(std::size_t rep) const {
  return std::span<const double>(data_).subspan(rep * w_, w_);
}

SketchVector& SketchVector::operator+=(const SketchVector& other) {
  if (other.t_ != t_ || other.w_ != w_) {
    throw InputError("sketch shape mismatch");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

SketchVector& SketchVector::operator*=(double scale) {
  for (double& x : data_) x *= scale;
  return *this;
}

SketchMatrix::SketchMatrix(std::size_t d, std::size_t w,
                           std::vector<RepetitionHash> h)
    : d_(d), w_(w), hashes_(std::move(h)) {}

SketchMatrix SketchMatrix::build(const SketchConfig& config) {
  config.validate();
  Rng root(config.seed);
  std::vector<RepetitionHash> hashes;
  hashes.reserve(config.t);
  for (std::size_t k = 0; k < config.t; ++k) {
    Rng rep = root.child(k);
    RepetitionHash h;
    h.bucket = PairwiseHash::draw(rep);
    h.sign = PairwiseHash::draw(rep);
    hashes.push_back(h);
  }
  return SketchMatrix(config.d, config.w, std::move(hashes));
}

SketchMatrix SketchMatrix::from_hashes(std::size_t d, std::size_t w,
                                       std::vector<RepetitionHash> hashes) {
  SketchConfig{d, w, hashes.size(), 0}.validate();
  for (const auto& h : hashes) {
    if (h.bucket.a == 0 || h.sign.a == 0 || h.bucket.a >= kMersenne61 ||
        h.sign.a >= kMersenne61 || h.bucket.b >= kMersenne61 ||
        h.sign.b >= kMersenne61) {
      throw ConfigError("hash coefficients outside the prime field");
    }
  }
  return SketchMatrix(d, w, std::move(hashes));
}

bool operator==(const SketchMatrix& a, const SketchMatrix& b) {
  if (a.d_ != b.d_ || a.w_ != b.w_ || a.t() != b.t()) return false;
  for (std::size_t k = 0; k < a.t(); ++k) {
    const auto& x = a.hashes_[k];
    const auto& y = b.hashes_[k];
    if (x.bucket.a != y.bucket.a || x.bucket.b != y.bucket.b ||
        x.sign.a != y.sign.a || x.sign.b != y.sign.b) {
      return false;
    }
  }
  return true;
}

void SketchMatrix::check_item(Item item) const {
  if (item.index >= d_) {
    throw InputError(fmt::format("item {} outside [0, {})", item.index, d_));
  }
}

void SketchMatrix::check_shape(const SketchVector& v) const {
  if (v.t() != t() || v.w() != w_) {
    throw InputError(fmt::format("sketch vector is {}x{}, matrix is {}x{}",
                                 v.t(), v.w(), t(), w_));
  }
}

std::size_t SketchMatrix::bucket(std::size_t rep, Item item) const {
  // w is a power of two: the mask keeps the low bits.
  return static_cast<std::size_t>(hashes_[rep].bucket(item.index) & (w_ - 1));
}

int SketchMatrix::sign(std::size_t rep, Item item) const {
  return (hashes_[rep].sign(item.index) & 1) ? -1 : 1;
}

SketchVector SketchMatrix::sketch_item(Item item) const {
  check_item(item);
  SketchVector out(t(), w_);
  for (std::size_t k = 0; k < t(); ++k) {
    out.block(k)[bucket(k, item)] = sign(k, item);
  }
  return out;
}

SketchVector SketchMatrix::sketch_histogram(const Histogram& hist) const {
  if (hist.d() != d_) {
    throw InputError(fmt::format("histogram has d = {}, sketch expects {}",
                                 hist.d(), d_));
  }
  SketchVector out(t(), w_);
  for (std::size_t j = 0; j < d_; ++j) {
    if (hist[j] == 0) continue;
    const Item item{static_cast<std::uint32_t>(j)};
    const double c = static_cast<double>(hist[j]);
    for (std::size_t k = 0; k < t(); ++k) {
      out.block(k)[bucket(k, item)] += sign(k, item) * c;
    }
  }
  return out;
}

std::vector<double> SketchMatrix::per_repetition_estimates(
    const SketchVector& sketched, Item j) const {
  check_item(j);
  check_shape(sketched);
  std::vector<double> est(t());
  for (std::size_t k = 0; k < t(); ++k) {
    est[k] = sign(k, j) * sketched.block(k)[bucket(k, j)];
  }
  return est;
}

double SketchMatrix::unsketch_point(const SketchVector& sketched,
                                    Item j) const {
  auto est = per_repetition_estimates(sketched, j);
  return median_inplace(est);
}

EstimatedHistogram SketchMatrix::unsketch_all(
    const SketchVector& sketched) const {
  check_shape(sketched);
  std::vector<double> out(d_);
  std::vector<double> est(t());
  for (std::size_t j = 0; j < d_; ++j) {
    const Item item{static_cast<std::uint32_t>(j)};
    for (std::size_t k = 0; k < t(); ++k) {
      est[k] = sign(k, item) * sketched.block(k)[bucket(k, item)];
    }
    out[j] = median_inplace(est);
  }
  return EstimatedHistogram(std::move(out));
}

}  // namespace fedfreq::sketch
