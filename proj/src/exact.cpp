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


#include "fedfreq/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <utility>

#include <fmt/format.h>

namespace fedfreq::exact {

namespace {
__extension__ using u128 = unsigned __int128;
}  // namespace

BinaryEmbedding::BinaryEmbedding(std::size_t rows, std::size_t cols,
                                 std::vector<std::uint8_t> bits)
    : rows_(rows), cols_(cols), bits_(std::move(bits)) {
  if (rows_ < 1 || cols_ < 1) throw ConfigError("embedding needs m, d >= 1");
  if (bits_.size() != rows_ * cols_) {
    throw InputError("embedding bit count does not match m x d");
  }
  for (auto b : bits_) {
    if (b > 1) throw InputError("embedding entries must be 0 or 1");
  }
}

BinaryEmbedding BinaryEmbedding::random(std::size_t rows, std::size_t cols,
                                        std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint8_t> bits(rows * cols);
  std::uint64_t word = 0;
  int left = 0;
  for (auto& b : bits) {
    if (left == 0) {
      word = rng();
      left = 64;
    }
    b = static_cast<std::uint8_t>(word & 1);
    word >>= 1;
    --left;
  }
  return BinaryEmbedding(rows, cols, std::move(bits));
}

BinaryEmbedding BinaryEmbedding::identity(std::size_t d) {
  std::vector<std::uint8_t> bits(d * d, 0);
  for (std::size_t i = 0; i < d; ++i) bits[i * d + i] = 1;
  return BinaryEmbedding(d, d, std::move(bits));
}

BinaryEmbedding BinaryEmbedding::zeros(std::size_t rows, std::size_t cols) {
  return BinaryEmbedding(rows, cols, std::vector<std::uint8_t>(rows * cols, 0));
}

BinaryEmbedding BinaryEmbedding::from_bits(std::size_t rows, std::size_t cols,
                                           std::vector<std::uint8_t> bits) {
  return BinaryEmbedding(rows, cols, std::move(bits));
}

std::vector<std::uint64_t> BinaryEmbedding::column(Item item) const {
  if (item.index >= cols_) {
    throw InputError(fmt::format("item {} outside [0, {})", item.index, cols_));
  }
  std::vector<std::uint64_t> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, item.index);
  return out;
}

HistogramFamily::HistogramFamily(std::size_t d, std::size_t n) : d_(d), n_(n) {
  if (d < 1) throw ConfigError("histogram family needs d >= 1");
}

std::optional<std::uint64_t> HistogramFamily::size() const {
  // C(N, k) with N = d+n-1, k = min(d-1, n); each partial product is itself
  // a binomial coefficient, so the division is exact.
  const std::uint64_t total = d_ + n_ - 1;
  const std::uint64_t k = std::min<std::uint64_t>(d_ - 1, n_);
  u128 c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    c = c * (total - k + i) / i;
    if (c > UINT64_MAX) return std::nullopt;
  }
  return static_cast<std::uint64_t>(c);
}

bool HistogramFamily::enumerable() const {
  const auto s = size();
  return s && *s <= kEnumerationLimit;
}

void HistogramFamily::for_each(
    const std::function<void(const Histogram&)>& visit) const {
  if (!enumerable()) {
    throw EnumerationBudgetExceeded(fmt::format(
        "C({}, {}) histograms exceed the enumeration limit {}", d_ + n_ - 1,
        d_ - 1, kEnumerationLimit));
  }
  std::vector<std::uint64_t> counts(d_, 0);
  // Position `pos` takes values 0..remaining; the last bin absorbs the rest.
  auto rec = [&](auto&& self, std::size_t pos, std::uint64_t remaining) -> void {
    if (pos + 1 == d_) {
      counts[pos] = remaining;
      visit(Histogram(counts));
      return;
    }
    for (std::uint64_t c = 0; c <= remaining; ++c) {
      counts[pos] = c;
      self(self, pos + 1, remaining - c);
    }
    counts[pos] = 0;
  };
  rec(rec, 0, n_);
}

std::vector<Histogram> HistogramFamily::members() const {
  std::vector<Histogram> out;
  for_each([&](const Histogram& h) { out.push_back(h); });
  return out;
}

std::size_t suggested_rows(std::size_t d, std::size_t n, double c_m) {
  if (n < 2) return d;
  if (d < 2) return 1;
  const double rows = c_m * static_cast<double>(n) *
                      std::log2(static_cast<double>(d)) /
                      std::log2(static_cast<double>(n));
  return static_cast<std::size_t>(std::max(1.0, std::ceil(rows)));
}

std::size_t compressed_rows(std::size_t d, std::size_t n, double c_m) {
  if (d < 2) return 1;
  return std::min(suggested_rows(d, n, c_m), d - 1);
}

std::vector<std::uint64_t> embed(const BinaryEmbedding& s,
                                 const Histogram& hist) {
  if (hist.d() != s.cols()) {
    throw InputError(fmt::format("histogram has d = {}, embedding has {} cols",
                                 hist.d(), s.cols()));
  }
  std::vector<std::uint64_t> y(s.rows(), 0);
  for (std::size_t r = 0; r < s.rows(); ++r) {
    std::uint64_t acc = 0;
    for (std::size_t c = 0; c < s.cols(); ++c) acc += s.at(r, c) * hist[c];
    y[r] = acc;
  }
  return y;
}

InjectivityCertificate certify_injective(const BinaryEmbedding& s,
                                         const HistogramFamily& family) {
  if (family.d() != s.cols()) {
    throw InputError("family dimension differs from embedding columns");
  }
  std::map<std::vector<std::uint64_t>, Histogram> seen;
  InjectivityCertificate cert;
  cert.injective = true;
  family.for_each([&](const Histogram& h) {
    if (!cert.injective) return;
    auto [it, inserted] = seen.try_emplace(embed(s, h), h);
    if (!inserted) {
      cert.injective = false;
      cert.witness.emplace(it->second, h);
    }
  });
  return cert;
}

std::optional<CertifiedEmbedding> find_injective_embedding(
    std::size_t rows, const HistogramFamily& family, std::uint64_t seed,
    std::size_t max_attempts) {
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    const std::uint64_t s = seed + attempt;
    BinaryEmbedding e = BinaryEmbedding::random(rows, family.d(), s);
    if (certify_injective(e, family).injective) {
      return CertifiedEmbedding{std::move(e), s, attempt + 1};
    }
  }
  return std::nullopt;
}

AmbiguousDecoding::AmbiguousDecoding(std::vector<Histogram> matches)
    : Error(fmt::format("{} histograms share this image", matches.size())),
      matches_(std::move(matches)) {}

Histogram brute_force_decode(const BinaryEmbedding& s,
                             std::span<const std::uint64_t> y,
                             const HistogramFamily& family) {
  if (y.size() != s.rows()) {
    throw InputError(fmt::format("observation has {} entries, embedding {} rows",
                                 y.size(), s.rows()));
  }
  if (family.d() != s.cols()) {
    throw InputError("family dimension differs from embedding columns");
  }
  for (auto v : y) {
    if (v > family.n()) {
      throw NoConsistentHistogram(fmt::format(
          "entry {} exceeds the total mass {}", v, family.n()));
    }
  }
  std::vector<Histogram> matches;
  family.for_each([&](const Histogram& h) {
    const auto img = embed(s, h);
    if (std::equal(img.begin(), img.end(), y.begin(), y.end())) {
      matches.push_back(h);
    }
  });
  if (matches.empty()) {
    throw NoConsistentHistogram("no histogram of the family matches");
  }
  if (matches.size() > 1) throw AmbiguousDecoding(std::move(matches));
  return std::move(matches.front());
}

ExactResult secure_exact_pipeline(std::span<const Item> items,
                                  const BinaryEmbedding& s, Rng& rng) {
  const std::size_t n = items.size();
  if (n < 1) throw InputError("exact pipeline needs at least one client");
  const secagg::GroupSpec group{s.rows(), static_cast<std::uint64_t>(n) + 1};
  std::vector<secagg::GroupVector> encoded;
  encoded.reserve(n);
  for (const Item& it : items) encoded.emplace_back(group, s.column(it));

  const secagg::MaskSet masks = secagg::deal_masks(n, group, rng);
  const secagg::RoundTranscript tr = secagg::run_round(
      encoded, masks, {}, secagg::DropoutPolicy::for_cohort(n));
  const secagg::GroupVector sum = secagg::aggregate(tr, group);

  const HistogramFamily family(s.cols(), n);
  Histogram decoded = brute_force_decode(s, sum.entries(), family);
  return ExactResult{std::move(decoded), group, group.bits_per_message()};
}

}  // namespace fedfreq::exact
