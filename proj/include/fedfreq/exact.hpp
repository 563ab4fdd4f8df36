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


#ifndef FEDFREQ_EXACT_HPP_
#define FEDFREQ_EXACT_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fedfreq/core.hpp"
#include "fedfreq/secagg.hpp"

// Exact histogram recovery through SecAgg with a random binary embedding:
// clients send S e_{X_i}, the server learns S mu and decodes mu by scanning
// every histogram of mass n. Integer arithmetic only.
namespace fedfreq::exact {

class BinaryEmbedding {
 public:
  // i.i.d. fair-coin entries derived from `seed`.
  static BinaryEmbedding random(std::size_t rows, std::size_t cols,
                                std::uint64_t seed);
  static BinaryEmbedding identity(std::size_t d);
  static BinaryEmbedding zeros(std::size_t rows, std::size_t cols);
  // Row-major bits, each 0 or 1.
  static BinaryEmbedding from_bits(std::size_t rows, std::size_t cols,
                                   std::vector<std::uint8_t> bits);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint8_t at(std::size_t r, std::size_t c) const {
    return bits_[r * cols_ + c];
  }

  // Column `item` of S, the encoding of one client.
  std::vector<std::uint64_t> column(Item item) const;

 private:
  BinaryEmbedding(std::size_t rows, std::size_t cols,
                  std::vector<std::uint8_t> bits);

  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::uint8_t> bits_;
};

// All d-bin histograms of total mass n.
class HistogramFamily {
 public:
  static constexpr std::uint64_t kEnumerationLimit = 1'000'000;

  HistogramFamily(std::size_t d, std::size_t n);

  std::size_t d() const { return d_; }
  std::size_t n() const { return n_; }
  // C(d+n-1, d-1), or nullopt if it does not fit 64 bits.
  std::optional<std::uint64_t> size() const;
  bool enumerable() const;

  // Visits every member in lexicographic order of the count vector.
  // Throws EnumerationBudgetExceeded unless enumerable().
  void for_each(const std::function<void(const Histogram&)>& visit) const;
  std::vector<Histogram> members() const;

 private:
  std::size_t d_;
  std::size_t n_;
};

// ceil(c_m * n * log2(d) / log2(n)); returns d when n < 2.
std::size_t suggested_rows(std::size_t d, std::size_t n, double c_m = 4.0);

// Rows used by the compressed scheme: suggested_rows capped at d - 1, so the
// message is always shorter than the one-hot encoding.
std::size_t compressed_rows(std::size_t d, std::size_t n, double c_m = 4.0);

// S mu, entries in [0, n].
std::vector<std::uint64_t> embed(const BinaryEmbedding& s,
                                 const Histogram& hist);

struct InjectivityCertificate {
  bool injective = false;
  // Two distinct histograms with the same image when not injective.
  std::optional<std::pair<Histogram, Histogram>> witness;
};

InjectivityCertificate certify_injective(const BinaryEmbedding& s,
                                         const HistogramFamily& family);

struct CertifiedEmbedding {
  BinaryEmbedding embedding;
  std::uint64_t seed = 0;
  std::size_t attempts = 0;
};

// Draws random m x d embeddings (seed, seed+1, ...) until one certifies.
// Returns nullopt after `max_attempts` failures.
std::optional<CertifiedEmbedding> find_injective_embedding(
    std::size_t rows, const HistogramFamily& family, std::uint64_t seed,
    std::size_t max_attempts = 16);

class NoConsistentHistogram : public Error {
 public:
  using Error::Error;
};

class AmbiguousDecoding : public Error {
 public:
  AmbiguousDecoding(std::vector<Histogram> matches);
  const std::vector<Histogram>& matches() const { return matches_; }

 private:
  std::vector<Histogram> matches_;
};

// The unique mu in the family with S mu = y.
Histogram brute_force_decode(const BinaryEmbedding& s,
                             std::span<const std::uint64_t> y,
                             const HistogramFamily& family);

struct ExactResult {
  Histogram histogram;
  secagg::GroupSpec group;
  std::uint64_t bits_per_user = 0;
};

// Clients encode S e_{X_i} over Z_{n+1}^m, the server aggregates through
// SecAgg and decodes by enumeration.
ExactResult secure_exact_pipeline(std::span<const Item> items,
                                  const BinaryEmbedding& s, Rng& rng);

}  // namespace fedfreq::exact

#endif  // FEDFREQ_EXACT_HPP_
