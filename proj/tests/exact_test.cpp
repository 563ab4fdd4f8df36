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


#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "fedfreq/exact.hpp"
#include "oracles.hpp"

namespace fedfreq::exact {
namespace {

std::vector<Item> items_of(const Histogram& h) {
  std::vector<Item> out;
  for (std::size_t j = 0; j < h.d(); ++j) {
    for (std::uint64_t c = 0; c < h[j]; ++c) {
      out.push_back(Item{static_cast<std::uint32_t>(j)});
    }
  }
  return out;
}

TEST(HistogramFamily, SizeMatchesPascal) {
  for (std::size_t d = 1; d <= 8; ++d) {
    for (std::size_t n = 0; n <= 5; ++n) {
      EXPECT_EQ(HistogramFamily(d, n).size(), oracle::pascal(d + n - 1, d - 1));
    }
  }
  EXPECT_FALSE(HistogramFamily(100000, 10000).size().has_value());
  EXPECT_FALSE(HistogramFamily(1000, 10).enumerable());
}

TEST(HistogramFamily, EnumerationMatchesOdometer) {
  for (std::size_t d = 1; d <= 5; ++d) {
    for (std::size_t n = 0; n <= 4; ++n) {
      std::set<std::vector<std::uint64_t>> expected;
      for (auto& c : oracle::all_histograms(d, n)) expected.insert(c);
      std::vector<std::vector<std::uint64_t>> seen;
      HistogramFamily(d, n).for_each([&](const Histogram& h) {
        seen.emplace_back(h.counts().begin(), h.counts().end());
      });
      EXPECT_EQ(seen.size(), expected.size());
      EXPECT_TRUE(std::is_sorted(seen.begin(), seen.end()));
      EXPECT_EQ(std::set(seen.begin(), seen.end()), expected);
    }
  }
}

TEST(HistogramFamily, RefusesHugeEnumeration) {
  EXPECT_THROW(HistogramFamily(1000, 10).for_each([](const Histogram&) {}),
               EnumerationBudgetExceeded);
}

TEST(SuggestedRows, Examples) {
  // ceil(4 * 16 * 8 / 4).
  EXPECT_EQ(suggested_rows(256, 16), 128u);
  EXPECT_EQ(suggested_rows(50, 1), 50u);
  for (std::size_t d = 1024; d <= 65536; d *= 2) {
    for (std::size_t n = 4; n <= 32; ++n) EXPECT_LT(suggested_rows(d, n), d);
  }
  for (std::size_t n = 3; n < 40; ++n) {
    EXPECT_LE(suggested_rows(100, n), suggested_rows(100, n + 1));
    EXPECT_LE(suggested_rows(100, n), suggested_rows(101, n));
  }
  EXPECT_EQ(compressed_rows(6, 2), 5u);
  EXPECT_EQ(compressed_rows(1024, 4), suggested_rows(1024, 4));
}

TEST(Embed, Examples) {
  const auto s = BinaryEmbedding::random(7, 5, 3);
  EXPECT_EQ(embed(s, Histogram::zeros(5)), std::vector<std::uint64_t>(7, 0));
  const Histogram a({1, 0, 2, 0, 1}), b({0, 3, 0, 1, 0});
  const auto ea = embed(s, a), eb = embed(s, b), eab = embed(s, a + b);
  for (std::size_t r = 0; r < 7; ++r) EXPECT_EQ(eab[r], ea[r] + eb[r]);
  const auto ones = BinaryEmbedding::from_bits(1, 5, {1, 1, 1, 1, 1});
  EXPECT_EQ(embed(ones, a)[0], a.n());
  EXPECT_THROW(embed(s, Histogram::zeros(4)), InputError);
  EXPECT_THROW(BinaryEmbedding::from_bits(1, 2, {0, 2}), InputError);
}

TEST(Embedding, RandomIsReproducible) {
  const auto a = BinaryEmbedding::random(9, 11, 42);
  const auto b = BinaryEmbedding::random(9, 11, 42);
  int ones = 0;
  for (std::size_t r = 0; r < 9; ++r) {
    for (std::size_t c = 0; c < 11; ++c) {
      EXPECT_EQ(a.at(r, c), b.at(r, c));
      ones += a.at(r, c);
    }
  }
  EXPECT_GT(ones, 0);
  EXPECT_LT(ones, 99);
}

TEST(Certify, IdentityAndZeros) {
  EXPECT_TRUE(certify_injective(BinaryEmbedding::identity(4),
                                HistogramFamily(4, 3))
                  .injective);
  const auto cert =
      certify_injective(BinaryEmbedding::zeros(2, 3), HistogramFamily(3, 1));
  EXPECT_FALSE(cert.injective);
  ASSERT_TRUE(cert.witness.has_value());
  EXPECT_NE(cert.witness->first, cert.witness->second);
}

TEST(Certify, MatchesPairwiseOracle) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto s = BinaryEmbedding::random(3, 5, seed);
    const auto all = oracle::all_histograms(5, 2);
    bool injective = true;
    for (std::size_t i = 0; i < all.size(); ++i) {
      for (std::size_t j = i + 1; j < all.size(); ++j) {
        injective &= embed(s, Histogram(all[i])) != embed(s, Histogram(all[j]));
      }
    }
    EXPECT_EQ(certify_injective(s, HistogramFamily(5, 2)).injective, injective)
        << seed;
  }
}

TEST(Certify, InjectiveRateAtSuggestedRows) {
  const HistogramFamily family(6, 2);
  const std::size_t m = suggested_rows(6, 2);
  int injective = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    injective += certify_injective(BinaryEmbedding::random(m, 6, seed), family)
                     .injective;
  }
  EXPECT_GE(injective, 90);
}

TEST(Certify, FailureRateFallsWithRows) {
  const HistogramFamily family(6, 2);
  auto failures = [&](std::size_t m) {
    int f = 0;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
      f += !certify_injective(BinaryEmbedding::random(m, 6, 1000 + seed), family)
                .injective;
    }
    return f;
  };
  EXPECT_GT(failures(4), failures(8));
}

TEST(Decode, RoundTripAllFamilies) {
  for (std::size_t d = 1; d <= 6; ++d) {
    for (std::size_t n = 0; n <= 3; ++n) {
      const HistogramFamily family(d, n);
      const auto cert =
          find_injective_embedding(std::max<std::size_t>(d, 1), family, 5);
      ASSERT_TRUE(cert.has_value()) << d << " " << n;
      family.for_each([&](const Histogram& h) {
        EXPECT_EQ(brute_force_decode(cert->embedding, embed(cert->embedding, h),
                                     family),
                  h);
      });
    }
  }
}

TEST(Decode, CompressedRoundTripD5N3) {
  const HistogramFamily family(5, 3);
  const auto cert = find_injective_embedding(compressed_rows(5, 3), family, 0);
  ASSERT_TRUE(cert.has_value());
  EXPECT_LT(cert->embedding.rows(), 5u);
  family.for_each([&](const Histogram& h) {
    EXPECT_EQ(brute_force_decode(cert->embedding, embed(cert->embedding, h),
                                 family),
              h);
  });
}

TEST(Decode, Errors) {
  const HistogramFamily family(3, 2);
  const auto id = BinaryEmbedding::identity(3);
  EXPECT_THROW(brute_force_decode(id, std::vector<std::uint64_t>{3, 0, 0}, family),
               NoConsistentHistogram);
  EXPECT_THROW(brute_force_decode(id, std::vector<std::uint64_t>{1, 0, 0}, family),
               NoConsistentHistogram);
  const auto zero = BinaryEmbedding::zeros(2, 3);
  const auto cert = certify_injective(zero, family);
  ASSERT_TRUE(cert.witness.has_value());
  try {
    brute_force_decode(zero, embed(zero, cert.witness->first), family);
    FAIL() << "expected AmbiguousDecoding";
  } catch (const AmbiguousDecoding& e) {
    EXPECT_EQ(e.matches().size(), 6u);
  }
}

TEST(Pipeline, RandomItemSetsD5N3) {
  const HistogramFamily family(5, 3);
  const auto cert = find_injective_embedding(compressed_rows(5, 3), family, 1);
  ASSERT_TRUE(cert.has_value());
  Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Item> items(3);
    for (auto& it : items) it.index = static_cast<std::uint32_t>(rng.uniform_below(5));
    const auto r = secure_exact_pipeline(items, cert->embedding, rng);
    EXPECT_EQ(r.histogram, histogram_of(items, 5));
    EXPECT_EQ(r.group.modulus, 4u);
    EXPECT_EQ(r.bits_per_user, cert->embedding.rows() * 2);
  }
}

TEST(Pipeline, BitsBelowOneHotAtD64N4) {
  const std::size_t m = compressed_rows(64, 4);
  const auto bits = secagg::GroupSpec{m, 5}.bits_per_message();
  EXPECT_LT(bits, 64u * 3u);
}

TEST(Pipeline, SingleUser) {
  const auto s = BinaryEmbedding::identity(4);
  Rng rng(1);
  const std::vector<Item> items{Item{2}};
  EXPECT_EQ(secure_exact_pipeline(items, s, rng).histogram,
            Histogram({0, 0, 1, 0}));
}

TEST(Pipeline, FullFamilyD6N2) {
  const HistogramFamily family(6, 2);
  const auto cert = find_injective_embedding(compressed_rows(6, 2), family, 0);
  ASSERT_TRUE(cert.has_value());
  EXPECT_LE(cert->attempts, 16u);
  Rng rng(4);
  int exact = 0;
  std::uint64_t bits = 0;
  family.for_each([&](const Histogram& h) {
    const auto r = secure_exact_pipeline(items_of(h), cert->embedding, rng);
    exact += r.histogram == h;
    bits = r.bits_per_user;
  });
  EXPECT_EQ(exact, 21);
  EXPECT_LT(bits, 6u * 2u);
}

}  // namespace
}  // namespace fedfreq::exact
