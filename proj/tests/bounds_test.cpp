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

#include <gtest/gtest.h>

#include "fedfreq/bounds.hpp"
#include "fedfreq/errors.hpp"
#include "oracles.hpp"

namespace fedfreq::bounds {
namespace {

TEST(PriorEntropy, MatchesEnumeration) {
  for (std::size_t d = 1; d <= 8; ++d) {
    for (std::size_t n = 0; n <= 5; ++n) {
      const double count =
          static_cast<double>(oracle::all_histograms(d, n).size());
      EXPECT_NEAR(histogram_prior_entropy(d, n), std::log2(count), 1e-12)
          << d << " " << n;
    }
  }
  EXPECT_EQ(histogram_prior_entropy(7, 0), 0.0);
  EXPECT_DOUBLE_EQ(histogram_prior_entropy(4, 2), std::log2(10.0));
}

TEST(PriorEntropy, LargeInstance) {
  // log2 C(109999, 99999), 30-digit reference value.
  const double h = histogram_prior_entropy(100000, 10000);
  EXPECT_NEAR(h, 48336.6301932183237944276286444, 1e-6);
  EXPECT_GE(h, 10000 * std::log2(10.0));
  EXPECT_LE(h, 10000 * std::log2(std::exp(1.0) * 109999.0 / 10000.0));
}

TEST(ExactFloor, Dropouts) {
  EXPECT_EQ(exact_recovery_floor(9, 4, 0), histogram_prior_entropy(9, 4));
  EXPECT_DOUBLE_EQ(exact_recovery_floor(4, 3, 1), std::log2(10.0));
  double prev = exact_recovery_floor(20, 10, 0);
  for (std::size_t k = 1; k < 10; ++k) {
    const double f = exact_recovery_floor(20, 10, k);
    EXPECT_LE(f, prev);
    prev = f;
  }
  EXPECT_THROW(exact_recovery_floor(4, 3, 3), ConfigError);
}

TEST(RateCurves, Shape) {
  const auto linf = rate_curve(1000, 50, RateLoss::kLinf);
  const auto l2 = rate_curve(1000, 50, RateLoss::kL2);
  EXPECT_DOUBLE_EQ(linf.unclamped(3.0), 2 * linf.unclamped(6.0));
  EXPECT_NEAR(l2.unclamped(7.0) / linf.unclamped(7.0), 50.0, 1e-12);
  EXPECT_NEAR(linf.unclamped(2.0), 50 * std::log2(1000.0) / 2.0, 1e-9);
  EXPECT_LT(linf(1e12), 1e-6);
  EXPECT_GE(linf(1e12), 0.0);
  EXPECT_EQ(linf(1e-6), linf.ceiling());
  EXPECT_EQ(linf.ceiling(), histogram_prior_entropy(1000, 50));
  double prev = linf(0.01);
  for (double b = 0.02; b < 100; b *= 1.5) {
    EXPECT_LE(linf(b), prev);
    prev = linf(b);
  }
  EXPECT_THROW(linf(0.0), InputError);
  EXPECT_THROW(linf(-1.0), InputError);
  const auto scaled = rate_curve(1000, 50, RateLoss::kLinf, 3.0);
  EXPECT_DOUBLE_EQ(scaled.unclamped(5.0), 3 * linf.unclamped(5.0));
}

TEST(Report, TextAndCsv) {
  const auto r = bound_report(4, 2);
  EXPECT_EQ(r.n_effective, 2u);
  const auto text = r.to_text();
  EXPECT_NE(text.find("3.3219 bits"), std::string::npos);
  const auto with_beta = r.to_text(1.0);
  EXPECT_NE(with_beta.find("scaling reference"), std::string::npos);
  const auto header = BoundReport::csv_header();
  const auto row = r.to_csv_row(2.0);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','),
            std::count(row.begin(), row.end(), ','));
}

}  // namespace
}  // namespace fedfreq::bounds
