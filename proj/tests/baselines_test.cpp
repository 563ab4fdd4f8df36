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


#include <bit>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fedfreq/baselines.hpp"
#include "oracles.hpp"

namespace fedfreq::baselines {
namespace {

TEST(Krr, KeepProbability) {
  EXPECT_DOUBLE_EQ(LocalMechanism::krr(0.0, 2).keep_probability(), 0.5);
  EXPECT_GE(LocalMechanism::krr(50.0, 10).keep_probability(), 1.0 - 1e-15);
  const auto m = LocalMechanism::krr(1.0, 4);
  EXPECT_NEAR(m.keep_probability(), std::exp(1.0) / (std::exp(1.0) + 3), 1e-15);
  EXPECT_NEAR(m.keep_probability() + 3 * m.other_probability(), 1.0, 1e-15);
}

TEST(Krr, ChannelRatioIsExactlyEEps) {
  const auto m = LocalMechanism::krr(1.0, 4);
  const auto ch = krr_channel(m);
  ASSERT_EQ(ch.size(), 4u);
  for (const auto& row : ch) {
    double s = 0;
    for (double p : row) s += p;
    EXPECT_NEAR(s, 1.0, 1e-15);
  }
  EXPECT_NEAR(max_likelihood_ratio(ch), std::exp(1.0), 1e-12);
}

TEST(Krr, HugeEpsilonEstimateIsRawCounts) {
  const auto m = LocalMechanism::krr(50.0, 3);
  const std::vector<Item> reports{{0}, {2}, {2}, {1}, {2}};
  const auto est = krr_estimate(reports, m);
  EXPECT_NEAR(est[0], 1.0, 1e-9);
  EXPECT_NEAR(est[1], 1.0, 1e-9);
  EXPECT_NEAR(est[2], 3.0, 1e-9);
}

TEST(Krr, EstimateSumsToN) {
  const auto m = LocalMechanism::krr(0.7, 6);
  Rng rng(3);
  std::vector<Item> reports;
  for (int i = 0; i < 137; ++i) {
    reports.push_back(krr_randomize(Item{static_cast<std::uint32_t>(i % 6)}, m, rng));
  }
  EXPECT_NEAR(krr_estimate(reports, m).sum(), 137.0, 1e-9);
}

TEST(Krr, Unbiased) {
  const auto m = LocalMechanism::krr(1.0, 4);
  const std::vector<Item> truth{{0}, {0}, {0}, {1}, {3}};
  const double mu[4] = {3, 1, 0, 1};
  Rng rng(11);
  std::vector<double> sum(4, 0.0), sq(4, 0.0);
  const int trials = 100000;
  std::vector<Item> reports(truth.size());
  for (int t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < truth.size(); ++i) {
      reports[i] = krr_randomize(truth[i], m, rng);
    }
    const auto est = krr_estimate(reports, m);
    for (std::size_t j = 0; j < 4; ++j) {
      sum[j] += est[j];
      sq[j] += est[j] * est[j];
    }
  }
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_NEAR(sum[j] / trials, mu[j], 3 * oracle::std_error(sum[j], sq[j], trials));
  }
}

TEST(Krr, RangeChecked) {
  Rng rng(1);
  EXPECT_THROW(krr_randomize(Item{4}, LocalMechanism::krr(1.0, 4), rng),
               InputError);
  EXPECT_THROW(LocalMechanism::krr(1.0, 1), ConfigError);
}

TEST(Hr, PaddingAndFlip) {
  const auto m = LocalMechanism::hadamard(1.0, 5);
  EXPECT_EQ(m.K, 8u);
  EXPECT_DOUBLE_EQ(LocalMechanism::hadamard(0.0, 4).flip_probability(), 0.5);
  EXPECT_NEAR(m.flip_probability(), 1.0 / (std::exp(1.0) + 1.0), 1e-15);
}

TEST(Hr, ChannelRatioAtMostEEps) {
  for (std::size_t d : {2u, 3u, 4u, 7u}) {
    const auto m = LocalMechanism::hadamard(1.3, d);
    const auto ch = hr_channel(m);
    EXPECT_LE(max_likelihood_ratio(ch), std::exp(1.3) + 1e-12);
    for (const auto& row : ch) {
      double s = 0;
      for (double p : row) s += p;
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(Hr, ZeroEpsilonBitIndependentOfItem) {
  const auto ch = hr_channel(LocalMechanism::hadamard(0.0, 4));
  for (std::size_t out = 0; out < ch[0].size(); ++out) {
    for (std::size_t x = 1; x < ch.size(); ++x) {
      EXPECT_DOUBLE_EQ(ch[x][out], ch[0][out]);
    }
  }
}

TEST(Hr, RowMarginalUniform) {
  const auto m = LocalMechanism::hadamard(1.0, 8);
  Rng rng(2);
  std::vector<double> counts(8, 0.0);
  const int draws = 80000;
  for (int i = 0; i < draws; ++i) ++counts[hr_randomize(Item{3}, m, rng).row];
  // Chi-square with 7 degrees of freedom; 40.52 is the 1e-6 critical value.
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - draws / 8.0) * (c - draws / 8.0) / (draws / 8.0);
  EXPECT_LT(chi2, 40.52);
}

TEST(Hr, NoiselessSurrogateRecoversExactly) {
  // flip probability 0 and every row observed once per user.
  auto m = LocalMechanism::hadamard(60.0, 4);
  const std::vector<std::uint32_t> users{0, 0, 2, 3, 3, 3};
  std::vector<HrReport> reports;
  for (std::uint32_t r = 0; r < 4; ++r) {
    for (auto u : users) {
      reports.push_back(HrReport{r, (std::popcount(r & u) % 2) ? -1 : 1});
    }
  }
  // Every user reports each of the 4 rows, i.e. a cohort of 24 reports
  // holding 4 copies of the 6 users.
  const auto est = hr_estimate(reports, m);
  EXPECT_NEAR(est[0], 8.0, 1e-9);
  EXPECT_NEAR(est[1], 0.0, 1e-9);
  EXPECT_NEAR(est[2], 4.0, 1e-9);
  EXPECT_NEAR(est[3], 12.0, 1e-9);
}

TEST(Hr, ZeroReportsZeroEstimate) {
  const auto est = hr_estimate({}, LocalMechanism::hadamard(1.0, 5));
  ASSERT_EQ(est.d(), 5u);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(est[j], 0.0);
}

TEST(Hr, Unbiased) {
  const auto m = LocalMechanism::hadamard(1.0, 4);
  const std::vector<Item> truth{{0}, {0}, {0}, {1}, {3}};
  const double mu[4] = {3, 1, 0, 1};
  Rng rng(12);
  std::vector<double> sum(4, 0.0), sq(4, 0.0);
  const int trials = 100000;
  std::vector<HrReport> reports(truth.size());
  for (int t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < truth.size(); ++i) {
      reports[i] = hr_randomize(truth[i], m, rng);
    }
    const auto est = hr_estimate(reports, m);
    for (std::size_t j = 0; j < 4; ++j) {
      sum[j] += est[j];
      sq[j] += est[j] * est[j];
    }
  }
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_NEAR(sum[j] / trials, mu[j], 3 * oracle::std_error(sum[j], sq[j], trials));
  }
}

TEST(Hr, DegenerateDebiasingIsConfigError) {
  const std::vector<HrReport> reports{{0, 1}, {1, -1}};
  EXPECT_THROW(hr_estimate(reports, LocalMechanism::hadamard(0.0, 4)),
               ConfigError);
  EXPECT_THROW(hr_estimate(reports, LocalMechanism::hadamard(1e-320, 4)),
               ConfigError);
}

}  // namespace
}  // namespace fedfreq::baselines
