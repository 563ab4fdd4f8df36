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
#include <sstream>
#include <tuple>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fedfreq/harness.hpp"

namespace fedfreq::harness {
namespace {

ExperimentConfig small_config() {
  return parse_config(R"(
mechanisms = sketched_pbm, krr, hr, naive_one_hot
distribution = geometric
distribution_param = 0.8
d = 64
n = 200, 400
epsilon = 1, 4
trials = 3
seed = 5
)");
}

TEST(Config, ParsesKeysAndDefaults) {
  const auto c = small_config();
  EXPECT_EQ(c.mechanisms.size(), 4u);
  EXPECT_EQ(c.distribution, Distribution::kGeometric);
  EXPECT_EQ(c.n_values, (std::vector<std::size_t>{200, 400}));
  EXPECT_EQ(c.epsilons, (std::vector<double>{1.0, 4.0}));
  EXPECT_EQ(c.delta, 1e-5);
  EXPECT_EQ(c.gamma, 0.05);
  EXPECT_FALSE(c.pbm_L.has_value());
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("colour = blue\n"), ConfigError);
  EXPECT_THROW(parse_config("d 10\n"), ConfigError);
  EXPECT_THROW(parse_config("d = ten\n"), ConfigError);
  EXPECT_THROW(parse_config("trials = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("n =\n"), ConfigError);
  EXPECT_THROW(parse_config("mechanisms = sketched_pbm, magic\n"), ConfigError);
  EXPECT_THROW(parse_config("pbm_w = 64\n"), ConfigError);
  EXPECT_THROW(parse_config("distribution = geometric\ndistribution_param = 2\n"),
               ConfigError);
  EXPECT_THROW(load_config("/nonexistent/path.conf"), ConfigError);
}

TEST(Config, ExplicitItems) {
  const auto c = parse_config(
      "mechanisms = naive_one_hot\ndistribution = explicit\nitems = 0, 0, 1\n"
      "d = 2\nn = 3\n");
  EXPECT_EQ(c.items.size(), 3u);
  EXPECT_THROW(parse_config("distribution = explicit\nitems = 0, 1\nd = 2\nn = 3\n"),
               ConfigError);
}

TEST(Experiment, NaiveOneHotIsExact) {
  auto c = parse_config("mechanisms = naive_one_hot\nd = 50\nn = 7\ntrials = 1\n");
  const auto out = run_experiment(c);
  ASSERT_EQ(out.records.size(), 1u);
  EXPECT_EQ(out.records[0].l2_error, 0.0);
  EXPECT_EQ(out.records[0].linf_error, 0.0);
  EXPECT_EQ(out.records[0].comm_bits_per_user, 50u * 3u);
}

TEST(Experiment, GridCompleteness) {
  auto c = small_config();
  c.mechanisms.push_back(Mechanism::kExactQgt);
  const auto out = run_experiment(c);
  std::set<std::tuple<std::string, std::size_t, double, std::size_t>> seen;
  for (const auto& r : out.records) {
    EXPECT_TRUE(seen.emplace(r.mechanism, r.n, r.epsilon, r.trial).second);
    EXPECT_GE(r.l2_error, 0.0);
    EXPECT_GE(r.linf_error, 0.0);
  }
  for (const auto& s : out.skipped) {
    EXPECT_FALSE(s.reason.empty());
    EXPECT_TRUE(seen.emplace(s.mechanism, s.n, s.epsilon, s.trial).second);
  }
  EXPECT_EQ(seen.size(), 5u * 2 * 2 * 3);
  // d = 64 with n >= 200 is far beyond enumeration.
  EXPECT_EQ(out.skipped.size(), 2u * 2 * 3);
}

TEST(Experiment, ExactQgtAtEnumerableScale) {
  auto c = parse_config(
      "mechanisms = exact_qgt, naive_one_hot\ndistribution = uniform_prior\n"
      "d = 6\nn = 2, 3\ntrials = 4\n");
  const auto out = run_experiment(c);
  EXPECT_TRUE(out.skipped.empty());
  for (const auto& r : out.records) {
    EXPECT_EQ(r.l2_error, 0.0);
    if (r.mechanism == "exact_qgt") {
      EXPECT_LT(r.comm_bits_per_user, 6u * (r.n == 2 ? 2u : 2u));
    }
  }
}

TEST(Experiment, PbmBitsMatchPrediction) {
  const auto c = small_config();
  const auto out = run_experiment(c);
  for (const auto& r : out.records) {
    if (r.mechanism != "sketched_pbm") continue;
    const auto p = pbm::choose_params(c.d, r.n, pbm::PrivacyBudget{r.epsilon, c.delta},
                                      c.gamma);
    EXPECT_EQ(r.comm_bits_per_user, p.predicted_bits());
  }
}

TEST(Experiment, DeterministicAcrossThreadCounts) {
  auto c = small_config();
  std::ostringstream a, b, again;
  write_records(run_experiment(c).records, OutputFormat::kCsv, a);
  write_records(run_experiment(c).records, OutputFormat::kCsv, again);
  c.threads = 3;
  write_records(run_experiment(c).records, OutputFormat::kCsv, b);
  EXPECT_EQ(a.str(), again.str());
  EXPECT_EQ(a.str(), b.str());
  c.seed = 6;
  std::ostringstream other;
  write_records(run_experiment(c).records, OutputFormat::kCsv, other);
  EXPECT_NE(a.str(), other.str());
}

TEST(Experiment, DropoutsBeyondToleranceAreSkipped) {
  auto c = parse_config(
      "mechanisms = sketched_pbm, krr\nd = 64\nn = 400\nepsilon = 4\n"
      "dropout_fraction = 0.6\n");
  const auto out = run_experiment(c);
  ASSERT_EQ(out.skipped.size(), 1u);
  EXPECT_EQ(out.skipped[0].mechanism, "sketched_pbm");
  ASSERT_EQ(out.records.size(), 1u);
  EXPECT_EQ(out.records[0].mechanism, "krr");
}

TEST(Experiment, ModerateDropoutsRecoverSurvivors) {
  auto c = parse_config(
      "mechanisms = naive_one_hot\nd = 16\nn = 40\ndropout_fraction = 0.25\n");
  const auto out = run_experiment(c);
  ASSERT_EQ(out.records.size(), 1u);
  EXPECT_EQ(out.records[0].l2_error, 0.0);
}

TEST(Csv, HeaderAndRoundTrip) {
  const auto out = run_experiment(small_config());
  std::stringstream s;
  write_records(out.records, OutputFormat::kCsv, s);
  std::string first;
  std::getline(std::istringstream(s.str()) >> std::ws, first);
  EXPECT_EQ(first,
            "mechanism,distribution,d,n,epsilon,delta,trial,l2_error,linf_error,"
            "comm_bits_per_user,wall_ms");
  const auto back = read_csv(s);
  EXPECT_EQ(back, out.records);
}

TEST(Csv, Errors) {
  std::istringstream bad_header("a,b,c\n");
  EXPECT_THROW(read_csv(bad_header), InputError);
  EXPECT_THROW(parse_csv_row("krr,zipf,1,2"), InputError);
  EXPECT_THROW(parse_csv_row("krr,zipf,x,2,1,1e-5,0,0,0,10,0"), InputError);
}

TEST(JsonLines, SameFieldNames) {
  const auto out = run_experiment(small_config());
  const auto j = nlohmann::json::parse(to_json_line(out.records.front()));
  std::string header(kCsvHeader);
  std::istringstream fields(header);
  std::string name;
  std::size_t count = 0;
  while (std::getline(fields, name, ',')) {
    EXPECT_TRUE(j.contains(name)) << name;
    ++count;
  }
  EXPECT_EQ(j.size(), count);
  EXPECT_EQ(j["mechanism"], out.records.front().mechanism);
  EXPECT_EQ(j["l2_error"].get<double>(), out.records.front().l2_error);
}

TEST(Names, RoundTrip) {
  for (auto m : {Mechanism::kSketchedPbm, Mechanism::kKrr, Mechanism::kHr,
                 Mechanism::kExactQgt, Mechanism::kNaiveOneHot}) {
    EXPECT_EQ(parse_mechanism(to_string(m)), m);
  }
  EXPECT_EQ(parse_format("json-lines"), OutputFormat::kJsonLines);
  EXPECT_THROW(parse_format("xml"), ConfigError);
}

}  // namespace
}  // namespace fedfreq::harness
