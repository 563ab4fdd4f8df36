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


#ifndef FEDFREQ_HARNESS_HPP_
#define FEDFREQ_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedfreq/core.hpp"
#include "fedfreq/pbm.hpp"

namespace fedfreq::harness {

enum class Mechanism { kSketchedPbm, kKrr, kHr, kExactQgt, kNaiveOneHot };

std::string_view to_string(Mechanism m);
Mechanism parse_mechanism(std::string_view name);

enum class OutputFormat { kCsv, kJsonLines };

OutputFormat parse_format(std::string_view name);

struct ExperimentConfig {
  std::vector<Mechanism> mechanisms{Mechanism::kSketchedPbm, Mechanism::kKrr,
                                    Mechanism::kHr};
  Distribution distribution = Distribution::kZipf;
  double distribution_param = 1.0;
  std::vector<Item> items;  // explicit distribution only
  std::size_t d = 1000;
  std::vector<std::size_t> n_values{2000};
  std::vector<double> epsilons{1.0};
  double delta = 1e-5;
  double gamma = 0.05;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  double dropout_fraction = 0.0;
  std::string output;  // empty: standard output
  OutputFormat format = OutputFormat::kCsv;
  std::size_t threads = 1;

  std::optional<std::uint32_t> pbm_L;
  pbm::Sampling pbm_sampling = pbm::Sampling::kPerClient;
  std::optional<std::size_t> pbm_w;  // with pbm_t: fixed sketch size
  std::optional<std::size_t> pbm_t;
  double c0 = 1.0;
  bool threshold = false;
  double c_thr = 1.0;
  bool project = true;  // simplex projection before the l2 loss
  bool timing = false;  // wall_ms is 0 unless set, keeping output stable
  double exact_c_m = 4.0;

  void validate() const;
};

// Key-value text: one `key = value` per line, `#` starts a comment, lists
// are comma separated. Unknown keys and malformed values throw ConfigError.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ExperimentRecord {
  std::string mechanism;
  std::string distribution;
  std::size_t d = 0;
  std::size_t n = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::size_t trial = 0;
  double l2_error = 0.0;    // squared l2 of (estimate - truth) / n
  double linf_error = 0.0;  // linf of (estimate - truth) / n
  std::uint64_t comm_bits_per_user = 0;
  double wall_ms = 0.0;

  friend bool operator==(const ExperimentRecord&,
                         const ExperimentRecord&) = default;
};

struct SkippedRun {
  std::string mechanism;
  std::size_t n = 0;
  double epsilon = 0.0;
  std::size_t trial = 0;
  std::string reason;
};

struct ExperimentOutput {
  std::vector<ExperimentRecord> records;
  std::vector<SkippedRun> skipped;
};

// Every (n, epsilon) grid point x trial x mechanism either yields one
// record or one skip entry. Output order is (n, epsilon, trial, mechanism)
// whatever the thread count. Skip reasons are also written to `log`.
ExperimentOutput run_experiment(const ExperimentConfig& config,
                                std::ostream* log = nullptr);

inline constexpr std::string_view kCsvHeader =
    "mechanism,distribution,d,n,epsilon,delta,trial,l2_error,linf_error,"
    "comm_bits_per_user,wall_ms";

std::string to_csv_row(const ExperimentRecord& r);
ExperimentRecord parse_csv_row(std::string_view line);
std::string to_json_line(const ExperimentRecord& r);

void write_records(const std::vector<ExperimentRecord>& records,
                   OutputFormat format, std::ostream& out);
std::vector<ExperimentRecord> read_csv(std::istream& in);

}  // namespace fedfreq::harness

#endif  // FEDFREQ_HARNESS_HPP_
