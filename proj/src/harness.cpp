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


#include "fedfreq/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>
#include <utility>

#include <fmt/format.h>
#include <json.hpp>

#include "fedfreq/baselines.hpp"
#include "fedfreq/exact.hpp"
#include "fedfreq/secagg.hpp"
#include "fedfreq/sketch.hpp"

namespace fedfreq::harness {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError(fmt::format("{}: cannot parse '{}'", key, text));
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(fmt::format("{}: expected true/false, got '{}'", key, text));
}

template <typename T>
std::vector<T> parse_list(std::string_view key, std::string_view text) {
  std::vector<T> out;
  for (auto part : split(text, ',')) out.push_back(parse_number<T>(key, part));
  return out;
}

}  // namespace

std::string_view to_string(Mechanism m) {
  switch (m) {
    case Mechanism::kSketchedPbm:
      return "sketched_pbm";
    case Mechanism::kKrr:
      return "krr";
    case Mechanism::kHr:
      return "hr";
    case Mechanism::kExactQgt:
      return "exact_qgt";
    case Mechanism::kNaiveOneHot:
      return "naive_one_hot";
  }
  return "unknown";
}

Mechanism parse_mechanism(std::string_view name) {
  for (auto m : {Mechanism::kSketchedPbm, Mechanism::kKrr, Mechanism::kHr,
                 Mechanism::kExactQgt, Mechanism::kNaiveOneHot}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError(fmt::format("unknown mechanism '{}'", name));
}

OutputFormat parse_format(std::string_view name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "json-lines") return OutputFormat::kJsonLines;
  throw ConfigError(fmt::format("unknown output format '{}'", name));
}

void ExperimentConfig::validate() const {
  if (mechanisms.empty()) throw ConfigError("no mechanisms selected");
  if (n_values.empty()) throw ConfigError("n grid is empty");
  if (epsilons.empty()) throw ConfigError("epsilon grid is empty");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (d < 2) throw ConfigError("d must be >= 2");
  for (auto n : n_values) {
    if (n < 1) throw ConfigError("every n must be >= 1");
  }
  for (double e : epsilons) {
    if (!(e > 0.0)) throw ConfigError("every epsilon must be > 0");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta outside (0,1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma outside (0,1)");
  if (!(dropout_fraction >= 0.0 && dropout_fraction < 1.0)) {
    throw ConfigError("dropout_fraction outside [0, 1)");
  }
  if (pbm_w.has_value() != pbm_t.has_value()) {
    throw ConfigError("pbm_w and pbm_t must be given together");
  }
  DataSpec probe;
  probe.distribution = distribution;
  probe.parameter = distribution_param;
  probe.d = d;
  probe.items = items;
  probe.n = distribution == Distribution::kExplicit ? items.size() : 0;
  probe.validate();
  if (distribution == Distribution::kExplicit) {
    for (auto n : n_values) {
      if (n != items.size()) {
        throw ConfigError("explicit items require every n to equal their count");
      }
    }
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    auto line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = trim(line.substr(0, hash));
    }
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("line {}: expected key = value", line_no));
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "mechanisms") {
      cfg.mechanisms.clear();
      for (auto m : split(value, ',')) cfg.mechanisms.push_back(parse_mechanism(m));
    } else if (key == "distribution") {
      cfg.distribution = parse_distribution(value);
    } else if (key == "distribution_param") {
      cfg.distribution_param = parse_number<double>(key, value);
    } else if (key == "items") {
      cfg.items.clear();
      for (auto v : parse_list<std::uint32_t>(key, value)) cfg.items.push_back(Item{v});
    } else if (key == "d") {
      cfg.d = parse_number<std::size_t>(key, value);
    } else if (key == "n") {
      cfg.n_values = parse_list<std::size_t>(key, value);
    } else if (key == "epsilon") {
      cfg.epsilons = parse_list<double>(key, value);
    } else if (key == "delta") {
      cfg.delta = parse_number<double>(key, value);
    } else if (key == "gamma") {
      cfg.gamma = parse_number<double>(key, value);
    } else if (key == "trials") {
      cfg.trials = parse_number<std::size_t>(key, value);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "dropout_fraction") {
      cfg.dropout_fraction = parse_number<double>(key, value);
    } else if (key == "output") {
      cfg.output = std::string(value);
    } else if (key == "format") {
      cfg.format = parse_format(value);
    } else if (key == "threads") {
      cfg.threads = parse_number<std::size_t>(key, value);
    } else if (key == "pbm_L") {
      cfg.pbm_L = parse_number<std::uint32_t>(key, value);
    } else if (key == "pbm_sampling") {
      if (value == "per_client") {
        cfg.pbm_sampling = pbm::Sampling::kPerClient;
      } else if (value == "aggregate") {
        cfg.pbm_sampling = pbm::Sampling::kAggregate;
      } else {
        throw ConfigError(fmt::format("pbm_sampling: unknown mode '{}'", value));
      }
    } else if (key == "pbm_w") {
      cfg.pbm_w = parse_number<std::size_t>(key, value);
    } else if (key == "pbm_t") {
      cfg.pbm_t = parse_number<std::size_t>(key, value);
    } else if (key == "c0") {
      cfg.c0 = parse_number<double>(key, value);
    } else if (key == "threshold") {
      cfg.threshold = parse_bool(key, value);
    } else if (key == "c_thr") {
      cfg.c_thr = parse_number<double>(key, value);
    } else if (key == "project") {
      cfg.project = parse_bool(key, value);
    } else if (key == "timing") {
      cfg.timing = parse_bool(key, value);
    } else if (key == "exact_c_m") {
      cfg.exact_c_m = parse_number<double>(key, value);
    } else {
      throw ConfigError(fmt::format("line {}: unknown key '{}'", line_no, key));
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

namespace {

struct Trial {
  std::size_t n_index;
  std::size_t eps_index;
  std::size_t trial;
};

struct TrialOutput {
  std::vector<ExperimentRecord> records;
  std::vector<SkippedRun> skipped;
};

// A mechanism's estimate on the survivors plus its wire cost.
struct Estimate {
  EstimatedHistogram values;
  std::uint64_t bits = 0;
};

class Skip : public std::exception {
 public:
  explicit Skip(std::string reason) : reason_(std::move(reason)) {}
  const char* what() const noexcept override { return reason_.c_str(); }

 private:
  std::string reason_;
};

Estimate run_pbm(const ExperimentConfig& cfg, std::span<const Item> items,
                 const std::vector<std::size_t>& dropped, double epsilon,
                 Rng& rng) {
  pbm::ParamOptions opts;
  opts.c0 = cfg.c0;
  opts.L_override = cfg.pbm_L;
  opts.fixed_w = cfg.pbm_w;
  opts.fixed_t = cfg.pbm_t;
  const pbm::PrivacyBudget budget{epsilon, cfg.delta};
  pbm::PbmParams params;
  try {
    params = pbm::choose_params(cfg.d, items.size(), budget, cfg.gamma, opts);
  } catch (const ConfigError& e) {
    throw Skip(e.what());
  }
  const auto matrix = sketch::SketchMatrix::build(
      sketch::SketchConfig{cfg.d, params.w, params.t, rng()});
  pbm::RoundOptions round;
  round.sampling = cfg.pbm_sampling;
  round.dropped = dropped;
  auto result = pbm::run_sketched_pbm(items, matrix, params, rng, round);
  EstimatedHistogram est = std::move(result.estimate);
  if (cfg.threshold) {
    est = pbm::threshold_estimate(est, params.t, budget, cfg.c_thr);
  }
  return {std::move(est), params.predicted_bits()};
}

Estimate run_naive(const ExperimentConfig& cfg, std::span<const Item> items,
                   const std::vector<std::size_t>& dropped, Rng& rng) {
  const std::size_t n = items.size();
  const secagg::GroupSpec group{cfg.d, static_cast<std::uint64_t>(n) + 1};
  const auto masks = secagg::deal_masks(n, group, rng);
  secagg::StreamingAggregator server(group, n,
                                     secagg::DropoutPolicy::for_cohort(n));
  std::vector<std::uint64_t> one_hot(cfg.d, 0);
  std::size_t g = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (g < dropped.size() && dropped[g] == i) {
      ++g;
      continue;
    }
    one_hot[items[i].index] = 1;
    server.submit(i, secagg::mask_message(secagg::GroupVector(group, one_hot),
                                          masks.mask(i)));
    one_hot[items[i].index] = 0;
  }
  const auto sum = server.finish(masks);
  std::vector<double> v(sum.entries().begin(), sum.entries().end());
  return {EstimatedHistogram(std::move(v)), group.bits_per_message()};
}

Estimate run_exact(const ExperimentConfig& cfg,
                   std::span<const Item> survivors, Rng& rng) {
  const std::size_t n = survivors.size();
  const exact::HistogramFamily family(cfg.d, n);
  if (!family.enumerable()) {
    const auto size = family.size();
    throw Skip(fmt::format(
        "histogram family C({}, {}) = {} exceeds the enumeration limit {}",
        cfg.d + n - 1, cfg.d - 1,
        size ? fmt::format("{}", *size) : std::string("overflow"),
        exact::HistogramFamily::kEnumerationLimit));
  }
  const std::size_t rows = exact::compressed_rows(cfg.d, n, cfg.exact_c_m);
  const auto certified = exact::find_injective_embedding(rows, family, rng());
  if (!certified) {
    throw Skip(fmt::format("no injective {}x{} embedding within 16 draws", rows,
                           cfg.d));
  }
  auto result = exact::secure_exact_pipeline(survivors, certified->embedding, rng);
  return {EstimatedHistogram::from(result.histogram), result.bits_per_user};
}

TrialOutput run_trial(const ExperimentConfig& cfg, const Trial& unit,
                      std::size_t grid_index) {
  TrialOutput out;
  const std::size_t n = cfg.n_values[unit.n_index];
  const double epsilon = cfg.epsilons[unit.eps_index];
  const Rng root(cfg.seed);

  // Data depends on (n, trial) only, so every epsilon and mechanism sees the
  // same population.
  Rng data_rng = root.child(0).child(unit.n_index).child(unit.trial);
  DataSpec spec;
  spec.distribution = cfg.distribution;
  spec.parameter = cfg.distribution_param;
  spec.items = cfg.items;
  spec.d = cfg.d;
  spec.n = n;
  const std::vector<Item> items = generate_items(spec, data_rng);

  std::vector<std::size_t> dropped;
  const auto num_dropped =
      static_cast<std::size_t>(cfg.dropout_fraction * static_cast<double>(n));
  if (num_dropped > 0) {
    std::vector<std::size_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = i;
    for (std::size_t i = 0; i < num_dropped; ++i) {
      std::swap(ids[i], ids[i + data_rng.uniform_below(n - i)]);
    }
    dropped.assign(ids.begin(), ids.begin() + num_dropped);
    std::sort(dropped.begin(), dropped.end());
  }
  std::vector<Item> survivors;
  survivors.reserve(n - dropped.size());
  {
    std::size_t g = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (g < dropped.size() && dropped[g] == i) {
        ++g;
      } else {
        survivors.push_back(items[i]);
      }
    }
  }
  const Histogram truth = histogram_of(survivors, cfg.d);
  const auto policy = secagg::DropoutPolicy::for_cohort(n);

  for (const Mechanism mech : cfg.mechanisms) {
    Rng rng = root.child(1).child(grid_index).child(unit.trial).child(
        static_cast<std::uint64_t>(mech));
    const auto start = std::chrono::steady_clock::now();
    try {
      const bool via_secagg = mech == Mechanism::kSketchedPbm ||
                              mech == Mechanism::kNaiveOneHot;
      if (via_secagg && dropped.size() > policy.max_dropouts) {
        throw Skip(fmt::format("{} dropouts exceed the tolerance {}",
                               dropped.size(), policy.max_dropouts));
      }
      Estimate est = [&]() -> Estimate {
        switch (mech) {
          case Mechanism::kSketchedPbm:
            return run_pbm(cfg, items, dropped, epsilon, rng);
          case Mechanism::kNaiveOneHot:
            return run_naive(cfg, items, dropped, rng);
          case Mechanism::kExactQgt:
            return run_exact(cfg, survivors, rng);
          case Mechanism::kKrr: {
            const auto m = baselines::LocalMechanism::krr(epsilon, cfg.d);
            std::vector<Item> reports;
            reports.reserve(survivors.size());
            for (const Item& it : survivors) {
              reports.push_back(baselines::krr_randomize(it, m, rng));
            }
            return {baselines::krr_estimate(reports, m), m.report_bits()};
          }
          case Mechanism::kHr: {
            const auto m = baselines::LocalMechanism::hadamard(epsilon, cfg.d);
            std::vector<baselines::HrReport> reports;
            reports.reserve(survivors.size());
            for (const Item& it : survivors) {
              reports.push_back(baselines::hr_randomize(it, m, rng));
            }
            return {baselines::hr_estimate(reports, m), m.report_bits()};
          }
        }
        throw Skip("unknown mechanism");
      }();
      const double ms =
          cfg.timing ? std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count()
                     : 0.0;
      const EstimatedHistogram for_l2 =
          cfg.project ? project_to_scaled_simplex(
                            est.values, static_cast<double>(truth.n()))
                      : est.values;
      ExperimentRecord rec;
      rec.mechanism = std::string(to_string(mech));
      rec.distribution = std::string(to_string(cfg.distribution));
      rec.d = cfg.d;
      rec.n = n;
      rec.epsilon = epsilon;
      rec.delta = cfg.delta;
      rec.trial = unit.trial;
      rec.l2_error = normalized_loss(for_l2, truth, LossKind::kL2Squared);
      rec.linf_error = normalized_loss(est.values, truth, LossKind::kLinf);
      rec.comm_bits_per_user = est.bits;
      rec.wall_ms = ms;
      out.records.push_back(std::move(rec));
    } catch (const Skip& s) {
      out.skipped.push_back(SkippedRun{std::string(to_string(mech)), n, epsilon,
                                       unit.trial, s.what()});
    }
  }
  return out;
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& config,
                                std::ostream* log) {
  config.validate();
  std::vector<Trial> units;
  for (std::size_t ni = 0; ni < config.n_values.size(); ++ni) {
    for (std::size_t ei = 0; ei < config.epsilons.size(); ++ei) {
      for (std::size_t tr = 0; tr < config.trials; ++tr) {
        units.push_back(Trial{ni, ei, tr});
      }
    }
  }
  std::vector<TrialOutput> slots(units.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(config.threads);

  auto worker = [&](std::size_t id) {
    try {
      for (;;) {
        const std::size_t k = next.fetch_add(1);
        if (k >= units.size()) return;
        const Trial& u = units[k];
        const std::size_t grid = u.n_index * config.epsilons.size() + u.eps_index;
        slots[k] = run_trial(config, u, grid);
      }
    } catch (...) {
      errors[id] = std::current_exception();
      next.store(units.size());
    }
  };

  const std::size_t workers = std::min(config.threads, units.size());
  if (workers <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker, i);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExperimentOutput out;
  for (auto& slot : slots) {
    for (auto& r : slot.records) out.records.push_back(std::move(r));
    for (auto& s : slot.skipped) {
      if (log) {
        *log << fmt::format("skipped {} n={} epsilon={} trial={}: {}\n",
                            s.mechanism, s.n, s.epsilon, s.trial, s.reason);
      }
      out.skipped.push_back(std::move(s));
    }
  }
  return out;
}

std::string to_csv_row(const ExperimentRecord& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{}", r.mechanism,
                     r.distribution, r.d, r.n, r.epsilon, r.delta, r.trial,
                     r.l2_error, r.linf_error, r.comm_bits_per_user, r.wall_ms);
}

ExperimentRecord parse_csv_row(std::string_view line) {
  const auto f = split(trim(line), ',');
  if (f.size() != 11) {
    throw InputError(fmt::format("CSV row has {} fields, expected 11", f.size()));
  }
  try {
    ExperimentRecord r;
    r.mechanism = std::string(f[0]);
    r.distribution = std::string(f[1]);
    r.d = parse_number<std::size_t>("d", f[2]);
    r.n = parse_number<std::size_t>("n", f[3]);
    r.epsilon = parse_number<double>("epsilon", f[4]);
    r.delta = parse_number<double>("delta", f[5]);
    r.trial = parse_number<std::size_t>("trial", f[6]);
    r.l2_error = parse_number<double>("l2_error", f[7]);
    r.linf_error = parse_number<double>("linf_error", f[8]);
    r.comm_bits_per_user = parse_number<std::uint64_t>("comm_bits", f[9]);
    r.wall_ms = parse_number<double>("wall_ms", f[10]);
    return r;
  } catch (const ConfigError& e) {
    throw InputError(e.what());
  }
}

std::string to_json_line(const ExperimentRecord& r) {
  nlohmann::ordered_json j;
  j["mechanism"] = r.mechanism;
  j["distribution"] = r.distribution;
  j["d"] = r.d;
  j["n"] = r.n;
  j["epsilon"] = r.epsilon;
  j["delta"] = r.delta;
  j["trial"] = r.trial;
  j["l2_error"] = r.l2_error;
  j["linf_error"] = r.linf_error;
  j["comm_bits_per_user"] = r.comm_bits_per_user;
  j["wall_ms"] = r.wall_ms;
  return j.dump();
}

void write_records(const std::vector<ExperimentRecord>& records,
                   OutputFormat format, std::ostream& out) {
  if (format == OutputFormat::kCsv) {
    out << kCsvHeader << '\n';
    for (const auto& r : records) out << to_csv_row(r) << '\n';
  } else {
    for (const auto& r : records) out << to_json_line(r) << '\n';
  }
}

std::vector<ExperimentRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kCsvHeader) {
    throw InputError("CSV header does not match the experiment schema");
  }
  std::vector<ExperimentRecord> out;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    out.push_back(parse_csv_row(line));
  }
  return out;
}

}  // namespace fedfreq::harness
