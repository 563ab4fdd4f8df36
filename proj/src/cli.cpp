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


#include "fedfreq/cli.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fedfreq/bounds.hpp"
#include "fedfreq/exact.hpp"
#include "fedfreq/harness.hpp"
#include "fedfreq/pbm.hpp"
#include "fedfreq/secagg.hpp"
#include "fedfreq/transform.hpp"

namespace fedfreq::cli {

namespace {

struct SimulateArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  std::optional<std::size_t> threads;
};

struct BoundsArgs {
  std::size_t d = 0;
  std::size_t n = 0;
  std::size_t dropouts = 0;
  double constant = 1.0;
  std::optional<double> beta;
  bool csv = false;
};

struct AuditArgs {
  std::size_t n = 2;
  std::size_t m = 1;
  std::uint64_t modulus = 3;
  std::vector<std::size_t> dropped;
  std::optional<std::size_t> max_dropouts;
  bool csv = false;
};

struct ExactArgs {
  std::size_t d = 6;
  std::size_t n = 2;
  std::uint64_t seed = 0;
  double c_m = 4.0;
  std::optional<std::size_t> rows;
};

struct AccountantArgs {
  std::optional<double> epsilon;
  double delta = 1e-5;
  std::size_t d = 1000;
  std::size_t n = 1000;
  double gamma = 0.05;
  std::optional<std::uint32_t> L;
  std::optional<double> theta;
  std::optional<std::size_t> w;
  std::optional<std::size_t> t;
  double c0 = 1.0;
};

// Writes to --out when given, otherwise to `out`.
void emit(const std::string& path, std::ostream& out,
          const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(out);
    return;
  }
  std::ofstream file(path);
  if (!file) throw Error(fmt::format("cannot write '{}'", path));
  body(file);
  if (!file) throw Error(fmt::format("write to '{}' failed", path));
}

int run_simulate(const SimulateArgs& args, std::ostream& out,
                 std::ostream& err) {
  harness::ExperimentConfig cfg = harness::load_config(args.config);
  if (args.seed) cfg.seed = *args.seed;
  if (!args.out.empty()) cfg.output = args.out;
  if (!args.format.empty()) cfg.format = harness::parse_format(args.format);
  if (args.threads) cfg.threads = *args.threads;
  cfg.validate();
  const auto result = harness::run_experiment(cfg, &err);
  emit(cfg.output, out, [&](std::ostream& os) {
    harness::write_records(result.records, cfg.format, os);
  });
  return 0;
}

int run_bounds(const BoundsArgs& args, std::ostream& out) {
  if (args.d < 1) throw ConfigError("--d must be >= 1");
  if (args.dropouts >= args.n && args.n > 0) {
    throw ConfigError("--dropouts must be below --n");
  }
  const auto report = bounds::bound_report(args.d, args.n, args.dropouts,
                                           args.constant);
  if (args.csv) {
    out << bounds::BoundReport::csv_header() << '\n'
        << report.to_csv_row(args.beta) << '\n';
  } else {
    out << report.to_text(args.beta);
  }
  return 0;
}

int run_audit(const AuditArgs& args, std::ostream& out) {
  const secagg::GroupSpec group{args.m, args.modulus};
  group.validate();
  const secagg::DropoutPolicy policy =
      args.max_dropouts ? secagg::DropoutPolicy{*args.max_dropouts}
                        : secagg::DropoutPolicy::for_cohort(args.n);
  const auto encoder = secagg::all_group_elements(group);
  const auto correctness =
      secagg::verify_recovery(group, args.n, encoder, args.dropped, policy);
  const auto report =
      secagg::security_audit(group, args.n, encoder, args.dropped, policy);
  if (args.csv) {
    out << secagg::AuditReport::csv_header() << '\n'
        << report.to_csv_row() << '\n';
  } else {
    out << report.to_text();
    out << fmt::format("recovery cases {}  exact {}  refused {}\n",
                       correctness.cases, correctness.exact,
                       correctness.refused);
  }
  return 0;
}

int run_exact(const ExactArgs& args, std::ostream& out) {
  const exact::HistogramFamily family(args.d, args.n);
  if (!family.enumerable()) {
    throw ConfigError(fmt::format(
        "d = {}, n = {} is beyond the enumeration limit", args.d, args.n));
  }
  const std::size_t rows =
      args.rows.value_or(exact::compressed_rows(args.d, args.n, args.c_m));
  const auto certified = exact::find_injective_embedding(rows, family, args.seed);
  if (!certified) {
    out << fmt::format("no injective {}x{} embedding in 16 attempts\n", rows,
                       args.d);
    return 1;
  }
  Rng rng(args.seed);
  std::uint64_t total = 0;
  std::uint64_t exact_count = 0;
  std::uint64_t bits = 0;
  family.for_each([&](const Histogram& h) {
    std::vector<Item> items;
    for (std::size_t j = 0; j < h.d(); ++j) {
      for (std::uint64_t c = 0; c < h[j]; ++c) {
        items.push_back(Item{static_cast<std::uint32_t>(j)});
      }
    }
    ++total;
    if (items.empty()) {
      ++exact_count;
      return;
    }
    const auto result =
        exact::secure_exact_pipeline(items, certified->embedding, rng);
    bits = result.bits_per_user;
    if (result.histogram == h) ++exact_count;
  });
  const auto naive = static_cast<std::uint64_t>(args.d) *
                     static_cast<std::uint64_t>(std::bit_width(args.n));
  out << fmt::format("embedding       {} x {} (seed {}, attempt {})\n", rows,
                     args.d, certified->seed, certified->attempts);
  out << fmt::format("histograms      {}\n", total);
  out << fmt::format("decoded exactly {}\n", exact_count);
  out << fmt::format("bits per user   {}\n", bits);
  out << fmt::format("one-hot bits    {}\n", naive);
  return exact_count == total ? 0 : 1;
}

int run_accountant(const AccountantArgs& args, std::ostream& out) {
  pbm::PbmParams params;
  if (args.epsilon) {
    pbm::ParamOptions opts;
    opts.c0 = args.c0;
    opts.L_override = args.L;
    opts.fixed_w = args.w;
    opts.fixed_t = args.t;
    params = pbm::choose_params(args.d, args.n,
                                pbm::PrivacyBudget{*args.epsilon, args.delta},
                                args.gamma, opts);
  } else {
    if (!args.L || !args.theta || !args.w || !args.t) {
      throw ConfigError(
          "give --epsilon, or all of --L --theta --w --t for fixed parameters");
    }
    params.L = *args.L;
    params.theta = *args.theta;
    params.w = *args.w;
    params.t = *args.t;
    params.n = args.n;
    params.c0 = args.c0;
  }
  params.validate();
  const auto curve = pbm::rdp_curve(params);
  const auto conv = pbm::rdp_to_approx_dp_detailed(curve, args.delta);
  out << fmt::format("L {}  theta {:.6f}  w {}  t {}  n {}\n", params.L,
                     params.theta, params.w, params.t, params.n);
  out << fmt::format("rdp slope       {:.6g}\n", curve.slope);
  out << fmt::format("epsilon         {:.6f}  (delta {:g}, alpha {:.4f})\n",
                     conv.epsilon, args.delta, conv.alpha);
  out << fmt::format("bits per user   {}\n", params.predicted_bits());
  return 0;
}

// Quick invariants on tiny instances; each prints one line.
int run_selftest(std::ostream& out) {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    out << (ok ? "ok   " : "FAIL ") << name << '\n';
    if (!ok) ++failures;
  };

  {
    std::vector<double> v{0.5, -1.0, 2.0, 0.25, 3.0, -0.75, 1.5, 0.0};
    auto w = transform::wht(v);
    transform::wht_inplace(w);
    double err = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      err = std::max(err, std::abs(w[i] - v[i]));
    }
    check("wht involution", err < 1e-12);
  }
  {
    const secagg::GroupSpec group{1, 5};
    const auto enc = secagg::all_group_elements(group);
    const std::vector<std::size_t> dropped{2};
    const auto r = secagg::verify_recovery(group, 3, enc, dropped,
                                           secagg::DropoutPolicy{1});
    check("secagg recovery with one dropout", r.all_exact());
  }
  {
    const secagg::GroupSpec group{1, 3};
    const auto enc = secagg::all_group_elements(group);
    const auto a = secagg::security_audit(group, 2, enc, {},
                                          secagg::DropoutPolicy{0});
    check("secagg audit", a.s1_max_tv == 0.0);
  }
  check("prior entropy d=4 n=2",
        std::abs(bounds::histogram_prior_entropy(4, 2) - std::log2(10.0)) <
            1e-12);
  {
    const exact::HistogramFamily family(4, 2);
    const auto c = exact::find_injective_embedding(
        exact::compressed_rows(4, 2), family, 1);
    check("exact embedding certifies", c.has_value());
  }
  {
    const pbm::RdpCurve curve{1.0, 0.0};
    const double e = pbm::approx_dp_epsilon_at(curve, std::exp(-1.0), 2.0);
    check("accountant closed form", std::abs(e - (2.0 - 2.0 * std::log(2.0))) <
                                        1e-12);
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Secure, differentially private federated frequency estimation",
               "fedfreq"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run an experiment grid");
  simulate->add_option("--config", sim.config, "Config file")->required();
  simulate->add_option("--seed", sim.seed, "Override the config seed");
  simulate->add_option("--out", sim.out, "Output path (default stdout)");
  simulate->add_option("--format", sim.format, "csv or json-lines");
  simulate->add_option("--threads", sim.threads, "Worker threads");

  BoundsArgs bnd;
  auto* bounds_cmd =
      app.add_subcommand("bounds", "Communication lower-bound report");
  bounds_cmd->add_option("--d", bnd.d, "Domain size")->required();
  bounds_cmd->add_option("--n", bnd.n, "Number of clients")->required();
  bounds_cmd->add_option("--dropouts", bnd.dropouts, "Dropped clients");
  bounds_cmd->add_option("--constant", bnd.constant, "Rate curve constant");
  bounds_cmd->add_option("--beta", bnd.beta, "Evaluate rate curves at beta");
  bounds_cmd->add_flag("--csv", bnd.csv, "CSV instead of text");

  AuditArgs aud;
  auto* audit = app.add_subcommand("audit", "Exhaustive SecAgg audit");
  audit->add_option("--n", aud.n, "Clients");
  audit->add_option("--m", aud.m, "Vector length");
  audit->add_option("--modulus", aud.modulus, "Group modulus M");
  audit->add_option("--dropped", aud.dropped, "Dropped client indices")
      ->delimiter(',');
  audit->add_option("--max-dropouts", aud.max_dropouts, "Dropout tolerance");
  audit->add_flag("--csv", aud.csv, "CSV instead of text");

  ExactArgs ex;
  auto* exact_cmd =
      app.add_subcommand("exact", "Certify an embedding and round-trip it");
  exact_cmd->add_option("--d", ex.d, "Domain size");
  exact_cmd->add_option("--n", ex.n, "Clients");
  exact_cmd->add_option("--seed", ex.seed, "Seed");
  exact_cmd->add_option("--c-m", ex.c_m, "Row constant");
  exact_cmd->add_option("--rows", ex.rows, "Embedding rows");

  AccountantArgs acc;
  auto* accountant =
      app.add_subcommand("accountant", "Privacy of a PBM configuration");
  accountant->add_option("--epsilon", acc.epsilon, "Target epsilon");
  accountant->add_option("--delta", acc.delta, "delta");
  accountant->add_option("--d", acc.d, "Domain size");
  accountant->add_option("--n", acc.n, "Clients");
  accountant->add_option("--gamma", acc.gamma, "Sketch failure probability");
  accountant->add_option("--L", acc.L, "Binomial trials");
  accountant->add_option("--theta", acc.theta, "Bias");
  accountant->add_option("--w", acc.w, "Sketch width");
  accountant->add_option("--t", acc.t, "Sketch repetitions");
  accountant->add_option("--c0", acc.c0, "RDP constant");

  auto* selftest = app.add_subcommand("selftest", "Fast invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    err << app.help();
    return 2;
  }

  try {
    if (*simulate) return run_simulate(sim, out, err);
    if (*bounds_cmd) return run_bounds(bnd, out);
    if (*audit) return run_audit(aud, out);
    if (*exact_cmd) return run_exact(ex, out);
    if (*accountant) return run_accountant(acc, out);
    if (*selftest) return run_selftest(out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace fedfreq::cli
