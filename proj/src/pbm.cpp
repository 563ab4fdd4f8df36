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


#include "fedfreq/pbm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <utility>

#include <fmt/format.h>

#include "fedfreq/transform.hpp"

namespace fedfreq::pbm {

void PrivacyBudget::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError(fmt::format("epsilon must be > 0, got {}", epsilon));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError(fmt::format("delta must lie in (0, 1), got {}", delta));
  }
}

void PbmParams::validate() const {
  if (L < 1) throw ConfigError("PBM needs L >= 1");
  if (!(theta > 0.0 && theta <= 0.25)) {
    throw ConfigError(fmt::format("PBM theta must lie in (0, 1/4], got {}",
                                  theta));
  }
  if (!transform::is_power_of_two(w)) {
    throw ConfigError(fmt::format("PBM w = {} is not a power of two", w));
  }
  if (t < 1) throw ConfigError("PBM needs t >= 1");
  if (!(c0 > 0.0)) throw ConfigError("accountant constant c0 must be > 0");
}

std::uint64_t PbmParams::modulus() const {
  return static_cast<std::uint64_t>(n) * L + 1;
}

std::uint64_t PbmParams::predicted_bits() const {
  const auto per_entry =
      static_cast<std::uint64_t>(std::bit_width(modulus() - 1));
  return static_cast<std::uint64_t>(w) * t * per_entry;
}

PbmParams choose_params(std::size_t d, std::size_t n,
                        const PrivacyBudget& budget, double gamma,
                        const ParamOptions& options) {
  budget.validate();
  if (n < 1) throw ConfigError("choose_params needs n >= 1");
  if (d < 1) throw ConfigError("choose_params needs d >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ConfigError("failure probability gamma must lie in (0, 1)");
  }
  const double log_d_gamma = std::log2(static_cast<double>(d) / gamma);
  const double log_inv_delta = std::log(1.0 / budget.delta);
  const double nd = static_cast<double>(n);

  PbmParams p;
  p.n = n;
  p.c0 = options.c0;
  p.t = options.fixed_t ? *options.fixed_t
                        : sketch::default_repetitions(d, gamma);
  if (p.t % 2 == 0) ++p.t;

  if (options.fixed_w) {
    p.w = *options.fixed_w;
  } else {
    const double target = std::min(
        nd, nd * budget.epsilon / std::sqrt(log_d_gamma * log_inv_delta));
    if (target < 2.0) {
      throw ConfigError(fmt::format(
          "sketch width {:.3g} < 2 for n = {}, epsilon = {}; increase n or "
          "epsilon",
          target, n, budget.epsilon));
    }
    p.w = transform::floor_power_of_two(static_cast<std::size_t>(target));
  }
  if (p.w < 2 || !transform::is_power_of_two(p.w)) {
    throw ConfigError(fmt::format("sketch width {} is unusable", p.w));
  }

  const double x = nd * budget.epsilon * budget.epsilon /
                   (static_cast<double>(p.w) * static_cast<double>(p.t) *
                    log_inv_delta);
  if (options.L_override) {
    p.L = *options.L_override;
    if (p.L < 1) throw ConfigError("L override must be >= 1");
    p.theta = std::min(0.25, std::sqrt(x / p.L));
  } else {
    const double L = std::max(std::ceil(x) + 1.0, std::ceil(16.0 * x));
    if (L > static_cast<double>(std::numeric_limits<std::uint32_t>::max())) {
      throw ConfigError("binomial trial count L overflows");
    }
    p.L = static_cast<std::uint32_t>(L);
    p.theta = std::min(0.25, std::sqrt(x / p.L));
  }
  p.validate();
  return p;
}

double encode_probability(double flattened_value, const PbmParams& params) {
  return params.theta * std::sqrt(static_cast<double>(params.w)) *
             flattened_value +
         0.5;
}

std::vector<std::uint32_t> pbm_encode(std::span<const double> flattened,
                                      const PbmParams& params, Rng& rng) {
  if (flattened.size() != params.w) {
    throw InputError(fmt::format("flattened block has {} entries, w = {}",
                                 flattened.size(), params.w));
  }
  std::vector<std::uint32_t> out(flattened.size());
  for (std::size_t k = 0; k < flattened.size(); ++k) {
    double p = encode_probability(flattened[k], params);
    if (!(p >= -1e-12 && p <= 1.0 + 1e-12)) {
      throw InputError(fmt::format(
          "encode probability {} outside [0, 1] at coordinate {}", p, k));
    }
    p = std::clamp(p, 0.0, 1.0);
    out[k] = static_cast<std::uint32_t>(rng.binomial(params.L, p));
  }
  return out;
}

std::vector<double> pbm_decode(std::span<const std::uint64_t> aggregated,
                               const PbmParams& params,
                               std::size_t contributors) {
  if (aggregated.size() != params.w) {
    throw InputError(fmt::format("aggregated block has {} entries, w = {}",
                                 aggregated.size(), params.w));
  }
  const std::uint64_t max_sum =
      static_cast<std::uint64_t>(contributors) * params.L;
  const double L = params.L;
  const double half_n = 0.5 * static_cast<double>(contributors);
  std::vector<double> v(aggregated.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (aggregated[k] > max_sum) {
      throw InputError(fmt::format(
          "aggregate {} exceeds {} clients x L = {}", aggregated[k],
          contributors, params.L));
    }
    v[k] = static_cast<double>(aggregated[k]) / L - half_n;
  }
  transform::wht_inplace(v);
  const double scale =
      1.0 / (params.theta * std::sqrt(static_cast<double>(params.w)));
  for (double& x : v) x *= scale;
  return v;
}

std::vector<double> pbm_decode(std::span<const std::uint64_t> aggregated,
                               const PbmParams& params) {
  return pbm_decode(aggregated, params, params.n);
}

double RdpCurve::operator()(double alpha) const {
  if (!(alpha > 1.0)) {
    throw InputError(fmt::format("RDP order alpha = {} must exceed 1", alpha));
  }
  return intercept + slope * alpha;
}

RdpCurve rdp_curve(const PbmParams& params) {
  params.validate();
  if (params.n < 1) throw ConfigError("RDP curve needs n >= 1");
  RdpCurve c;
  c.slope = params.c0 * params.theta * params.theta * params.L *
            static_cast<double>(params.w) * static_cast<double>(params.t) /
            static_cast<double>(params.n);
  return c;
}

double approx_dp_epsilon_at(const RdpCurve& curve, double delta,
                            double alpha) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InputError("delta must lie in (0, 1)");
  }
  const double am1 = alpha - 1.0;
  return curve(alpha) + (std::log(1.0 / delta) +
                         am1 * std::log1p(-1.0 / alpha) - std::log(alpha)) /
                            am1;
}

Conversion rdp_to_approx_dp_detailed(const RdpCurve& curve, double delta) {
  // Search variable u = ln(alpha - 1).
  auto objective = [&](double u) {
    return approx_dp_epsilon_at(curve, delta, 1.0 + std::exp(u));
  };
  constexpr double kLo = -16.0;
  constexpr double kHi = 24.0;
  constexpr double kStep = 0.25;
  const int steps = static_cast<int>((kHi - kLo) / kStep);

  double best_u = kLo;
  double best = objective(kLo);
  int best_i = 0;
  for (int i = 1; i <= steps; ++i) {
    const double u = kLo + kStep * i;
    const double v = objective(u);
    if (v < best) {
      best = v;
      best_u = u;
      best_i = i;
    }
  }

  double a = kLo + kStep * std::max(0, best_i - 1);
  double b = kLo + kStep * std::min(steps, best_i + 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  while (b - a > 1e-10) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  const double u = 0.5 * (a + b);
  const double v = objective(u);
  if (v < best) {
    best = v;
    best_u = u;
  }
  return Conversion{best, 1.0 + std::exp(best_u)};
}

double rdp_to_approx_dp(const RdpCurve& curve, double delta) {
  return rdp_to_approx_dp_detailed(curve, delta).epsilon;
}

EstimatedHistogram threshold_estimate(const EstimatedHistogram& est,
                                      std::size_t t,
                                      const PrivacyBudget& budget,
                                      double c_thr) {
  budget.validate();
  const double cut = c_thr *
                     std::sqrt(static_cast<double>(t) *
                               std::log(1.0 / budget.delta)) /
                     budget.epsilon;
  std::vector<double> out(est.values().begin(), est.values().end());
  for (double& v : out) {
    if (v <= cut) v = 0.0;
  }
  return EstimatedHistogram(std::move(out));
}

namespace {

std::vector<std::uint64_t> sum_per_client(std::span<const Item> items,
                                          const sketch::SketchMatrix& matrix,
                                          const PbmParams& params, Rng& rng,
                                          const std::vector<std::size_t>& gone,
                                          const secagg::DropoutPolicy& policy,
                                          secagg::MaskMode mask_mode) {
  const std::size_t n = items.size();
  const std::size_t w = params.w;
  const secagg::GroupSpec group{w * params.t, params.modulus()};
  Rng dealer_rng = rng.child(0);
  const secagg::MaskSet masks =
      secagg::MaskSet::deal(n, group, dealer_rng, mask_mode);
  secagg::StreamingAggregator server(group, n, policy);

  std::vector<std::uint64_t> report(group.length);
  std::vector<double> block(w);
  std::size_t next_gone = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (next_gone < gone.size() && gone[next_gone] == i) {
      ++next_gone;
      continue;
    }
    Rng client = rng.child(i + 1);
    const sketch::SketchVector local = matrix.sketch_item(items[i]);
    for (std::size_t k = 0; k < params.t; ++k) {
      const auto src = local.block(k);
      std::copy(src.begin(), src.end(), block.begin());
      transform::wht_inplace(block);
      const auto y = pbm_encode(block, params, client);
      std::copy(y.begin(), y.end(), report.begin() + k * w);
    }
    const secagg::GroupVector encoded(group, report);
    server.submit(i, secagg::mask_message(encoded, masks.mask(i)));
  }
  const secagg::GroupVector total = server.finish(masks);
  return {total.entries().begin(), total.entries().end()};
}

std::vector<std::uint64_t> sum_aggregate(const Histogram& survivors,
                                         const sketch::SketchMatrix& matrix,
                                         const PbmParams& params, Rng& rng) {
  const std::size_t w = params.w;
  const auto contributors = static_cast<std::int64_t>(survivors.n());
  const sketch::SketchVector s = matrix.sketch_histogram(survivors);
  std::vector<std::uint64_t> out(w * params.t);
  std::vector<double> block(w);
  for (std::size_t k = 0; k < params.t; ++k) {
    const auto src = s.block(k);
    std::copy(src.begin(), src.end(), block.begin());
    // Entry h is the signed count sum_u sign_u(h), exact in doubles.
    transform::wht_unnormalized_inplace(block);
    for (std::size_t h = 0; h < w; ++h) {
      const auto signed_count = static_cast<std::int64_t>(std::llround(block[h]));
      const std::int64_t plus = (contributors + signed_count) / 2;
      const std::int64_t minus = contributors - plus;
      out[k * w + h] =
          rng.binomial(static_cast<std::uint64_t>(plus) * params.L,
                       0.5 + params.theta) +
          rng.binomial(static_cast<std::uint64_t>(minus) * params.L,
                       0.5 - params.theta);
    }
  }
  return out;
}

}  // namespace

RoundResult run_sketched_pbm(std::span<const Item> items,
                             const sketch::SketchMatrix& matrix,
                             const PbmParams& params, Rng& rng,
                             const RoundOptions& options) {
  params.validate();
  if (params.n != items.size()) {
    throw InputError(fmt::format("PBM params for n = {} but {} items",
                                 params.n, items.size()));
  }
  if (matrix.w() != params.w || matrix.t() != params.t) {
    throw InputError("sketch matrix shape differs from PBM params");
  }
  const std::size_t n = items.size();
  if (n == 0) throw InputError("PBM round needs at least one client");

  std::vector<std::size_t> gone(options.dropped);
  std::sort(gone.begin(), gone.end());
  gone.erase(std::unique(gone.begin(), gone.end()), gone.end());
  const secagg::DropoutPolicy policy =
      options.policy.value_or(secagg::DropoutPolicy::for_cohort(n));
  if (gone.size() > policy.max_dropouts) {
    throw secagg::RecoveryRefused(fmt::format(
        "{} clients dropped, at most {} tolerated", gone.size(),
        policy.max_dropouts));
  }

  std::vector<Item> kept;
  kept.reserve(n - gone.size());
  {
    std::size_t g = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (g < gone.size() && gone[g] == i) {
        ++g;
      } else {
        kept.push_back(items[i]);
      }
    }
  }
  Histogram survivors = histogram_of(kept, matrix.d());
  const std::size_t contributors = kept.size();

  const std::vector<std::uint64_t> total =
      options.sampling == Sampling::kPerClient
          ? sum_per_client(items, matrix, params, rng, gone, policy,
                           options.mask_mode)
          : sum_aggregate(survivors, matrix, params, rng);

  sketch::SketchVector decoded(params.t, params.w);
  for (std::size_t k = 0; k < params.t; ++k) {
    const auto block = std::span<const std::uint64_t>(total).subspan(
        k * params.w, params.w);
    const auto est = pbm_decode(block, params, contributors);
    std::copy(est.begin(), est.end(), decoded.block(k).begin());
  }
  EstimatedHistogram estimate = matrix.unsketch_all(decoded);
  return RoundResult{std::move(estimate), std::move(decoded),
                     std::move(survivors), params.predicted_bits()};
}

}  // namespace fedfreq::pbm
