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


#ifndef FEDFREQ_PBM_HPP_
#define FEDFREQ_PBM_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fedfreq/core.hpp"
#include "fedfreq/secagg.hpp"
#include "fedfreq/sketch.hpp"

// Poisson-binomial mechanism on Hadamard-flattened count-sketches, and its
// Renyi-DP accountant.
//
// A client holding item j sketches it (one signed unit per block), flattens
// each block with the orthonormal WHT (entries become +-1/sqrt(w)), and
// releases Y = Binomial(L, p) per coordinate with
//   p = theta * sqrt(w) * flattened + 1/2,
// so p is 1/2 + theta or 1/2 - theta. The server only sees the SecAgg sum
// A of the reports and decodes each block as
//   (1 / (theta sqrt(w))) * H_w (A / L - n/2),
// an unbiased estimate of S_k mu.
namespace fedfreq::pbm {

struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 1e-5;

  void validate() const;
};

struct PbmParams {
  std::uint32_t L = 1;
  double theta = 0.25;
  std::size_t w = 1;
  std::size_t t = 1;
  std::size_t n = 1;
  double c0 = 1.0;

  void validate() const;
  // SecAgg modulus nL + 1: the largest possible sum nL must not wrap.
  std::uint64_t modulus() const;
  // w * t * ceil(log2(nL + 1)).
  std::uint64_t predicted_bits() const;
};

struct ParamOptions {
  double c0 = 1.0;
  std::optional<std::uint32_t> L_override;
  // Fixed sketch size instead of the theory-scaled one.
  std::optional<std::size_t> fixed_w;
  std::optional<std::size_t> fixed_t;
};

// Sketch and mechanism parameters for a target (epsilon, delta):
//   t     = ceil(log2(d / gamma)), rounded up to odd
//   w     = largest power of two <= min(n, n eps / sqrt(log2(d/gamma) ln(1/delta)))
//   x     = n eps^2 / (w t ln(1/delta))
//   L     = max(ceil(x) + 1, ceil(16 x))
//   theta = sqrt(x / L)                       (<= 1/4)
// so theta^2 L = x and the RDP slope is c0 eps^2 / ln(1/delta). With an L
// override theta is min(1/4, sqrt(x / L)). Throws ConfigError when w < 2.
PbmParams choose_params(std::size_t d, std::size_t n,
                        const PrivacyBudget& budget, double gamma,
                        const ParamOptions& options = {});

// theta * sqrt(w) * value + 1/2.
double encode_probability(double flattened_value, const PbmParams& params);

// Binomial(L, p) per coordinate of a flattened block. Throws InputError if
// any p falls outside [0, 1] (an unflattened or unscaled input).
std::vector<std::uint32_t> pbm_encode(std::span<const double> flattened,
                                      const PbmParams& params, Rng& rng);

// Decodes one block of the aggregated reports of `contributors` clients.
// Entries must lie in [0, contributors * L].
std::vector<double> pbm_decode(std::span<const std::uint64_t> aggregated,
                               const PbmParams& params,
                               std::size_t contributors);
std::vector<double> pbm_decode(std::span<const std::uint64_t> aggregated,
                               const PbmParams& params);

// tau(alpha) = intercept + slope * alpha.
struct RdpCurve {
  double intercept = 0.0;
  double slope = 0.0;

  double operator()(double alpha) const;
};

// slope = c0 theta^2 L w t / n.
RdpCurve rdp_curve(const PbmParams& params);

// eps*(alpha) = tau(alpha) + (ln(1/delta) + (alpha-1) ln(1-1/alpha)
//               - ln(alpha)) / (alpha - 1). Natural logs.
double approx_dp_epsilon_at(const RdpCurve& curve, double delta, double alpha);

struct Conversion {
  double epsilon = 0.0;
  double alpha = 0.0;
};

// Minimizes eps*(alpha) over alpha > 1: a grid over ln(alpha - 1) brackets
// the minimum, golden-section search refines it to 1e-10.
Conversion rdp_to_approx_dp_detailed(const RdpCurve& curve, double delta);
double rdp_to_approx_dp(const RdpCurve& curve, double delta);

// choose_params targets an RDP slope of c0 eps^2 / ln(1/delta); the
// converted epsilon stays below this multiple of the target whenever
// eps <= ln(1/delta).
inline constexpr double kAccountantCalibration = 3.0;

// Zeroes every coordinate with value <= c_thr * sqrt(t ln(1/delta)) / eps.
EstimatedHistogram threshold_estimate(const EstimatedHistogram& est,
                                      std::size_t t,
                                      const PrivacyBudget& budget,
                                      double c_thr = 1.0);

enum class Sampling {
  // Every client encodes, masks and submits through SecAgg.
  kPerClient,
  // Draws the aggregate directly: per coordinate the sum is
  // Binomial(L n+, 1/2 + theta) + Binomial(L n-, 1/2 - theta), identical in
  // distribution to the per-client SecAgg sum.
  kAggregate,
};

struct RoundOptions {
  Sampling sampling = Sampling::kPerClient;
  std::vector<std::size_t> dropped;
  std::optional<secagg::DropoutPolicy> policy;  // default for_cohort(n)
  secagg::MaskMode mask_mode = secagg::MaskMode::kDealer;
};

struct RoundResult {
  EstimatedHistogram estimate;
  sketch::SketchVector sketch_estimate;
  Histogram survivors;
  std::uint64_t bits_per_user = 0;
};

// One round of sketched PBM for the given population. params.n must equal
// items.size() and the matrix shape must match (w, t).
RoundResult run_sketched_pbm(std::span<const Item> items,
                             const sketch::SketchMatrix& matrix,
                             const PbmParams& params, Rng& rng,
                             const RoundOptions& options = {});

}  // namespace fedfreq::pbm

#endif  // FEDFREQ_PBM_HPP_
