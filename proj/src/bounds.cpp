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


#include "fedfreq/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "fedfreq/errors.hpp"
#include "fedfreq/exact.hpp"

namespace fedfreq::bounds {

double histogram_prior_entropy(std::size_t d, std::size_t n) {
  if (d < 1) throw ConfigError("entropy needs d >= 1");
  const exact::HistogramFamily family(d, n);
  if (const auto count = family.size()) {
    return std::log2(static_cast<double>(*count));
  }
  const double nats = std::lgamma(static_cast<double>(d + n)) -
                      std::lgamma(static_cast<double>(d)) -
                      std::lgamma(static_cast<double>(n) + 1.0);
  return nats / std::numbers::ln2;
}

double exact_recovery_floor(std::size_t d, std::size_t n,
                            std::size_t dropouts) {
  if (n > 0 && dropouts >= n) {
    throw ConfigError(fmt::format("{} dropouts leave no survivors of {}",
                                  dropouts, n));
  }
  return histogram_prior_entropy(d, n - std::min(dropouts, n));
}

RateCurve::RateCurve(RateLoss loss, std::size_t d, std::size_t n,
                     double constant, double ceiling_bits)
    : loss_(loss), ceiling_(ceiling_bits) {
  if (!(constant > 0.0)) throw ConfigError("rate constant must be > 0");
  const double nd = static_cast<double>(n);
  const double log_d = std::log2(static_cast<double>(std::max<std::size_t>(d, 1)));
  scale_ = constant * (loss == RateLoss::kLinf ? nd : nd * nd) * log_d;
}

double RateCurve::unclamped(double beta) const {
  if (!(beta > 0.0)) {
    throw InputError(fmt::format("distortion beta must be > 0, got {}", beta));
  }
  return scale_ / beta;
}

double RateCurve::operator()(double beta) const {
  return std::clamp(unclamped(beta), 0.0, ceiling_);
}

RateCurve rate_curve(std::size_t d, std::size_t n, RateLoss loss,
                     double constant, std::size_t dropouts) {
  const std::size_t effective = n - std::min(dropouts, n);
  return RateCurve(loss, d, effective, constant,
                   exact_recovery_floor(d, n, dropouts));
}

BoundReport bound_report(std::size_t d, std::size_t n, std::size_t dropouts,
                         double constant) {
  const double floor = exact_recovery_floor(d, n, dropouts);
  return BoundReport{
      d,
      n,
      dropouts,
      n - std::min(dropouts, n),
      histogram_prior_entropy(d, n),
      floor,
      constant,
      rate_curve(d, n, RateLoss::kLinf, constant, dropouts),
      rate_curve(d, n, RateLoss::kL2, constant, dropouts),
  };
}

std::string BoundReport::to_text(std::optional<double> beta) const {
  std::string out;
  out += fmt::format("{:<34}{}\n", "domain size d", d);
  out += fmt::format("{:<34}{}\n", "users n", n);
  out += fmt::format("{:<34}{}\n", "dropouts", dropouts);
  out += fmt::format("{:<34}{}\n", "effective users", n_effective);
  out += fmt::format("{:<34}{:.4f} bits\n", "histogram prior entropy",
                     entropy_bits);
  out += fmt::format("{:<34}{:.4f} bits\n", "exact recovery floor",
                     exact_floor_bits);
  if (beta) {
    out += fmt::format("{:<34}{:.4f} bits (scaling reference, c={})\n",
                       fmt::format("rate linf at beta={}", *beta),
                       rate_linf(*beta), constant);
    out += fmt::format("{:<34}{:.4f} bits (scaling reference, c={})\n",
                       fmt::format("rate l2 at beta={}", *beta),
                       rate_l2(*beta), constant);
  }
  return out;
}

std::string BoundReport::csv_header() {
  return "d,n,dropouts,n_effective,entropy_bits,exact_floor_bits,constant,"
         "beta,rate_linf_bits,rate_l2_bits";
}

std::string BoundReport::to_csv_row(std::optional<double> beta) const {
  if (!beta) {
    return fmt::format("{},{},{},{},{},{},{},,,", d, n, dropouts, n_effective,
                       entropy_bits, exact_floor_bits, constant);
  }
  return fmt::format("{},{},{},{},{},{},{},{},{},{}", d, n, dropouts,
                     n_effective, entropy_bits, exact_floor_bits, constant,
                     *beta, rate_linf(*beta), rate_l2(*beta));
}

}  // namespace fedfreq::bounds
