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


#ifndef FEDFREQ_BOUNDS_HPP_
#define FEDFREQ_BOUNDS_HPP_

#include <cstddef>
#include <optional>
#include <string>

// Reference quantities from the communication lower bounds. The rate
// curves are order-level scalings with an explicit constant, not solved
// rate-distortion functions.
namespace fedfreq::bounds {

// log2 of the number of d-bin histograms with mass n, C(d+n-1, d-1).
// Exact integer count when it fits 64 bits, log-gamma otherwise.
double histogram_prior_entropy(std::size_t d, std::size_t n);

// Entropy floor for exact recovery of the survivors' sum:
// histogram_prior_entropy(d, n - dropouts). Requires dropouts < n.
double exact_recovery_floor(std::size_t d, std::size_t n,
                            std::size_t dropouts = 0);

enum class RateLoss { kLinf, kL2 };

// beta -> c * n * log2(d) / beta (linf) or c * n^2 * log2(d) / beta (l2),
// clamped to [0, exact recovery floor].
class RateCurve {
 public:
  RateCurve(RateLoss loss, std::size_t d, std::size_t n, double constant,
            double ceiling_bits);

  double unclamped(double beta) const;
  double operator()(double beta) const;

  RateLoss loss() const { return loss_; }
  double ceiling() const { return ceiling_; }

 private:
  RateLoss loss_;
  double scale_;
  double ceiling_;
};

RateCurve rate_curve(std::size_t d, std::size_t n, RateLoss loss,
                     double constant = 1.0, std::size_t dropouts = 0);

struct BoundReport {
  std::size_t d = 0;
  std::size_t n = 0;
  std::size_t dropouts = 0;
  std::size_t n_effective = 0;
  double entropy_bits = 0.0;
  double exact_floor_bits = 0.0;
  double constant = 1.0;
  RateCurve rate_linf;
  RateCurve rate_l2;

  std::string to_text(std::optional<double> beta = std::nullopt) const;
  static std::string csv_header();
  std::string to_csv_row(std::optional<double> beta = std::nullopt) const;
};

BoundReport bound_report(std::size_t d, std::size_t n,
                         std::size_t dropouts = 0, double constant = 1.0);

}  // namespace fedfreq::bounds

#endif  // FEDFREQ_BOUNDS_HPP_
