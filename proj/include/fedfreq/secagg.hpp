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


#ifndef FEDFREQ_SECAGG_HPP_
#define FEDFREQ_SECAGG_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedfreq/errors.hpp"
#include "fedfreq/rng.hpp"

// Idealized single-server secure aggregation over Z_M^m.
//
// Each client i sends Y_i = enc(X_i) + theta_i (mod M) where the masks
// theta_1..theta_n sum to zero, so the server's sum of all messages is the
// sum of the encodings. Clients that drop out are handled by a second round
// in which the randomness dealer reveals sum_{i in D} theta_i, which is
// -sum_{i not in D} theta_i, exactly the correction that cancels the
// survivors' masks. If more than D_max clients drop the reveal is refused.
namespace fedfreq::secagg {

struct GroupSpec {
  std::size_t length = 1;     // m
  std::uint64_t modulus = 2;  // M

  void validate() const;
  // Wire cost of one message: m * ceil(log2 M) bits.
  std::uint64_t bits_per_message() const;
  // Number of group elements, M^m, or nullopt on overflow.
  std::optional<std::uint64_t> cardinality() const;

  friend bool operator==(const GroupSpec&, const GroupSpec&) = default;
};

class GroupVector {
 public:
  GroupVector(const GroupSpec& group, std::vector<std::uint64_t> entries);
  static GroupVector zeros(const GroupSpec& group);
  // The idx-th element of Z_M^m in base-M order (entry 0 least significant).
  static GroupVector from_index(const GroupSpec& group, std::uint64_t idx);

  const GroupSpec& group() const { return group_; }
  std::span<const std::uint64_t> entries() const { return entries_; }
  std::uint64_t operator[](std::size_t k) const { return entries_[k]; }
  std::size_t size() const { return entries_.size(); }

  // Inverse of from_index.
  std::uint64_t index() const;

  GroupVector& operator+=(const GroupVector& other);
  GroupVector& operator-=(const GroupVector& other);
  GroupVector operator+(const GroupVector& other) const;
  GroupVector operator-(const GroupVector& other) const;
  GroupVector operator-() const;

  friend bool operator==(const GroupVector&, const GroupVector&) = default;

 private:
  GroupSpec group_;
  std::vector<std::uint64_t> entries_;
};

// Y = encoded + mask (mod M). Throws InputError on group mismatch.
GroupVector mask_message(const GroupVector& encoded, const GroupVector& mask);

enum class MaskMode {
  // theta_1..theta_{n-1} i.i.d. uniform, theta_n = -sum of the others.
  kDealer,
  // theta_i = sum_{j>i} PRG(s_ij) - sum_{j<i} PRG(s_ji) with per-pair seeds,
  // the shape of pairwise-agreed masks. Costs O(n m) per mask.
  kPairwise,
  // Masks given explicitly (exhaustive audits).
  kExplicit,
};

// The dealer's view of one round's masks. Per-client masks are regenerated
// from seeds on demand so a round with many clients stays O(m) in memory.
class MaskSet {
 public:
  static MaskSet deal(std::size_t n, const GroupSpec& group, Rng& rng,
                      MaskMode mode = MaskMode::kDealer);
  // Throws InputError unless the masks share a group and sum to zero.
  static MaskSet from_masks(std::vector<GroupVector> masks);

  std::size_t size() const { return n_; }
  const GroupSpec& group() const { return group_; }
  MaskMode mode() const { return mode_; }

  GroupVector mask(std::size_t client) const;
  // v += mask(client), without a temporary for explicit masks.
  void add_mask_to(std::size_t client, GroupVector& v) const;
  GroupVector sum_of(std::span<const std::size_t> clients) const;

 private:
  MaskSet(std::size_t n, const GroupSpec& group, MaskMode mode);

  std::size_t n_;
  GroupSpec group_;
  MaskMode mode_;
  std::uint64_t master_seed_ = 0;
  std::vector<GroupVector> explicit_;     // kExplicit
  std::optional<GroupVector> last_mask_;  // kDealer
};

MaskSet deal_masks(std::size_t n, const GroupSpec& group, Rng& rng);

struct DropoutPolicy {
  std::size_t max_dropouts = 0;

  // floor(n/2) - 1, clamped at 0.
  static DropoutPolicy for_cohort(std::size_t n);
  // Throws ConfigError unless 2 * max_dropouts <= n.
  void validate(std::size_t n) const;
};

// More clients dropped than the policy tolerates; nothing is revealed.
class RecoveryRefused : public Error {
 public:
  using Error::Error;
};

struct RoundTranscript {
  std::size_t cohort_size = 0;
  std::size_t max_dropouts = 0;
  std::vector<std::size_t> senders;   // ascending client indices
  std::vector<GroupVector> messages;  // messages[k] came from senders[k]
  std::optional<GroupVector> second_round;
  std::optional<GroupVector> recovered_sum;

  std::vector<std::size_t> dropped() const;
};

// sum_{i in dropped} theta_i, i.e. -sum_{i not in dropped} theta_i.
// Zero when nobody dropped. Throws RecoveryRefused when
// |dropped| > policy.max_dropouts.
GroupVector reveal_for_dropouts(const MaskSet& masks,
                                std::span<const std::size_t> dropped,
                                const DropoutPolicy& policy);

// Runs one round: every client not in `dropped` sends its masked encoding;
// if anyone dropped the server asks for the reveal, which is left empty when
// refused. Fills recovered_sum when recovery succeeds.
RoundTranscript run_round(std::span<const GroupVector> encoded,
                          const MaskSet& masks,
                          std::span<const std::size_t> dropped,
                          const DropoutPolicy& policy);

// Server-side unmasking: sum of the received messages plus the reveal.
// Equals the sum of the survivors' encodings. Throws RecoveryRefused if
// clients are missing and no reveal is present or too many dropped.
GroupVector aggregate(const RoundTranscript& transcript,
                      const GroupSpec& group);

// Server that folds each message into a running sum as it arrives. Same
// result as aggregate() without holding every message.
class StreamingAggregator {
 public:
  StreamingAggregator(const GroupSpec& group, std::size_t cohort_size,
                      const DropoutPolicy& policy);

  void submit(std::size_t client, const GroupVector& message);
  std::vector<std::size_t> missing() const;
  // Requests the reveal from the dealer when clients are missing.
  GroupVector finish(const MaskSet& dealer) const;

 private:
  GroupSpec group_;
  DropoutPolicy policy_;
  std::vector<bool> received_;
  GroupVector sum_;
};

// Every element of Z_M^m in index order; the identity encoder on the group.
std::vector<GroupVector> all_group_elements(const GroupSpec& group);

// Exhaustive correctness check: for every input tuple over `encoder`'s
// alphabet and every dealer outcome, runs the round and compares the
// recovered sum with the survivors' encoded sum.
struct CorrectnessReport {
  std::uint64_t cases = 0;
  std::uint64_t exact = 0;
  std::uint64_t refused = 0;

  bool all_exact() const { return cases > 0 && exact == cases; }
};

CorrectnessReport verify_recovery(const GroupSpec& group, std::size_t n,
                                  std::span<const GroupVector> encoder,
                                  std::span<const std::size_t> dropped,
                                  const DropoutPolicy& policy,
                                  std::uint64_t budget = 20'000'000);

// Exact security audit by enumeration over all dealer outcomes.
//
// For each input tuple, the distribution of the server's observation
// (survivors' messages, plus the reveal when granted) is tabulated.
// s1_max_tv is the largest total-variation distance between two tuples
// whose survivors' encoded sums agree; s2_max_tv (present only when the
// reveal is refused) is the largest distance between any two tuples.
// Conditioning is on the survivors' sum, the observable statement.
struct AuditReport {
  GroupSpec group;
  std::size_t n = 0;
  std::size_t alphabet_size = 0;
  std::vector<std::size_t> dropped;
  std::size_t max_dropouts = 0;
  bool reveal_refused = false;
  std::uint64_t input_tuples = 0;
  std::uint64_t dealer_outcomes = 0;
  double s1_max_tv = 0.0;
  std::optional<double> s2_max_tv;

  std::string to_text() const;
  static std::string csv_header();
  std::string to_csv_row() const;
};

AuditReport security_audit(const GroupSpec& group, std::size_t n,
                           std::span<const GroupVector> encoder,
                           std::span<const std::size_t> dropped,
                           const DropoutPolicy& policy,
                           std::uint64_t budget = 10'000'000);

}  // namespace fedfreq::secagg

#endif  // FEDFREQ_SECAGG_HPP_
