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


#include "fedfreq/secagg.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <map>
#include <utility>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace fedfreq::secagg {

namespace {

std::uint64_t add_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  // a, b < m; avoid overflow for moduli close to 2^64.
  return a >= m - b ? a - (m - b) : a + b;
}

std::uint64_t sub_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return a >= b ? a - b : a + (m - b);
}

std::optional<std::uint64_t> checked_pow(std::uint64_t base, std::size_t exp) {
  std::uint64_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && out > UINT64_MAX / base) return std::nullopt;
    out *= base;
  }
  return out;
}

void require_same_group(const GroupSpec& a, const GroupSpec& b) {
  if (!(a == b)) {
    throw InputError(fmt::format("group mismatch: Z_{}^{} vs Z_{}^{}",
                                 a.modulus, a.length, b.modulus, b.length));
  }
}

// Sorted, unique, in range.
std::vector<std::size_t> normalize_clients(std::span<const std::size_t> ids,
                                           std::size_t n) {
  std::vector<std::size_t> out(ids.begin(), ids.end());
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw InputError("duplicate client index");
  }
  if (!out.empty() && out.back() >= n) {
    throw InputError(
        fmt::format("client index {} outside cohort of {}", out.back(), n));
  }
  return out;
}

GroupVector uniform_vector(const GroupSpec& group, Rng& rng) {
  std::vector<std::uint64_t> e(group.length);
  for (auto& x : e) x = rng.uniform_below(group.modulus);
  return GroupVector(group, std::move(e));
}

}  // namespace

void GroupSpec::validate() const {
  if (length < 1) throw ConfigError("group length m must be >= 1");
  if (modulus < 2) throw ConfigError("group modulus M must be >= 2");
}

std::uint64_t GroupSpec::bits_per_message() const {
  validate();
  // ceil(log2 M) = bit width of M - 1.
  const auto bits = static_cast<std::uint64_t>(std::bit_width(modulus - 1));
  return static_cast<std::uint64_t>(length) * bits;
}

std::optional<std::uint64_t> GroupSpec::cardinality() const {
  return checked_pow(modulus, length);
}

GroupVector::GroupVector(const GroupSpec& group,
                         std::vector<std::uint64_t> entries)
    : group_(group), entries_(std::move(entries)) {
  group_.validate();
  if (entries_.size() != group_.length) {
    throw InputError(fmt::format("group vector has {} entries, expected {}",
                                 entries_.size(), group_.length));
  }
  for (auto x : entries_) {
    if (x >= group_.modulus) {
      throw InputError(
          fmt::format("entry {} not reduced mod {}", x, group_.modulus));
    }
  }
}

GroupVector GroupVector::zeros(const GroupSpec& group) {
  return GroupVector(group, std::vector<std::uint64_t>(group.length, 0));
}

GroupVector GroupVector::from_index(const GroupSpec& group, std::uint64_t idx) {
  std::vector<std::uint64_t> e(group.length);
  for (auto& x : e) {
    x = idx % group.modulus;
    idx /= group.modulus;
  }
  return GroupVector(group, std::move(e));
}

std::uint64_t GroupVector::index() const {
  std::uint64_t idx = 0;
  for (std::size_t k = entries_.size(); k-- > 0;) {
    idx = idx * group_.modulus + entries_[k];
  }
  return idx;
}

GroupVector& GroupVector::operator+=(const GroupVector& other) {
  require_same_group(group_, other.group_);
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    entries_[k] = add_mod(entries_[k], other.entries_[k], group_.modulus);
  }
  return *this;
}

GroupVector& GroupVector::operator-=(const GroupVector& other) {
  require_same_group(group_, other.group_);
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    entries_[k] = sub_mod(entries_[k], other.entries_[k], group_.modulus);
  }
  return *this;
}

GroupVector GroupVector::operator+(const GroupVector& other) const {
  GroupVector out(*this);
  out += other;
  return out;
}

GroupVector GroupVector::operator-(const GroupVector& other) const {
  GroupVector out(*this);
  out -= other;
  return out;
}

GroupVector GroupVector::operator-() const {
  return zeros(group_) - *this;
}

GroupVector mask_message(const GroupVector& encoded, const GroupVector& mask) {
  return encoded + mask;
}

MaskSet::MaskSet(std::size_t n, const GroupSpec& group, MaskMode mode)
    : n_(n), group_(group), mode_(mode) {}

MaskSet MaskSet::deal(std::size_t n, const GroupSpec& group, Rng& rng,
                      MaskMode mode) {
  if (n < 1) throw ConfigError("deal_masks needs n >= 1");
  group.validate();
  if (mode == MaskMode::kExplicit) {
    throw ConfigError("explicit masks come from MaskSet::from_masks");
  }
  MaskSet set(n, group, mode);
  set.master_seed_ = rng();
  if (mode == MaskMode::kDealer) {
    GroupVector acc = GroupVector::zeros(group);
    for (std::size_t i = 0; i + 1 < n; ++i) acc += set.mask(i);
    set.last_mask_ = -acc;
  }
  return set;
}

MaskSet MaskSet::from_masks(std::vector<GroupVector> masks) {
  if (masks.empty()) throw InputError("from_masks needs at least one mask");
  const GroupSpec group = masks.front().group();
  GroupVector acc = GroupVector::zeros(group);
  for (const auto& m : masks) acc += m;
  if (!(acc == GroupVector::zeros(group))) {
    throw InputError("masks do not sum to zero");
  }
  MaskSet set(masks.size(), group, MaskMode::kExplicit);
  set.explicit_ = std::move(masks);
  return set;
}

GroupVector MaskSet::mask(std::size_t client) const {
  if (client >= n_) {
    throw InputError(fmt::format("client {} outside cohort of {}", client, n_));
  }
  switch (mode_) {
    case MaskMode::kExplicit:
      return explicit_[client];
    case MaskMode::kDealer: {
      if (client + 1 == n_ && last_mask_) return *last_mask_;
      Rng stream = Rng(master_seed_).child(client);
      return uniform_vector(group_, stream);
    }
    case MaskMode::kPairwise: {
      GroupVector acc = GroupVector::zeros(group_);
      const Rng root(master_seed_);
      for (std::size_t j = 0; j < n_; ++j) {
        if (j == client) continue;
        const std::size_t lo = std::min(client, j);
        const std::size_t hi = std::max(client, j);
        Rng pair = root.child(lo).child(hi);
        const GroupVector prg = uniform_vector(group_, pair);
        if (j > client) {
          acc += prg;
        } else {
          acc -= prg;
        }
      }
      return acc;
    }
  }
  return GroupVector::zeros(group_);
}

void MaskSet::add_mask_to(std::size_t client, GroupVector& v) const {
  if (mode_ == MaskMode::kExplicit && client < n_) {
    v += explicit_[client];
  } else {
    v += mask(client);
  }
}

GroupVector MaskSet::sum_of(std::span<const std::size_t> clients) const {
  GroupVector acc = GroupVector::zeros(group_);
  for (auto i : clients) add_mask_to(i, acc);
  return acc;
}

MaskSet deal_masks(std::size_t n, const GroupSpec& group, Rng& rng) {
  return MaskSet::deal(n, group, rng, MaskMode::kDealer);
}

DropoutPolicy DropoutPolicy::for_cohort(std::size_t n) {
  return DropoutPolicy{n / 2 >= 1 ? n / 2 - 1 : 0};
}

void DropoutPolicy::validate(std::size_t n) const {
  if (2 * max_dropouts > n) {
    throw ConfigError(fmt::format(
        "dropout tolerance {} exceeds half the cohort of {}", max_dropouts, n));
  }
}

std::vector<std::size_t> RoundTranscript::dropped() const {
  std::vector<std::size_t> out;
  std::size_t k = 0;
  for (std::size_t i = 0; i < cohort_size; ++i) {
    if (k < senders.size() && senders[k] == i) {
      ++k;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

GroupVector reveal_for_dropouts(const MaskSet& masks,
                                std::span<const std::size_t> dropped,
                                const DropoutPolicy& policy) {
  const auto ids = normalize_clients(dropped, masks.size());
  if (ids.size() > policy.max_dropouts) {
    throw RecoveryRefused(
        fmt::format("{} clients dropped, at most {} tolerated", ids.size(),
                    policy.max_dropouts));
  }
  return masks.sum_of(ids);
}

RoundTranscript run_round(std::span<const GroupVector> encoded,
                          const MaskSet& masks,
                          std::span<const std::size_t> dropped,
                          const DropoutPolicy& policy) {
  const std::size_t n = masks.size();
  if (encoded.size() != n) {
    throw InputError(fmt::format("{} encodings for a cohort of {}",
                                 encoded.size(), n));
  }
  policy.validate(n);
  // Callers usually pass sorted ids; only copy when they did not.
  const bool sorted =
      std::adjacent_find(dropped.begin(), dropped.end(),
                         std::greater_equal<>()) == dropped.end() &&
      (dropped.empty() || dropped.back() < n);
  std::vector<std::size_t> owned;
  if (!sorted) owned = normalize_clients(dropped, n);
  const std::span<const std::size_t> gone = sorted ? dropped : owned;

  RoundTranscript tr;
  tr.cohort_size = n;
  tr.max_dropouts = policy.max_dropouts;
  tr.senders.reserve(n - gone.size());
  tr.messages.reserve(n - gone.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (k < gone.size() && gone[k] == i) {
      ++k;
      continue;
    }
    require_same_group(masks.group(), encoded[i].group());
    tr.senders.push_back(i);
    tr.messages.push_back(encoded[i]);
    masks.add_mask_to(i, tr.messages.back());
  }
  if (!gone.empty() && gone.size() <= policy.max_dropouts) {
    tr.second_round = masks.sum_of(gone);  // gone is already normalized
  }
  try {
    tr.recovered_sum = aggregate(tr, masks.group());
  } catch (const RecoveryRefused&) {
    tr.recovered_sum.reset();
  }
  return tr;
}

GroupVector aggregate(const RoundTranscript& transcript,
                      const GroupSpec& group) {
  if (transcript.messages.size() != transcript.senders.size()) {
    throw InputError("transcript senders and messages disagree");
  }
  const std::size_t gone = transcript.cohort_size - transcript.senders.size();
  if (gone > 0) {
    if (gone > transcript.max_dropouts) {
      throw RecoveryRefused(fmt::format("{} clients dropped, at most {} tolerated",
                                        gone, transcript.max_dropouts));
    }
    if (!transcript.second_round) {
      throw RecoveryRefused("clients dropped and no reveal was received");
    }
  }
  if (transcript.messages.empty()) return GroupVector::zeros(group);
  GroupVector sum = transcript.messages.front();
  require_same_group(group, sum.group());
  for (std::size_t k = 1; k < transcript.messages.size(); ++k) {
    sum += transcript.messages[k];
  }
  if (gone > 0) sum += *transcript.second_round;
  return sum;
}

StreamingAggregator::StreamingAggregator(const GroupSpec& group,
                                         std::size_t cohort_size,
                                         const DropoutPolicy& policy)
    : group_(group),
      policy_(policy),
      received_(cohort_size, false),
      sum_(GroupVector::zeros(group)) {
  policy_.validate(cohort_size);
}

void StreamingAggregator::submit(std::size_t client,
                                 const GroupVector& message) {
  if (client >= received_.size()) {
    throw InputError(fmt::format("client {} outside cohort", client));
  }
  if (received_[client]) {
    throw InputError(fmt::format("client {} submitted twice", client));
  }
  received_[client] = true;
  sum_ += message;
}

std::vector<std::size_t> StreamingAggregator::missing() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < received_.size(); ++i) {
    if (!received_[i]) out.push_back(i);
  }
  return out;
}

GroupVector StreamingAggregator::finish(const MaskSet& dealer) const {
  const auto gone = missing();
  if (gone.empty()) return sum_;
  return sum_ + reveal_for_dropouts(dealer, gone, policy_);
}

std::vector<GroupVector> all_group_elements(const GroupSpec& group) {
  group.validate();
  const auto card = group.cardinality();
  if (!card || *card > 10'000'000) {
    throw EnumerationBudgetExceeded("group too large to enumerate");
  }
  std::vector<GroupVector> out;
  out.reserve(*card);
  for (std::uint64_t i = 0; i < *card; ++i) {
    out.push_back(GroupVector::from_index(group, i));
  }
  return out;
}

namespace {

struct Enumeration {
  std::uint64_t tuples = 0;
  std::uint64_t outcomes = 0;
};

Enumeration plan_enumeration(const GroupSpec& group, std::size_t n,
                             std::size_t alphabet, std::uint64_t budget) {
  if (n < 1) throw ConfigError("enumeration needs n >= 1");
  if (alphabet < 1) throw ConfigError("encoder alphabet is empty");
  const auto card = group.cardinality();
  const auto tuples = checked_pow(alphabet, n);
  const auto outcomes = card ? checked_pow(*card, n - 1) : std::nullopt;
  if (!tuples || !outcomes || *tuples > budget || *outcomes > budget ||
      *tuples * *outcomes > budget) {
    throw EnumerationBudgetExceeded(fmt::format(
        "enumeration of {}^{} inputs x (M^m)^{} dealer outcomes exceeds "
        "budget {}",
        alphabet, n, n - 1, budget));
  }
  return {*tuples, *outcomes};
}

// Masks of dealer outcome r: theta_0..theta_{n-2} are the base-|G| digits
// of r, theta_{n-1} balances the sum.
std::vector<GroupVector> masks_of_outcome(const GroupSpec& group,
                                          std::uint64_t card, std::size_t n,
                                          std::uint64_t r) {
  std::vector<GroupVector> masks;
  masks.reserve(n);
  GroupVector acc = GroupVector::zeros(group);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    masks.push_back(GroupVector::from_index(group, r % card));
    r /= card;
    acc += masks.back();
  }
  masks.push_back(-acc);
  return masks;
}

std::vector<std::size_t> tuple_of(std::uint64_t t, std::size_t alphabet,
                                  std::size_t n) {
  std::vector<std::size_t> xs(n);
  for (auto& x : xs) {
    x = static_cast<std::size_t>(t % alphabet);
    t /= alphabet;
  }
  return xs;
}

// TV distance of two empirical distributions given as sorted key lists of
// equal length.
double tv_sorted(const std::vector<std::uint64_t>& a,
                 const std::vector<std::uint64_t>& b) {
  std::uint64_t diff = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i] < b[j])) {
      ++diff;
      ++i;
    } else if (i == a.size() || b[j] < a[i]) {
      ++diff;
      ++j;
    } else {
      ++i;
      ++j;
    }
  }
  return static_cast<double>(diff) / (2.0 * static_cast<double>(a.size()));
}

}  // namespace

CorrectnessReport verify_recovery(const GroupSpec& group, std::size_t n,
                                  std::span<const GroupVector> encoder,
                                  std::span<const std::size_t> dropped,
                                  const DropoutPolicy& policy,
                                  std::uint64_t budget) {
  group.validate();
  for (const auto& e : encoder) require_same_group(group, e.group());
  const auto plan = plan_enumeration(group, n, encoder.size(), budget);
  const std::uint64_t card = *group.cardinality();
  const auto gone = normalize_clients(dropped, n);

  // Expected survivors' sum for each input tuple.
  std::vector<GroupVector> expected;
  expected.reserve(plan.tuples);
  std::vector<std::vector<GroupVector>> inputs;
  inputs.reserve(plan.tuples);
  for (std::uint64_t t = 0; t < plan.tuples; ++t) {
    const auto xs = tuple_of(t, encoder.size(), n);
    std::vector<GroupVector> enc;
    enc.reserve(n);
    GroupVector sum = GroupVector::zeros(group);
    for (std::size_t i = 0; i < n; ++i) {
      enc.push_back(encoder[xs[i]]);
      if (!std::binary_search(gone.begin(), gone.end(), i)) sum += enc.back();
    }
    inputs.push_back(std::move(enc));
    expected.push_back(std::move(sum));
  }

  CorrectnessReport report;
  for (std::uint64_t r = 0; r < plan.outcomes; ++r) {
    const MaskSet masks =
        MaskSet::from_masks(masks_of_outcome(group, card, n, r));
    for (std::uint64_t t = 0; t < plan.tuples; ++t) {
      ++report.cases;
      const RoundTranscript tr = run_round(inputs[t], masks, gone, policy);
      if (!tr.recovered_sum) {
        ++report.refused;
      } else if (*tr.recovered_sum == expected[t]) {
        ++report.exact;
      }
    }
  }
  return report;
}

AuditReport security_audit(const GroupSpec& group, std::size_t n,
                           std::span<const GroupVector> encoder,
                           std::span<const std::size_t> dropped,
                           const DropoutPolicy& policy, std::uint64_t budget) {
  group.validate();
  for (const auto& e : encoder) require_same_group(group, e.group());
  policy.validate(n);
  const auto plan = plan_enumeration(group, n, encoder.size(), budget);
  const std::uint64_t card = *group.cardinality();
  const auto gone = normalize_clients(dropped, n);

  AuditReport report;
  report.group = group;
  report.n = n;
  report.alphabet_size = encoder.size();
  report.dropped = gone;
  report.max_dropouts = policy.max_dropouts;
  report.reveal_refused = gone.size() > policy.max_dropouts;
  report.input_tuples = plan.tuples;
  report.dealer_outcomes = plan.outcomes;

  const std::size_t survivors = n - gone.size();
  if (!checked_pow(card, survivors + 1)) {
    throw EnumerationBudgetExceeded("transcript space does not fit 64 bits");
  }

  std::vector<std::vector<GroupVector>> masks_by_outcome;
  masks_by_outcome.reserve(plan.outcomes);
  for (std::uint64_t r = 0; r < plan.outcomes; ++r) {
    masks_by_outcome.push_back(masks_of_outcome(group, card, n, r));
  }

  // Observation keys per tuple, grouped by the survivors' sum.
  std::vector<std::vector<std::uint64_t>> dist(plan.tuples);
  std::map<std::uint64_t, std::vector<std::uint64_t>> by_sum;
  for (std::uint64_t t = 0; t < plan.tuples; ++t) {
    const auto xs = tuple_of(t, encoder.size(), n);
    std::vector<GroupVector> enc;
    enc.reserve(n);
    GroupVector survivor_sum = GroupVector::zeros(group);
    for (std::size_t i = 0; i < n; ++i) {
      enc.push_back(encoder[xs[i]]);
      if (!std::binary_search(gone.begin(), gone.end(), i)) {
        survivor_sum += enc.back();
      }
    }
    by_sum[survivor_sum.index()].push_back(t);

    auto& keys = dist[t];
    keys.reserve(plan.outcomes);
    for (const auto& m : masks_by_outcome) {
      const MaskSet masks = MaskSet::from_masks(m);
      const RoundTranscript tr = run_round(enc, masks, gone, policy);
      std::uint64_t key = 0;
      std::uint64_t scale = 1;
      for (const auto& msg : tr.messages) {
        key += msg.index() * scale;
        scale *= card;
      }
      if (tr.second_round) key += tr.second_round->index() * scale;
      keys.push_back(key);
    }
    std::sort(keys.begin(), keys.end());
  }

  for (const auto& [sum, members] : by_sum) {
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        report.s1_max_tv = std::max(
            report.s1_max_tv, tv_sorted(dist[members[a]], dist[members[b]]));
      }
    }
  }
  if (report.reveal_refused) {
    double worst = 0.0;
    for (std::uint64_t t = 1; t < plan.tuples; ++t) {
      // Distance to tuple 0 bounds every pairwise distance by the triangle
      // inequality, and is exactly zero iff all tuples agree.
      worst = std::max(worst, tv_sorted(dist[0], dist[t]));
    }
    report.s2_max_tv = worst;
  }
  return report;
}

std::string AuditReport::to_text() const {
  std::string out;
  out += fmt::format("secagg audit: n={} m={} M={} alphabet={}\n", n,
                     group.length, group.modulus, alphabet_size);
  out += fmt::format("dropped: {{{}}}  D_max: {}  reveal: {}\n",
                     fmt::join(dropped, ","), max_dropouts,
                     reveal_refused ? "refused" : "granted");
  out += fmt::format("input tuples: {}  dealer outcomes: {}\n", input_tuples,
                     dealer_outcomes);
  out += fmt::format("S1 max TV (same survivors' sum): {}\n", s1_max_tv);
  if (s2_max_tv) {
    out += fmt::format("S2 max TV (input independence): {}\n", *s2_max_tv);
  } else {
    out += "S2 max TV (input independence): n/a (reveal granted)\n";
  }
  return out;
}

std::string AuditReport::csv_header() {
  return "n,m,modulus,alphabet,dropped,max_dropouts,reveal_refused,"
         "input_tuples,dealer_outcomes,s1_max_tv,s2_max_tv";
}

std::string AuditReport::to_csv_row() const {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{}", n, group.length,
                     group.modulus, alphabet_size, fmt::join(dropped, ";"),
                     max_dropouts, reveal_refused ? 1 : 0, input_tuples,
                     dealer_outcomes, s1_max_tv,
                     s2_max_tv ? fmt::format("{}", *s2_max_tv) : "");
}

}  // namespace fedfreq::secagg
