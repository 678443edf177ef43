// SPDX-License-Identifier: Apache-2.0
//
// dtxsim - DTX time-slot alignment simulator for interfering OFDMA cells
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dtxsim/channel.hpp"
#include "dtxsim/strategies.hpp"

namespace dtxsim {

/// Resource-block dimensions in frequency and time.
struct Numerology {
  double subcarrier_bw_hz{200e3};
  double slot_duration_s{1e-3};
};

/// Shannon bits carried by one resource block at linear SINR `s`.
inline double rb_bits(double s, double subcarrier_bw_hz, double slot_duration_s) {
  if (s < 0.0) throw std::invalid_argument("SINR must be non-negative");
  return subcarrier_bw_hz * slot_duration_s * std::log1p(s) / std::numbers::ln2;
}

inline double rb_bits(double s, const Numerology& num) { return rb_bits(s, num.subcarrier_bw_hz, num.slot_duration_s); }

/// Per-mobile target in bits per frame.
struct RateTargets {
  std::vector<double> bits_per_frame;

  static RateTargets uniform_mbps(std::size_t K, double mbps, double frame_duration_s) {
    if (!(mbps > 0.0)) throw std::invalid_argument("target rate must be positive");
    return RateTargets{std::vector<double>(K, mbps * 1e6 * frame_duration_s)};
  }
  std::size_t size() const { return bits_per_frame.size(); }
};

/// Assignment of resource blocks to mobiles for one cell and one frame.
/// owner(n, t) is 0 for an unscheduled block, otherwise the 1-based mobile.
class ScheduleMap {
 public:
  ScheduleMap() = default;
  ScheduleMap(std::size_t subcarriers, std::size_t slots, std::size_t mobiles)
      : subcarriers_(subcarriers), slots_(slots), mobiles_(mobiles), owner_(subcarriers * slots, 0),
        bits_(subcarriers * slots, 0.0), infeasible_(mobiles, false) {}

  std::size_t num_subcarriers() const { return subcarriers_; }
  std::size_t num_slots() const { return slots_; }
  std::size_t num_mobiles() const { return mobiles_; }

  std::size_t owner(std::size_t n, std::size_t t) const { return owner_[t * subcarriers_ + n]; }
  double bits(std::size_t n, std::size_t t) const { return bits_[t * subcarriers_ + n]; }

  void assign(std::size_t n, std::size_t t, std::size_t mobile_1based, double bits) {
    if (mobile_1based == 0 || mobile_1based > mobiles_) throw std::out_of_range("mobile index out of range");
    if (!(bits >= 0.0)) throw std::invalid_argument("scheduled bits must be non-negative");
    owner_[t * subcarriers_ + n] = mobile_1based;
    bits_[t * subcarriers_ + n] = bits;
  }

  void release(std::size_t n, std::size_t t) {
    owner_[t * subcarriers_ + n] = 0;
    bits_[t * subcarriers_ + n] = 0.0;
  }

  bool infeasible(std::size_t k) const { return infeasible_[k]; }
  void mark_infeasible(std::size_t k) { infeasible_[k] = true; }
  const std::vector<bool>& infeasible_flags() const { return infeasible_; }

  bool slot_used(std::size_t t) const {
    for (std::size_t n = 0; n < subcarriers_; ++n) {
      if (owner(n, t) != 0) return true;
    }
    return false;
  }
  std::vector<bool> used_slots() const {
    std::vector<bool> used(slots_);
    for (std::size_t t = 0; t < slots_; ++t) used[t] = slot_used(t);
    return used;
  }
  std::size_t tx_slots() const {
    std::size_t count = 0;
    for (std::size_t t = 0; t < slots_; ++t) count += slot_used(t) ? 1 : 0;
    return count;
  }
  std::size_t dtx_slots() const { return slots_ - tx_slots(); }

  std::size_t scheduled_rb_count() const {
    std::size_t count = 0;
    for (std::size_t o : owner_) count += o != 0 ? 1 : 0;
    return count;
  }

  /// Bits scheduled to mobile k (0-based).
  double scheduled_bits(std::size_t k) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < owner_.size(); ++i) {
      if (owner_[i] == k + 1) sum += bits_[i];
    }
    return sum;
  }

  friend bool operator==(const ScheduleMap&, const ScheduleMap&) = default;

 private:
  std::size_t subcarriers_{0};
  std::size_t slots_{0};
  std::size_t mobiles_{0};
  std::vector<std::size_t> owner_;
  std::vector<double> bits_;
  std::vector<bool> infeasible_;
};

/// What happens to the blocks of a mobile whose target cannot be met.
enum class OverloadPolicy {
  keep_partial,  // the mobile keeps every block it reached
  release,       // the blocks go back to the pool and the mobile is not served
};

/// Sequential resource-block fill. Mobiles are served in index order, each
/// until its target is met: slots in priority order, subcarriers ascending
/// within a slot, skipping blocks already taken or with zero estimated bits.
/// A mobile that runs out of blocks is marked infeasible; `policy` decides
/// whether it keeps the blocks it reached.
inline ScheduleMap allocate(const SlotPriority& priority, const SinrTensor& est, const RateTargets& targets,
                            const Numerology& num, OverloadPolicy policy = OverloadPolicy::keep_partial) {
  const std::size_t N = est.num_subcarriers();
  const std::size_t T = est.num_slots();
  const std::size_t K = est.num_mobiles();
  if (!is_permutation_of_slots(priority, T)) throw std::invalid_argument("priority is not a slot permutation");
  if (targets.size() != K) throw std::invalid_argument("one rate target per mobile required");

  ScheduleMap schedule(N, T, K);
  std::vector<std::pair<std::size_t, std::size_t>> taken;
  for (std::size_t k = 0; k < K; ++k) {
    const double target = targets.bits_per_frame[k];
    double scheduled = 0.0;
    taken.clear();
    for (std::size_t i = 0; i < T && scheduled < target; ++i) {
      const std::size_t t = priority[i];
      for (std::size_t n = 0; n < N && scheduled < target; ++n) {
        if (schedule.owner(n, t) != 0) continue;
        const double bits = rb_bits(est(n, t, k), num);
        if (!(bits > 0.0)) continue;
        schedule.assign(n, t, k + 1, bits);
        taken.emplace_back(n, t);
        scheduled += bits;
      }
    }
    if (scheduled < target) {
      schedule.mark_infeasible(k);
      if (policy == OverloadPolicy::release) {
        for (auto [n, t] : taken) schedule.release(n, t);
      }
    }
  }
  return schedule;
}

/// Every resource block scheduled, owners assigned round-robin over the grid.
/// Used for the full-power initial frame.
inline ScheduleMap full_load_schedule(const SinrTensor& actual, const Numerology& num) {
  const std::size_t N = actual.num_subcarriers();
  const std::size_t T = actual.num_slots();
  const std::size_t K = actual.num_mobiles();
  ScheduleMap schedule(N, T, K);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t n = 0; n < N; ++n) {
      const std::size_t k = (t * N + n) % K;
      schedule.assign(n, t, k + 1, rb_bits(actual(n, t, k), num));
    }
  }
  return schedule;
}

}  // namespace dtxsim
