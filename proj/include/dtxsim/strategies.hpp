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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dtxsim/channel.hpp"

namespace dtxsim {

/// Hypothetical sum capacity per slot, sum_k sum_n log2(1 + s[n][t][k]).
using SlotCapacity = std::vector<double>;

/// Slot indices (0-based), highest priority first. Always a permutation of
/// {0, ..., T-1}.
using SlotPriority = std::vector<std::size_t>;

enum class StrategyKind { sequential, random, p_persistent, memory };

inline constexpr StrategyKind kAllStrategies[] = {StrategyKind::sequential, StrategyKind::random,
                                                  StrategyKind::p_persistent, StrategyKind::memory};

inline std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::sequential: return "sequential";
    case StrategyKind::random: return "random";
    case StrategyKind::p_persistent: return "p_persistent";
    case StrategyKind::memory: return "memory";
  }
  return "unknown";
}

inline std::optional<StrategyKind> parse_strategy(std::string_view name) {
  for (StrategyKind kind : kAllStrategies) {
    if (name == to_string(kind)) return kind;
  }
  if (name == "p-persistent") return StrategyKind::p_persistent;
  return std::nullopt;
}

inline SlotCapacity slot_sum_capacity(const SinrTensor& sinr) {
  SlotCapacity b(sinr.num_slots(), 0.0);
  for (std::size_t t = 0; t < sinr.num_slots(); ++t) {
    double sum = 0.0;
    for (std::size_t k = 0; k < sinr.num_mobiles(); ++k) {
      for (std::size_t n = 0; n < sinr.num_subcarriers(); ++n) sum += std::log2(1.0 + sinr(n, t, k));
    }
    b[t] = sum;
  }
  return b;
}

inline bool is_permutation_of_slots(const SlotPriority& v, std::size_t T) {
  if (v.size() != T) return false;
  std::vector<bool> seen(T, false);
  for (std::size_t t : v) {
    if (t >= T || seen[t]) return false;
    seen[t] = true;
  }
  return true;
}

/// Slots by descending capacity; equal capacities keep the lower index first.
inline SlotPriority rank_by_capacity(const SlotCapacity& b) {
  SlotPriority r(b.size());
  std::iota(r.begin(), r.end(), std::size_t{0});
  std::stable_sort(r.begin(), r.end(), [&b](std::size_t x, std::size_t y) { return b[x] > b[y]; });
  return r;
}

inline SlotPriority sequential_priority(std::size_t T) {
  if (T == 0) throw std::invalid_argument("need at least one slot");
  SlotPriority v(T);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

template <class Rng>
SlotPriority random_priority(std::size_t T, Rng& rng) {
  SlotPriority v = sequential_priority(T);
  std::shuffle(v.begin(), v.end(), rng);
  return v;
}

/// Fresh capacity ranking, adopted with probability p. Without a previous
/// priority the fresh ranking is adopted unconditionally.
template <class Rng>
SlotPriority p_persistent_priority(const SlotCapacity& b, const std::optional<SlotPriority>& prev, double p,
                                   Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("persistence probability must lie in [0, 1]");
  SlotPriority candidate = rank_by_capacity(b);
  if (!prev) return candidate;
  // Always consume one draw so the stream does not depend on p.
  const bool adopt = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
  return adopt ? candidate : *prev;
}

/// Persistent per-slot scores of the memory strategy.
struct ScoreState {
  std::vector<int> psi;
  int psi_ul{5};
  int psi_ll{0};
  std::vector<bool> used_last;  // slots used for transmission in the previous frame

  /// First-frame state: every slot used, every score at `psi_init`
  /// (the lower bound unless given).
  static ScoreState initial(std::size_t T, int psi_ul, int psi_ll, std::optional<int> psi_init = {}) {
    if (psi_ll > psi_ul) throw std::invalid_argument("score lower bound exceeds upper bound");
    const int start = psi_init.value_or(psi_ll);
    if (start < psi_ll || start > psi_ul) throw std::invalid_argument("initial score outside [psi_ll, psi_ul]");
    return ScoreState{std::vector<int>(T, start), psi_ul, psi_ll, std::vector<bool>(T, true)};
  }

  std::size_t num_slots() const { return psi.size(); }
  friend bool operator==(const ScoreState&, const ScoreState&) = default;
};

struct MemoryStep {
  ScoreState state;
  SlotPriority ranking;   // R
  SlotPriority priority;  // V
};

/// One iteration of the memory strategy given an explicit capacity ranking R.
///
/// Used slots gain one point, unused slots other than R[0] lose one, and R[0]
/// gains one more (so a used R[0] gains two). Every change is clamped to
/// [psi_ll, psi_ul]. The priority orders slots by descending score, then by
/// position in R.
inline MemoryStep memory_update_ranked(const ScoreState& state, const SlotPriority& ranking) {
  const std::size_t T = state.num_slots();
  if (state.used_last.size() != T) throw std::invalid_argument("used-slot set does not match slot count");
  if (!is_permutation_of_slots(ranking, T)) throw std::invalid_argument("ranking is not a slot permutation");

  MemoryStep step{state, ranking, {}};
  std::vector<int>& psi = step.state.psi;
  const std::size_t best = ranking.front();
  for (std::size_t t = 0; t < T; ++t) {
    if (state.used_last[t]) {
      if (psi[t] < state.psi_ul) ++psi[t];
    } else if (t != best) {
      if (psi[t] > state.psi_ll) --psi[t];
    }
  }
  if (psi[best] < state.psi_ul) ++psi[best];

  std::vector<std::size_t> rank_pos(T);
  for (std::size_t i = 0; i < T; ++i) rank_pos[ranking[i]] = i;
  step.priority = ranking;
  std::stable_sort(step.priority.begin(), step.priority.end(), [&](std::size_t x, std::size_t y) {
    if (psi[x] != psi[y]) return psi[x] > psi[y];
    return rank_pos[x] < rank_pos[y];
  });
  return step;
}

inline MemoryStep memory_update(const ScoreState& state, const SlotCapacity& b) {
  if (b.size() != state.num_slots()) throw std::invalid_argument("capacity vector does not match slot count");
  return memory_update_ranked(state, rank_by_capacity(b));
}

inline std::string join_slots(const SlotPriority& v, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(v[i] + 1);
  }
  return out;
}

/// Debug trace line: `frame=<f> psi=<scores> R=<ranking> V=<priority>`, slot
/// numbers 1-based.
inline std::string format_memory_trace(std::size_t frame, const MemoryStep& step) {
  std::ostringstream os;
  os << "frame=" << frame << " psi=";
  for (std::size_t t = 0; t < step.state.psi.size(); ++t) os << (t ? "," : "") << step.state.psi[t];
  os << " R=" << join_slots(step.ranking) << " V=" << join_slots(step.priority);
  return os.str();
}

/// Per-cell slot alignment state. Each cell owns one and never reads another
/// cell's instance.
class SlotAligner {
 public:
  SlotAligner(StrategyKind kind, std::size_t T, double p, int psi_ul, int psi_ll, std::optional<int> psi_init = {})
      : kind_(kind), slots_(T), p_(p), scores_(ScoreState::initial(T, psi_ul, psi_ll, psi_init)) {
    if (T == 0) throw std::invalid_argument("need at least one slot");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("persistence probability must lie in [0, 1]");
  }

  StrategyKind kind() const { return kind_; }
  const ScoreState& scores() const { return scores_; }
  const std::optional<MemoryStep>& last_memory_step() const { return last_step_; }

  template <class Rng>
  SlotPriority next(const SlotCapacity& b, Rng& rng) {
    switch (kind_) {
      case StrategyKind::sequential: return sequential_priority(slots_);
      case StrategyKind::random: return random_priority(slots_, rng);
      case StrategyKind::p_persistent: {
        previous_ = p_persistent_priority(b, previous_, p_, rng);
        return *previous_;
      }
      case StrategyKind::memory: {
        last_step_ = memory_update(scores_, b);
        scores_ = last_step_->state;
        return last_step_->priority;
      }
    }
    throw std::logic_error("unhandled strategy");
  }

  /// Records which slots carried any transmission in the frame just sent.
  void record_usage(std::vector<bool> used) {
    if (used.size() != slots_) throw std::invalid_argument("usage vector does not match slot count");
    scores_.used_last = std::move(used);
  }

 private:
  StrategyKind kind_;
  std::size_t slots_;
  double p_;
  ScoreState scores_;
  std::optional<SlotPriority> previous_;
  std::optional<MemoryStep> last_step_;
};

}  // namespace dtxsim
