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
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "dtxsim/channel.hpp"
#include "dtxsim/geometry.hpp"
#include "dtxsim/power.hpp"
#include "dtxsim/scheduler.hpp"
#include "dtxsim/strategies.hpp"

namespace dtxsim {

/// Simulation parameters. Defaults are the LTE-like reference scenario.
struct SimConfig {
  std::size_t tiers{2};
  double isd_m{500.0};
  std::size_t mobiles_per_cell{10};
  std::size_t subcarriers{50};
  std::size_t slots{10};
  double bandwidth_hz{10e6};
  double frame_duration_s{10e-3};
  double carrier_hz{2e9};  // informational; the pathloss curve is fixed for 2 GHz
  double target_rate_mbps{2.0};
  StrategyKind strategy{StrategyKind::memory};
  double p{0.3};
  int psi_ul{5};
  int psi_ll{0};
  std::optional<int> psi_init{};  // first-frame score; psi_ll when unset
  PowerParams power{};
  double noise_temperature_k{290.0};
  ChannelParams channel{};
  OverloadPolicy overload{OverloadPolicy::keep_partial};
  std::size_t frames{50};  // alignment iterations after the full-power frame 0
  std::size_t drops{20};
  std::size_t warmup{10};
  std::uint64_t seed{1};
  std::size_t threads{0};  // 0: hardware concurrency

  Numerology numerology() const {
    return Numerology{bandwidth_hz / static_cast<double>(subcarriers),
                      frame_duration_s / static_cast<double>(slots)};
  }
  double noise_per_rb_w() const { return noise_power(numerology().subcarrier_bw_hz, noise_temperature_k); }

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw std::invalid_argument(what);
    };
    require(isd_m > 0.0, "isd_m must be positive");
    require(mobiles_per_cell >= 1, "mobiles_per_cell must be at least 1");
    require(subcarriers >= 1, "subcarriers must be at least 1");
    require(slots >= 1, "slots must be at least 1");
    require(bandwidth_hz > 0.0, "bandwidth_hz must be positive");
    require(frame_duration_s > 0.0, "frame_duration_s must be positive");
    require(target_rate_mbps > 0.0, "target_rate_mbps must be positive");
    require(p >= 0.0 && p <= 1.0, "p must lie in [0, 1]");
    require(psi_ll <= psi_ul, "psi_ll must not exceed psi_ul");
    require(!psi_init || (*psi_init >= psi_ll && *psi_init <= psi_ul), "psi_init must lie in [psi_ll, psi_ul]");
    require(power.p_sleep >= 0.0 && power.p_idle >= 0.0 && power.load_factor >= 0.0,
            "power model factors must be non-negative");
    require(power.p_rb_tx > 0.0, "p_rb_tx must be positive");
    require(noise_temperature_k > 0.0, "noise_temperature_k must be positive");
    require(channel.shadowing_sigma_db >= 0.0, "shadowing_sigma_db must be non-negative");
    require(channel.site_correlation >= 0.0 && channel.site_correlation <= 1.0,
            "shadowing_site_correlation must lie in [0, 1]");
    require(frames >= 1, "frames must be at least 1");
    require(drops >= 1, "drops must be at least 1");
    require(warmup <= frames, "warmup must not exceed frames");
  }
};

struct MobileFrameRecord {
  std::size_t cell{0};
  double target_bits{0.0};
  double scheduled_bits{0.0};
  double delivered_bits{0.0};
  std::size_t failed_rbs{0};
  bool infeasible{false};
  bool retransmission{false};  // delivered < target
};

struct FrameMetrics {
  std::size_t frame{0};
  std::vector<PowerBreakdown> cell_power;
  std::vector<MobileFrameRecord> mobiles;  // global mobile index
  std::size_t center_cell{0};

  const PowerBreakdown& center_power() const { return cell_power[center_cell]; }
};

struct DropResult {
  std::vector<FrameMetrics> frames;
  std::vector<MemoryStep> center_memory_steps;  // memory strategy only, one per frame >= 1
};

/// Hooks for observing the frame loop. `on_decision(frame, cell, report_frame)`
/// fires when a cell derives its schedule from the report of `report_frame`.
struct DropObserver {
  std::function<void(std::size_t, std::size_t, std::size_t)> on_decision;
  std::function<void(std::size_t, const TransmitPattern&)> on_transmit;
};

/// Independent 64-bit seed for (master, a, b, c) via seed_seq.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(c)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace detail {

inline void account_delivery(const ScheduleMap& schedule, const SinrTensor& actual, const RateTargets& targets,
                             const Numerology& num, std::size_t cell, const MobileDrop& drop,
                             std::vector<MobileFrameRecord>& records) {
  const std::size_t K = schedule.num_mobiles();
  for (std::size_t k = 0; k < K; ++k) {
    MobileFrameRecord& rec = records[drop.global_index(cell, k)];
    rec.cell = cell;
    rec.target_bits = targets.bits_per_frame[k];
    rec.infeasible = schedule.infeasible(k);
  }
  for (std::size_t t = 0; t < schedule.num_slots(); ++t) {
    for (std::size_t n = 0; n < schedule.num_subcarriers(); ++n) {
      const std::size_t owner = schedule.owner(n, t);
      if (owner == 0) continue;
      const std::size_t k = owner - 1;
      MobileFrameRecord& rec = records[drop.global_index(cell, k)];
      const double planned = schedule.bits(n, t);
      rec.scheduled_bits += planned;
      if (rb_bits(actual(n, t, k), num) >= planned) {
        rec.delivered_bits += planned;
      } else {
        ++rec.failed_rbs;
      }
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    MobileFrameRecord& rec = records[drop.global_index(cell, k)];
    rec.retransmission = rec.delivered_bits < rec.target_bits;
  }
}

inline TransmitPattern pattern_from(const std::vector<ScheduleMap>& schedules, std::size_t N, std::size_t T) {
  TransmitPattern pattern(schedules.size(), N, T);
  for (std::size_t c = 0; c < schedules.size(); ++c) {
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t n = 0; n < N; ++n) pattern.set(c, n, t, schedules[c].owner(n, t) != 0);
    }
  }
  return pattern;
}

}  // namespace detail

/// One Monte-Carlo drop. Frame 0 transmits on every resource block of every
/// cell. Each later frame: every cell ranks and schedules from the SINR
/// reported in the previous frame, all cells transmit simultaneously, and each
/// scheduled block delivers its bits only if the realized SINR supports them.
inline DropResult run_drop(const SimConfig& config, std::uint64_t drop_seed, const DropObserver* observer = nullptr) {
  config.validate();
  const std::size_t N = config.subcarriers;
  const std::size_t T = config.slots;
  const std::size_t K = config.mobiles_per_cell;
  const Numerology num = config.numerology();
  const double n0 = config.noise_per_rb_w();
  const double p_rb = config.power.p_rb_tx;

  const NetworkLayout layout = build_hex_layout(config.tiers, config.isd_m);
  const std::size_t C = layout.num_cells();
  std::mt19937_64 geometry_rng(derive_seed(drop_seed, 1));
  const MobileDrop drop = drop_mobiles(layout, K, geometry_rng);
  std::mt19937_64 channel_rng(derive_seed(drop_seed, 2));
  const LinkGainMap gains =
      build_link_gains(layout, drop, N, T, config.channel, channel_rng);

  std::vector<std::mt19937_64> cell_rng;
  std::vector<SlotAligner> aligners;
  cell_rng.reserve(C);
  aligners.reserve(C);
  for (std::size_t c = 0; c < C; ++c) {
    cell_rng.emplace_back(derive_seed(drop_seed, 3, c));
    aligners.emplace_back(config.strategy, T, config.p, config.psi_ul, config.psi_ll, config.psi_init);
  }
  const RateTargets targets = RateTargets::uniform_mbps(K, config.target_rate_mbps, config.frame_duration_s);

  DropResult result;
  result.frames.reserve(config.frames + 1);

  // Frame 0: full power on all resources.
  TransmitPattern pattern(C, N, T, true);
  if (observer && observer->on_transmit) observer->on_transmit(0, pattern);
  std::vector<SinrTensor> reports = compute_sinr(gains, drop, pattern, p_rb, n0);
  {
    FrameMetrics fm;
    fm.frame = 0;
    fm.center_cell = layout.center_cell_index;
    fm.mobiles.resize(drop.num_mobiles());
    for (std::size_t c = 0; c < C; ++c) {
      const ScheduleMap full = full_load_schedule(reports[c], num);
      fm.cell_power.push_back(total_power(full, config.power));
      detail::account_delivery(full, reports[c], targets, num, c, drop, fm.mobiles);
    }
    result.frames.push_back(std::move(fm));
  }

  std::vector<ScheduleMap> schedules(C);
  for (std::size_t f = 1; f <= config.frames; ++f) {
    for (std::size_t c = 0; c < C; ++c) {
      if (observer && observer->on_decision) observer->on_decision(f, c, f - 1);
      const SlotCapacity b = slot_sum_capacity(reports[c]);
      const SlotPriority v = aligners[c].next(b, cell_rng[c]);
      if (c == layout.center_cell_index && config.strategy == StrategyKind::memory) {
        result.center_memory_steps.push_back(*aligners[c].last_memory_step());
      }
      schedules[c] = allocate(v, reports[c], targets, num, config.overload);
    }

    pattern = detail::pattern_from(schedules, N, T);
    if (observer && observer->on_transmit) observer->on_transmit(f, pattern);
    std::vector<SinrTensor> actual = compute_sinr(gains, drop, pattern, p_rb, n0);

    FrameMetrics fm;
    fm.frame = f;
    fm.center_cell = layout.center_cell_index;
    fm.mobiles.resize(drop.num_mobiles());
    for (std::size_t c = 0; c < C; ++c) {
      fm.cell_power.push_back(total_power(schedules[c], config.power));
      detail::account_delivery(schedules[c], actual[c], targets, num, c, drop, fm.mobiles);
      aligners[c].record_usage(schedules[c].used_slots());
    }
    result.frames.push_back(std::move(fm));
    reports = std::move(actual);
  }
  return result;
}

/// Fraction of (frame, mobile-of-cell) pairs that fell short of their target.
/// Infeasible schedules count as shortfalls.
inline double retransmission_probability(std::span<const FrameMetrics> frames, std::optional<std::size_t> cell = {}) {
  if (frames.empty()) throw std::invalid_argument("no frames to evaluate");
  std::size_t flagged = 0;
  std::size_t total = 0;
  for (const FrameMetrics& fm : frames) {
    const std::size_t which = cell.value_or(fm.center_cell);
    for (const MobileFrameRecord& rec : fm.mobiles) {
      if (rec.cell != which) continue;
      ++total;
      if (rec.retransmission || rec.infeasible) ++flagged;
    }
  }
  if (total == 0) throw std::invalid_argument("no mobiles in the selected cell");
  return static_cast<double>(flagged) / static_cast<double>(total);
}

inline double infeasibility_rate(std::span<const FrameMetrics> frames) {
  if (frames.empty()) throw std::invalid_argument("no frames to evaluate");
  std::size_t flagged = 0;
  std::size_t total = 0;
  for (const FrameMetrics& fm : frames) {
    for (const MobileFrameRecord& rec : fm.mobiles) {
      if (rec.cell != fm.center_cell) continue;
      ++total;
      if (rec.infeasible) ++flagged;
    }
  }
  return total ? static_cast<double>(flagged) / static_cast<double>(total) : 0.0;
}

/// First frame from which every later trace value stays within `rel_tol` of
/// `final_value`. Returns trace.size() if the last value is already outside.
inline std::size_t convergence_frame(std::span<const double> trace, double final_value, double rel_tol = 0.01) {
  std::size_t frame = trace.size();
  for (std::size_t i = trace.size(); i-- > 0;) {
    if (std::abs(trace[i] - final_value) > rel_tol * std::abs(final_value)) break;
    frame = i;
  }
  return frame;
}

struct RunSummary {
  StrategyKind strategy{StrategyKind::memory};
  double target_rate_mbps{0.0};
  double sum_rate_mbps{0.0};
  double mean_power_w{0.0};                // center cell, steady state, over drops
  std::vector<double> power_trace;         // center cell, mean over drops, frames 0..F
  double retransmission_probability{0.0};  // steady state
  double outage_rate{0.0};                 // infeasible schedules, steady state
  std::size_t convergence_frame{0};
  std::size_t drops{0};
};

/// Runs `count` drops on a worker pool. Drop i always uses the seed derived
/// from (master seed, i), so results do not depend on the thread count.
inline std::vector<DropResult> run_drops(const SimConfig& config) {
  config.validate();
  std::vector<DropResult> results(config.drops);
  std::size_t workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, config.drops);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < config.drops; i = next++) {
      try {
        results[i] = run_drop(config, derive_seed(config.seed, 0xD20Bu, i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

inline RunSummary summarize(const SimConfig& config, const std::vector<DropResult>& drops) {
  if (drops.empty()) throw std::invalid_argument("no drops to summarize");
  RunSummary s;
  s.strategy = config.strategy;
  s.target_rate_mbps = config.target_rate_mbps;
  s.sum_rate_mbps = config.target_rate_mbps * static_cast<double>(config.mobiles_per_cell);
  s.drops = drops.size();

  const std::size_t F = config.frames + 1;
  s.power_trace.assign(F, 0.0);
  double retx = 0.0;
  double outage = 0.0;
  for (const DropResult& d : drops) {
    for (std::size_t f = 0; f < F; ++f) s.power_trace[f] += d.frames[f].center_power().total;
    const std::span<const FrameMetrics> steady(d.frames.begin() + static_cast<std::ptrdiff_t>(config.warmup),
                                               d.frames.end());
    retx += retransmission_probability(steady);
    outage += infeasibility_rate(steady);
  }
  const double n = static_cast<double>(drops.size());
  for (double& v : s.power_trace) v /= n;
  s.retransmission_probability = retx / n;
  s.outage_rate = outage / n;

  double steady_sum = 0.0;
  for (std::size_t f = config.warmup; f < F; ++f) steady_sum += s.power_trace[f];
  s.mean_power_w = steady_sum / static_cast<double>(F - config.warmup);
  s.convergence_frame = convergence_frame(s.power_trace, s.mean_power_w);
  return s;
}

inline RunSummary run_point(const SimConfig& config) { return summarize(config, run_drops(config)); }

/// One summary per target rate; every other parameter comes from `config`.
inline std::vector<RunSummary> run_experiment(const SimConfig& config, std::span<const double> rates_mbps) {
  if (config.drops < 1) throw std::invalid_argument("need at least one drop");
  std::vector<RunSummary> out;
  out.reserve(rates_mbps.size());
  for (double rate : rates_mbps) {
    SimConfig point = config;
    point.target_rate_mbps = rate;
    out.push_back(run_point(point));
  }
  return out;
}

}  // namespace dtxsim
