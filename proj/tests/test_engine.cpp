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

#include <gtest/gtest.h>

#include <vector>

#include "dtxsim/engine.hpp"

using namespace dtxsim;

namespace {

SimConfig small_config() {
  SimConfig c;
  c.tiers = 1;
  c.subcarriers = 8;
  c.slots = 5;
  c.mobiles_per_cell = 3;
  c.bandwidth_hz = 8 * 200e3;
  c.frame_duration_s = 5e-3;
  c.target_rate_mbps = 0.5;
  c.frames = 12;
  c.warmup = 2;
  c.drops = 3;
  c.threads = 1;
  return c;
}

FrameMetrics synthetic_frame(std::size_t mobiles, std::size_t flagged) {
  FrameMetrics fm;
  fm.center_cell = 0;
  fm.mobiles.resize(mobiles);
  for (std::size_t i = 0; i < flagged; ++i) fm.mobiles[i].retransmission = true;
  return fm;
}

}  // namespace

TEST(Config, DefaultsAreReferenceScenario) {
  const SimConfig c;
  EXPECT_EQ(c.slots, 10u);
  EXPECT_EQ(c.subcarriers, 50u);
  EXPECT_EQ(c.mobiles_per_cell, 10u);
  EXPECT_EQ(c.psi_ul, 5);
  EXPECT_EQ(c.psi_ll, 0);
  EXPECT_DOUBLE_EQ(c.p, 0.3);
  EXPECT_DOUBLE_EQ(c.numerology().subcarrier_bw_hz, 200e3);
  EXPECT_DOUBLE_EQ(c.numerology().slot_duration_s, 1e-3);
  EXPECT_NEAR(c.noise_per_rb_w(), 8.008e-16, 1e-19);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ValidationFailures) {
  auto bad = [](auto mutate) {
    SimConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), std::invalid_argument);
  };
  bad([](SimConfig& c) { c.p = 1.5; });
  bad([](SimConfig& c) { c.slots = 0; });
  bad([](SimConfig& c) { c.psi_ll = 6; });
  bad([](SimConfig& c) { c.psi_init = 9; });
  bad([](SimConfig& c) { c.target_rate_mbps = 0.0; });
  bad([](SimConfig& c) { c.warmup = 60; });
  bad([](SimConfig& c) { c.channel.site_correlation = -0.1; });
  bad([](SimConfig& c) { c.isd_m = 0.0; });
}

TEST(Seeds, DistinctStreams) {
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
  EXPECT_NE(derive_seed(1, 3, 0), derive_seed(1, 3, 1));
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
  EXPECT_EQ(derive_seed(7, 1, 2, 3), derive_seed(7, 1, 2, 3));
}

TEST(Retransmission, CountingOracle) {
  std::vector<FrameMetrics> frames{synthetic_frame(10, 2), synthetic_frame(10, 1)};
  EXPECT_DOUBLE_EQ(retransmission_probability(frames), 0.15);
  frames = {synthetic_frame(10, 0), synthetic_frame(10, 0)};
  EXPECT_EQ(retransmission_probability(frames), 0.0);
  frames = {synthetic_frame(10, 10), synthetic_frame(10, 10)};
  EXPECT_EQ(retransmission_probability(frames), 1.0);
  frames[0].mobiles[0].retransmission = false;
  frames[0].mobiles[0].infeasible = true;
  EXPECT_EQ(retransmission_probability(frames), 1.0);
  EXPECT_THROW(retransmission_probability(std::vector<FrameMetrics>{}), std::invalid_argument);
}

TEST(Retransmission, OnlySelectedCell) {
  FrameMetrics fm = synthetic_frame(4, 0);
  fm.mobiles[2].cell = 1;
  fm.mobiles[2].retransmission = true;
  const std::vector<FrameMetrics> frames{fm};
  EXPECT_EQ(retransmission_probability(frames), 0.0);
  EXPECT_EQ(retransmission_probability(frames, 1), 1.0);
  EXPECT_THROW(retransmission_probability(frames, 5), std::invalid_argument);
}

TEST(Convergence, FirstFrameInsideBand) {
  const std::vector<double> trace{350, 200, 150, 101.5, 100.5, 99.5, 100};
  EXPECT_EQ(convergence_frame(trace, 100.0, 0.01), 4u);
  EXPECT_EQ(convergence_frame(trace, 100.0, 0.02), 3u);
  EXPECT_EQ(convergence_frame(std::vector<double>{1, 2}, 5.0), 2u);
}

TEST(Delivery, FailedBlockWhenActualBelowPlan) {
  ScheduleMap s(2, 1, 1);
  s.assign(0, 0, 1, 400.0);
  s.assign(1, 0, 1, 400.0);
  SinrTensor actual(2, 1, 1, 3.0);
  actual(1, 0, 0) = 2.9;
  MobileDrop drop;
  drop.mobiles_per_cell = 1;
  drop.serving_cell = {0};
  drop.positions = {{Point2{}}};
  std::vector<MobileFrameRecord> rec(1);
  detail::account_delivery(s, actual, RateTargets{{800.0}}, Numerology{}, 0, drop, rec);
  EXPECT_EQ(rec[0].failed_rbs, 1u);
  EXPECT_NEAR(rec[0].delivered_bits, 400.0, 1e-9);
  EXPECT_NEAR(rec[0].scheduled_bits, 800.0, 1e-9);
  EXPECT_TRUE(rec[0].retransmission);
}

TEST(Engine, FrameZeroAt350) {
  SimConfig c;
  c.frames = 1;
  c.warmup = 0;
  const DropResult r = run_drop(c, derive_seed(1, 0xD20B, 0));
  ASSERT_EQ(r.frames.size(), 2u);
  for (const PowerBreakdown& p : r.frames[0].cell_power) EXPECT_EQ(p.total, 350.0);
  EXPECT_EQ(r.frames[0].center_power().total, 350.0);
}

TEST(Engine, SameSeedSameDrop) {
  const SimConfig c = small_config();
  const DropResult a = run_drop(c, 99);
  const DropResult b = run_drop(c, 99);
  ASSERT_EQ(a.frames.size(), c.frames + 1);
  for (std::size_t f = 0; f < a.frames.size(); ++f) {
    for (std::size_t cell = 0; cell < a.frames[f].cell_power.size(); ++cell)
      EXPECT_EQ(a.frames[f].cell_power[cell].total, b.frames[f].cell_power[cell].total);
    for (std::size_t m = 0; m < a.frames[f].mobiles.size(); ++m)
      EXPECT_EQ(a.frames[f].mobiles[m].delivered_bits, b.frames[f].mobiles[m].delivered_bits);
  }
}

TEST(Engine, SynchronousDecisionsFromPreviousFrame) {
  const SimConfig c = small_config();
  std::vector<std::size_t> decided(c.frames + 1, 0);
  std::size_t transmitted = 0;
  bool ok = true;
  DropObserver obs;
  obs.on_decision = [&](std::size_t frame, std::size_t cell, std::size_t report) {
    if (report + 1 != frame || transmitted != frame || cell != decided[frame]) ok = false;
    ++decided[frame];
  };
  obs.on_transmit = [&](std::size_t frame, const TransmitPattern&) {
    if (frame != transmitted || (frame > 0 && decided[frame] != 7)) ok = false;
    ++transmitted;
  };
  run_drop(c, 5, &obs);
  EXPECT_TRUE(ok);
  EXPECT_EQ(transmitted, c.frames + 1);
}

TEST(Engine, ThreadCountDoesNotChangeResults) {
  SimConfig c = small_config();
  c.strategy = StrategyKind::random;
  const RunSummary one = run_point(c);
  c.threads = 3;
  const RunSummary three = run_point(c);
  EXPECT_EQ(one.power_trace, three.power_trace);
  EXPECT_EQ(one.retransmission_probability, three.retransmission_probability);
  EXPECT_EQ(one.mean_power_w, three.mean_power_w);
}

TEST(Engine, SequentialReachesFixedPoint) {
  SimConfig c = small_config();
  c.strategy = StrategyKind::sequential;
  c.frames = 20;
  const DropResult r = run_drop(c, 17);
  for (std::size_t f = 12; f <= c.frames; ++f)
    EXPECT_EQ(r.frames[f].center_power().total, r.frames[f - 1].center_power().total);
}

TEST(Engine, VanishingRateUsesOneSlot) {
  for (StrategyKind kind : kAllStrategies) {
    SimConfig c;
    c.strategy = kind;
    c.target_rate_mbps = 1e-6;
    c.frames = 4;
    c.warmup = 1;
    c.drops = 1;
    const RunSummary s = run_point(c);
    // 90 * 9/10 + 3 * 10 blocks / 10 slots + 200 * 1/10
    EXPECT_NEAR(s.mean_power_w, 104.0, 1e-9) << to_string(kind);
  }
}

TEST(Engine, SequentialNoRetransmissionsAtLowRate) {
  SimConfig c;
  c.strategy = StrategyKind::sequential;
  c.target_rate_mbps = 0.25;
  c.frames = 20;
  c.warmup = 10;
  c.drops = 2;
  const RunSummary s = run_point(c);
  EXPECT_EQ(s.retransmission_probability, 0.0);
}

TEST(Engine, MemoryStepsRecordedForCenterCell) {
  SimConfig c = small_config();
  c.strategy = StrategyKind::memory;
  const DropResult r = run_drop(c, 3);
  ASSERT_EQ(r.center_memory_steps.size(), c.frames);
  for (const MemoryStep& step : r.center_memory_steps) {
    EXPECT_TRUE(is_permutation_of_slots(step.priority, c.slots));
    for (int s : step.state.psi) {
      EXPECT_GE(s, c.psi_ll);
      EXPECT_LE(s, c.psi_ul);
    }
  }
  c.strategy = StrategyKind::random;
  EXPECT_TRUE(run_drop(c, 3).center_memory_steps.empty());
}

TEST(Summary, ShapesAndSteadyMean) {
  const SimConfig c = small_config();
  const std::vector<DropResult> drops = run_drops(c);
  const RunSummary s = summarize(c, drops);
  ASSERT_EQ(s.power_trace.size(), c.frames + 1);
  EXPECT_EQ(s.drops, c.drops);
  EXPECT_DOUBLE_EQ(s.sum_rate_mbps, 1.5);
  double sum = 0.0;
  for (std::size_t f = c.warmup; f <= c.frames; ++f) sum += s.power_trace[f];
  EXPECT_NEAR(s.mean_power_w, sum / static_cast<double>(c.frames + 1 - c.warmup), 1e-9);
  EXPECT_GE(s.retransmission_probability, 0.0);
  EXPECT_LE(s.retransmission_probability, 1.0);
  EXPECT_THROW(summarize(c, {}), std::invalid_argument);
}

TEST(Summary, RepeatableAcrossRuns) {
  const SimConfig c = small_config();
  const RunSummary a = run_point(c);
  const RunSummary b = run_point(c);
  EXPECT_EQ(a.power_trace, b.power_trace);
  EXPECT_EQ(a.retransmission_probability, b.retransmission_probability);
}
