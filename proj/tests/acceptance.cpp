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

// Acceptance runner: one PASS/FAIL line per criterion at the reference
// scenario (19 cells, N=50, T=10, K=10, 50 frames, 20 drops).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dtxsim/cli.hpp"
#include "oracles.hpp"

using namespace dtxsim;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("criterion %d: %s  %s  [%s]\n", id, ok ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::vector<std::string> file_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

struct Grid {
  std::map<std::pair<StrategyKind, long>, RunSummary> points;
  static long key(double rate) { return std::lround(rate * 1000.0); }
  const RunSummary& at(StrategyKind k, double rate) const { return points.at({k, key(rate)}); }
};

void criterion_trace(const fs::path& out) {
  const fs::path dir = out / "trace_algorithm";
  const std::string dir_s = dir.string();
  const char* argv[] = {"dtxsim", "trace-algorithm", "--steps", "3", "--out", dir_s.c_str()};
  std::ostringstream log, err;
  const int rc = run_cli(6, argv, log, err);
  const std::vector<std::string> want = {"1\tc\ta:0,b:3,c:5\tb,c,a\tc,b,a", "2\tb,c\ta:0,b:5,c:5\tb,c,a\tb,c,a",
                                         "3\tb\ta:0,b:5,c:4\tb,a,c\tb,c,a"};
  const auto rows = file_lines(dir / kAlgorithmTraceFile);
  bool ok = rc == 0 && rows.size() == 5;
  for (std::size_t i = 0; ok && i < 3; ++i) ok = rows[i + 2] == want[i];
  report(1, ok, "memory-strategy worked example, psi and V at every step",
         ok ? "3/3 steps exact" : "rc=" + std::to_string(rc) + " " + err.str());
}

void criterion_power() {
  const PowerParams params;
  ScheduleMap full(50, 10, 10);
  for (std::size_t t = 0; t < 10; ++t)
    for (std::size_t n = 0; n < 50; ++n) full.assign(n, t, 1 + (n % 10), 1.0);
  const double p_full = total_power(full, params).total;
  const double p_dtx = total_power(ScheduleMap(50, 10, 10), params).total;
  report(2, p_full == 350.0 && p_dtx == 90.0, "power anchors, full load 350 W and all-DTX 90 W",
         "full=" + num(p_full) + " dtx=" + num(p_dtx));
}

void criterion_convergence(const Grid& g) {
  bool ok = true;
  std::string detail;
  for (StrategyKind k : kAllStrategies) {
    for (double rate : {1.0, 2.0}) {
      const RunSummary& s = g.at(k, rate);
      const double final_value = s.mean_power_w;
      double worst6 = 0.0;
      for (std::size_t f = 6; f < s.power_trace.size(); ++f)
        worst6 = std::max(worst6, std::abs(s.power_trace[f] - final_value) / final_value);
      const double end_dev = std::abs(s.power_trace.back() - final_value) / final_value;
      const bool pass = worst6 <= 0.05 && end_dev <= 0.01;
      ok = ok && pass;
      detail += std::string(to_string(k)) + "@" + num(rate) + ":dev6=" + num(worst6) + ",dev50=" + num(end_dev) +
                (pass ? "" : "(!)") + " ";
    }
  }
  report(3, ok, "convergence within 5% by frame 6 and 1% at frame 50, all strategies at 1 and 2 Mbps", detail);
}

void criterion_ordering(const Grid& g) {
  const double seq = g.at(StrategyKind::sequential, 2.0).mean_power_w;
  const double rnd = g.at(StrategyKind::random, 2.0).mean_power_w;
  const double pp = g.at(StrategyKind::p_persistent, 2.0).mean_power_w;
  const double mem = g.at(StrategyKind::memory, 2.0).mean_power_w;
  const bool ok = seq > rnd && rnd > pp && rnd > mem && mem <= 0.75 * rnd;
  report(4, ok, "power ordering at 2 Mbps: sequential > random > {p-persistent, memory}, memory <= 0.75 random",
         "seq=" + num(seq) + " random=" + num(rnd) + " pp=" + num(pp) + " mem=" + num(mem) +
             " mem/random=" + num(mem / rnd));
}

void criterion_extremes(const Grid& g) {
  bool ok = true;
  std::string detail;
  for (double rate : {0.25, 3.0}) {
    const double rnd = g.at(StrategyKind::random, rate).mean_power_w;
    const double pp = g.at(StrategyKind::p_persistent, rate).mean_power_w;
    const double rel = std::abs(rnd - pp) / rnd;
    ok = ok && rel <= 0.10;
    detail += num(rate) + "Mbps: random=" + num(rnd) + " pp=" + num(pp) + " rel=" + num(rel) + " ";
  }
  report(5, ok, "random and p-persistent within 10% at 0.25 and 3 Mbps", detail);
}

void criterion_retransmission(const Grid& g, const std::vector<double>& rates) {
  const double rnd = g.at(StrategyKind::random, 2.0).retransmission_probability;
  const double mem = g.at(StrategyKind::memory, 2.0).retransmission_probability;
  bool seq_zero = true;
  std::string seq_detail;
  for (double rate : rates) {
    if (rate > 2.0 + 1e-9) continue;
    const double r = g.at(StrategyKind::sequential, rate).retransmission_probability;
    if (r != 0.0) {
      seq_zero = false;
      seq_detail += num(rate) + ":" + num(r) + " ";
    }
  }
  const bool ok = rnd > mem && mem <= 0.8 * rnd && seq_zero;
  report(6, ok, "retransmissions at 2 Mbps: memory <= 0.8 random; sequential zero up to 2 Mbps",
         "random=" + num(rnd) + " mem=" + num(mem) + " sequential nonzero at: " +
             (seq_detail.empty() ? "none" : seq_detail));
}

void criterion_band(const Grid& g) {
  bool ok = true;
  std::string detail;
  for (double rate = 1.0; rate <= 2.5 + 1e-9; rate += 0.25) {
    const double r = g.at(StrategyKind::memory, rate).retransmission_probability;
    ok = ok && r >= 0.05 && r <= 0.35;
    detail += num(rate) + ":" + num(r) + " ";
  }
  report(7, ok, "memory retransmission probability in [0.05, 0.35] for 1 to 2.5 Mbps", detail);
}

void criterion_properties(const SimConfig& base, const fs::path& out) {
  std::string detail;
  bool ok = true;
  auto add = [&](const char* name, const oracle::Check& c) {
    ok = ok && c.ok;
    detail += std::string(name) + (c.ok ? ":ok " : ":" + c.detail + " ");
  };
  add("permutations", oracle::permutation_fuzz(5000, 101));
  add("psi-bounds", oracle::score_bounds(100000, 102));
  add("allocation", oracle::allocation_oracle(1000, 103));
  add("sinr-monotone", oracle::sinr_monotonicity(1000, 104));
  add("capacity-sum", oracle::capacity_summation(1000, 105));

  // Byte-identical files for one and several worker threads.
  SimConfig c = base;
  c.drops = 4;
  c.frames = 8;
  c.warmup = 2;
  std::vector<std::string> files[2];
  for (std::size_t threads : {1u, 4u}) {
    c.threads = threads;
    const fs::path dir = out / ("determinism_" + std::to_string(threads));
    std::vector<RunSummary> summaries;
    for (StrategyKind k : kAllStrategies) {
      c.strategy = k;
      summaries.push_back(run_point(c));
    }
    emit_results(c, summaries, {}, dir);
    for (const char* f : {kSweepFile, kTraceFile, kResolvedConfigFile}) {
      std::ifstream in(dir / f, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      files[threads == 1 ? 0 : 1].push_back(ss.str());
    }
  }
  const bool same = files[0] == files[1];
  ok = ok && same;
  detail += same ? "determinism:ok" : "determinism:files differ";
  report(8, ok, "property suites and thread-count determinism", detail);
}

void criterion_monotone(const Grid& g, const std::vector<double>& rates) {
  bool ok = true;
  std::string detail;
  for (StrategyKind k : kAllStrategies) {
    int inversions = 0;
    bool large = false;
    for (std::size_t i = 0; i + 1 < rates.size(); ++i) {
      if (rates[i] < 0.5 - 1e-9) continue;
      const double a = g.at(k, rates[i]).mean_power_w;
      const double b = g.at(k, rates[i + 1]).mean_power_w;
      if (b < a) {
        ++inversions;
        if (a - b > 0.01 * a) large = true;
      }
    }
    const bool pass = inversions <= 1 && !large;
    ok = ok && pass;
    detail += std::string(to_string(k)) + ":inversions=" + std::to_string(inversions) + (large ? "(>1%)" : "") + " ";
  }
  report(9, ok, "steady power non-decreasing over 0.5 to 3 Mbps (one inversion within 1% allowed)", detail);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dtxsim acceptance runner"};
  std::vector<std::string> settings;
  std::size_t drops = 20;
  std::size_t threads = 0;
  std::string out = "acceptance_results";
  app.add_option("--set", settings, "configuration override key=value");
  app.add_option("--drops", drops, "drops per point (at least 20 for the reference run)");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--out", out, "directory for the sweep files");
  CLI11_PARSE(app, argc, argv);

  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& s : settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      std::cerr << "--set expects key=value\n";
      return 2;
    }
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  overrides.emplace_back("drops", std::to_string(drops));
  SimConfig base;
  try {
    base = parse_config(nullptr, overrides);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  base.threads = threads;
  const fs::path outdir(out);
  ensure_output_dir(outdir);
  std::printf("config_hash=%s drops=%zu frames=%zu\n", config_hash(base).c_str(), base.drops, base.frames);

  criterion_trace(outdir);
  criterion_power();

  std::vector<double> rates{0.25};
  for (double r : parse_rate_list("0.5:3.0:0.25")) rates.push_back(r);
  Grid grid;
  std::vector<RunSummary> all;
  for (StrategyKind k : kAllStrategies) {
    for (double rate : rates) {
      SimConfig point = base;
      point.strategy = k;
      point.target_rate_mbps = rate;
      RunSummary s = run_point(point);
      std::printf("  %-12s %5.2f Mbps  power=%8.3f W  retx=%.4f  outage=%.4f  conv=%zu\n",
                  std::string(to_string(k)).c_str(), rate, s.mean_power_w, s.retransmission_probability,
                  s.outage_rate, s.convergence_frame);
      std::fflush(stdout);
      grid.points[{k, Grid::key(rate)}] = s;
      all.push_back(std::move(s));
    }
  }
  emit_results(base, all, {}, outdir);

  criterion_convergence(grid);
  criterion_ordering(grid);
  criterion_extremes(grid);
  criterion_retransmission(grid, rates);
  criterion_band(grid);
  criterion_properties(base, outdir);
  criterion_monotone(grid, rates);

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
