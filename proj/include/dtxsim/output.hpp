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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dtxsim/config.hpp"
#include "dtxsim/engine.hpp"
#include "dtxsim/strategies.hpp"

// Result files are tab-separated with one `# key=value` comment line, then a
// header row. Floating-point fields carry six significant digits.

namespace dtxsim {

inline constexpr const char* kSweepFile = "sweep.tsv";
inline constexpr const char* kTraceFile = "trace.tsv";
inline constexpr const char* kAlgorithmTraceFile = "algorithm_trace.tsv";
inline constexpr const char* kResolvedConfigFile = "resolved_config.txt";

inline std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%#.6g", v);
  return buf;
}

/// One memory-strategy iteration with slot labels, for the algorithm trace.
struct AlgorithmTraceRow {
  std::size_t step{0};
  std::vector<bool> used;
  MemoryStep result;
};

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline std::string label_slot(std::size_t slot, const std::vector<std::string>& labels) {
  return slot < labels.size() ? labels[slot] : std::to_string(slot + 1);
}

inline std::string label_list(const SlotPriority& v, const std::vector<std::string>& labels) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + label_slot(v[i], labels);
  return out;
}

}  // namespace detail

inline void ensure_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw std::runtime_error("cannot create output directory '" + dir.string() + "'");
}

/// Echoes the resolved configuration for provenance.
inline void write_resolved_config(const std::filesystem::path& dir, const SimConfig& config) {
  const auto path = dir / kResolvedConfigFile;
  auto out = detail::open_output(path);
  out << "# config_hash=" << config_hash(config) << "\n" << to_config_text(config);
  detail::finish(out, path);
}

/// One row per (strategy, target rate).
inline void write_sweep(const std::filesystem::path& path, const std::string& hash,
                        const std::vector<RunSummary>& summaries) {
  if (summaries.empty()) throw std::invalid_argument("no summaries to write");
  auto out = detail::open_output(path);
  out << "# config_hash=" << hash << "\n";
  out << "strategy\ttarget_rate_mbps\tcell_sum_rate_mbps\tmean_power_w\tretransmission_probability\t"
         "outage_rate\tconvergence_frame\tdrops\n";
  for (const RunSummary& s : summaries) {
    out << to_string(s.strategy) << '\t' << fmt6(s.target_rate_mbps) << '\t' << fmt6(s.sum_rate_mbps) << '\t'
        << fmt6(s.mean_power_w) << '\t' << fmt6(s.retransmission_probability) << '\t' << fmt6(s.outage_rate) << '\t'
        << s.convergence_frame << '\t' << s.drops << '\n';
  }
  detail::finish(out, path);
}

/// One row per (strategy, target rate, frame) with the drop-averaged
/// center-cell power.
inline void write_trace(const std::filesystem::path& path, const std::string& hash,
                        const std::vector<RunSummary>& summaries) {
  if (summaries.empty()) throw std::invalid_argument("no summaries to write");
  auto out = detail::open_output(path);
  out << "# config_hash=" << hash << "\n";
  out << "strategy\ttarget_rate_mbps\tframe\tcenter_power_w\n";
  for (const RunSummary& s : summaries) {
    for (std::size_t f = 0; f < s.power_trace.size(); ++f) {
      out << to_string(s.strategy) << '\t' << fmt6(s.target_rate_mbps) << '\t' << f << '\t' << fmt6(s.power_trace[f])
          << '\n';
    }
  }
  detail::finish(out, path);
}

/// Memory-strategy iterations: used set, scores, capacity ranking R and
/// priority V. Slots are printed with `labels` when given, 1-based otherwise.
inline void write_algorithm_trace(const std::filesystem::path& path, const std::string& hash,
                                  const std::vector<AlgorithmTraceRow>& rows,
                                  const std::vector<std::string>& labels = {}) {
  if (rows.empty()) throw std::invalid_argument("no algorithm steps to write");
  auto out = detail::open_output(path);
  out << "# config_hash=" << hash << "\n";
  out << "step\tused\tpsi\tR\tV\n";
  for (const AlgorithmTraceRow& row : rows) {
    std::string used;
    for (std::size_t t = 0; t < row.used.size(); ++t) {
      if (!row.used[t]) continue;
      used += (used.empty() ? "" : ",") + detail::label_slot(t, labels);
    }
    std::string psi;
    for (std::size_t t = 0; t < row.result.state.psi.size(); ++t) {
      psi += (t ? "," : "") + detail::label_slot(t, labels) + ":" + std::to_string(row.result.state.psi[t]);
    }
    out << row.step << '\t' << (used.empty() ? "-" : used) << '\t' << psi << '\t'
        << detail::label_list(row.result.ranking, labels) << '\t' << detail::label_list(row.result.priority, labels)
        << '\n';
  }
  detail::finish(out, path);
}

/// Writes the sweep and trace files (and the algorithm trace when rows are
/// given) plus the resolved configuration into `outdir`.
inline void emit_results(const SimConfig& config, const std::vector<RunSummary>& summaries,
                         const std::vector<AlgorithmTraceRow>& algorithm_rows, const std::filesystem::path& outdir,
                         const std::vector<std::string>& labels = {}) {
  if (summaries.empty() && algorithm_rows.empty()) throw std::invalid_argument("nothing to emit");
  ensure_output_dir(outdir);
  const std::string hash = config_hash(config);
  write_resolved_config(outdir, config);
  if (!summaries.empty()) {
    write_sweep(outdir / kSweepFile, hash, summaries);
    write_trace(outdir / kTraceFile, hash, summaries);
  }
  if (!algorithm_rows.empty()) write_algorithm_trace(outdir / kAlgorithmTraceFile, hash, algorithm_rows, labels);
}

}  // namespace dtxsim
