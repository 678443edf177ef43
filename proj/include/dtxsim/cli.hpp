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
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "dtxsim/config.hpp"
#include "dtxsim/engine.hpp"
#include "dtxsim/output.hpp"
#include "dtxsim/strategies.hpp"

namespace dtxsim {

/// Parses `start:stop:step` (inclusive) or a comma-separated list of rates.
inline std::vector<double> parse_rate_list(const std::string& text) {
  auto number = [](std::string_view s) { return detail::parse_double("rates", detail::trim(s)); };
  std::vector<double> rates;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string_view> parts;
    std::string_view rest(text);
    for (auto pos = rest.find(':'); pos != std::string_view::npos; pos = rest.find(':')) {
      parts.push_back(rest.substr(0, pos));
      rest = rest.substr(pos + 1);
    }
    parts.push_back(rest);
    if (parts.size() != 3) throw ConfigError("rate range must be start:stop:step");
    const double start = number(parts[0]);
    const double stop = number(parts[1]);
    const double step = number(parts[2]);
    if (!(step > 0.0) || stop < start) throw ConfigError("rate range needs step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) rates.push_back(start + static_cast<double>(i) * step);
  } else {
    std::string_view rest(text);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      rates.push_back(number(rest.substr(0, comma)));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
  }
  for (double r : rates) {
    if (!(r > 0.0)) throw ConfigError("target rates must be positive");
  }
  if (rates.empty()) throw ConfigError("no target rates given");
  return rates;
}

inline std::vector<StrategyKind> parse_strategy_list(const std::string& text) {
  if (text == "all") return {std::begin(kAllStrategies), std::end(kAllStrategies)};
  std::vector<StrategyKind> out;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto name = detail::trim(rest.substr(0, comma));
    const auto kind = parse_strategy(name);
    if (!kind) throw ConfigError("unknown strategy '" + std::string(name) + "'");
    out.push_back(*kind);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
  }
  if (out.empty()) throw ConfigError("no strategies given");
  return out;
}

/// Three-slot memory-strategy example: slots a, b, c with scores
/// {a:0, b:2, c:5}, bounds [0, 5], and three frames of (used set, ranking).
inline std::vector<AlgorithmTraceRow> memory_worked_example(std::size_t steps) {
  constexpr std::size_t a = 0, b = 1, c = 2;
  const std::vector<std::pair<std::vector<bool>, SlotPriority>> inputs = {
      {{false, false, true}, {b, c, a}},
      {{false, true, true}, {b, c, a}},
      {{false, true, false}, {b, a, c}},
  };
  if (steps == 0 || steps > inputs.size())
    throw ConfigError("the built-in example has " + std::to_string(inputs.size()) + " steps");
  ScoreState state{{0, 2, 5}, 5, 0, {}};
  std::vector<AlgorithmTraceRow> rows;
  for (std::size_t i = 0; i < steps; ++i) {
    state.used_last = inputs[i].first;
    MemoryStep step = memory_update_ranked(state, inputs[i].second);
    rows.push_back({i + 1, inputs[i].first, step});
    state = step.state;
  }
  return rows;
}

/// Center-cell memory iterations of one simulated drop.
inline std::vector<AlgorithmTraceRow> memory_trace_from_drop(const DropResult& drop) {
  std::vector<AlgorithmTraceRow> rows;
  for (std::size_t i = 0; i < drop.center_memory_steps.size(); ++i) {
    const MemoryStep& step = drop.center_memory_steps[i];
    rows.push_back({i + 1, step.state.used_last, step});
  }
  return rows;
}

namespace detail {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> settings;
  std::optional<std::string> strategy;
  std::optional<double> rate_mbps;
  std::optional<std::size_t> drops;
  std::optional<std::size_t> frames;
  std::optional<std::uint64_t> seed;
  std::size_t threads{0};
  std::string out{"results"};
};

inline void add_common(CLI::App& app, CommonOptions& o, bool with_strategy, bool with_rate) {
  app.add_option("--config", o.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", o.settings, "override one key, as key=value (repeatable)");
  if (with_strategy) app.add_option("--strategy", o.strategy, "sequential | random | p_persistent | memory");
  if (with_rate) app.add_option("--rate-mbps", o.rate_mbps, "per-mobile target rate in Mbps");
  app.add_option("--drops", o.drops, "Monte-Carlo drops");
  app.add_option("--frames", o.frames, "alignment frames after the full-power frame");
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--threads", o.threads, "worker threads, 0 = all cores (results do not depend on it)");
  app.add_option("--out", o.out, "output directory");
}

inline SimConfig resolve(const CommonOptions& o) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const std::string& s : o.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    overrides.emplace_back(std::string(trim(std::string_view(s).substr(0, eq))),
                           std::string(trim(std::string_view(s).substr(eq + 1))));
  }
  if (o.strategy) overrides.emplace_back("strategy", *o.strategy);
  if (o.rate_mbps) overrides.emplace_back("target_rate_mbps", format_double(*o.rate_mbps));
  if (o.drops) overrides.emplace_back("drops", std::to_string(*o.drops));
  if (o.frames) overrides.emplace_back("frames", std::to_string(*o.frames));
  if (o.seed) overrides.emplace_back("seed", std::to_string(*o.seed));
  const std::filesystem::path path(o.config_path);
  SimConfig config = parse_config(o.config_path.empty() ? nullptr : &path, overrides);
  config.threads = o.threads;
  return config;
}

inline std::vector<RunSummary> run_grid(const SimConfig& base, const std::vector<StrategyKind>& strategies,
                                        const std::vector<double>& rates, std::ostream& log) {
  std::vector<RunSummary> out;
  for (StrategyKind kind : strategies) {
    for (double rate : rates) {
      SimConfig point = base;
      point.strategy = kind;
      point.target_rate_mbps = rate;
      out.push_back(run_point(point));
      log << to_string(kind) << " @ " << fmt6(rate) << " Mbps: " << fmt6(out.back().mean_power_w) << " W, retx "
          << fmt6(out.back().retransmission_probability) << "\n";
    }
  }
  return out;
}

}  // namespace detail

/// Entry point of the `dtxsim` command. Returns the process exit status:
/// 0 on success, 1 on runtime failure, 2 on invalid configuration or usage.
inline int run_cli(int argc, const char* const* argv, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"DTX time-slot alignment simulator for interfering OFDMA cells", "dtxsim"};
  app.require_subcommand(1);

  detail::CommonOptions run_opts, sweep_opts, conv_opts, trace_opts;
  std::string sweep_rates = "0.5:3.0:0.25";
  std::string sweep_strategies = "all";
  std::string conv_strategies = "all";
  std::size_t trace_steps = 3;
  bool trace_from_sim = false;

  auto* run = app.add_subcommand("run", "one strategy at one target rate");
  detail::add_common(*run, run_opts, true, true);

  auto* sweep = app.add_subcommand("sweep", "mean power and retransmissions over target rates");
  detail::add_common(*sweep, sweep_opts, false, false);
  sweep->add_option("--rates", sweep_rates, "start:stop:step or comma list, in Mbps");
  sweep->add_option("--strategies", sweep_strategies, "'all' or comma list");

  auto* conv = app.add_subcommand("convergence", "per-frame center-cell power for each strategy");
  detail::add_common(*conv, conv_opts, false, true);
  conv->add_option("--strategies", conv_strategies, "'all' or comma list");

  auto* trace = app.add_subcommand("trace-algorithm", "scores, ranking and priority of the memory strategy");
  detail::add_common(*trace, trace_opts, false, true);
  trace->add_option("--steps", trace_steps, "iterations to trace");
  trace->add_flag("--from-sim", trace_from_sim, "trace the center cell of one simulated drop instead of the "
                                                "built-in three-slot example");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    log << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    log << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "dtxsim: " << e.what() << "\n";
    return 2;
  }

  try {
    if (run->parsed()) {
      const SimConfig config = detail::resolve(run_opts);
      const std::vector<DropResult> drops = run_drops(config);
      const std::vector<RunSummary> summaries{summarize(config, drops)};
      std::vector<AlgorithmTraceRow> rows;
      if (config.strategy == StrategyKind::memory) rows = memory_trace_from_drop(drops.front());
      emit_results(config, summaries, rows, run_opts.out);
      log << to_string(config.strategy) << " @ " << fmt6(config.target_rate_mbps)
          << " Mbps: " << fmt6(summaries.front().mean_power_w) << " W, retx "
          << fmt6(summaries.front().retransmission_probability) << "\n";
    } else if (sweep->parsed()) {
      const SimConfig config = detail::resolve(sweep_opts);
      const auto summaries =
          detail::run_grid(config, parse_strategy_list(sweep_strategies), parse_rate_list(sweep_rates), log);
      emit_results(config, summaries, {}, sweep_opts.out);
    } else if (conv->parsed()) {
      const SimConfig config = detail::resolve(conv_opts);
      const auto summaries =
          detail::run_grid(config, parse_strategy_list(conv_strategies), {config.target_rate_mbps}, log);
      emit_results(config, summaries, {}, conv_opts.out);
    } else if (trace->parsed()) {
      SimConfig config = detail::resolve(trace_opts);
      if (trace_from_sim) {
        config.strategy = StrategyKind::memory;
        config.frames = trace_steps;
        config.warmup = std::min(config.warmup, config.frames);
        validate_config(config);
        const DropResult drop = run_drop(config, derive_seed(config.seed, 0xD20Bu, 0));
        emit_results(config, {}, memory_trace_from_drop(drop), trace_opts.out);
      } else {
        emit_results(config, {}, memory_worked_example(trace_steps), trace_opts.out, {"a", "b", "c"});
      }
      std::ifstream in(std::filesystem::path(trace_opts.out) / kAlgorithmTraceFile);
      log << in.rdbuf();
    }
  } catch (const ConfigError& e) {
    err << "dtxsim: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "dtxsim: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace dtxsim
