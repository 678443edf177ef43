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

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dtxsim/engine.hpp"

namespace dtxsim {

/// Raised for unknown keys, malformed or out-of-range values and unreadable
/// files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError("invalid number for '" + std::string(key) + "': '" + std::string(value) + "'");
  return out;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view value) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError("invalid integer for '" + std::string(key) + "': '" + std::string(value) + "'");
  return out;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  std::function<void(SimConfig&, std::string_view)> set;
  std::function<std::string(const SimConfig&)> get;
};

inline const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = [] {
    std::map<std::string, Field, std::less<>> f;
    auto size_field = [](std::size_t SimConfig::*member, const char* key) {
      return Field{[member, key](SimConfig& c, std::string_view v) { c.*member = parse_int<std::size_t>(key, v); },
                   [member](const SimConfig& c) { return std::to_string(c.*member); }};
    };
    auto real = [](double SimConfig::*member, const char* key) {
      return Field{[member, key](SimConfig& c, std::string_view v) { c.*member = parse_double(key, v); },
                   [member](const SimConfig& c) { return format_double(c.*member); }};
    };
    auto power = [](double PowerParams::*member, const char* key) {
      return Field{[member, key](SimConfig& c, std::string_view v) { c.power.*member = parse_double(key, v); },
                   [member](const SimConfig& c) { return format_double(c.power.*member); }};
    };

    f["tiers"] = size_field(&SimConfig::tiers, "tiers");
    f["isd_m"] = real(&SimConfig::isd_m, "isd_m");
    f["mobiles_per_cell"] = size_field(&SimConfig::mobiles_per_cell, "mobiles_per_cell");
    f["subcarriers"] = size_field(&SimConfig::subcarriers, "subcarriers");
    f["slots"] = size_field(&SimConfig::slots, "slots");
    f["bandwidth_hz"] = real(&SimConfig::bandwidth_hz, "bandwidth_hz");
    f["frame_duration_s"] = real(&SimConfig::frame_duration_s, "frame_duration_s");
    f["carrier_hz"] = real(&SimConfig::carrier_hz, "carrier_hz");
    f["target_rate_mbps"] = real(&SimConfig::target_rate_mbps, "target_rate_mbps");
    f["strategy"] = {[](SimConfig& c, std::string_view v) {
                       const auto kind = parse_strategy(v);
                       if (!kind) throw ConfigError("unknown strategy '" + std::string(v) + "'");
                       c.strategy = *kind;
                     },
                     [](const SimConfig& c) { return std::string(to_string(c.strategy)); }};
    f["p"] = real(&SimConfig::p, "p");
    f["psi_ul"] = {[](SimConfig& c, std::string_view v) { c.psi_ul = parse_int<int>("psi_ul", v); },
                   [](const SimConfig& c) { return std::to_string(c.psi_ul); }};
    f["psi_ll"] = {[](SimConfig& c, std::string_view v) { c.psi_ll = parse_int<int>("psi_ll", v); },
                   [](const SimConfig& c) { return std::to_string(c.psi_ll); }};
    f["psi_init"] = {[](SimConfig& c, std::string_view v) {
                       if (v == "lower") {
                         c.psi_init.reset();
                       } else {
                         c.psi_init = parse_int<int>("psi_init", v);
                       }
                     },
                     [](const SimConfig& c) { return c.psi_init ? std::to_string(*c.psi_init) : std::string("lower"); }};
    f["p_sleep_w"] = power(&PowerParams::p_sleep, "p_sleep_w");
    f["p_idle_w"] = power(&PowerParams::p_idle, "p_idle_w");
    f["load_factor"] = power(&PowerParams::load_factor, "load_factor");
    f["p_rb_tx_w"] = power(&PowerParams::p_rb_tx, "p_rb_tx_w");
    f["noise_temperature_k"] = real(&SimConfig::noise_temperature_k, "noise_temperature_k");
    f["shadowing_sigma_db"] = {
        [](SimConfig& c, std::string_view v) { c.channel.shadowing_sigma_db = parse_double("shadowing_sigma_db", v); },
        [](const SimConfig& c) { return format_double(c.channel.shadowing_sigma_db); }};
    f["shadowing_site_correlation"] = {
        [](SimConfig& c, std::string_view v) {
          c.channel.site_correlation = parse_double("shadowing_site_correlation", v);
        },
        [](const SimConfig& c) { return format_double(c.channel.site_correlation); }};
    f["fading"] = {[](SimConfig& c, std::string_view v) {
                     if (v == "per_subcarrier") {
                       c.channel.fading = FadingMode::per_subcarrier;
                     } else if (v == "per_resource_block") {
                       c.channel.fading = FadingMode::per_resource_block;
                     } else {
                       throw ConfigError("unknown fading mode '" + std::string(v) + "'");
                     }
                   },
                   [](const SimConfig& c) {
                     return std::string(c.channel.fading == FadingMode::per_subcarrier ? "per_subcarrier"
                                                                                       : "per_resource_block");
                   }};
    f["overload_policy"] = {[](SimConfig& c, std::string_view v) {
                              if (v == "keep_partial") {
                                c.overload = OverloadPolicy::keep_partial;
                              } else if (v == "release") {
                                c.overload = OverloadPolicy::release;
                              } else {
                                throw ConfigError("unknown overload policy '" + std::string(v) + "'");
                              }
                            },
                            [](const SimConfig& c) {
                              return std::string(c.overload == OverloadPolicy::release ? "release" : "keep_partial");
                            }};
    f["frames"] = size_field(&SimConfig::frames, "frames");
    f["drops"] = size_field(&SimConfig::drops, "drops");
    f["warmup"] = size_field(&SimConfig::warmup, "warmup");
    f["seed"] = {[](SimConfig& c, std::string_view v) { c.seed = parse_int<std::uint64_t>("seed", v); },
                 [](const SimConfig& c) { return std::to_string(c.seed); }};
    return f;
  }();
  return table;
}

}  // namespace detail

/// Sets one key from its textual value. Unknown keys and malformed values
/// throw ConfigError; range checks happen in validate_config.
inline void apply_setting(SimConfig& config, std::string_view key, std::string_view value) {
  const auto& table = detail::fields();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  it->second.set(config, detail::trim(value));
}

inline void validate_config(const SimConfig& config) {
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

/// Parses `key = value` lines. Blank lines and `#` comments are ignored.
inline void apply_config_text(SimConfig& config, std::string_view text, std::string_view origin = "<config>") {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": expected 'key = value'");
    try {
      apply_setting(config, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

/// Resolves defaults <- file <- overrides, then validates.
inline SimConfig parse_config(const std::filesystem::path* file,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  SimConfig config;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("cannot read configuration file '" + file->string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    apply_config_text(config, buffer.str(), file->string());
  }
  for (const auto& [key, value] : overrides) apply_setting(config, key, value);
  validate_config(config);
  return config;
}

/// Canonical `key = value` rendering, sorted by key. Parsing it back yields
/// an identical configuration.
inline std::string to_config_text(const SimConfig& config) {
  std::string out;
  for (const auto& [key, field] : detail::fields()) out += key + " = " + field.get(config) + "\n";
  return out;
}

/// FNV-1a over the canonical text, as 16 hex digits.
inline std::string config_hash(const SimConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_config_text(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dtxsim
