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
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "dtxsim/geometry.hpp"

namespace dtxsim {

inline constexpr double kBoltzmann = 1.380649e-23;  // J/K
inline constexpr double kMinLinkDistance = 35.0;     // m
inline constexpr double kShadowingSigmaDb = 8.0;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Macro-cell NLOS pathloss at 2 GHz: 128.1 + 37.6 log10(d / 1 km), with d
/// floored at 35 m.
inline double pathloss_db(double distance_m) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("pathloss distance must be positive");
  const double d = std::max(distance_m, kMinLinkDistance);
  return 128.1 + 37.6 * std::log10(d / 1000.0);
}

template <class Rng>
double sample_shadowing(Rng& rng, double sigma_db = kShadowingSigmaDb) {
  return std::normal_distribution<double>(0.0, sigma_db)(rng);
}

/// Thermal noise power k_B * T * B in watts.
inline double noise_power(double bandwidth_hz, double temperature_k) {
  if (!(bandwidth_hz > 0.0) || !(temperature_k > 0.0))
    throw std::invalid_argument("noise bandwidth and temperature must be positive");
  return kBoltzmann * temperature_k * bandwidth_hz;
}

/// How the small-scale fading factor varies over the resource grid of a drop.
enum class FadingMode {
  per_subcarrier,      // one draw per subcarrier, shared by all slots
  per_resource_block,  // one draw per (subcarrier, slot)
};

/// Linear link gains from every cell to every mobile, frozen for one drop.
/// Indexed gain(cell, global_mobile, n, t); when fading is per subcarrier the
/// slot index is ignored.
class LinkGainMap {
 public:
  LinkGainMap() = default;
  LinkGainMap(std::size_t cells, std::size_t mobiles, std::size_t subcarriers, std::size_t slot_blocks)
      : cells_(cells), mobiles_(mobiles), subcarriers_(subcarriers), slot_blocks_(slot_blocks),
        gain_(cells * mobiles * subcarriers * slot_blocks, 0.0) {}

  std::size_t num_cells() const { return cells_; }
  std::size_t num_mobiles() const { return mobiles_; }
  std::size_t num_subcarriers() const { return subcarriers_; }
  std::size_t slot_blocks() const { return slot_blocks_; }

  double operator()(std::size_t cell, std::size_t mobile, std::size_t n, std::size_t t = 0) const {
    return gain_[index(cell, mobile, n, t)];
  }
  double& operator()(std::size_t cell, std::size_t mobile, std::size_t n, std::size_t t = 0) {
    return gain_[index(cell, mobile, n, t)];
  }

  const std::vector<double>& raw() const { return gain_; }

 private:
  std::size_t index(std::size_t cell, std::size_t mobile, std::size_t n, std::size_t t) const {
    const std::size_t block = slot_blocks_ == 1 ? 0 : t;
    return ((cell * mobiles_ + mobile) * slot_blocks_ + block) * subcarriers_ + n;
  }

  std::size_t cells_{0};
  std::size_t mobiles_{0};
  std::size_t subcarriers_{0};
  std::size_t slot_blocks_{1};
  std::vector<double> gain_;
};

/// Large-scale and small-scale parameters of the link model.
struct ChannelParams {
  double shadowing_sigma_db{kShadowingSigmaDb};
  /// Correlation of one mobile's shadowing towards different sites. The
  /// per-link marginal stays N(0, sigma^2) for any value in [0, 1].
  double site_correlation{0.5};
  FadingMode fading{FadingMode::per_resource_block};
};

/// gain = 10^(-(PL + shadowing)/10) * fading, with fading a unit-mean
/// exponential draw. Shadowing is drawn once per (cell, mobile) link as
/// sqrt(rho) * a_mobile + sqrt(1 - rho) * b_link.
template <class Rng>
LinkGainMap build_link_gains(const NetworkLayout& layout, const MobileDrop& drop, std::size_t subcarriers,
                             std::size_t slots, const ChannelParams& params, Rng& rng) {
  if (!(params.site_correlation >= 0.0 && params.site_correlation <= 1.0))
    throw std::invalid_argument("shadowing site correlation must lie in [0, 1]");
  const std::size_t blocks = params.fading == FadingMode::per_resource_block ? slots : 1;
  LinkGainMap gains(layout.num_cells(), drop.num_mobiles(), subcarriers, blocks);
  std::exponential_distribution<double> rayleigh_power(1.0);

  const double common_weight = std::sqrt(params.site_correlation);
  const double link_weight = std::sqrt(1.0 - params.site_correlation);
  std::vector<double> common(drop.num_mobiles());
  for (double& a : common) a = sample_shadowing(rng, params.shadowing_sigma_db);

  for (std::size_t c = 0; c < layout.num_cells(); ++c) {
    for (std::size_t m = 0; m < drop.num_mobiles(); ++m) {
      const double d = distance(layout.cell_positions[c], drop.position(m));
      const double shadow = common_weight * common[m] + link_weight * sample_shadowing(rng, params.shadowing_sigma_db);
      const double large_scale = db_to_linear(-(pathloss_db(d) + shadow));
      for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t n = 0; n < subcarriers; ++n) gains(c, m, n, b) = large_scale * rayleigh_power(rng);
      }
    }
  }
  return gains;
}

/// active(cell, n, t) is true iff the cell transmits on resource block (n, t).
class TransmitPattern {
 public:
  TransmitPattern() = default;
  TransmitPattern(std::size_t cells, std::size_t subcarriers, std::size_t slots, bool value = false)
      : cells_(cells), subcarriers_(subcarriers), slots_(slots),
        active_(cells * subcarriers * slots, value ? 1 : 0) {}

  std::size_t num_cells() const { return cells_; }
  std::size_t num_subcarriers() const { return subcarriers_; }
  std::size_t num_slots() const { return slots_; }

  bool operator()(std::size_t cell, std::size_t n, std::size_t t) const { return active_[index(cell, n, t)] != 0; }
  void set(std::size_t cell, std::size_t n, std::size_t t, bool on) { active_[index(cell, n, t)] = on ? 1 : 0; }

 private:
  std::size_t index(std::size_t cell, std::size_t n, std::size_t t) const {
    return (cell * slots_ + t) * subcarriers_ + n;
  }

  std::size_t cells_{0};
  std::size_t subcarriers_{0};
  std::size_t slots_{0};
  std::vector<std::uint8_t> active_;
};

/// Linear SINR s[n][t][k] for the K mobiles of one cell over one frame.
class SinrTensor {
 public:
  SinrTensor() = default;
  SinrTensor(std::size_t subcarriers, std::size_t slots, std::size_t mobiles, double value = 0.0)
      : subcarriers_(subcarriers), slots_(slots), mobiles_(mobiles), s_(subcarriers * slots * mobiles, value) {}

  std::size_t num_subcarriers() const { return subcarriers_; }
  std::size_t num_slots() const { return slots_; }
  std::size_t num_mobiles() const { return mobiles_; }

  double operator()(std::size_t n, std::size_t t, std::size_t k) const { return s_[index(n, t, k)]; }
  double& operator()(std::size_t n, std::size_t t, std::size_t k) { return s_[index(n, t, k)]; }

  const std::vector<double>& raw() const { return s_; }
  friend bool operator==(const SinrTensor&, const SinrTensor&) = default;

 private:
  std::size_t index(std::size_t n, std::size_t t, std::size_t k) const { return (k * slots_ + t) * subcarriers_ + n; }

  std::size_t subcarriers_{0};
  std::size_t slots_{0};
  std::size_t mobiles_{0};
  std::vector<double> s_;
};

/// SINR tensor of one cell's mobiles. The desired term is evaluated on every
/// resource block whether or not the serving cell transmitted there; the
/// interference term sums over the other cells active on that block.
inline SinrTensor compute_cell_sinr(const LinkGainMap& gains, const MobileDrop& drop, const TransmitPattern& pattern,
                                    std::size_t cell, double p_rb, double n0) {
  if (!(p_rb > 0.0)) throw std::invalid_argument("transmit power per RB must be positive");
  const std::size_t N = pattern.num_subcarriers();
  const std::size_t T = pattern.num_slots();
  const std::size_t K = drop.mobiles_per_cell;
  SinrTensor out(N, T, K);
  std::vector<double> interference(N);
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t m = drop.global_index(cell, k);
    for (std::size_t t = 0; t < T; ++t) {
      std::fill(interference.begin(), interference.end(), 0.0);
      for (std::size_t other = 0; other < pattern.num_cells(); ++other) {
        if (other == cell) continue;
        for (std::size_t n = 0; n < N; ++n) {
          if (pattern(other, n, t)) interference[n] += p_rb * gains(other, m, n, t);
        }
      }
      for (std::size_t n = 0; n < N; ++n) out(n, t, k) = p_rb * gains(cell, m, n, t) / (n0 + interference[n]);
    }
  }
  return out;
}

inline std::vector<SinrTensor> compute_sinr(const LinkGainMap& gains, const MobileDrop& drop,
                                            const TransmitPattern& pattern, double p_rb, double n0) {
  std::vector<SinrTensor> out;
  out.reserve(pattern.num_cells());
  for (std::size_t c = 0; c < pattern.num_cells(); ++c) out.push_back(compute_cell_sinr(gains, drop, pattern, c, p_rb, n0));
  return out;
}

}  // namespace dtxsim
