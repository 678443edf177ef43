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

#include <cstddef>
#include <stdexcept>

#include "dtxsim/scheduler.hpp"

namespace dtxsim {

struct PowerParams {
  double p_sleep{90.0};   // W, DTX slot
  double p_idle{200.0};   // W, non-DTX slot
  double load_factor{3.75};
  double p_rb_tx{0.8};    // W per resource block

  double rho_tx() const { return load_factor * p_rb_tx; }
};

struct PowerBreakdown {
  double total{0.0};
  double sleep_part{0.0};
  double tx_part{0.0};
  double idle_part{0.0};
  std::size_t t_s{0};
  double n_tx_avg{0.0};  // scheduled RBs per slot
};

/// P = P_S * T_S/T + rho_Tx * N_Tx + P_0 * (T - T_S)/T, with N_Tx the number
/// of scheduled resource blocks averaged over the T slots and
/// rho_Tx = load_factor * p_rb_tx.
inline PowerBreakdown total_power(const ScheduleMap& schedule, const PowerParams& params) {
  const std::size_t T = schedule.num_slots();
  if (T == 0) throw std::invalid_argument("schedule has no slots");
  const double slots = static_cast<double>(T);

  PowerBreakdown out;
  out.t_s = schedule.dtx_slots();
  out.n_tx_avg = static_cast<double>(schedule.scheduled_rb_count()) / slots;
  out.sleep_part = params.p_sleep * static_cast<double>(out.t_s) / slots;
  out.tx_part = params.load_factor * (params.p_rb_tx * out.n_tx_avg);
  out.idle_part = params.p_idle * static_cast<double>(T - out.t_s) / slots;
  out.total = out.sleep_part + out.tx_part + out.idle_part;
  return out;
}

}  // namespace dtxsim
