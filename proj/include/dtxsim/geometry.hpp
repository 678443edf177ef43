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
#include <random>
#include <stdexcept>
#include <vector>

namespace dtxsim {

struct Point2 {
  double x{0.0};
  double y{0.0};

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Hexagonal multi-cell layout. Cells are flat-topped hexagons with
/// circumradius isd/sqrt(3), so neighboring centers are exactly `isd` apart.
struct NetworkLayout {
  std::vector<Point2> cell_positions;
  double intersite_distance{0.0};
  std::size_t center_cell_index{0};

  std::size_t num_cells() const { return cell_positions.size(); }
  double cell_radius() const { return intersite_distance / std::sqrt(3.0); }
};

/// Mobile positions, grouped by serving cell. Mobile `k` of cell `c` has the
/// global index `c * mobiles_per_cell + k`.
struct MobileDrop {
  std::vector<std::vector<Point2>> positions;
  std::vector<std::size_t> serving_cell;
  std::size_t mobiles_per_cell{0};

  std::size_t num_mobiles() const { return serving_cell.size(); }
  std::size_t global_index(std::size_t cell, std::size_t k) const { return cell * mobiles_per_cell + k; }
  Point2 position(std::size_t global) const {
    return positions[global / mobiles_per_cell][global % mobiles_per_cell];
  }
};

constexpr std::size_t hex_cell_count(std::size_t tiers) { return 1 + 3 * tiers * (tiers + 1); }

/// Cell centers on a hexagonal lattice, ring by ring outward from the origin.
/// Cell 0 sits at the origin.
inline NetworkLayout build_hex_layout(std::size_t tiers, double isd) {
  if (!(isd > 0.0)) throw std::invalid_argument("intersite distance must be positive");

  NetworkLayout layout;
  layout.intersite_distance = isd;
  layout.center_cell_index = 0;
  layout.cell_positions.reserve(hex_cell_count(tiers));

  // Axial coordinates for a flat-topped lattice with circumradius R:
  //   x = 1.5 R q,  y = sqrt(3) R (r + q/2)
  const double radius = isd / std::sqrt(3.0);
  auto to_point = [radius](int q, int r) {
    return Point2{1.5 * radius * q, std::sqrt(3.0) * radius * (r + 0.5 * q)};
  };

  layout.cell_positions.push_back({0.0, 0.0});
  static constexpr int kDirs[6][2] = {{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}};
  for (int ring = 1; ring <= static_cast<int>(tiers); ++ring) {
    // Start at direction 4 scaled by ring, then walk each of the six sides.
    int q = kDirs[4][0] * ring;
    int r = kDirs[4][1] * ring;
    for (const auto& dir : kDirs) {
      for (int step = 0; step < ring; ++step) {
        layout.cell_positions.push_back(to_point(q, r));
        q += dir[0];
        r += dir[1];
      }
    }
  }
  return layout;
}

/// True iff `p` lies inside (or on the border of) the flat-topped hexagon with
/// the given center and circumradius.
inline bool point_in_hexagon(Point2 p, Point2 center, double radius) {
  const double dx = std::abs(p.x - center.x);
  const double dy = std::abs(p.y - center.y);
  const double s3 = std::sqrt(3.0);
  const double eps = 1e-9 * radius;
  return dy <= 0.5 * s3 * radius + eps && s3 * dx + dy <= s3 * radius + eps;
}

/// Draws one point uniformly inside a hexagon by rejection from the enclosing
/// square [-R, R]^2. Acceptance ratio is 3*sqrt(3)/8.
template <class Rng>
Point2 sample_in_hexagon(Point2 center, double radius, Rng& rng) {
  std::uniform_real_distribution<double> coord(-radius, radius);
  for (;;) {
    const Point2 candidate{center.x + coord(rng), center.y + coord(rng)};
    if (point_in_hexagon(candidate, center, radius)) return candidate;
  }
}

template <class Rng>
MobileDrop drop_mobiles(const NetworkLayout& layout, std::size_t k_per_cell, Rng& rng) {
  if (k_per_cell == 0) throw std::invalid_argument("need at least one mobile per cell");

  MobileDrop drop;
  drop.mobiles_per_cell = k_per_cell;
  drop.positions.resize(layout.num_cells());
  drop.serving_cell.reserve(layout.num_cells() * k_per_cell);
  const double radius = layout.cell_radius();
  for (std::size_t c = 0; c < layout.num_cells(); ++c) {
    drop.positions[c].reserve(k_per_cell);
    for (std::size_t k = 0; k < k_per_cell; ++k) {
      drop.positions[c].push_back(sample_in_hexagon(layout.cell_positions[c], radius, rng));
      drop.serving_cell.push_back(c);
    }
  }
  return drop;
}

}  // namespace dtxsim
