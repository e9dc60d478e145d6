#ifndef PNO_EIKONAL_HPP
#define PNO_EIKONAL_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "pno/grid.hpp"

namespace pno {

constexpr double kObstacleValue = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = 1.4142135623730951;

struct SolverConfig {
  int connectivity = 8;  // Dijkstra lattice: 4 or 8
  double obstacle_value = kObstacleValue;
};

namespace detail {

struct HeapEntry {
  double value;
  std::int64_t index;
  bool operator>(const HeapEntry& o) const {
    if (value != o.value) return value > o.value;
    return index > o.index;  // deterministic pop order on value ties
  }
};

using MinHeap =
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>>;

// First-order upwind quadratic update at spacing h with right-hand side c:
// solve (V-a)+^2 + (V-b)+^2 = (h c)^2 from the two axis minima, falling back
// to the one-axis solution when the two-axis discriminant is negative.
inline double upwind_update(double a, double b, double h, double c) {
  const double rhs = h * c;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  if (!std::isfinite(hi)) return lo + rhs;
  const double disc = 2.0 * rhs * rhs - (a - b) * (a - b);
  if (disc < 0.0) return lo + rhs;
  const double v = 0.5 * (a + b + std::sqrt(disc));
  if (v < hi) return lo + rhs;  // not upwind in both axes
  return v;
}

// Fast marching with unit-speed-times-cost RHS restricted to the cells where
// domain[i] != 0. Seeds carry initial TRIAL values. cost == nullptr means
// c = 1 everywhere.
inline std::vector<double> fast_march(const OccupancyGrid& grid,
                                      const std::vector<std::uint8_t>& domain,
                                      const std::vector<std::pair<std::int64_t, double>>& seeds,
                                      const ScalarField* cost = nullptr) {
  const int H = grid.height, W = grid.width;
  const std::int64_t N = static_cast<std::int64_t>(H) * W;
  const double h = grid.cell_size;
  std::vector<double> value(N, kObstacleValue);
  std::vector<std::uint8_t> known(N, 0);
  MinHeap heap;
  for (auto [idx, v] : seeds) {
    if (v < value[idx]) {
      value[idx] = v;
      heap.push({v, idx});
    }
  }
  auto axis_min = [&](std::int64_t i, std::int64_t j, int di, int dj) {
    double m = kObstacleValue;
    for (int s = -1; s <= 1; s += 2) {
      const std::int64_t ni = i + s * di, nj = j + s * dj;
      if (ni < 0 || ni >= H || nj < 0 || nj >= W) continue;
      const std::int64_t nidx = ni * W + nj;
      if (domain[nidx] && known[nidx]) m = std::min(m, value[nidx]);
    }
    return m;
  };
  while (!heap.empty()) {
    const auto [v, idx] = heap.top();
    heap.pop();
    if (known[idx] || v > value[idx]) continue;
    known[idx] = 1;
    const std::int64_t i = idx / W, j = idx % W;
    static constexpr int kDi[4] = {-1, 1, 0, 0};
    static constexpr int kDj[4] = {0, 0, -1, 1};
    for (int d = 0; d < 4; ++d) {
      const std::int64_t ni = i + kDi[d], nj = j + kDj[d];
      if (ni < 0 || ni >= H || nj < 0 || nj >= W) continue;
      const std::int64_t nidx = ni * W + nj;
      if (!domain[nidx] || known[nidx]) continue;
      const double a = axis_min(ni, nj, 0, 1);
      const double b = axis_min(ni, nj, 1, 0);
      const double c = cost ? cost->values[static_cast<std::size_t>(nidx)] : 1.0;
      const double cand = upwind_update(a, b, h, c);
      if (cand < value[nidx]) {
        value[nidx] = cand;
        heap.push({cand, nidx});
      }
    }
  }
  return value;
}

}  // namespace detail

// Minimum-time value function ||grad V|| = c with V(goal) = 0, first-order
// upwind fast marching on the 4-neighbor stencil. Obstacle and unreachable
// cells carry +inf. `cost` optionally supplies a pointwise positive RHS for
// the comparison-principle harness; by default c = 1 on the safe set.
inline ScalarField fmm_value(const OccupancyGrid& grid, const GoalSpec& goal,
                             const ScalarField* cost = nullptr) {
  validate_goal(grid, goal);
  if (cost && (cost->height != grid.height || cost->width != grid.width))
    throw ValidationError("fmm_value: cost shape mismatch");
  const std::int64_t goal_idx =
      static_cast<std::int64_t>(goal.row) * grid.width + goal.col;
  std::vector<double> v =
      detail::fast_march(grid, grid.cells, {{goal_idx, 0.0}}, cost);
  ScalarField out(grid.height, grid.width, FieldKind::kValue);
  out.values = std::move(v);
  return out;
}

// Signed distance to the safe/obstacle interface. The zero level set lies on
// shared edges between safe and obstacle cells; seeds start half a cell from
// the interface and two unit-speed marches cover the safe (positive) and
// obstacle (negative) sides. With no obstacles the field is the exact
// distance from each cell center to the domain border.
inline ScalarField fmm_sdf(const OccupancyGrid& grid) {
  const int H = grid.height, W = grid.width;
  const double h = grid.cell_size;
  ScalarField out(H, W, FieldKind::kSdf);

  if (grid.safe_count() == static_cast<int>(grid.size())) {
    for (int i = 0; i < H; ++i) {
      const double cy = (i + 0.5) * h;
      for (int j = 0; j < W; ++j) {
        const double cx = (j + 0.5) * h;
        out.at(i, j) = std::min(std::min(cx, W * h - cx), std::min(cy, H * h - cy));
      }
    }
    return out;
  }

  std::vector<std::uint8_t> safe_dom(grid.cells);
  std::vector<std::uint8_t> obst_dom(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) obst_dom[k] = grid.cells[k] ? 0 : 1;

  std::vector<std::pair<std::int64_t, double>> safe_seeds, obst_seeds;
  static constexpr int kDi[4] = {-1, 1, 0, 0};
  static constexpr int kDj[4] = {0, 0, -1, 1};
  for (int i = 0; i < H; ++i) {
    for (int j = 0; j < W; ++j) {
      bool at_interface = false;
      for (int d = 0; d < 4 && !at_interface; ++d) {
        const int ni = i + kDi[d], nj = j + kDj[d];
        if (grid.in_bounds(ni, nj) && grid.safe(ni, nj) != grid.safe(i, j))
          at_interface = true;
      }
      if (at_interface) {
        const std::int64_t idx = static_cast<std::int64_t>(i) * W + j;
        (grid.safe(i, j) ? safe_seeds : obst_seeds).push_back({idx, 0.5 * h});
      }
    }
  }
  const std::vector<double> pos = detail::fast_march(grid, safe_dom, safe_seeds);
  const std::vector<double> neg = detail::fast_march(grid, obst_dom, obst_seeds);
  for (std::size_t k = 0; k < grid.size(); ++k)
    out.values[k] = grid.cells[k] ? pos[k] : -neg[k];
  return out;
}

// Exhaustive oracle for fmm_sdf: exact minimum distance from each cell center
// to the set of interface edge midpoints, signed by occupancy. O(N * edges).
inline ScalarField brute_force_sdf(const OccupancyGrid& grid) {
  const int H = grid.height, W = grid.width;
  const double h = grid.cell_size;
  ScalarField out(H, W, FieldKind::kSdf);

  if (grid.safe_count() == static_cast<int>(grid.size())) {
    for (int i = 0; i < H; ++i) {
      const double cy = (i + 0.5) * h;
      for (int j = 0; j < W; ++j) {
        const double cx = (j + 0.5) * h;
        out.at(i, j) = std::min(std::min(cx, W * h - cx), std::min(cy, H * h - cy));
      }
    }
    return out;
  }

  std::vector<std::pair<double, double>> midpoints;  // (x, y)
  for (int i = 0; i < H; ++i) {
    for (int j = 0; j < W; ++j) {
      // right and bottom shared edges, visited once each
      if (j + 1 < W && grid.safe(i, j) != grid.safe(i, j + 1))
        midpoints.push_back({(j + 1) * h, (i + 0.5) * h});
      if (i + 1 < H && grid.safe(i, j) != grid.safe(i + 1, j))
        midpoints.push_back({(j + 0.5) * h, (i + 1) * h});
    }
  }
  for (int i = 0; i < H; ++i) {
    const double cy = (i + 0.5) * h;
    for (int j = 0; j < W; ++j) {
      const double cx = (j + 0.5) * h;
      double best = std::numeric_limits<double>::infinity();
      for (auto [mx, my] : midpoints)
        best = std::min(best, std::hypot(cx - mx, cy - my));
      out.at(i, j) = grid.safe(i, j) ? best : -best;
    }
  }
  return out;
}

// Exact shortest-path cost-to-go on the lattice graph: axis moves cost
// cell_size, diagonal moves cost sqrt(2)*cell_size and are forbidden through
// obstacle corners (both orthogonal neighbors must be safe). Values are
// independent of heap tie-breaking.
inline ScalarField dijkstra_value(const OccupancyGrid& grid, const GoalSpec& goal,
                                  const SolverConfig& config = {}) {
  validate_goal(grid, goal);
  if (config.connectivity != 4 && config.connectivity != 8)
    throw ValidationError("dijkstra: connectivity must be 4 or 8");
  const int H = grid.height, W = grid.width;
  const double h = grid.cell_size;
  ScalarField out(H, W, FieldKind::kValue, config.obstacle_value);
  detail::MinHeap heap;
  const std::int64_t goal_idx =
      static_cast<std::int64_t>(goal.row) * W + goal.col;
  out.values[goal_idx] = 0.0;
  heap.push({0.0, goal_idx});
  std::vector<std::uint8_t> done(grid.size(), 0);
  while (!heap.empty()) {
    const auto [v, idx] = heap.top();
    heap.pop();
    if (done[idx] || v > out.values[idx]) continue;
    done[idx] = 1;
    const int i = static_cast<int>(idx / W), j = static_cast<int>(idx % W);
    auto relax = [&](int ni, int nj, double w) {
      if (ni < 0 || ni >= H || nj < 0 || nj >= W) return;
      if (!grid.safe(ni, nj)) return;
      const std::int64_t nidx = static_cast<std::int64_t>(ni) * W + nj;
      const double cand = v + w;
      if (cand < out.values[nidx]) {
        out.values[nidx] = cand;
        heap.push({cand, nidx});
      }
    };
    relax(i - 1, j, h);
    relax(i + 1, j, h);
    relax(i, j - 1, h);
    relax(i, j + 1, h);
    if (config.connectivity == 8) {
      for (int di = -1; di <= 1; di += 2) {
        for (int dj = -1; dj <= 1; dj += 2) {
          if (grid.in_bounds(i + di, j) && grid.safe(i + di, j) &&
              grid.in_bounds(i, j + dj) && grid.safe(i, j + dj))
            relax(i + di, j + dj, kSqrt2 * h);
        }
      }
    }
  }
  return out;
}

// Closed-form lattice metric on an empty 8-connected grid.
inline double octile_distance(int r0, int c0, int r1, int c1, double cell_size) {
  const int dr = std::abs(r0 - r1), dc = std::abs(c0 - c1);
  return (std::max(dr, dc) + (kSqrt2 - 1.0) * std::min(dr, dc)) * cell_size;
}

}  // namespace pno

#endif  // PNO_EIKONAL_HPP
