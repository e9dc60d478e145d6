#ifndef PNO_PLANNER_HPP
#define PNO_PLANNER_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <queue>
#include <string>
#include <vector>

#include "pno/eikonal.hpp"
#include "pno/gradient.hpp"
#include "pno/model.hpp"

namespace pno {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline Point cell_center(const OccupancyGrid& g, int row, int col) {
  return {cell_center_x(g, col), cell_center_y(g, row)};
}

struct Path {
  std::vector<Point> waypoints;  // physical units
  double length = 0.0;           // sum of segment lengths
};

inline double waypoint_length(const std::vector<Point>& w) {
  double s = 0.0;
  for (std::size_t k = 1; k < w.size(); ++k) s += distance(w[k - 1], w[k]);
  return s;
}

struct PlanStats {
  std::size_t nodes_expanded = 0;
  double path_length = 0.0;
  double epsilon_estimate = 0.0;  // filled by the caller when an oracle exists
  double wall_time = 0.0;         // seconds; the only nondeterministic field
  bool success = false;
  std::string failure_reason;  // empty on success
};

// Cell-indexed heuristic. Shipped labels: euclidean, pno, pno-eroded,
// max-combined.
struct Heuristic {
  std::string label;
  std::function<double(int row, int col)> h;
};

inline Heuristic zero_heuristic() {
  return {"zero", [](int, int) { return 0.0; }};
}

inline Heuristic euclidean_heuristic(const OccupancyGrid& g, const GoalSpec& goal) {
  const Point t = cell_center(g, goal.row, goal.col);
  const double cs = g.cell_size;  // captured by value: heuristics outlive grids
  return {"euclidean", [cs, t](int r, int c) {
            return distance({(c + 0.5) * cs, (r + 0.5) * cs}, t);
          }};
}

namespace plandetail {

inline double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace plandetail

// ---------------------------------------------------------------------------
// A* on the same 8-connected lattice as dijkstra_value: axis moves cost
// cell_size, diagonals sqrt(2)*cell_size and need both orthogonal neighbors
// safe. Open-list ties on f break toward larger g, then smaller row-major
// index. Lazy reopening (stale entries skipped by g comparison) keeps the
// search correct when the heuristic is not consistent; only non-stale pops
// count as expansions.
// ---------------------------------------------------------------------------

inline Path astar(const OccupancyGrid& grid, const GoalSpec& start,
                  const GoalSpec& goal, const Heuristic& heur, PlanStats& stats,
                  int connectivity = 8) {
  validate_goal(grid, start);
  validate_goal(grid, goal);
  if (connectivity != 4 && connectivity != 8)
    throw ValidationError("astar: connectivity must be 4 or 8");
  const double t0 = plandetail::now_seconds();
  const int H = grid.height, W = grid.width;
  const double h = grid.cell_size;
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = static_cast<std::size_t>(H) * W;
  const std::size_t s = static_cast<std::size_t>(start.row) * W + start.col;
  const std::size_t t = static_cast<std::size_t>(goal.row) * W + goal.col;

  struct Entry {
    double f, g;
    std::size_t idx;
  };
  struct Worse {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.f != b.f) return a.f > b.f;
      if (a.g != b.g) return a.g < b.g;
      return a.idx > b.idx;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, Worse> open;
  std::vector<double> g(n, inf);
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> parent(n, kNone);

  g[s] = 0.0;
  open.push({heur.h(start.row, start.col), 0.0, s});
  stats = {};
  bool found = false;
  while (!open.empty()) {
    const Entry e = open.top();
    open.pop();
    if (e.g != g[e.idx]) continue;  // stale
    ++stats.nodes_expanded;
    if (e.idx == t) {
      found = true;
      break;
    }
    const int i = static_cast<int>(e.idx) / W, j = static_cast<int>(e.idx) % W;
    auto relax = [&](int ni, int nj, double cost) {
      if (!grid.in_bounds(ni, nj) || !grid.safe(ni, nj)) return;
      const std::size_t nidx = static_cast<std::size_t>(ni) * W + nj;
      const double cand = e.g + cost;
      if (cand < g[nidx]) {
        g[nidx] = cand;
        parent[nidx] = e.idx;
        open.push({cand + heur.h(ni, nj), cand, nidx});
      }
    };
    relax(i - 1, j, h);
    relax(i + 1, j, h);
    relax(i, j - 1, h);
    relax(i, j + 1, h);
    if (connectivity == 8) {
      for (int di : {-1, 1}) {
        for (int dj : {-1, 1}) {
          if (grid.in_bounds(i + di, j) && grid.safe(i + di, j) &&
              grid.in_bounds(i, j + dj) && grid.safe(i, j + dj))
            relax(i + di, j + dj, kSqrt2 * h);
        }
      }
    }
  }

  Path path;
  if (found) {
    std::vector<std::size_t> chain;
    for (std::size_t cur = t; cur != kNone; cur = parent[cur]) chain.push_back(cur);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it)
      path.waypoints.push_back(cell_center(grid, static_cast<int>(*it) / W,
                                           static_cast<int>(*it) % W));
    path.length = g[t];
    stats.success = true;
    stats.path_length = g[t];
  } else {
    stats.failure_reason = "no path";
  }
  stats.wall_time = plandetail::now_seconds() - t0;
  return path;
}

// ---------------------------------------------------------------------------
// Learned heuristic: h(x) = max(Euclidean, predicted value on the eroded
// map), with h(goal) forced to 0. Erosion enlarges the safe set, pushing the
// prediction toward optimism; the default layer count scales with the grid.
// ---------------------------------------------------------------------------

inline int default_erosion_layers(int height) {
  return static_cast<int>(std::lround(12.0 * height / 256.0));
}

inline Heuristic make_pno_heuristic(const PnoPipeline& model,
                                    const OccupancyGrid& grid, const GoalSpec& goal,
                                    int erosion_layers) {
  if (erosion_layers < 0)
    throw ValidationError("heuristic: erosion layers must be >= 0");
  const OccupancyGrid eroded =
      erosion_layers > 0 ? erode(grid, erosion_layers) : grid;
  ScalarField v = pipeline_value(model, eroded, goal);
  const Point t = cell_center(grid, goal.row, goal.col);
  const double cs = grid.cell_size;
  auto field = std::make_shared<ScalarField>(std::move(v));
  Heuristic out;
  out.label = erosion_layers > 0 ? "pno-eroded" : "pno";
  out.h = [field, t, cs, goal](int r, int c) {
    if (r == goal.row && c == goal.col) return 0.0;
    const double euclid = distance({(c + 0.5) * cs, (r + 0.5) * cs}, t);
    return std::max(euclid, field->at(r, c));
  };
  return out;
}

// ---------------------------------------------------------------------------
// Steepest-descent path extraction from a value field.
// ---------------------------------------------------------------------------

inline Path gradient_descent_plan(const ScalarField& value, Point start,
                                  double step, int max_iters, PlanStats& stats) {
  if (step <= 0.0) throw ValidationError("descent: step must be positive");
  const double h = value.cell_size;
  // obstacle tests look at the containing cell; interpolated values are inf
  // in the whole support of an obstacle cell, which would forbid legitimate
  // wall-hugging paths
  auto cell_value = [&](Point pt) {
    const int i =
        std::clamp(static_cast<int>(std::floor(pt.y / h)), 0, value.height - 1);
    const int j =
        std::clamp(static_cast<int>(std::floor(pt.x / h)), 0, value.width - 1);
    return value.at(i, j);
  };
  if (!std::isfinite(cell_value(start)))
    throw ValidationError("descent: start value not finite");
  const double t0 = plandetail::now_seconds();

  // the goal is the field's minimum (0 at the goal cell for value fields)
  int gi = 0, gj = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < value.height; ++i)
    for (int j = 0; j < value.width; ++j)
      if (value.at(i, j) < best) {
        best = value.at(i, j);
        gi = i;
        gj = j;
      }
  const Point goal{(gj + 0.5) * h, (gi + 0.5) * h};

  const GradientField grad = central_gradient(value);
  Path path;
  path.waypoints.push_back(start);
  Point x = start;
  stats = {};
  for (int it = 0; it < max_iters; ++it) {
    if (distance(x, goal) <= h) {
      // close the path so its length spans start to goal, not start to
      // wherever the last step happened to land inside the goal cell
      if (distance(x, goal) > 0.0) path.waypoints.push_back(goal);
      stats.success = true;
      break;
    }
    const double gx = bilinear_sample(grad.gx, x.x, x.y);
    const double gy = bilinear_sample(grad.gy, x.x, x.y);
    const double norm = std::hypot(gx, gy);
    if (norm < 1e-8) {
      stats.failure_reason = "vanishing gradient";
      break;
    }
    Point nxt{x.x - step * gx / norm, x.y - step * gy / norm};
    nxt.x = std::clamp(nxt.x, 0.0, value.width * h);
    nxt.y = std::clamp(nxt.y, 0.0, value.height * h);
    if (!std::isfinite(cell_value(nxt))) {
      stats.failure_reason = "entered obstacle";
      break;
    }
    x = nxt;
    path.waypoints.push_back(x);
  }
  if (!stats.success && stats.failure_reason.empty())
    stats.failure_reason = "max iterations";
  path.length = waypoint_length(path.waypoints);
  stats.path_length = path.length;
  stats.wall_time = plandetail::now_seconds() - t0;
  return path;
}

// Suboptimality against the exact lattice oracle for the same move set.
inline double epsilon_estimate(const Path& path, const OccupancyGrid& grid,
                               const GoalSpec& start, const GoalSpec& goal) {
  const ScalarField d = dijkstra_value(grid, goal);
  const double opt = d.at(start.row, start.col);
  if (!std::isfinite(opt)) throw ValidationError("epsilon: start unreachable");
  if (opt == 0.0) return 1.0;  // start == goal
  return path.length / opt;
}

}  // namespace pno

#endif  // PNO_PLANNER_HPP
