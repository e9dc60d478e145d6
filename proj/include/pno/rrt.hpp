#ifndef PNO_RRT_HPP
#define PNO_RRT_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "pno/planner.hpp"
#include "pno/rng.hpp"

namespace pno {

struct RrtParams {
  double step = 0.0;       // 0 -> 4 * cell_size
  double goal_bias = 0.05;
  int max_samples = 20000;
  std::uint64_t seed = 1;
  double gamma = 0.0;  // rewire radius scale; 0 -> 1.5 * domain diagonal
};

// Supercover segment test: every cell the segment passes through must be
// safe, including both side cells at exact corner crossings, so a segment
// can never slip diagonally between two touching obstacles.
inline bool segment_collision_free(const OccupancyGrid& g, Point a, Point b) {
  const double h = g.cell_size;
  const double inf = std::numeric_limits<double>::infinity();
  auto cell_row = [&](double y) {
    return std::clamp(static_cast<int>(std::floor(y / h)), 0, g.height - 1);
  };
  auto cell_col = [&](double x) {
    return std::clamp(static_cast<int>(std::floor(x / h)), 0, g.width - 1);
  };
  int i = cell_row(a.y), j = cell_col(a.x);
  const int i1 = cell_row(b.y), j1 = cell_col(b.x);
  if (!g.safe(i, j)) return false;
  const double dx = b.x - a.x, dy = b.y - a.y;
  const int sj = dx > 0 ? 1 : -1, si = dy > 0 ? 1 : -1;
  double tmx = dx != 0 ? ((j + (dx > 0 ? 1 : 0)) * h - a.x) / dx : inf;
  double tmy = dy != 0 ? ((i + (dy > 0 ? 1 : 0)) * h - a.y) / dy : inf;
  const double tdx = dx != 0 ? h / std::abs(dx) : inf;
  const double tdy = dy != 0 ? h / std::abs(dy) : inf;
  int guard = 2 * (g.height + g.width) + 4;
  while ((i != i1 || j != j1) && guard-- > 0) {
    if (tmx < tmy) {
      j += sj;
      tmx += tdx;
    } else if (tmy < tmx) {
      i += si;
      tmy += tdy;
    } else {
      // exact corner crossing touches both side cells
      if (g.in_bounds(i, j + sj) && !g.safe(i, j + sj)) return false;
      if (g.in_bounds(i + si, j) && !g.safe(i + si, j)) return false;
      i += si;
      j += sj;
      tmx += tdx;
      tmy += tdy;
    }
    if (!g.in_bounds(i, j) || !g.safe(i, j)) return false;
  }
  return i == i1 && j == j1;
}

namespace rrtdetail {

struct Tree {
  std::vector<Point> pts;
  std::vector<int> parent;
  std::vector<double> cost;  // physical length from the root
  std::vector<std::vector<int>> children;

  void add(Point p, int par, double c) {
    pts.push_back(p);
    parent.push_back(par);
    cost.push_back(c);
    children.emplace_back();
    if (par >= 0) children[static_cast<std::size_t>(par)].push_back(
        static_cast<int>(pts.size()) - 1);
  }

  int nearest(Point q) const {
    int best = 0;
    double bd = distance(pts[0], q);
    for (std::size_t k = 1; k < pts.size(); ++k) {
      const double d = distance(pts[k], q);
      if (d < bd) {
        bd = d;
        best = static_cast<int>(k);
      }
    }
    return best;
  }

  // rewire bookkeeping: move `node` under `par` and push the cost change
  // down the subtree
  void reparent(int node, int par, double new_cost) {
    auto& sib = children[static_cast<std::size_t>(parent[static_cast<std::size_t>(node)])];
    for (std::size_t k = 0; k < sib.size(); ++k)
      if (sib[k] == node) {
        sib[k] = sib.back();
        sib.pop_back();
        break;
      }
    parent[static_cast<std::size_t>(node)] = par;
    children[static_cast<std::size_t>(par)].push_back(node);
    const double delta = new_cost - cost[static_cast<std::size_t>(node)];
    std::vector<int> stack{node};
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      cost[static_cast<std::size_t>(cur)] += delta;
      for (int ch : children[static_cast<std::size_t>(cur)]) stack.push_back(ch);
    }
  }

  Path backtrack(int node, Point tail) const {
    std::vector<Point> rev{tail};
    for (int cur = node; cur >= 0; cur = parent[static_cast<std::size_t>(cur)])
      rev.push_back(pts[static_cast<std::size_t>(cur)]);
    Path p;
    p.waypoints.assign(rev.rbegin(), rev.rend());
    p.length = waypoint_length(p.waypoints);
    return p;
  }
};

inline Point draw_sample(SplitMix64& rng, const OccupancyGrid& g, Point goal,
                         double bias) {
  const double h = g.cell_size;
  if (rng.uniform_double() < bias) return goal;
  return {rng.uniform_range(0.0, g.width * h), rng.uniform_range(0.0, g.height * h)};
}

inline Point steer(Point from, Point to, double step) {
  const double d = distance(from, to);
  if (d <= step || d == 0.0) return to;
  const double s = step / d;
  return {from.x + (to.x - from.x) * s, from.y + (to.y - from.y) * s};
}

}  // namespace rrtdetail

inline Path rrt(const OccupancyGrid& grid, const GoalSpec& start,
                const GoalSpec& goal, const RrtParams& params, PlanStats& stats) {
  validate_goal(grid, start);
  validate_goal(grid, goal);
  const double t0 = plandetail::now_seconds();
  const double step = params.step > 0 ? params.step : 4.0 * grid.cell_size;
  const Point s = cell_center(grid, start.row, start.col);
  const Point t = cell_center(grid, goal.row, goal.col);
  SplitMix64 rng(params.seed);
  rrtdetail::Tree tree;
  tree.add(s, -1, 0.0);
  stats = {};
  Path path;
  if (distance(s, t) <= step && segment_collision_free(grid, s, t)) {
    path = tree.backtrack(0, t);
    stats.success = true;
  }
  for (int it = 0; it < params.max_samples && !stats.success; ++it) {
    const Point q = rrtdetail::draw_sample(rng, grid, t, params.goal_bias);
    const int ni = tree.nearest(q);
    const Point from = tree.pts[static_cast<std::size_t>(ni)];
    const Point qn = rrtdetail::steer(from, q, step);
    if (distance(from, qn) == 0.0) continue;
    if (!segment_collision_free(grid, from, qn)) continue;
    tree.add(qn, ni, tree.cost[static_cast<std::size_t>(ni)] + distance(from, qn));
    const int idx = static_cast<int>(tree.pts.size()) - 1;
    if (distance(qn, t) <= step && segment_collision_free(grid, qn, t)) {
      path = tree.backtrack(idx, t);
      stats.success = true;
    }
  }
  stats.nodes_expanded = tree.pts.size();
  stats.path_length = path.length;
  if (!stats.success) stats.failure_reason = "sample budget exhausted";
  stats.wall_time = plandetail::now_seconds() - t0;
  return path;
}

// Anytime variant: keeps sampling after the first goal connection, choosing
// parents and rewiring inside the shrinking radius gamma * sqrt(log n / n),
// so the returned cost is non-increasing in the sample budget for a fixed
// seed.
inline Path rrt_star(const OccupancyGrid& grid, const GoalSpec& start,
                     const GoalSpec& goal, const RrtParams& params,
                     PlanStats& stats) {
  validate_goal(grid, start);
  validate_goal(grid, goal);
  const double t0 = plandetail::now_seconds();
  const double h = grid.cell_size;
  const double step = params.step > 0 ? params.step : 4.0 * h;
  const double diag = std::hypot(grid.width * h, grid.height * h);
  const double gamma = params.gamma > 0 ? params.gamma : 1.5 * diag;
  const Point s = cell_center(grid, start.row, start.col);
  const Point t = cell_center(grid, goal.row, goal.col);
  SplitMix64 rng(params.seed);
  rrtdetail::Tree tree;
  tree.add(s, -1, 0.0);
  std::vector<int> goal_candidates;
  if (distance(s, t) <= step && segment_collision_free(grid, s, t))
    goal_candidates.push_back(0);

  for (int it = 0; it < params.max_samples; ++it) {
    const Point q = rrtdetail::draw_sample(rng, grid, t, params.goal_bias);
    const int ni = tree.nearest(q);
    const Point from = tree.pts[static_cast<std::size_t>(ni)];
    const Point qn = rrtdetail::steer(from, q, step);
    if (distance(from, qn) == 0.0) continue;
    if (!segment_collision_free(grid, from, qn)) continue;

    const auto n = static_cast<double>(tree.pts.size());
    const double radius =
        std::min(step, gamma * std::sqrt(std::log(std::max(n, 2.0)) / n));

    // choose the cheapest collision-free parent inside the radius
    int par = ni;
    double par_cost = tree.cost[static_cast<std::size_t>(ni)] + distance(from, qn);
    std::vector<int> near;
    for (std::size_t k = 0; k < tree.pts.size(); ++k) {
      if (distance(tree.pts[k], qn) > radius) continue;
      near.push_back(static_cast<int>(k));
      const double c = tree.cost[k] + distance(tree.pts[k], qn);
      if (c < par_cost && segment_collision_free(grid, tree.pts[k], qn)) {
        par = static_cast<int>(k);
        par_cost = c;
      }
    }
    tree.add(qn, par, par_cost);
    const int idx = static_cast<int>(tree.pts.size()) - 1;

    // rewire neighbors through the new node when that shortens them
    for (int k : near) {
      const double cand = par_cost + distance(qn, tree.pts[static_cast<std::size_t>(k)]);
      if (cand < tree.cost[static_cast<std::size_t>(k)] &&
          segment_collision_free(grid, qn, tree.pts[static_cast<std::size_t>(k)]))
        tree.reparent(k, idx, cand);
    }

    if (distance(qn, t) <= step && segment_collision_free(grid, qn, t))
      goal_candidates.push_back(idx);
  }

  stats = {};
  stats.nodes_expanded = tree.pts.size();
  Path path;
  int best = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int c : goal_candidates) {
    const double total =
        tree.cost[static_cast<std::size_t>(c)] + distance(tree.pts[static_cast<std::size_t>(c)], t);
    if (total < best_cost) {
      best_cost = total;
      best = c;
    }
  }
  if (best >= 0) {
    path = tree.backtrack(best, t);
    stats.success = true;
    stats.path_length = path.length;
  } else {
    stats.failure_reason = "sample budget exhausted";
  }
  stats.wall_time = plandetail::now_seconds() - t0;
  return path;
}

}  // namespace pno

#endif  // PNO_RRT_HPP
