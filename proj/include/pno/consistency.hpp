#ifndef PNO_CONSISTENCY_HPP
#define PNO_CONSISTENCY_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "pno/planner.hpp"

namespace pno {

// Empirical verification of heuristic consistency. The reference metric
// V(x, y) is the exact 8-connected lattice distance, the same graph A* runs
// on, so the reported epsilon is the factor by which A* path costs can
// degrade. Everything is a max over sampled pairs: reports can understate
// the true supremum but never fabricate violations.
struct ConsistencyReport {
  // max |h(p) - V*(p)| over sampled points. This is a measured corpus max,
  // not a function-class supremum, hence "measured" in all emitted output.
  double eps_no_measured = 0.0;
  // 1 + 2 * eps_no_measured / (min sampled pair metric)
  double eps_lemma_bound = 1.0;
  // max over ordered sampled pairs of (h(x) - h(y)) / V(x, y); every sampled
  // point is also paired with the goal, which anchors the exact cost-to-go
  // oracle at exactly 1
  double eps_empirical = 0.0;
  bool bound_satisfied = true;  // eps_empirical <= eps_lemma_bound + 1e-6
  // ordered pairs with h(x) - h(y) > V(x, y) + 1e-6: plain triangle breaks
  // against the metric, before any operator-error slack
  int triangle_violations = 0;
  // fraction of goal-reachable safe cells with h > V* + 1e-6
  double admissibility_violation_rate = 0.0;
  int disconnected_skipped = 0;  // sampled pairs outside the goal component
  int pairs_evaluated = 0;       // ordered pairs that entered the statistics
};

inline ConsistencyReport measure_epsilon_consistency(const Heuristic& h,
                                                     const OccupancyGrid& grid,
                                                     const GoalSpec& goal,
                                                     int sample_pairs,
                                                     std::uint64_t seed) {
  validate_goal(grid, goal);
  if (sample_pairs <= 0)
    throw ValidationError("consistency: sample_pairs must be positive");

  std::vector<GoalSpec> safe;
  for (int i = 0; i < grid.height; ++i)
    for (int j = 0; j < grid.width; ++j)
      if (grid.safe(i, j)) safe.push_back({i, j});
  if (safe.size() < 2)
    throw ValidationError("consistency: need at least two safe cells");

  const ScalarField oracle = dijkstra_value(grid, goal);

  ConsistencyReport rep;
  struct PairEval {
    double hx, hy, v;
  };
  std::vector<PairEval> evals;
  std::vector<GoalSpec> points;  // endpoints of kept pairs, for eps_NO

  SplitMix64 rng(seed);
  const auto draw = [&] {
    return safe[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(safe.size()) - 1))];
  };
  for (int k = 0; k < sample_pairs; ++k) {
    const GoalSpec x = draw();
    GoalSpec y = draw();
    while (y.row == x.row && y.col == x.col) y = draw();
    // both endpoints must live in the goal's component, otherwise either the
    // pair metric or the cost-to-go oracle is undefined
    if (!std::isfinite(oracle.at(x.row, x.col)) ||
        !std::isfinite(oracle.at(y.row, y.col))) {
      ++rep.disconnected_skipped;
      continue;
    }
    const double v = dijkstra_value(grid, y).at(x.row, x.col);
    const double hx = h.h(x.row, x.col);
    const double hy = h.h(y.row, y.col);
    evals.push_back({hx, hy, v});
    evals.push_back({hy, hx, v});
    points.push_back(x);
    points.push_back(y);
    // goal-anchored pair: for the exact oracle its ratio is exactly 1, which
    // pins eps_empirical to 1 instead of leaving it below 1 by sampling luck
    if (x.row != goal.row || x.col != goal.col) {
      evals.push_back({hx, h.h(goal.row, goal.col), oracle.at(x.row, x.col)});
    }
  }
  if (evals.empty())
    throw ValidationError("consistency: no connected sample pairs");

  for (const GoalSpec& p : points) {
    const double err = std::abs(h.h(p.row, p.col) - oracle.at(p.row, p.col));
    if (err > rep.eps_no_measured) rep.eps_no_measured = err;
  }

  double min_v = std::numeric_limits<double>::infinity();
  double max_ratio = -std::numeric_limits<double>::infinity();
  for (const PairEval& e : evals) {
    if (e.v < min_v) min_v = e.v;
    const double ratio = (e.hx - e.hy) / e.v;
    if (ratio > max_ratio) max_ratio = ratio;
    if (e.hx - e.hy > e.v + 1e-6) ++rep.triangle_violations;
  }
  rep.pairs_evaluated = static_cast<int>(evals.size());
  rep.eps_empirical = max_ratio;
  rep.eps_lemma_bound = 1.0 + 2.0 * rep.eps_no_measured / min_v;
  rep.bound_satisfied = rep.eps_empirical <= rep.eps_lemma_bound + 1e-6;

  std::size_t reachable = 0, violating = 0;
  for (const GoalSpec& c : safe) {
    const double opt = oracle.at(c.row, c.col);
    if (!std::isfinite(opt)) continue;
    ++reachable;
    if (h.h(c.row, c.col) > opt + 1e-6) ++violating;
  }
  rep.admissibility_violation_rate =
      reachable == 0 ? 0.0
                     : static_cast<double>(violating) / static_cast<double>(reachable);
  return rep;
}

// One report per erosion level, measured on identical sample pairs (the
// sampler never consults the heuristic, so a shared seed shares the pairs).
struct ErosionConsistency {
  std::vector<int> layers;
  std::vector<ConsistencyReport> reports;
  // adjacent level pairs, in list order, where the more eroded level kept
  // its Lemma bound (resp. measured epsilon) at or below the less eroded one
  int adjacent_total = 0;
  int adjacent_bound_ordered = 0;
  int adjacent_eps_ordered = 0;
};

inline ErosionConsistency compare_erosion_consistency(
    const PnoPipeline& model, const OccupancyGrid& grid, const GoalSpec& goal,
    const std::vector<int>& layer_list, int sample_pairs, std::uint64_t seed) {
  if (layer_list.empty())
    throw ValidationError("consistency: layer list must be nonempty");
  ErosionConsistency out;
  out.layers = layer_list;
  for (int layers : layer_list) {
    const Heuristic h = make_pno_heuristic(model, grid, goal, layers);
    out.reports.push_back(
        measure_epsilon_consistency(h, grid, goal, sample_pairs, seed));
  }
  for (std::size_t i = 0; i + 1 < out.reports.size(); ++i) {
    ++out.adjacent_total;
    if (out.reports[i + 1].eps_lemma_bound <=
        out.reports[i].eps_lemma_bound + 1e-9)
      ++out.adjacent_bound_ordered;
    if (out.reports[i + 1].eps_empirical <= out.reports[i].eps_empirical + 1e-9)
      ++out.adjacent_eps_ordered;
  }
  return out;
}

// Architectural triangle inequality of the projection head over the shared
// feature field: f(F(x) - F(g)) <= f(F(x) - F(y)) + f(F(y) - F(g)).
struct TriangleReport {
  int samples = 0;
  int violations = 0;
  // max over triples of lhs - rhs; negative values report the worst margin
  double max_violation = -std::numeric_limits<double>::infinity();
};

inline TriangleReport check_triangle(const PnoPipeline& model,
                                     const OccupancyGrid& grid, int triples,
                                     std::uint64_t seed) {
  if (model.value.arch != ValueArch::kPno)
    throw ValidationError("triangle check needs the goal-differenced head");
  if (triples <= 0)
    throw ValidationError("triangle check: triples must be positive");

  const ScalarField sdf = sdf_forward(model.sdf, grid);
  const std::vector<double> chi = smoothed_indicator(sdf, model.value.beta);
  const CField chi_hat = rfft2(chi, grid.height, grid.width);
  const Tensor F = value_features(model.value, pno_inputs(grid, sdf), &chi, &chi_hat);
  const int C = static_cast<int>(F.dim(2));

  std::vector<GoalSpec> safe;
  for (int i = 0; i < grid.height; ++i)
    for (int j = 0; j < grid.width; ++j)
      if (grid.safe(i, j)) safe.push_back({i, j});
  if (safe.empty()) throw ValidationError("triangle check: no safe cells");

  const auto feat = [&](const GoalSpec& p) {
    return F.data.data() +
           (static_cast<std::size_t>(p.row) * grid.width + p.col) * C;
  };
  std::vector<double> u(static_cast<std::size_t>(C));
  const auto head_dist = [&](const GoalSpec& a, const GoalSpec& b) {
    const double* fa = feat(a);
    const double* fb = feat(b);
    for (int c = 0; c < C; ++c) u[static_cast<std::size_t>(c)] = fa[c] - fb[c];
    return head_scalar(model.value.head, u);
  };

  TriangleReport rep;
  rep.samples = triples;
  SplitMix64 rng(seed);
  const auto draw = [&] {
    return safe[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(safe.size()) - 1))];
  };
  for (int k = 0; k < triples; ++k) {
    const GoalSpec x = draw(), y = draw(), g = draw();
    const double lhs = head_dist(x, g);
    const double rhs = head_dist(x, y) + head_dist(y, g);
    const double slack = lhs - rhs;
    if (slack > rep.max_violation) rep.max_violation = slack;
    if (slack > 1e-6) ++rep.violations;
  }
  return rep;
}

namespace consdetail {
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace consdetail

inline std::string consistency_csv_header() {
  return "label,eps_no_measured,eps_lemma_bound,eps_empirical,bound_satisfied,"
         "triangle_violations,admissibility_violation_rate,"
         "disconnected_skipped,pairs_evaluated";
}

inline std::string consistency_csv_row(const std::string& label,
                                       const ConsistencyReport& r) {
  using consdetail::fmt;
  std::string row = label;
  row += ',' + fmt(r.eps_no_measured);
  row += ',' + fmt(r.eps_lemma_bound);
  row += ',' + fmt(r.eps_empirical);
  row += ',';
  row += r.bound_satisfied ? '1' : '0';
  row += ',' + std::to_string(r.triangle_violations);
  row += ',' + fmt(r.admissibility_violation_rate);
  row += ',' + std::to_string(r.disconnected_skipped);
  row += ',' + std::to_string(r.pairs_evaluated);
  return row;
}

inline std::string consistency_summary(const std::string& label,
                                       const ConsistencyReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%s: measured eps_NO %.4g, Lemma bound %.6g, empirical eps "
                "%.6g (%s), triangle breaks %d, inadmissible %.1f%%, "
                "skipped %d of %d",
                label.c_str(), r.eps_no_measured, r.eps_lemma_bound,
                r.eps_empirical, r.bound_satisfied ? "within bound" : "BOUND EXCEEDED",
                r.triangle_violations, 100.0 * r.admissibility_violation_rate,
                r.disconnected_skipped, r.pairs_evaluated);
  return buf;
}

}  // namespace pno

#endif  // PNO_CONSISTENCY_HPP
