#ifndef PNO_GRID_HPP
#define PNO_GRID_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pno/rng.hpp"

namespace pno {

// Thrown for malformed inputs and violated preconditions (exit code 1 at the
// CLI); runtime failures use std::runtime_error (exit code 2).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Binary safe/obstacle map on a regular lattice. The physical domain is
// normalized so the longer side spans 1.0: cell_size = 1 / max(height, width).
// Cell (i, j) has its center at x = (j + 0.5) * cell_size (along width) and
// y = (i + 0.5) * cell_size (along height). cells is row-major, true = safe.
struct OccupancyGrid {
  int height = 0;
  int width = 0;
  double cell_size = 0.0;
  std::vector<std::uint8_t> cells;

  OccupancyGrid() = default;
  OccupancyGrid(int h, int w, bool safe = true)
      : height(h),
        width(w),
        cell_size(1.0 / std::max(h, w)),
        cells(static_cast<std::size_t>(h) * w, safe ? 1 : 0) {
    if (h < 2 || w < 2) throw ValidationError("grid dims must be >= 2");
  }

  bool in_bounds(int i, int j) const {
    return i >= 0 && i < height && j >= 0 && j < width;
  }
  bool safe(int i, int j) const {
    return cells[static_cast<std::size_t>(i) * width + j] != 0;
  }
  void set_safe(int i, int j, bool s) {
    cells[static_cast<std::size_t>(i) * width + j] = s ? 1 : 0;
  }
  std::size_t size() const { return cells.size(); }

  int safe_count() const {
    int n = 0;
    for (auto c : cells) n += (c != 0);
    return n;
  }

  bool operator==(const OccupancyGrid& o) const {
    return height == o.height && width == o.width && cells == o.cells;
  }
};

struct GoalSpec {
  int row = 0;
  int col = 0;
};

inline void validate_goal(const OccupancyGrid& g, const GoalSpec& goal) {
  if (!g.in_bounds(goal.row, goal.col))
    throw ValidationError("goal out of bounds");
  if (!g.safe(goal.row, goal.col)) throw ValidationError("goal cell unsafe");
}

enum class FieldKind {
  kCost,
  kReciprocalCost,
  kValue,
  kSdf,
  kIndicator,
  kHeuristic,
};

// Dense real field aligned to a grid. Row-major, same cell-center convention
// as OccupancyGrid.
struct ScalarField {
  int height = 0;
  int width = 0;
  double cell_size = 0.0;
  FieldKind kind = FieldKind::kValue;
  std::vector<double> values;

  ScalarField() = default;
  ScalarField(int h, int w, FieldKind k, double init = 0.0)
      : height(h),
        width(w),
        cell_size(1.0 / std::max(h, w)),
        kind(k),
        values(static_cast<std::size_t>(h) * w, init) {}

  double& at(int i, int j) {
    return values[static_cast<std::size_t>(i) * width + j];
  }
  double at(int i, int j) const {
    return values[static_cast<std::size_t>(i) * width + j];
  }
  std::size_t size() const { return values.size(); }
};

// Physical center of cell (i, j).
inline double cell_center_x(const OccupancyGrid& g, int j) {
  return (j + 0.5) * g.cell_size;
}
inline double cell_center_y(const OccupancyGrid& g, int i) {
  return (i + 0.5) * g.cell_size;
}

// ---------------------------------------------------------------------------
// MovingAI .map text format.
//
//   type octile
//   height <H>
//   width <W>
//   map
//   <H rows of W characters>
//
// '.' and 'G' are safe; '@', 'O', 'T', 'W' are obstacles.
// ---------------------------------------------------------------------------

inline OccupancyGrid load_movingai(std::istream& in) {
  auto read_line = [&in](std::string& line) {
    if (!std::getline(in, line)) throw ValidationError("movingai: truncated");
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };
  std::string line, word;
  read_line(line);
  {
    std::istringstream ss(line);
    if (!(ss >> word) || word != "type" || !(ss >> word))
      throw ValidationError("movingai: expected 'type <word>' header");
  }
  long h = 0, w = 0;
  read_line(line);
  {
    std::istringstream ss(line);
    if (!(ss >> word) || word != "height" || !(ss >> h) || h < 2)
      throw ValidationError("movingai: expected 'height <H>'");
  }
  read_line(line);
  {
    std::istringstream ss(line);
    if (!(ss >> word) || word != "width" || !(ss >> w) || w < 2)
      throw ValidationError("movingai: expected 'width <W>'");
  }
  read_line(line);
  if (line != "map") throw ValidationError("movingai: expected 'map' line");

  OccupancyGrid grid(static_cast<int>(h), static_cast<int>(w));
  for (int i = 0; i < grid.height; ++i) {
    read_line(line);
    if (static_cast<long>(line.size()) != w)
      throw ValidationError("movingai: row length mismatch at row " +
                            std::to_string(i));
    for (int j = 0; j < grid.width; ++j) {
      switch (line[static_cast<std::size_t>(j)]) {
        case '.':
        case 'G':
          grid.set_safe(i, j, true);
          break;
        case '@':
        case 'O':
        case 'T':
        case 'W':
          grid.set_safe(i, j, false);
          break;
        default:
          throw ValidationError(std::string("movingai: unknown cell char '") +
                                line[static_cast<std::size_t>(j)] + "'");
      }
    }
  }
  if (grid.safe_count() == 0) throw ValidationError("movingai: no safe cell");
  return grid;
}

inline void save_movingai(const OccupancyGrid& g, std::ostream& out) {
  out << "type octile\n"
      << "height " << g.height << "\n"
      << "width " << g.width << "\n"
      << "map\n";
  for (int i = 0; i < g.height; ++i) {
    for (int j = 0; j < g.width; ++j) out.put(g.safe(i, j) ? '.' : '@');
    out.put('\n');
  }
}

// ---------------------------------------------------------------------------
// Synthetic map generation: axis-aligned rectangular obstacles placed
// uniformly with a SplitMix64 stream. The designated cell (defaults to the
// grid center) is cleared after placement so at least one safe cell exists.
// ---------------------------------------------------------------------------

struct RandomMapParams {
  int count_min = 6;
  int count_max = 12;
  int size_min = 4;   // obstacle side, in cells
  int size_max = 16;
  int clear_row = -1;  // designated safe cell; -1 = grid center
  int clear_col = -1;
};

inline OccupancyGrid generate_random_map(std::uint64_t seed, int height,
                                         int width,
                                         const RandomMapParams& params) {
  if (params.count_min < 0 || params.count_max < params.count_min)
    throw ValidationError("obstacle count range empty");
  if (params.size_min < 1 || params.size_max < params.size_min)
    throw ValidationError("obstacle size range empty");
  if (params.size_max >= std::min(height, width))
    throw ValidationError("obstacle size must be smaller than grid");

  OccupancyGrid grid(height, width, /*safe=*/true);
  SplitMix64 rng(seed);
  const int count =
      static_cast<int>(rng.uniform_int(params.count_min, params.count_max));
  for (int k = 0; k < count; ++k) {
    const int oh =
        static_cast<int>(rng.uniform_int(params.size_min, params.size_max));
    const int ow =
        static_cast<int>(rng.uniform_int(params.size_min, params.size_max));
    const int top = static_cast<int>(rng.uniform_int(0, height - oh));
    const int left = static_cast<int>(rng.uniform_int(0, width - ow));
    for (int i = top; i < top + oh; ++i)
      for (int j = left; j < left + ow; ++j) grid.set_safe(i, j, false);
  }
  const int cr = params.clear_row < 0 ? height / 2 : params.clear_row;
  const int cc = params.clear_col < 0 ? width / 2 : params.clear_col;
  if (!grid.in_bounds(cr, cc))
    throw ValidationError("designated clear cell out of bounds");
  grid.set_safe(cr, cc, true);
  return grid;
}

// ---------------------------------------------------------------------------
// Morphological erosion of the obstacle set, 8-connected. An obstacle cell
// survives one iteration iff all 8 neighbors are obstacles, with off-grid
// treated as safe so map borders erode. The safe set only grows.
// ---------------------------------------------------------------------------

inline OccupancyGrid erode(const OccupancyGrid& grid, int layers) {
  if (layers < 0) throw ValidationError("erosion layers must be >= 0");
  OccupancyGrid cur = grid;
  for (int iter = 0; iter < layers; ++iter) {
    OccupancyGrid next = cur;
    bool changed = false;
    for (int i = 0; i < cur.height; ++i) {
      for (int j = 0; j < cur.width; ++j) {
        if (cur.safe(i, j)) continue;
        bool interior = true;
        for (int di = -1; di <= 1 && interior; ++di) {
          for (int dj = -1; dj <= 1; ++dj) {
            if (di == 0 && dj == 0) continue;
            const int ni = i + di, nj = j + dj;
            // off-grid counts as safe
            if (!cur.in_bounds(ni, nj) || cur.safe(ni, nj)) {
              interior = false;
              break;
            }
          }
        }
        if (!interior) {
          next.set_safe(i, j, true);
          changed = true;
        }
      }
    }
    cur = std::move(next);
    if (!changed) break;  // fixed point; further iterations are identity
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Resampling by block averaging of the {0,1} occupancy image (1 = obstacle
// for the purpose of the average), thresholded at 0.5 with ties resolving to
// obstacle. Each target cell averages the source area it covers, which
// reduces to plain block averaging for integer ratios.
// ---------------------------------------------------------------------------

inline OccupancyGrid resample_average(const OccupancyGrid& grid,
                                      int new_height, int new_width) {
  if (new_height < 2 || new_width < 2)
    throw ValidationError("resample dims must be >= 2");
  OccupancyGrid out(new_height, new_width);
  const double sy = static_cast<double>(grid.height) / new_height;
  const double sx = static_cast<double>(grid.width) / new_width;
  for (int i = 0; i < new_height; ++i) {
    const double y0 = i * sy, y1 = (i + 1) * sy;
    const int iy0 = static_cast<int>(std::floor(y0));
    const int iy1 = std::min(grid.height, static_cast<int>(std::ceil(y1)));
    for (int j = 0; j < new_width; ++j) {
      const double x0 = j * sx, x1 = (j + 1) * sx;
      const int ix0 = static_cast<int>(std::floor(x0));
      const int ix1 = std::min(grid.width, static_cast<int>(std::ceil(x1)));
      double occ = 0.0, area = 0.0;
      for (int y = iy0; y < iy1; ++y) {
        const double wy =
            std::min(y1, static_cast<double>(y + 1)) - std::max(y0, static_cast<double>(y));
        for (int x = ix0; x < ix1; ++x) {
          const double wx = std::min(x1, static_cast<double>(x + 1)) -
                            std::max(x0, static_cast<double>(x));
          const double w = wy * wx;
          area += w;
          if (!grid.safe(y, x)) occ += w;
        }
      }
      // tie (average exactly 0.5) resolves to obstacle
      out.set_safe(i, j, occ / area < 0.5);
    }
  }
  return out;
}

// Reciprocal-cost channel: 1 on safe cells, 0 on obstacles.
inline ScalarField occupancy_channel(const OccupancyGrid& grid) {
  ScalarField f(grid.height, grid.width, FieldKind::kReciprocalCost);
  for (int i = 0; i < grid.height; ++i)
    for (int j = 0; j < grid.width; ++j) f.at(i, j) = grid.safe(i, j) ? 1.0 : 0.0;
  return f;
}

}  // namespace pno

#endif  // PNO_GRID_HPP
