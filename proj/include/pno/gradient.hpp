#ifndef PNO_GRADIENT_HPP
#define PNO_GRADIENT_HPP

#include <algorithm>
#include <cmath>
#include <limits>

#include "pno/grid.hpp"

namespace pno {

struct GradientField {
  ScalarField gx;  // d/dx, along width
  ScalarField gy;  // d/dy, along height
};

// Central differences with one-sided fallbacks at borders and next to
// non-finite cells; zero where no finite neighbor pair exists. The output is
// finite everywhere so it can be interpolated safely.
inline GradientField central_gradient(const ScalarField& f) {
  const int hgt = f.height, wid = f.width;
  const double h = f.cell_size;
  GradientField g{ScalarField(hgt, wid, FieldKind::kValue),
                  ScalarField(hgt, wid, FieldKind::kValue)};
  auto diff = [h](double fm, double f0, double fp) {
    const bool m = std::isfinite(fm), p = std::isfinite(fp);
    if (m && p) return (fp - fm) / (2.0 * h);
    if (std::isfinite(f0)) {
      if (p) return (fp - f0) / h;
      if (m) return (f0 - fm) / h;
    }
    return 0.0;
  };
  const double inf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < hgt; ++i) {
    for (int j = 0; j < wid; ++j) {
      const double f0 = f.at(i, j);
      const double fl = j > 0 ? f.at(i, j - 1) : inf;
      const double fr = j + 1 < wid ? f.at(i, j + 1) : inf;
      const double fu = i > 0 ? f.at(i - 1, j) : inf;
      const double fd = i + 1 < hgt ? f.at(i + 1, j) : inf;
      g.gx.at(i, j) = diff(fl, f0, fr);
      g.gy.at(i, j) = diff(fu, f0, fd);
    }
  }
  return g;
}

// Bilinear interpolation at physical point (x, y), clamped to the hull of
// cell centers. Non-finite corners with positive weight dominate the result.
inline double bilinear_sample(const ScalarField& f, double x, double y) {
  const double h = f.cell_size;
  const double fx = std::clamp(x / h - 0.5, 0.0, static_cast<double>(f.width - 1));
  const double fy = std::clamp(y / h - 0.5, 0.0, static_cast<double>(f.height - 1));
  const int j0 = std::min(static_cast<int>(fx), f.width - 2 >= 0 ? f.width - 2 : 0);
  const int i0 = std::min(static_cast<int>(fy), f.height - 2 >= 0 ? f.height - 2 : 0);
  const double tx = fx - j0, ty = fy - i0;
  const double w00 = (1 - tx) * (1 - ty), w01 = tx * (1 - ty);
  const double w10 = (1 - tx) * ty, w11 = tx * ty;
  const double c00 = f.at(i0, j0), c01 = f.at(i0, j0 + 1);
  const double c10 = f.at(i0 + 1, j0), c11 = f.at(i0 + 1, j0 + 1);
  double acc = 0.0;
  const double ws[4] = {w00, w01, w10, w11};
  const double cs[4] = {c00, c01, c10, c11};
  for (int k = 0; k < 4; ++k) {
    if (ws[k] == 0.0) continue;
    if (!std::isfinite(cs[k])) return cs[k];
    acc += ws[k] * cs[k];
  }
  return acc;
}

}  // namespace pno

#endif  // PNO_GRADIENT_HPP
