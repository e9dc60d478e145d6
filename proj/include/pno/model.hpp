#ifndef PNO_MODEL_HPP
#define PNO_MODEL_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pno/eikonal.hpp"
#include "pno/fourier_layer.hpp"
#include "pno/grid.hpp"
#include "pno/nn.hpp"
#include "pno/tensor.hpp"

namespace pno {

// Smoothed safe-set indicator from a signed distance field:
// chi = 0.5 (1 + tanh(beta * d)). Values near 1 deep in the safe set, near 0
// inside obstacles, 1/2 on the interface.
inline std::vector<double> smoothed_indicator(const ScalarField& sdf, double beta) {
  std::vector<double> chi(sdf.values.size());
  for (std::size_t k = 0; k < chi.size(); ++k)
    chi[k] = 0.5 * (1.0 + std::tanh(beta * sdf.values[k]));
  return chi;
}

enum class ValueArch { kPno, kFno };

inline std::string arch_name(ValueArch a) {
  return a == ValueArch::kPno ? "pno" : "fno";
}

inline ValueArch arch_from_name(const std::string& s) {
  if (s == "pno") return ValueArch::kPno;
  if (s == "fno") return ValueArch::kFno;
  throw ValidationError("unknown arch: " + s);
}

struct OperatorConfig {
  int channels = 24;  // feature width d_c
  int layers = 4;     // spectral blocks
  int modes = 12;     // retained modes per axis
  int lift_hidden = 64;
  std::vector<int> head_hidden = {64, 64};  // projection head hidden dims
};

// Signed-distance surrogate: plain FNO from [occupancy, x, y] to the sdf.
struct SdfModel {
  OperatorConfig cfg;
  double cell_size_train = 0.0;
  Mlp lift;
  std::vector<FourierLayer> layers;
  Mlp head;

  SdfModel() = default;
  explicit SdfModel(const OperatorConfig& c) : cfg(c) {
    lift = Mlp({3, c.lift_hidden, c.channels});
    for (int l = 0; l < c.layers; ++l)
      layers.emplace_back(c.channels, c.modes, /*masked=*/false);
    head = Mlp({c.channels, 1});
  }

  void init(std::uint64_t seed) {
    SplitMix64 rng(seed);
    lift.init(rng);
    for (auto& l : layers) l.init(rng);
    head.init(rng);
  }

  void zero_grad() {
    lift.zero_grad();
    for (auto& l : layers) l.zero_grad();
    head.zero_grad();
  }
};

// Value operator. kPno lifts [1/cost, sdf, x, y], runs obstacle-masked
// blocks, and scores goal-relative feature differences with the nonnegative
// head (triangle inequality by construction). kFno is the unmasked ablation:
// the goal enters as a distance channel and a pointwise linear head reads the
// value straight off the features.
struct ValueModel {
  ValueArch arch = ValueArch::kPno;
  OperatorConfig cfg;
  double beta = 0.0;            // indicator sharpness, fixed after training
  double cell_size_train = 0.0;
  Mlp lift;
  std::vector<FourierLayer> layers;
  DeepNormHead head;
  Mlp flat_head;

  ValueModel() = default;
  ValueModel(ValueArch a, const OperatorConfig& c) : arch(a), cfg(c) {
    lift = Mlp({4, c.lift_hidden, c.channels});
    for (int l = 0; l < c.layers; ++l)
      layers.emplace_back(c.channels, c.modes, a == ValueArch::kPno);
    if (a == ValueArch::kPno) {
      std::vector<int> hd{c.channels};
      for (int h : c.head_hidden) hd.push_back(h);
      hd.push_back(1);
      head = DeepNormHead(hd);
    } else {
      flat_head = Mlp({c.channels, 1});
    }
  }

  void init(std::uint64_t seed) {
    SplitMix64 rng(seed);
    lift.init(rng);
    for (auto& l : layers) l.init(rng);
    if (arch == ValueArch::kPno)
      head.init(rng);
    else
      flat_head.init(rng);
  }

  void zero_grad() {
    lift.zero_grad();
    for (auto& l : layers) l.zero_grad();
    if (arch == ValueArch::kPno)
      head.zero_grad();
    else
      flat_head.zero_grad();
  }
};

// ---------------------------------------------------------------------------
// Input channels. Coordinates are physical cell centers, so channel content
// is resolution independent.
// ---------------------------------------------------------------------------

inline Tensor sdf_inputs(const OccupancyGrid& g) {
  Tensor x({static_cast<std::size_t>(g.height), static_cast<std::size_t>(g.width), 3});
  for (int i = 0; i < g.height; ++i) {
    for (int j = 0; j < g.width; ++j) {
      x.at3(i, j, 0) = g.safe(i, j) ? 1.0 : 0.0;
      x.at3(i, j, 1) = cell_center_x(g, j);
      x.at3(i, j, 2) = cell_center_y(g, i);
    }
  }
  return x;
}

inline Tensor pno_inputs(const OccupancyGrid& g, const ScalarField& sdf) {
  if (sdf.height != g.height || sdf.width != g.width)
    throw ValidationError("pno_inputs: sdf shape mismatch");
  Tensor x({static_cast<std::size_t>(g.height), static_cast<std::size_t>(g.width), 4});
  for (int i = 0; i < g.height; ++i) {
    for (int j = 0; j < g.width; ++j) {
      x.at3(i, j, 0) = g.safe(i, j) ? 1.0 : 0.0;  // reciprocal cost, c = 1
      x.at3(i, j, 1) = sdf.at(i, j);
      x.at3(i, j, 2) = cell_center_x(g, j);
      x.at3(i, j, 3) = cell_center_y(g, i);
    }
  }
  return x;
}

inline Tensor fno_inputs(const OccupancyGrid& g, const GoalSpec& goal) {
  validate_goal(g, goal);
  Tensor x({static_cast<std::size_t>(g.height), static_cast<std::size_t>(g.width), 4});
  const double gx = cell_center_x(g, goal.col), gy = cell_center_y(g, goal.row);
  for (int i = 0; i < g.height; ++i) {
    for (int j = 0; j < g.width; ++j) {
      x.at3(i, j, 0) = g.safe(i, j) ? 1.0 : 0.0;
      x.at3(i, j, 1) = std::hypot(cell_center_x(g, j) - gx, cell_center_y(g, i) - gy);
      x.at3(i, j, 2) = cell_center_x(g, j);
      x.at3(i, j, 3) = cell_center_y(g, i);
    }
  }
  return x;
}

// ---------------------------------------------------------------------------
// Forward / backward plumbing shared by both models.
// ---------------------------------------------------------------------------

struct TrunkCache {
  MlpCache lift;
  std::vector<LayerCache> layers;
};

template <typename LayerVec>
inline Tensor trunk_forward(const Mlp& lift, const LayerVec& layers,
                            const Tensor& inputs, const std::vector<double>* chi,
                            const CField* chi_hat, TrunkCache* cache = nullptr) {
  if (cache) cache->layers.resize(layers.size());
  Tensor v = mlp_forward(lift, inputs, cache ? &cache->lift : nullptr);
  for (std::size_t l = 0; l < layers.size(); ++l)
    v = fourier_layer_forward(layers[l], v, chi, chi_hat,
                              cache ? &cache->layers[l] : nullptr);
  return v;
}

template <typename LayerVec>
inline void trunk_backward(Mlp& lift, LayerVec& layers, const TrunkCache& cache,
                           const std::vector<double>* chi, const CField* chi_hat,
                           Tensor g_features) {
  for (std::size_t l = layers.size(); l-- > 0;)
    g_features =
        fourier_layer_backward(layers[l], cache.layers[l], chi, chi_hat, g_features);
  mlp_backward(lift, cache.lift, g_features);
}

struct SdfCache {
  TrunkCache trunk;
  MlpCache head;
};

inline ScalarField sdf_forward(const SdfModel& m, const OccupancyGrid& g,
                               SdfCache* cache = nullptr) {
  const Tensor x = sdf_inputs(g);
  Tensor F = trunk_forward(m.lift, m.layers, x, nullptr, nullptr,
                           cache ? &cache->trunk : nullptr);
  Tensor y = mlp_forward(m.head, F, cache ? &cache->head : nullptr);
  ScalarField out(g.height, g.width, FieldKind::kSdf);
  out.values = std::move(y.data);
  return out;
}

inline void sdf_backward(SdfModel& m, const SdfCache& cache,
                         const std::vector<double>& g_pred, int h, int w) {
  Tensor gy({static_cast<std::size_t>(h), static_cast<std::size_t>(w), 1});
  gy.data = g_pred;
  Tensor gF = mlp_backward(m.head, cache.head, gy);
  trunk_backward(m.lift, m.layers, cache.trunk, nullptr, nullptr, std::move(gF));
}

// Feature field of the value trunk; goal independent for kPno.
inline Tensor value_features(const ValueModel& m, const Tensor& inputs,
                             const std::vector<double>* chi, const CField* chi_hat,
                             TrunkCache* cache = nullptr) {
  return trunk_forward(m.lift, m.layers, inputs, chi, chi_hat, cache);
}

// Single-vector head evaluation, used for triangle sampling.
inline double head_scalar(const DeepNormHead& h, const std::vector<double>& u) {
  Tensor t({1, 1, u.size()});
  t.data = u;
  return head_forward(h, t)[0];
}

// Goal-relative value prediction from a feature field.
inline ScalarField value_from_features(const ValueModel& m, const Tensor& F,
                                       const GoalSpec& goal,
                                       HeadCache* cache = nullptr,
                                       MlpCache* flat_cache = nullptr) {
  const int h = static_cast<int>(F.dim(0));
  const int w = static_cast<int>(F.dim(1));
  const int c = static_cast<int>(F.dim(2));
  ScalarField out(h, w, FieldKind::kValue);
  if (m.arch == ValueArch::kFno) {
    Tensor y = mlp_forward(m.flat_head, F, flat_cache);
    out.values = std::move(y.data);
    return out;
  }
  Tensor u = F;
  const double* fg =
      F.data.data() + (static_cast<std::size_t>(goal.row) * w + goal.col) * c;
  std::vector<double> goal_feat(fg, fg + c);
  const std::size_t cells = static_cast<std::size_t>(h) * w;
  for (std::size_t n = 0; n < cells; ++n) {
    double* up = u.data.data() + n * c;
    for (int ci = 0; ci < c; ++ci) up[ci] -= goal_feat[static_cast<std::size_t>(ci)];
  }
  Tensor y = head_forward(m.head, u, cache);
  out.values = std::move(y.data);
  return out;
}

// Backward through value_from_features for kPno: returns the gradient w.r.t.
// the feature field, including the minus-goal-row coupling.
inline Tensor value_head_backward(ValueModel& m, const HeadCache& cache,
                                  const Tensor& g_pred, const GoalSpec& goal) {
  Tensor gu = head_backward(m.head, cache, g_pred);
  const int w = static_cast<int>(gu.dim(1));
  const int c = static_cast<int>(gu.dim(2));
  const std::size_t cells = gu.dim(0) * gu.dim(1);
  std::vector<double> col_sum(static_cast<std::size_t>(c), 0.0);
  for (std::size_t n = 0; n < cells; ++n) {
    const double* p = gu.data.data() + n * c;
    for (int ci = 0; ci < c; ++ci) col_sum[static_cast<std::size_t>(ci)] += p[ci];
  }
  double* goal_row =
      gu.data.data() + (static_cast<std::size_t>(goal.row) * w + goal.col) * c;
  for (int ci = 0; ci < c; ++ci) goal_row[ci] -= col_sum[static_cast<std::size_t>(ci)];
  return gu;
}

// ---------------------------------------------------------------------------
// Two-stage inference pipeline: the stage-1 sdf prediction feeds the value
// trunk. The ablation arch skips stage 1 entirely.
// ---------------------------------------------------------------------------

struct PnoPipeline {
  SdfModel sdf;
  ValueModel value;
};

inline ScalarField pipeline_value(const PnoPipeline& p, const OccupancyGrid& g,
                                  const GoalSpec& goal) {
  validate_goal(g, goal);
  if (p.value.arch == ValueArch::kFno) {
    Tensor F = value_features(p.value, fno_inputs(g, goal), nullptr, nullptr);
    return value_from_features(p.value, F, goal);
  }
  ScalarField sdf = sdf_forward(p.sdf, g);
  std::vector<double> chi = smoothed_indicator(sdf, p.value.beta);
  CField chi_hat = rfft2(chi, g.height, g.width);
  Tensor F = value_features(p.value, pno_inputs(g, sdf), &chi, &chi_hat);
  return value_from_features(p.value, F, goal);
}

// ---------------------------------------------------------------------------
// Masked relative L2 loss.
// ---------------------------------------------------------------------------

inline std::vector<double> finite_safe_mask(const OccupancyGrid& g,
                                            const ScalarField& target) {
  std::vector<double> m(target.values.size(), 0.0);
  for (int i = 0; i < g.height; ++i)
    for (int j = 0; j < g.width; ++j)
      if (g.safe(i, j) && std::isfinite(target.at(i, j)))
        m[static_cast<std::size_t>(i) * g.width + j] = 1.0;
  return m;
}

inline double masked_rel_l2(const std::vector<double>& pred,
                            const std::vector<double>& target,
                            const std::vector<double>& mask) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    if (mask[k] == 0.0) continue;  // skip, not multiply: target may be inf
    const double r = (pred[k] - target[k]) * mask[k];
    num += r * r;
    den += target[k] * mask[k] * target[k] * mask[k];
  }
  if (den <= 0.0) return 0.0;
  return std::sqrt(num / den);
}

// Loss value plus d loss / d pred.
inline double masked_rel_l2_grad(const std::vector<double>& pred,
                                 const std::vector<double>& target,
                                 const std::vector<double>& mask,
                                 std::vector<double>& grad) {
  grad.assign(pred.size(), 0.0);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    if (mask[k] == 0.0) continue;  // skip, not multiply: target may be inf
    const double r = (pred[k] - target[k]) * mask[k];
    num += r * r;
    den += target[k] * mask[k] * target[k] * mask[k];
  }
  if (den <= 0.0 || num <= 0.0) return 0.0;
  const double n = std::sqrt(num), d = std::sqrt(den);
  const double scale = 1.0 / (n * d);
  for (std::size_t k = 0; k < pred.size(); ++k)
    if (mask[k] != 0.0) grad[k] = (pred[k] - target[k]) * mask[k] * scale;
  return n / d;
}

// ---------------------------------------------------------------------------
// Flat parameter registry for the optimizer, the serializer, and the
// finite-difference check. Complex spectra are viewed as (re, im) pairs.
// ---------------------------------------------------------------------------

struct ParamRef {
  std::string name;
  double* data = nullptr;
  double* grad = nullptr;
  std::size_t count = 0;
  std::vector<std::uint64_t> dims;
};

namespace modeldetail {

inline void add_mlp(std::vector<ParamRef>& out, Mlp& m, const std::string& prefix) {
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    out.push_back({prefix + ".w" + std::to_string(l), m.W[l].data.data(),
                   m.gW[l].data.data(), m.W[l].size(),
                   {static_cast<std::uint64_t>(m.dims[l + 1]),
                    static_cast<std::uint64_t>(m.dims[l])}});
    out.push_back({prefix + ".b" + std::to_string(l), m.b[l].data.data(),
                   m.gb[l].data.data(), m.b[l].size(),
                   {static_cast<std::uint64_t>(m.dims[l + 1])}});
  }
}

inline void add_layer(std::vector<ParamRef>& out, FourierLayer& L,
                      const std::string& prefix) {
  out.push_back({prefix + ".w", L.W.data.data(), L.gW.data.data(), L.W.size(),
                 {static_cast<std::uint64_t>(L.channels),
                  static_cast<std::uint64_t>(L.channels)}});
  out.push_back({prefix + ".b", L.b.data.data(), L.gb.data.data(), L.b.size(),
                 {static_cast<std::uint64_t>(L.channels)}});
  out.push_back({prefix + ".p", reinterpret_cast<double*>(L.P.coeffs.data()),
                 reinterpret_cast<double*>(L.gP.data()), 2 * L.P.coeffs.size(),
                 {static_cast<std::uint64_t>(2 * L.P.modes_y),
                  static_cast<std::uint64_t>(L.P.modes_x),
                  static_cast<std::uint64_t>(L.P.c_in),
                  static_cast<std::uint64_t>(L.P.c_out), 2}});
}

inline void add_head(std::vector<ParamRef>& out, DeepNormHead& h,
                     const std::string& prefix) {
  for (std::size_t l = 0; l < h.layer_count(); ++l)
    out.push_back({prefix + ".w" + std::to_string(l), h.Wraw[l].data.data(),
                   h.gWraw[l].data.data(), h.Wraw[l].size(),
                   {static_cast<std::uint64_t>(h.dims[l + 1]),
                    static_cast<std::uint64_t>(h.dims[l])}});
}

}  // namespace modeldetail

inline std::vector<ParamRef> collect_params(SdfModel& m) {
  std::vector<ParamRef> out;
  modeldetail::add_mlp(out, m.lift, "lift");
  for (std::size_t l = 0; l < m.layers.size(); ++l)
    modeldetail::add_layer(out, m.layers[l], "layer" + std::to_string(l));
  modeldetail::add_mlp(out, m.head, "head");
  return out;
}

inline std::vector<ParamRef> collect_params(ValueModel& m) {
  std::vector<ParamRef> out;
  modeldetail::add_mlp(out, m.lift, "lift");
  for (std::size_t l = 0; l < m.layers.size(); ++l)
    modeldetail::add_layer(out, m.layers[l], "layer" + std::to_string(l));
  if (m.arch == ValueArch::kPno)
    modeldetail::add_head(out, m.head, "head");
  else
    modeldetail::add_mlp(out, m.flat_head, "flat");
  return out;
}

inline std::size_t param_count(const std::vector<ParamRef>& refs) {
  std::size_t n = 0;
  for (const auto& r : refs) n += r.count;
  return n;
}

}  // namespace pno

#endif  // PNO_MODEL_HPP
