#ifndef PNO_NN_HPP
#define PNO_NN_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pno/rng.hpp"
#include "pno/tensor.hpp"

namespace pno {

// Exact GELU, x * Phi(x) with the Gaussian CDF (no tanh approximation).
inline double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x * 0.7071067811865475));
}

inline double gelu_grad(double x) {
  const double phi = std::exp(-0.5 * x * x) * 0.3989422804014327;  // pdf
  return 0.5 * (1.0 + std::erf(x * 0.7071067811865475)) + x * phi;
}

// Numerically stable softplus and its derivative (the logistic sigmoid).
inline double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Pointwise MLP applied independently at every grid cell, GELU between
// layers and a linear last layer. Weight layout W[l] is (dims[l+1], dims[l]).
struct Mlp {
  std::vector<int> dims;
  std::vector<Tensor> W, b;
  std::vector<Tensor> gW, gb;

  Mlp() = default;
  explicit Mlp(std::vector<int> d) : dims(std::move(d)) {
    if (dims.size() < 2) throw std::invalid_argument("mlp needs >= 2 dims");
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      W.emplace_back(std::vector<std::size_t>{static_cast<std::size_t>(dims[l + 1]),
                                              static_cast<std::size_t>(dims[l])});
      b.emplace_back(std::vector<std::size_t>{static_cast<std::size_t>(dims[l + 1])});
      gW.push_back(W.back());
      gb.push_back(b.back());
    }
  }

  int in_dim() const { return dims.front(); }
  int out_dim() const { return dims.back(); }
  std::size_t layer_count() const { return W.size(); }

  // Glorot-uniform initialization; biases start at zero.
  void init(SplitMix64& rng) {
    for (std::size_t l = 0; l < W.size(); ++l) {
      const double s = std::sqrt(6.0 / (dims[l] + dims[l + 1]));
      for (auto& v : W[l].data) v = rng.uniform_range(-s, s);
      b[l].fill(0.0);
    }
  }

  void zero_grad() {
    for (auto& g : gW) g.fill(0.0);
    for (auto& g : gb) g.fill(0.0);
  }
};

// Forward activations kept for the backward pass: a[0] is the input field,
// a[l] the output of layer l after activation, z[l] its pre-activation.
struct MlpCache {
  std::vector<Tensor> a;
  std::vector<Tensor> z;
};

// x: (H, W, in_dim) -> (H, W, out_dim)
inline Tensor mlp_forward(const Mlp& m, const Tensor& x, MlpCache* cache = nullptr) {
  if (static_cast<int>(x.dim(2)) != m.in_dim())
    throw std::invalid_argument("mlp_forward: channel mismatch");
  const std::size_t cells = x.dim(0) * x.dim(1);
  if (cache) {
    cache->a.clear();
    cache->z.clear();
    cache->a.push_back(x);
  }
  Tensor cur = x;
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    const int ci = m.dims[l], co = m.dims[l + 1];
    Tensor next({x.dim(0), x.dim(1), static_cast<std::size_t>(co)});
    const bool last = (l + 1 == m.layer_count());
    for (std::size_t n = 0; n < cells; ++n) {
      const double* in = cur.data.data() + n * ci;
      double* out = next.data.data() + n * co;
      for (int o = 0; o < co; ++o) {
        const double* wr = m.W[l].data.data() + static_cast<std::size_t>(o) * ci;
        double acc = m.b[l][static_cast<std::size_t>(o)];
        for (int i = 0; i < ci; ++i) acc += wr[i] * in[i];
        out[o] = acc;
      }
    }
    if (cache) cache->z.push_back(next);
    if (!last)
      for (auto& v : next.data) v = gelu(v);
    if (cache) cache->a.push_back(next);
    cur = std::move(next);
  }
  return cur;
}

// Accumulates parameter gradients and returns the input gradient.
inline Tensor mlp_backward(Mlp& m, const MlpCache& cache, const Tensor& g_out) {
  Tensor ga = g_out;
  for (std::size_t li = m.layer_count(); li-- > 0;) {
    const int ci = m.dims[li], co = m.dims[li + 1];
    const Tensor& a_prev = cache.a[li];
    const Tensor& z = cache.z[li];
    const std::size_t cells = a_prev.dim(0) * a_prev.dim(1);
    const bool last = (li + 1 == m.layer_count());
    Tensor gz = ga;
    if (!last)
      for (std::size_t k = 0; k < gz.size(); ++k)
        gz[k] *= gelu_grad(z[k]);
    Tensor g_prev({a_prev.dim(0), a_prev.dim(1), static_cast<std::size_t>(ci)});
    for (std::size_t n = 0; n < cells; ++n) {
      const double* gzp = gz.data.data() + n * co;
      const double* ap = a_prev.data.data() + n * ci;
      double* gp = g_prev.data.data() + n * ci;
      for (int o = 0; o < co; ++o) {
        const double g = gzp[o];
        m.gb[li][static_cast<std::size_t>(o)] += g;
        double* gwr = m.gW[li].data.data() + static_cast<std::size_t>(o) * ci;
        const double* wr = m.W[li].data.data() + static_cast<std::size_t>(o) * ci;
        for (int i = 0; i < ci; ++i) {
          gwr[i] += g * ap[i];
          gp[i] += g * wr[i];
        }
      }
    }
    ga = std::move(g_prev);
  }
  return ga;
}

// Norm-like projection head. Layers act on difference vectors with
// weights softplus(raw) >= 0, ReLU in between, no biases, and a final
// nonnegative weighted sum. The composition is positively homogeneous and
// subadditive, vanishes at zero, and is nonnegative, which is what makes
// predicted values obey the triangle inequality by construction.
struct DeepNormHead {
  std::vector<int> dims;  // {feature, hidden..., 1}
  std::vector<Tensor> Wraw, gWraw;

  DeepNormHead() = default;
  explicit DeepNormHead(std::vector<int> d) : dims(std::move(d)) {
    if (dims.size() < 2 || dims.back() != 1)
      throw std::invalid_argument("head must end in a scalar");
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      Wraw.emplace_back(std::vector<std::size_t>{
          static_cast<std::size_t>(dims[l + 1]), static_cast<std::size_t>(dims[l])});
      gWraw.push_back(Wraw.back());
    }
  }

  std::size_t layer_count() const { return Wraw.size(); }

  // raw ~ U(-2, 0) keeps the effective weights in a moderate positive range
  void init(SplitMix64& rng) {
    for (auto& w : Wraw)
      for (auto& v : w.data) v = rng.uniform_range(-2.0, 0.0);
  }

  void zero_grad() {
    for (auto& g : gWraw) g.fill(0.0);
  }
};

struct HeadCache {
  std::vector<Tensor> a;  // a[0] = input differences, then relu outputs
  std::vector<Tensor> z;  // pre-activations
};

// u: (H, W, feature) difference field -> (H, W) scalars (flattened last dim).
inline Tensor head_forward(const DeepNormHead& h, const Tensor& u,
                           HeadCache* cache = nullptr) {
  if (static_cast<int>(u.dim(2)) != h.dims.front())
    throw std::invalid_argument("head_forward: channel mismatch");
  const std::size_t cells = u.dim(0) * u.dim(1);
  if (cache) {
    cache->a.assign(1, u);
    cache->z.clear();
  }
  Tensor cur = u;
  for (std::size_t l = 0; l < h.layer_count(); ++l) {
    const int ci = h.dims[l], co = h.dims[l + 1];
    Tensor next({u.dim(0), u.dim(1), static_cast<std::size_t>(co)});
    const bool last = (l + 1 == h.layer_count());
    for (std::size_t n = 0; n < cells; ++n) {
      const double* in = cur.data.data() + n * ci;
      double* out = next.data.data() + n * co;
      for (int o = 0; o < co; ++o) {
        const double* wr = h.Wraw[l].data.data() + static_cast<std::size_t>(o) * ci;
        double acc = 0.0;
        for (int i = 0; i < ci; ++i) acc += softplus(wr[i]) * in[i];
        out[o] = acc;
      }
    }
    if (cache) cache->z.push_back(next);
    if (!last)
      for (auto& v : next.data) v = std::max(0.0, v);
    if (cache) cache->a.push_back(next);
    cur = std::move(next);
  }
  return cur;
}

inline Tensor head_backward(DeepNormHead& h, const HeadCache& cache,
                            const Tensor& g_out) {
  Tensor ga = g_out;
  for (std::size_t li = h.layer_count(); li-- > 0;) {
    const int ci = h.dims[li], co = h.dims[li + 1];
    const Tensor& a_prev = cache.a[li];
    const Tensor& z = cache.z[li];
    const std::size_t cells = a_prev.dim(0) * a_prev.dim(1);
    const bool last = (li + 1 == h.layer_count());
    Tensor gz = ga;
    if (!last)
      for (std::size_t k = 0; k < gz.size(); ++k)
        if (z[k] <= 0.0) gz[k] = 0.0;
    Tensor g_prev({a_prev.dim(0), a_prev.dim(1), static_cast<std::size_t>(ci)});
    for (std::size_t n = 0; n < cells; ++n) {
      const double* gzp = gz.data.data() + n * co;
      const double* ap = a_prev.data.data() + n * ci;
      double* gp = g_prev.data.data() + n * ci;
      for (int o = 0; o < co; ++o) {
        const double g = gzp[o];
        if (g == 0.0) continue;
        const double* wr = h.Wraw[li].data.data() + static_cast<std::size_t>(o) * ci;
        double* gwr = h.gWraw[li].data.data() + static_cast<std::size_t>(o) * ci;
        for (int i = 0; i < ci; ++i) {
          gwr[i] += g * ap[i] * sigmoid(wr[i]);  // chain through softplus
          gp[i] += g * softplus(wr[i]);
        }
      }
    }
    ga = std::move(g_prev);
  }
  return ga;
}

}  // namespace pno

#endif  // PNO_NN_HPP
