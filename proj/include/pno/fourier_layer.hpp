#ifndef PNO_FOURIER_LAYER_HPP
#define PNO_FOURIER_LAYER_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pno/nn.hpp"
#include "pno/spectral.hpp"
#include "pno/tensor.hpp"

namespace pno {

// One spectral block: pointwise linear W v + b plus a mode-truncated global
// kernel. In masked form the kernel sees only the smoothed safe-set
// indicator chi:
//   out = gelu(W v + b + chi .* K(chi .* v) - chi .* v .* K_bcast(chi))
// which is the elementwise discretization of a kernel acting on
// chi(x) chi(y) (v(y) - v(x)); obstacle interiors neither emit nor receive.
// Plain form drops chi: out = gelu(W v + b + K(v)).
struct FourierLayer {
  int channels = 0;
  bool masked = false;
  Tensor W, b;
  SpectrumBlock P;
  Tensor gW, gb;
  std::vector<Complex> gP;

  FourierLayer() = default;
  FourierLayer(int c, int modes, bool m)
      : channels(c),
        masked(m),
        W({static_cast<std::size_t>(c), static_cast<std::size_t>(c)}),
        b({static_cast<std::size_t>(c)}),
        P(modes, modes, c, c),
        gW(W),
        gb(b),
        gP(P.coeffs.size(), Complex(0, 0)) {}

  void init(SplitMix64& rng) {
    const double sw = std::sqrt(6.0 / (2.0 * channels));
    for (auto& v : W.data) v = rng.uniform_range(-sw, sw);
    b.fill(0.0);
    const double sp = 1.0 / (static_cast<double>(channels) * channels);
    for (auto& c : P.coeffs)
      c = Complex(rng.uniform_range(-sp, sp), rng.uniform_range(-sp, sp));
  }

  void zero_grad() {
    gW.fill(0.0);
    gb.fill(0.0);
    std::fill(gP.begin(), gP.end(), Complex(0, 0));
  }
};

struct LayerCache {
  Tensor v_in;
  Tensor pre;
  SpectralCache spec;  // spectra of chi .* v (masked) or v (plain)
  Tensor Ka;           // masked only: K(chi .* v)
  Tensor q;            // masked only: K_bcast(chi)
};

namespace fldetail {

inline void pointwise_linear(const Tensor& W, const Tensor& b, const Tensor& v,
                             Tensor& out) {
  const std::size_t cells = v.dim(0) * v.dim(1);
  const int c = static_cast<int>(v.dim(2));
  for (std::size_t n = 0; n < cells; ++n) {
    const double* in = v.data.data() + n * c;
    double* o = out.data.data() + n * c;
    for (int co = 0; co < c; ++co) {
      const double* wr = W.data.data() + static_cast<std::size_t>(co) * c;
      double acc = b[static_cast<std::size_t>(co)];
      for (int ci = 0; ci < c; ++ci) acc += wr[ci] * in[ci];
      o[co] = acc;
    }
  }
}

}  // namespace fldetail

// chi is the flattened (H*W) indicator and chi_hat its half spectrum; both
// are required iff the layer is masked. chi is treated as a constant.
inline Tensor fourier_layer_forward(const FourierLayer& L, const Tensor& v,
                                    const std::vector<double>* chi,
                                    const CField* chi_hat,
                                    LayerCache* cache = nullptr) {
  const int h = static_cast<int>(v.dim(0));
  const int w = static_cast<int>(v.dim(1));
  const int c = static_cast<int>(v.dim(2));
  if (c != L.channels) throw std::invalid_argument("fourier layer: channels");
  if (L.masked && (!chi || !chi_hat))
    throw std::invalid_argument("masked layer needs an indicator");

  Tensor pre({v.dim(0), v.dim(1), v.dim(2)});
  fldetail::pointwise_linear(L.W, L.b, v, pre);

  SpectralCache local_spec;
  SpectralCache* spec = cache ? &cache->spec : &local_spec;
  if (L.masked) {
    Tensor a = v;
    const std::size_t cells = static_cast<std::size_t>(h) * w;
    for (std::size_t n = 0; n < cells; ++n) {
      const double m = (*chi)[n];
      double* ap = a.data.data() + n * c;
      for (int ci = 0; ci < c; ++ci) ap[ci] *= m;
    }
    spec->u_hat = channel_spectra(a);
    Tensor Ka = spectral_apply(spec->u_hat, L.P, h, w);
    Tensor q = spectral_apply_broadcast(*chi_hat, L.P, h, w);
    for (std::size_t n = 0; n < cells; ++n) {
      const double m = (*chi)[n];
      const double* vp = v.data.data() + n * c;
      const double* kap = Ka.data.data() + n * c;
      const double* qp = q.data.data() + n * c;
      double* pp = pre.data.data() + n * c;
      for (int ci = 0; ci < c; ++ci) pp[ci] += m * (kap[ci] - vp[ci] * qp[ci]);
    }
    if (cache) {
      cache->Ka = std::move(Ka);
      cache->q = std::move(q);
    }
  } else {
    spec->u_hat = channel_spectra(v);
    Tensor Kv = spectral_apply(spec->u_hat, L.P, h, w);
    for (std::size_t k = 0; k < pre.size(); ++k) pre[k] += Kv[k];
  }

  Tensor out = pre;
  for (auto& x : out.data) x = gelu(x);
  if (cache) {
    cache->v_in = v;
    cache->pre = std::move(pre);
  }
  return out;
}

// Accumulates gW, gb, gP and returns the gradient w.r.t. the layer input.
inline Tensor fourier_layer_backward(FourierLayer& L, const LayerCache& cache,
                                     const std::vector<double>* chi,
                                     const CField* chi_hat, const Tensor& g_out) {
  const int h = static_cast<int>(g_out.dim(0));
  const int w = static_cast<int>(g_out.dim(1));
  const int c = L.channels;
  const std::size_t cells = static_cast<std::size_t>(h) * w;

  Tensor gpre = g_out;
  for (std::size_t k = 0; k < gpre.size(); ++k)
    gpre[k] *= gelu_grad(cache.pre[k]);

  // pointwise linear part
  Tensor gv({g_out.dim(0), g_out.dim(1), g_out.dim(2)});
  for (std::size_t n = 0; n < cells; ++n) {
    const double* gp = gpre.data.data() + n * c;
    const double* vp = cache.v_in.data.data() + n * c;
    double* gvp = gv.data.data() + n * c;
    for (int co = 0; co < c; ++co) {
      const double g = gp[co];
      L.gb[static_cast<std::size_t>(co)] += g;
      const double* wr = L.W.data.data() + static_cast<std::size_t>(co) * c;
      double* gwr = L.gW.data.data() + static_cast<std::size_t>(co) * c;
      for (int ci = 0; ci < c; ++ci) {
        gwr[ci] += g * vp[ci];
        gvp[ci] += g * wr[ci];
      }
    }
  }

  if (!L.masked) {
    Tensor gk;
    spectral_conv_backward(gpre, L.P, cache.spec, L.gP, &gk);
    for (std::size_t k = 0; k < gv.size(); ++k) gv[k] += gk[k];
    return gv;
  }

  // chi .* K(chi .* v) term
  Tensor gKa = gpre;
  for (std::size_t n = 0; n < cells; ++n) {
    const double m = (*chi)[n];
    double* p = gKa.data.data() + n * c;
    for (int ci = 0; ci < c; ++ci) p[ci] *= m;
  }
  Tensor ga;
  spectral_conv_backward(gKa, L.P, cache.spec, L.gP, &ga);
  for (std::size_t n = 0; n < cells; ++n) {
    const double m = (*chi)[n];
    const double* gap = ga.data.data() + n * c;
    double* gvp = gv.data.data() + n * c;
    for (int ci = 0; ci < c; ++ci) gvp[ci] += m * gap[ci];
  }

  // -chi .* v .* K_bcast(chi) term
  Tensor gq = gpre;
  for (std::size_t n = 0; n < cells; ++n) {
    const double m = (*chi)[n];
    const double* vp = cache.v_in.data.data() + n * c;
    const double* qp = cache.q.data.data() + n * c;
    double* gqp = gq.data.data() + n * c;
    double* gvp = gv.data.data() + n * c;
    for (int ci = 0; ci < c; ++ci) {
      const double g = gqp[ci];  // still gpre here
      gqp[ci] = -m * vp[ci] * g;
      gvp[ci] += -m * qp[ci] * g;
    }
  }
  spectral_conv_backward_broadcast(gq, L.P, *chi_hat, L.gP);
  return gv;
}

}  // namespace pno

#endif  // PNO_FOURIER_LAYER_HPP
