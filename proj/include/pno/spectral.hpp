#ifndef PNO_SPECTRAL_HPP
#define PNO_SPECTRAL_HPP

#include <complex>
#include <stdexcept>
#include <vector>

#include "pno/fft.hpp"
#include "pno/tensor.hpp"

namespace pno {

// Learnable multiplier on the retained Fourier modes. Logical coefficient
// shape is (2*modes_y, modes_x, c_in, c_out), complex. Row j < modes_y holds
// nonnegative frequency ky = j; row j in [modes_y, 2*modes_y) holds the
// negative frequency ky = H - (2*modes_y - j). Valid on any grid with
// H >= 2*modes_y and W/2 + 1 >= modes_x, which is what makes the operator
// resolution invariant.
struct SpectrumBlock {
  int modes_y = 0;
  int modes_x = 0;
  int c_in = 0;
  int c_out = 0;
  std::vector<Complex> coeffs;

  SpectrumBlock() = default;
  SpectrumBlock(int my, int mx, int ci, int co)
      : modes_y(my),
        modes_x(mx),
        c_in(ci),
        c_out(co),
        coeffs(static_cast<std::size_t>(2 * my) * mx * ci * co) {}

  std::size_t idx(int j, int kx, int ci, int co) const {
    return ((static_cast<std::size_t>(j) * modes_x + kx) * c_in + ci) * c_out + co;
  }

  int row_to_ky(int j, int grid_h) const {
    return j < modes_y ? j : grid_h - (2 * modes_y - j);
  }

  void check_grid(int h, int w) const {
    if (h < 2 * modes_y || rfft_width(w) < modes_x)
      throw std::invalid_argument("spectrum block does not fit grid");
  }
};

// Cached per-channel input spectra from the forward pass, reused by the
// backward pass.
struct SpectralCache {
  std::vector<CField> u_hat;
};

// Per-channel forward spectra of a (H, W, C) tensor.
inline std::vector<CField> channel_spectra(const Tensor& v) {
  const int h = static_cast<int>(v.dim(0));
  const int w = static_cast<int>(v.dim(1));
  const int c = static_cast<int>(v.dim(2));
  std::vector<double> buf(static_cast<std::size_t>(h) * w);
  std::vector<CField> out;
  out.reserve(static_cast<std::size_t>(c));
  for (int ci = 0; ci < c; ++ci) {
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j)
        buf[static_cast<std::size_t>(i) * w + j] = v.at3(i, j, ci);
    out.push_back(rfft2(buf, h, w));
  }
  return out;
}

// Multiply cached spectra by the block and transform back:
// out[.,.,co] = irfft2( sum_ci P[.,.,ci,co] * u_hat[ci] ).
inline Tensor spectral_apply(const std::vector<CField>& u_hat,
                             const SpectrumBlock& P, int h, int w) {
  if (static_cast<int>(u_hat.size()) != P.c_in)
    throw std::invalid_argument("spectral_apply: channel mismatch");
  P.check_grid(h, w);
  Tensor out({static_cast<std::size_t>(h), static_cast<std::size_t>(w),
              static_cast<std::size_t>(P.c_out)});
  CField z(h, rfft_width(w));
  for (int co = 0; co < P.c_out; ++co) {
    std::fill(z.a.begin(), z.a.end(), Complex(0, 0));
    for (int j = 0; j < 2 * P.modes_y; ++j) {
      const int ky = P.row_to_ky(j, h);
      for (int kx = 0; kx < P.modes_x; ++kx) {
        Complex acc(0, 0);
        for (int ci = 0; ci < P.c_in; ++ci)
          acc += P.coeffs[P.idx(j, kx, ci, co)] * u_hat[static_cast<std::size_t>(ci)].at(ky, kx);
        z.at(ky, kx) = acc;
      }
    }
    const std::vector<double> spatial = irfft2(z, w);
    for (int i = 0; i < h; ++i)
      for (int jj = 0; jj < w; ++jj)
        out.at3(i, jj, co) = spatial[static_cast<std::size_t>(i) * w + jj];
  }
  return out;
}

// Full forward pass v -> K(v); fills `cache` for the backward pass.
inline Tensor spectral_conv(const Tensor& v, const SpectrumBlock& P,
                            SpectralCache* cache = nullptr) {
  const int h = static_cast<int>(v.dim(0));
  const int w = static_cast<int>(v.dim(1));
  if (static_cast<int>(v.dim(2)) != P.c_in)
    throw std::invalid_argument("spectral_conv: channel mismatch");
  std::vector<CField> u_hat = channel_spectra(v);
  Tensor out = spectral_apply(u_hat, P, h, w);
  if (cache) cache->u_hat = std::move(u_hat);
  return out;
}

// K applied to the same single-channel spectrum broadcast into every input
// channel: z[.,.,co] = (sum_ci P[.,.,ci,co]) * s. Used by the masked layer
// for the indicator term.
inline Tensor spectral_apply_broadcast(const CField& s, const SpectrumBlock& P,
                                       int h, int w) {
  P.check_grid(h, w);
  Tensor out({static_cast<std::size_t>(h), static_cast<std::size_t>(w),
              static_cast<std::size_t>(P.c_out)});
  CField z(h, rfft_width(w));
  for (int co = 0; co < P.c_out; ++co) {
    std::fill(z.a.begin(), z.a.end(), Complex(0, 0));
    for (int j = 0; j < 2 * P.modes_y; ++j) {
      const int ky = P.row_to_ky(j, h);
      for (int kx = 0; kx < P.modes_x; ++kx) {
        Complex psum(0, 0);
        for (int ci = 0; ci < P.c_in; ++ci) psum += P.coeffs[P.idx(j, kx, ci, co)];
        z.at(ky, kx) = psum * s.at(ky, kx);
      }
    }
    const std::vector<double> spatial = irfft2(z, w);
    for (int i = 0; i < h; ++i)
      for (int jj = 0; jj < w; ++jj)
        out.at3(i, jj, co) = spatial[static_cast<std::size_t>(i) * w + jj];
  }
  return out;
}

// Coefficient gradient of spectral_apply_broadcast; the broadcast input is
// treated as constant, so every in-channel slot receives the same term.
inline void spectral_conv_backward_broadcast(const Tensor& g_out,
                                             const SpectrumBlock& P,
                                             const CField& s,
                                             std::vector<Complex>& g_coeffs) {
  const int h = static_cast<int>(g_out.dim(0));
  const int w = static_cast<int>(g_out.dim(1));
  P.check_grid(h, w);
  std::vector<double> buf(static_cast<std::size_t>(h) * w);
  std::vector<CField> zg;
  zg.reserve(static_cast<std::size_t>(P.c_out));
  for (int co = 0; co < P.c_out; ++co) {
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j)
        buf[static_cast<std::size_t>(i) * w + j] = g_out.at3(i, j, co);
    zg.push_back(irfft2_adjoint(buf, h, w));
  }
  for (int j = 0; j < 2 * P.modes_y; ++j) {
    const int ky = P.row_to_ky(j, h);
    for (int kx = 0; kx < P.modes_x; ++kx) {
      const Complex s_conj = std::conj(s.at(ky, kx));
      for (int co = 0; co < P.c_out; ++co) {
        const Complex g = s_conj * zg[static_cast<std::size_t>(co)].at(ky, kx);
        for (int ci = 0; ci < P.c_in; ++ci) g_coeffs[P.idx(j, kx, ci, co)] += g;
      }
    }
  }
}

// Reverse-mode derivatives through spectral_apply. Accumulates the
// coefficient gradient into g_coeffs (same layout as P.coeffs) and, when
// g_v is non-null, writes the input gradient
//   g_u[ci] = sum_co conj(P[ci,co]) * irfft2_adjoint(g_out[co])
//   g_v[ci] = rfft2_adjoint(g_u[ci])
// using the real pairing adjoints from fft.hpp.
inline void spectral_conv_backward(const Tensor& g_out, const SpectrumBlock& P,
                                   const SpectralCache& cache,
                                   std::vector<Complex>& g_coeffs,
                                   Tensor* g_v = nullptr) {
  const int h = static_cast<int>(g_out.dim(0));
  const int w = static_cast<int>(g_out.dim(1));
  if (static_cast<int>(g_out.dim(2)) != P.c_out)
    throw std::invalid_argument("spectral_conv_backward: channel mismatch");
  if (g_coeffs.size() != P.coeffs.size())
    throw std::invalid_argument("spectral_conv_backward: gradient size");
  P.check_grid(h, w);

  std::vector<CField> zg;
  zg.reserve(static_cast<std::size_t>(P.c_out));
  std::vector<double> buf(static_cast<std::size_t>(h) * w);
  for (int co = 0; co < P.c_out; ++co) {
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j)
        buf[static_cast<std::size_t>(i) * w + j] = g_out.at3(i, j, co);
    zg.push_back(irfft2_adjoint(buf, h, w));
  }

  for (int j = 0; j < 2 * P.modes_y; ++j) {
    const int ky = P.row_to_ky(j, h);
    for (int kx = 0; kx < P.modes_x; ++kx) {
      for (int ci = 0; ci < P.c_in; ++ci) {
        const Complex u_conj =
            std::conj(cache.u_hat[static_cast<std::size_t>(ci)].at(ky, kx));
        for (int co = 0; co < P.c_out; ++co)
          g_coeffs[P.idx(j, kx, ci, co)] +=
              u_conj * zg[static_cast<std::size_t>(co)].at(ky, kx);
      }
    }
  }

  if (!g_v) return;
  *g_v = Tensor({static_cast<std::size_t>(h), static_cast<std::size_t>(w),
                 static_cast<std::size_t>(P.c_in)});
  CField gu(h, rfft_width(w));
  for (int ci = 0; ci < P.c_in; ++ci) {
    std::fill(gu.a.begin(), gu.a.end(), Complex(0, 0));
    for (int j = 0; j < 2 * P.modes_y; ++j) {
      const int ky = P.row_to_ky(j, h);
      for (int kx = 0; kx < P.modes_x; ++kx) {
        Complex acc(0, 0);
        for (int co = 0; co < P.c_out; ++co)
          acc += std::conj(P.coeffs[P.idx(j, kx, ci, co)]) *
                 zg[static_cast<std::size_t>(co)].at(ky, kx);
        gu.at(ky, kx) = acc;
      }
    }
    const std::vector<double> spatial = rfft2_adjoint(gu, w);
    for (int i = 0; i < h; ++i)
      for (int jj = 0; jj < w; ++jj)
        g_v->at3(i, jj, ci) = spatial[static_cast<std::size_t>(i) * w + jj];
  }
}

}  // namespace pno

#endif  // PNO_SPECTRAL_HPP
