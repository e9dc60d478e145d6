#ifndef PNO_FFT_HPP
#define PNO_FFT_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

namespace pno {

using Complex = std::complex<double>;

// Dense complex field, row-major h x w.
struct CField {
  int h = 0;
  int w = 0;
  std::vector<Complex> a;

  CField() = default;
  CField(int hh, int ww) : h(hh), w(ww), a(static_cast<std::size_t>(hh) * ww) {}

  Complex& at(int i, int j) { return a[static_cast<std::size_t>(i) * w + j]; }
  Complex at(int i, int j) const { return a[static_cast<std::size_t>(i) * w + j]; }
};

namespace fftdetail {

constexpr double kPi = 3.141592653589793238462643383279502884;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Twiddle tables are cached per length; lookups never affect output order.
inline const std::vector<Complex>& twiddles(std::size_t n) {
  static std::map<std::size_t, std::vector<Complex>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<Complex> t(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double ang = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
    t[k] = Complex(std::cos(ang), std::sin(ang));
  }
  return cache.emplace(n, std::move(t)).first->second;
}

// In-place iterative radix-2. inverse_kernel flips the exponent sign only;
// no normalization is applied at any point in this header's transforms
// except where irfft2 divides by h*w explicitly.
inline void fft_pow2(Complex* x, std::size_t n, bool inverse_kernel) {
  if (n <= 1) return;
  // bit reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  const auto& tw = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        Complex w = tw[k * step];
        if (inverse_kernel) w = std::conj(w);
        const Complex u = x[i + k];
        const Complex v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
      }
    }
  }
}

struct BluesteinPlan {
  std::size_t n = 0, m = 0;
  std::vector<Complex> chirp;      // e^{-i pi k^2 / n}
  std::vector<Complex> kernel_ft;  // fft of zero-padded conj chirp
};

inline const BluesteinPlan& bluestein_plan(std::size_t n) {
  static std::map<std::size_t, BluesteinPlan> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  BluesteinPlan p;
  p.n = n;
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  p.m = m;
  p.chirp.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the argument small and the chirp exactly periodic
    const std::size_t q = (k * k) % (2 * n);
    const double ang = -kPi * static_cast<double>(q) / static_cast<double>(n);
    p.chirp[k] = Complex(std::cos(ang), std::sin(ang));
  }
  std::vector<Complex> b(m, Complex(0, 0));
  b[0] = std::conj(p.chirp[0]);
  for (std::size_t k = 1; k < n; ++k)
    b[k] = b[m - k] = std::conj(p.chirp[k]);
  fft_pow2(b.data(), m, false);
  p.kernel_ft = std::move(b);
  return cache.emplace(n, std::move(p)).first->second;
}

// Bluestein chirp-z transform for arbitrary n via one pow2 convolution.
inline void fft_bluestein(Complex* x, std::size_t n, bool inverse_kernel) {
  const BluesteinPlan& p = bluestein_plan(n);
  std::vector<Complex> a(p.m, Complex(0, 0));
  for (std::size_t k = 0; k < n; ++k) {
    const Complex c = inverse_kernel ? std::conj(p.chirp[k]) : p.chirp[k];
    a[k] = x[k] * c;
  }
  fft_pow2(a.data(), p.m, false);
  if (inverse_kernel) {
    for (std::size_t k = 0; k < p.m; ++k) a[k] *= std::conj(p.kernel_ft[k]);
    // conj(fft(b)) = fft of conj-reversed b, which is the conj chirp kernel
  } else {
    for (std::size_t k = 0; k < p.m; ++k) a[k] *= p.kernel_ft[k];
  }
  fft_pow2(a.data(), p.m, true);
  const double inv_m = 1.0 / static_cast<double>(p.m);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex c = inverse_kernel ? std::conj(p.chirp[k]) : p.chirp[k];
    x[k] = a[k] * inv_m * c;
  }
}

inline void fft_1d(Complex* x, std::size_t n, bool inverse_kernel) {
  if (is_pow2(n))
    fft_pow2(x, n, inverse_kernel);
  else
    fft_bluestein(x, n, inverse_kernel);
}

}  // namespace fftdetail

// Unnormalized 2-D DFT: X[ky,kx] = sum_{y,x} v[y,x] e^{-2 pi i (ky y/H + kx x/W)}.
// inverse_kernel flips the exponent sign and still applies no 1/(HW) factor,
// so fft2(., true) is the conjugate-transpose of fft2(., false).
inline CField fft2(const CField& v, bool inverse_kernel = false) {
  CField out = v;
  for (int i = 0; i < out.h; ++i)
    fftdetail::fft_1d(out.a.data() + static_cast<std::size_t>(i) * out.w,
                      static_cast<std::size_t>(out.w), inverse_kernel);
  std::vector<Complex> col(static_cast<std::size_t>(out.h));
  for (int j = 0; j < out.w; ++j) {
    for (int i = 0; i < out.h; ++i) col[static_cast<std::size_t>(i)] = out.at(i, j);
    fftdetail::fft_1d(col.data(), col.size(), inverse_kernel);
    for (int i = 0; i < out.h; ++i) out.at(i, j) = col[static_cast<std::size_t>(i)];
  }
  return out;
}

inline int rfft_width(int w) { return w / 2 + 1; }

// Real-input forward transform, truncated to kx in [0, W/2].
inline CField rfft2(const std::vector<double>& x, int h, int w) {
  if (static_cast<std::size_t>(h) * w != x.size())
    throw std::invalid_argument("rfft2: size mismatch");
  CField full(h, w);
  for (std::size_t k = 0; k < x.size(); ++k) full.a[k] = Complex(x[k], 0.0);
  full = fft2(full, false);
  CField out(h, rfft_width(w));
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < out.w; ++j) out.at(i, j) = full.at(i, j);
  return out;
}

// Inverse of rfft2 as an R-linear map: Hermitian-extend the stored half
// spectrum, apply the inverse-kernel transform, divide by H*W and take real
// parts. Defined (and linear) for arbitrary coefficients, not just spectra
// of real signals.
inline std::vector<double> irfft2(const CField& spec, int w) {
  const int h = spec.h;
  if (spec.w != rfft_width(w)) throw std::invalid_argument("irfft2: bad width");
  CField full(h, w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < spec.w; ++j) full.at(i, j) = spec.at(i, j);
    for (int j = spec.w; j < w; ++j) {
      const int mi = (h - i) % h;
      const int mj = w - j;
      full.at(i, j) = std::conj(spec.at(mi, mj));
    }
  }
  full = fft2(full, true);
  std::vector<double> out(static_cast<std::size_t>(h) * w);
  const double inv = 1.0 / (static_cast<double>(h) * static_cast<double>(w));
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = full.a[k].real() * inv;
  return out;
}

// Adjoint of rfft2 under the real pairing Re<.,.>: zero-embed the half
// spectrum and apply the unnormalized inverse-kernel transform, keeping real
// parts. Satisfies Re<rfft2(x), Y> = <x, rfft2_adjoint(Y)> for real x.
inline std::vector<double> rfft2_adjoint(const CField& ghat, int w) {
  const int h = ghat.h;
  if (ghat.w != rfft_width(w))
    throw std::invalid_argument("rfft2_adjoint: bad width");
  CField full(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < ghat.w; ++j) full.at(i, j) = ghat.at(i, j);
  full = fft2(full, true);
  std::vector<double> out(static_cast<std::size_t>(h) * w);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = full.a[k].real();
  return out;
}

// Adjoint of irfft2: forward-transform the real gradient, truncate, scale by
// w_k/(HW) with w_k = 1 on the self-conjugate columns kx = 0 and kx = W/2
// (W even) and w_k = 2 elsewhere. Satisfies
// <irfft2(A), g> = Re<A, irfft2_adjoint(g)>.
inline CField irfft2_adjoint(const std::vector<double>& g, int h, int w) {
  if (static_cast<std::size_t>(h) * w != g.size())
    throw std::invalid_argument("irfft2_adjoint: size mismatch");
  CField full(h, w);
  for (std::size_t k = 0; k < g.size(); ++k) full.a[k] = Complex(g[k], 0.0);
  full = fft2(full, false);
  CField out(h, rfft_width(w));
  const double inv = 1.0 / (static_cast<double>(h) * static_cast<double>(w));
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < out.w; ++j) {
      const bool self_conj = (j == 0) || (w % 2 == 0 && j == w / 2);
      out.at(i, j) = full.at(i, j) * ((self_conj ? 1.0 : 2.0) * inv);
    }
  }
  return out;
}

}  // namespace pno

#endif  // PNO_FFT_HPP
