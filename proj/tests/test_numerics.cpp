#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "pno/fft.hpp"
#include "pno/gradient.hpp"
#include "pno/grid.hpp"
#include "pno/rng.hpp"
#include "pno/spectral.hpp"
#include "pno/tensor.hpp"

using namespace pno;

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

// O(n^2) reference DFT
std::vector<Complex> dft_ref(const std::vector<Complex>& x, bool inverse_kernel) {
  const std::size_t n = x.size();
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc(0, 0);
    for (std::size_t m = 0; m < n; ++m) {
      const double ang = kTau * static_cast<double>(k * m % n) / static_cast<double>(n);
      const Complex e(std::cos(ang), (inverse_kernel ? 1.0 : -1.0) * std::sin(ang));
      acc += x[m] * (inverse_kernel ? e : std::conj(std::conj(e)));
    }
    out[k] = acc;
  }
  return out;
}

CField random_cfield(int h, int w, std::uint64_t seed) {
  CField f(h, w);
  SplitMix64 rng(seed);
  for (auto& z : f.a)
    z = Complex(rng.uniform_range(-1, 1), rng.uniform_range(-1, 1));
  return f;
}

std::vector<double> random_real(std::size_t n, std::uint64_t seed) {
  std::vector<double> x(n);
  SplitMix64 rng(seed);
  for (auto& v : x) v = rng.uniform_range(-1, 1);
  return x;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// real pairing Re<a, b> = sum Re(a conj(b))
double cdot_re(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] * std::conj(b[i])).real();
  return s;
}

}  // namespace

TEST_CASE("fft matches a frozen length-4 transform") {
  CField f(1, 4);
  f.a = {Complex(1, 0), Complex(2, 0), Complex(3, 0), Complex(4, 0)};
  CField F = fft2(f);
  CHECK(F.a[0].real() == Catch::Approx(10.0).margin(1e-12));
  CHECK(F.a[1].real() == Catch::Approx(-2.0).margin(1e-12));
  CHECK(F.a[1].imag() == Catch::Approx(2.0).margin(1e-12));
  CHECK(F.a[2].real() == Catch::Approx(-2.0).margin(1e-12));
  CHECK(F.a[3].imag() == Catch::Approx(-2.0).margin(1e-12));
}

TEST_CASE("fft agrees with the quadratic reference on pow2 and odd lengths") {
  for (int n : {8, 6, 7, 12, 15}) {
    CField f = random_cfield(1, n, 1000 + static_cast<std::uint64_t>(n));
    const std::vector<Complex> ref = dft_ref(f.a, false);
    const std::vector<Complex> refi = dft_ref(f.a, true);
    CField F = fft2(f, false);
    CField Fi = fft2(f, true);
    for (int k = 0; k < n; ++k) {
      REQUIRE(std::abs(F.a[k] - ref[k]) < 1e-10);
      REQUIRE(std::abs(Fi.a[k] - refi[k]) < 1e-10);
    }
  }
}

TEST_CASE("fft2 round-trips with explicit normalization") {
  for (auto [h, w] : {std::pair{8, 8}, {6, 10}, {5, 7}}) {
    CField f = random_cfield(h, w, 7);
    CField back = fft2(fft2(f, false), true);
    const double inv = 1.0 / (h * w);
    for (std::size_t k = 0; k < f.a.size(); ++k)
      REQUIRE(std::abs(back.a[k] * inv - f.a[k]) < 1e-12);
  }
}

TEST_CASE("fft2 is linear and satisfies parseval") {
  const int h = 8, w = 12;
  CField x = random_cfield(h, w, 11), y = random_cfield(h, w, 12);
  const Complex a(0.7, -0.3);
  CField mix(h, w);
  for (std::size_t k = 0; k < x.a.size(); ++k) mix.a[k] = a * x.a[k] + y.a[k];
  CField Fmix = fft2(mix), Fx = fft2(x), Fy = fft2(y);
  double e2 = 0.0, f2 = 0.0;
  for (std::size_t k = 0; k < x.a.size(); ++k) {
    REQUIRE(std::abs(Fmix.a[k] - (a * Fx.a[k] + Fy.a[k])) < 1e-10);
    e2 += std::norm(x.a[k]);
    f2 += std::norm(Fx.a[k]);
  }
  CHECK(f2 / (h * w) == Catch::Approx(e2).epsilon(1e-12));
}

TEST_CASE("rfft2 truncates the full transform and irfft2 inverts it") {
  for (auto [h, w] : {std::pair{8, 8}, {6, 10}, {6, 7}}) {
    const std::vector<double> x = random_real(static_cast<std::size_t>(h) * w, 21);
    CField half = rfft2(x, h, w);
    REQUIRE(half.w == w / 2 + 1);
    CField full(h, w);
    for (std::size_t k = 0; k < x.size(); ++k) full.a[k] = Complex(x[k], 0);
    full = fft2(full);
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < half.w; ++j)
        REQUIRE(std::abs(half.at(i, j) - full.at(i, j)) < 1e-10);
    const std::vector<double> back = irfft2(half, w);
    for (std::size_t k = 0; k < x.size(); ++k)
      REQUIRE(back[k] == Catch::Approx(x[k]).margin(1e-12));
  }
}

TEST_CASE("rfft2 adjoint identity holds") {
  for (auto [h, w] : {std::pair{8, 8}, {6, 7}}) {
    const std::vector<double> x = random_real(static_cast<std::size_t>(h) * w, 31);
    CField y = random_cfield(h, rfft_width(w), 32);
    const double lhs = cdot_re(rfft2(x, h, w).a, y.a);
    const double rhs = dot(x, rfft2_adjoint(y, w));
    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("irfft2 adjoint identity holds") {
  for (auto [h, w] : {std::pair{8, 8}, {6, 10}, {5, 7}}) {
    CField a = random_cfield(h, rfft_width(w), 41);
    const std::vector<double> g = random_real(static_cast<std::size_t>(h) * w, 42);
    const double lhs = dot(irfft2(a, w), g);
    const double rhs = cdot_re(a.a, irfft2_adjoint(g, h, w).a);
    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("spectral conv of a constant picks the dc coefficient") {
  SpectrumBlock P(1, 1, 1, 1);
  P.coeffs[0] = Complex(2.0, 0.5);
  Tensor v({8, 8, 1});
  v.fill(3.0);
  Tensor out = spectral_conv(v, P);
  for (std::size_t k = 0; k < out.size(); ++k)
    REQUIRE(out[k] == Catch::Approx(6.0).margin(1e-12));  // Re(p) * 3
}

TEST_CASE("spectral conv is linear in its input") {
  SpectrumBlock P(3, 3, 2, 2);
  SplitMix64 rng(50);
  for (auto& c : P.coeffs)
    c = Complex(rng.uniform_range(-1, 1), rng.uniform_range(-1, 1));
  Tensor v1({8, 8, 2}), v2({8, 8, 2});
  for (std::size_t k = 0; k < v1.size(); ++k) {
    v1[k] = rng.uniform_range(-1, 1);
    v2[k] = rng.uniform_range(-1, 1);
  }
  Tensor mix({8, 8, 2});
  for (std::size_t k = 0; k < mix.size(); ++k) mix[k] = 0.6 * v1[k] - 1.7 * v2[k];
  Tensor o1 = spectral_conv(v1, P), o2 = spectral_conv(v2, P);
  Tensor om = spectral_conv(mix, P);
  for (std::size_t k = 0; k < om.size(); ++k)
    REQUIRE(om[k] == Catch::Approx(0.6 * o1[k] - 1.7 * o2[k]).margin(1e-10));
}

TEST_CASE("spectral conv evaluates band-limited inputs resolution-invariantly") {
  SpectrumBlock P(2, 2, 1, 1);
  SplitMix64 rng(60);
  for (auto& c : P.coeffs)
    c = Complex(rng.uniform_range(-1, 1), rng.uniform_range(-1, 1));
  // continuum input: sum of retained modes only (|ky| <= 1, kx <= 1)
  auto func = [](double y, double x) {
    return 1.0 + 0.5 * std::cos(kTau * y) + 0.25 * std::sin(kTau * x) +
           0.1 * std::cos(kTau * (x + y));
  };
  auto eval = [&](int n) {
    Tensor v({static_cast<std::size_t>(n), static_cast<std::size_t>(n), 1});
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        v.at3(i, j, 0) = func(static_cast<double>(i) / n, static_cast<double>(j) / n);
    return spectral_conv(v, P);
  };
  Tensor coarse = eval(16), fine = eval(32);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      REQUIRE(coarse.at3(i, j, 0) ==
              Catch::Approx(fine.at3(2 * i, 2 * j, 0)).margin(1e-10));
}

TEST_CASE("spectral coefficients above the grid limit are rejected") {
  SpectrumBlock P(5, 5, 1, 1);
  Tensor v({8, 8, 1});
  CHECK_THROWS(spectral_conv(v, P));  // needs H >= 10
}

TEST_CASE("spectral conv backward matches the adjoint identities") {
  const int h = 8, w = 10, ci = 2, co = 3;
  SpectrumBlock P(2, 3, ci, co);
  SplitMix64 rng(70);
  for (auto& c : P.coeffs)
    c = Complex(rng.uniform_range(-1, 1), rng.uniform_range(-1, 1));
  Tensor v({h, w, ci});
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = rng.uniform_range(-1, 1);
  Tensor G({h, w, co});
  for (std::size_t k = 0; k < G.size(); ++k) G[k] = rng.uniform_range(-1, 1);

  SpectralCache cache;
  Tensor out = spectral_conv(v, P, &cache);
  std::vector<Complex> gP(P.coeffs.size(), Complex(0, 0));
  Tensor gv;
  spectral_conv_backward(G, P, cache, gP, &gv);

  const double loss = dot(out.data, G.data);
  // linear in v: <K v, G> = <v, K* G>
  CHECK(loss == Catch::Approx(dot(v.data, gv.data)).epsilon(1e-10));
  // linear in P: <K_P v, G> = Re<P, gP>
  CHECK(loss == Catch::Approx(cdot_re(P.coeffs, gP)).epsilon(1e-10));
}

TEST_CASE("spectral conv backward matches finite differences") {
  const int h = 8, w = 8, ci = 2, co = 2;
  SpectrumBlock P(2, 2, ci, co);
  SplitMix64 rng(80);
  for (auto& c : P.coeffs)
    c = Complex(rng.uniform_range(-1, 1), rng.uniform_range(-1, 1));
  Tensor v({h, w, ci});
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = rng.uniform_range(-1, 1);
  Tensor G({h, w, co});
  for (std::size_t k = 0; k < G.size(); ++k) G[k] = rng.uniform_range(-1, 1);

  SpectralCache cache;
  spectral_conv(v, P, &cache);
  std::vector<Complex> gP(P.coeffs.size(), Complex(0, 0));
  Tensor gv;
  spectral_conv_backward(G, P, cache, gP, &gv);

  auto loss_at = [&](const Tensor& vv, const SpectrumBlock& PP) {
    return dot(spectral_conv(vv, PP).data, G.data);
  };
  const double step = 1e-6;
  for (std::size_t k : {std::size_t{0}, v.size() / 2, v.size() - 1}) {
    Tensor vp = v, vm = v;
    vp[k] += step;
    vm[k] -= step;
    const double fd = (loss_at(vp, P) - loss_at(vm, P)) / (2 * step);
    REQUIRE(gv[k] == Catch::Approx(fd).margin(1e-6));
  }
  for (std::size_t k : {std::size_t{0}, P.coeffs.size() / 2, P.coeffs.size() - 1}) {
    SpectrumBlock Pp = P, Pm = P;
    Pp.coeffs[k] += step;
    Pm.coeffs[k] -= step;
    const double fd_re = (loss_at(v, Pp) - loss_at(v, Pm)) / (2 * step);
    Pp.coeffs[k] = P.coeffs[k] + Complex(0, step);
    Pm.coeffs[k] = P.coeffs[k] - Complex(0, step);
    const double fd_im = (loss_at(v, Pp) - loss_at(v, Pm)) / (2 * step);
    REQUIRE(gP[k].real() == Catch::Approx(fd_re).margin(1e-6));
    REQUIRE(gP[k].imag() == Catch::Approx(fd_im).margin(1e-6));
  }
}

TEST_CASE("central gradient reproduces linear fields exactly") {
  ScalarField f(6, 9, FieldKind::kValue);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 9; ++j)
      f.at(i, j) = 2.0 * cell_center_x(OccupancyGrid(6, 9), j) -
                   3.0 * (i + 0.5) * f.cell_size + 1.0;
  GradientField g = central_gradient(f);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 9; ++j) {
      REQUIRE(g.gx.at(i, j) == Catch::Approx(2.0).margin(1e-9));
      REQUIRE(g.gy.at(i, j) == Catch::Approx(-3.0).margin(1e-9));
    }
  }
}

TEST_CASE("central gradient stays finite next to obstacles") {
  ScalarField f(5, 5, FieldKind::kValue);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) f.at(i, j) = i + j;
  f.at(2, 2) = std::numeric_limits<double>::infinity();
  GradientField g = central_gradient(f);
  for (std::size_t k = 0; k < g.gx.size(); ++k) {
    REQUIRE(std::isfinite(g.gx.values[k]));
    REQUIRE(std::isfinite(g.gy.values[k]));
  }
  // one-sided fallback next to the infinite cell
  CHECK(g.gx.at(2, 1) == Catch::Approx((f.at(2, 1) - f.at(2, 0)) / f.cell_size));
}

TEST_CASE("bilinear sampling is exact on linear fields and clamps outside") {
  ScalarField f(8, 8, FieldKind::kValue);
  const double h = f.cell_size;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) f.at(i, j) = 4.0 * (j + 0.5) * h + 2.0 * (i + 0.5) * h;
  CHECK(bilinear_sample(f, 0.3, 0.4) == Catch::Approx(4.0 * 0.3 + 2.0 * 0.4).margin(1e-12));
  CHECK(bilinear_sample(f, 0.5001, 0.25) ==
        Catch::Approx(4.0 * 0.5001 + 2.0 * 0.25).margin(1e-3));
  // outside the center hull the sample clamps to border values
  CHECK(bilinear_sample(f, -1.0, 0.25) ==
        Catch::Approx(4.0 * 0.5 * h + 2.0 * 0.25).margin(1e-12));
  f.at(3, 3) = std::numeric_limits<double>::infinity();
  CHECK(std::isinf(bilinear_sample(f, cell_center_x(OccupancyGrid(8, 8), 3) + 0.01,
                                   cell_center_y(OccupancyGrid(8, 8), 3))));
}
