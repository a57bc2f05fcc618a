// SPDX-License-Identifier: Apache-2.0

#ifndef PLASMHOM_TWOSCALE_HPP
#define PLASMHOM_TWOSCALE_HPP

#include <vector>

#include <fftw3.h>

#include "plasmhom/core.hpp"

namespace plasmhom {

/// Complex vector field sampled on a uniform M^3 grid over the unit cell,
/// index (i,j,k) -> (i M + j) M + k.
struct PeriodicField {
  int m = 0;
  std::vector<Vector3c> samples;

  static PeriodicField sample(int m,
                              const std::function<Vector3c(const Vector3d&)>& f) {
    PeriodicField p;
    p.m = m;
    p.samples.resize(static_cast<size_t>(m) * m * m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          p.samples[(static_cast<size_t>(i) * m + j) * m + k] =
              f(Vector3d(double(i) / m, double(j) / m, double(k) / m));
    return p;
  }

  Vector3c mean() const {
    Vector3c acc = Vector3c::Zero();
    for (const auto& v : samples) acc += v;
    return acc / double(samples.size());
  }
};

struct ScalarField {
  int m = 0;
  std::vector<Complex> samples;
};

namespace detail {

// In-place forward/backward DFT of a scalar grid via FFTW; backward is
// normalized so the pair is an identity.
inline void dft3(std::vector<Complex>& data, int m, int sign) {
  fftw_plan plan = fftw_plan_dft_3d(
      m, m, m, reinterpret_cast<fftw_complex*>(data.data()),
      reinterpret_cast<fftw_complex*>(data.data()), sign, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  if (sign == FFTW_BACKWARD) {
    double scale = 1.0 / (double(m) * m * m);
    for (auto& c : data) c *= scale;
  }
}

// Signed integer frequency of DFT index i on an m-point grid.
inline int dft_freq(int i, int m) { return i <= m / 2 ? i : i - m; }

}  // namespace detail

/// Arithmetic mean of the samples.
template <typename Field>
auto cell_average(const Field& f) {
  if (f.samples.empty())
    throw std::invalid_argument("cell_average: empty sample set");
  typename std::decay_t<decltype(f.samples[0])> acc = f.samples[0];
  for (size_t i = 1; i < f.samples.size(); ++i) acc += f.samples[i];
  acc *= 1.0 / double(f.samples.size());
  return acc;
}

/// Spectral reconstruction of the zero-mean scalar potential of a
/// curl-free periodic field: coefficients d_k = (c_k . k) / (i 2 pi |k|^2).
/// Rejects fields with nonzero mean or a discrete curl beyond curl_tol
/// (relative).
inline ScalarField fourier_potential(const PeriodicField& f,
                                     double curl_tol = 1e-8) {
  const int m = f.m;
  const size_t n = f.samples.size();
  if (m < 2 || n != static_cast<size_t>(m) * m * m)
    throw std::invalid_argument("fourier_potential: bad grid");
  std::array<std::vector<Complex>, 3> comp;
  double f_norm_sq = 0.0;
  for (int c = 0; c < 3; ++c) {
    comp[c].resize(n);
    for (size_t i = 0; i < n; ++i) comp[c][i] = f.samples[i][c];
  }
  for (const auto& v : f.samples) f_norm_sq += v.squaredNorm();
  double f_norm = std::sqrt(f_norm_sq / double(n));
  double mean_norm = f.mean().norm();
  if (mean_norm > 1e-10 * std::max(f_norm, 1e-300))
    throw std::invalid_argument("fourier_potential: nonzero mean input");

  for (int c = 0; c < 3; ++c) detail::dft3(comp[c], m, FFTW_FORWARD);

  std::vector<Complex> phi(n, 0.0);
  double curl_sq = 0.0, coef_sq = 0.0;
  const Complex i2pi(0.0, 2.0 * M_PI);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      for (int c = 0; c < m; ++c) {
        size_t idx = (static_cast<size_t>(a) * m + b) * m + c;
        Vector3d k(detail::dft_freq(a, m), detail::dft_freq(b, m),
                   detail::dft_freq(c, m));
        Vector3c ck(comp[0][idx], comp[1][idx], comp[2][idx]);
        coef_sq += ck.squaredNorm();
        double k_sq = k.squaredNorm();
        if (k_sq == 0.0) continue;
        Vector3c kc = k.cast<Complex>();
        curl_sq += (kc.cross(ck)).squaredNorm() / k_sq;
        phi[idx] = (ck.transpose() * kc)(0) / (i2pi * k_sq);
      }
    }
  }
  if (coef_sq > 0.0 && std::sqrt(curl_sq / coef_sq) > curl_tol)
    throw std::invalid_argument("fourier_potential: input is not curl free");
  detail::dft3(phi, m, FFTW_BACKWARD);
  ScalarField out;
  out.m = m;
  out.samples = std::move(phi);
  return out;
}

/// Spectral gradient of a periodic scalar field.
inline PeriodicField spectral_gradient(const ScalarField& phi) {
  const int m = phi.m;
  const size_t n = phi.samples.size();
  std::vector<Complex> hat = phi.samples;
  detail::dft3(hat, m, FFTW_FORWARD);
  std::array<std::vector<Complex>, 3> comp;
  for (int c = 0; c < 3; ++c) comp[c].assign(n, 0.0);
  const Complex i2pi(0.0, 2.0 * M_PI);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        size_t idx = (static_cast<size_t>(a) * m + b) * m + c;
        Vector3d k(detail::dft_freq(a, m), detail::dft_freq(b, m),
                   detail::dft_freq(c, m));
        for (int d = 0; d < 3; ++d) comp[d][idx] = i2pi * k[d] * hat[idx];
      }
  for (int c = 0; c < 3; ++c) detail::dft3(comp[c], m, FFTW_BACKWARD);
  PeriodicField out;
  out.m = m;
  out.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    out.samples[i] = Vector3c(comp[0][i], comp[1][i], comp[2][i]);
  return out;
}

/// Finite-d pairing integral and its two-scale limit.
struct PairingResult {
  Complex finite_d = 0.0;
  Complex limit = 0.0;
};

using TwoScaleFunction = std::function<Vector3c(const Vector3d& x, const Vector3d& y)>;

namespace detail {

inline Complex pairing_midpoint(const TwoScaleFunction& u, const TwoScaleFunction& psi,
                                double d, const std::array<int, 3>& grid) {
  Complex acc = 0.0;
  for (int a = 0; a < grid[0]; ++a)
    for (int b = 0; b < grid[1]; ++b)
      for (int c = 0; c < grid[2]; ++c) {
        Vector3d x((a + 0.5) / grid[0], (b + 0.5) / grid[1], (c + 0.5) / grid[2]);
        Vector3d y = wrap_unit(x / d);
        acc += (u(x, y).transpose() * psi(x, y))(0);
      }
  return acc / (double(grid[0]) * grid[1] * grid[2]);
}

}  // namespace detail

/// Integrates int_Omega U(x, x/d) . Psi(x, x/d) dx over the unit cube by
/// midpoint rule on an anisotropic grid, plus the separate two-scale
/// limit int_Omega int_Y U . Psi dy dx. Under-resolution is detected by
/// disagreement between the grid and its per-dimension doubling.
inline PairingResult two_scale_pairing(const TwoScaleFunction& u,
                                       const TwoScaleFunction& psi, double d,
                                       const std::array<int, 3>& grid,
                                       const std::array<int, 3>& macro_grid = {8, 8, 8},
                                       const std::array<int, 3>& cell_grid = {8, 8, 8},
                                       double richardson_tol = 1e-3) {
  for (int g : grid)
    if (g < 1) throw std::invalid_argument("two_scale_pairing: bad grid");
  Complex coarse = detail::pairing_midpoint(u, psi, d, grid);
  std::array<int, 3> fine_grid = {2 * grid[0], 2 * grid[1], 2 * grid[2]};
  Complex fine = detail::pairing_midpoint(u, psi, d, fine_grid);
  double scale = std::max({std::abs(coarse), std::abs(fine), 1.0});
  if (std::abs(fine - coarse) > richardson_tol * scale)
    throw std::runtime_error("two_scale_pairing: grid does not resolve x/d");

  Complex limit = 0.0;
  for (int a = 0; a < macro_grid[0]; ++a)
    for (int b = 0; b < macro_grid[1]; ++b)
      for (int c = 0; c < macro_grid[2]; ++c) {
        Vector3d x((a + 0.5) / macro_grid[0], (b + 0.5) / macro_grid[1],
                   (c + 0.5) / macro_grid[2]);
        Complex cell = 0.0;
        for (int p = 0; p < cell_grid[0]; ++p)
          for (int q = 0; q < cell_grid[1]; ++q)
            for (int s = 0; s < cell_grid[2]; ++s) {
              Vector3d y((p + 0.5) / cell_grid[0], (q + 0.5) / cell_grid[1],
                         (s + 0.5) / cell_grid[2]);
              cell += (u(x, y).transpose() * psi(x, y))(0);
            }
        limit += cell / (double(cell_grid[0]) * cell_grid[1] * cell_grid[2]);
      }
  limit /= double(macro_grid[0]) * macro_grid[1] * macro_grid[2];
  PairingResult res;
  res.finite_d = fine;
  res.limit = limit;
  return res;
}

}  // namespace plasmhom

#endif  // PLASMHOM_TWOSCALE_HPP
