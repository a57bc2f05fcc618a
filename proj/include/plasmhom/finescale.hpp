// SPDX-License-Identifier: Apache-2.0

#ifndef PLASMHOM_FINESCALE_HPP
#define PLASMHOM_FINESCALE_HPP

#include <algorithm>
#include <vector>

#include "plasmhom/core.hpp"

namespace plasmhom {

/// Embedded tangential current sheet at a fixed position (the optional
/// volume source collapsed to an interface).
struct CurrentSheet {
  double position = 0.0;
  Complex amplitude = 0.0;
};

/// Normal-incidence stack on (-L, L): piecewise-constant host layers,
/// conductive sheets at multiples of the spacing d, impedance closure
/// at both ends.
struct StackProblem {
  double half_length = 1.0;  // L
  double spacing = 0.25;     // d
  double omega = 1.0;
  double mu = 1.0;
  std::vector<double> boundaries;   // layer interfaces, -L .. L
  std::vector<Complex> layer_eps;   // one entry per interval
  std::vector<double> sheet_positions;
  std::vector<Complex> sheet_sigma;  // rescaled values d sigma(kd, 0)
  std::vector<CurrentSheet> sources;
  Complex incident = 1.0;           // tangential E amplitude at -L
  double lambda_left = 1.0;         // impedance coefficients of the closure
  double lambda_right = 1.0;
};

/// Tangential (E, H) traces with the scattering coefficients. t and r
/// include the propagation factor across the whole slab.
struct FieldSolution {
  Complex t = 0.0;
  Complex r = 0.0;
  std::vector<double> grid;
  std::vector<Complex> E, H;
  double det_defect = 0.0;  // worst |det T - 1| over elementary matrices
  std::vector<Eigen::Vector2cd> segment_start;  // (E,H) at each interface
  std::vector<Complex> sheet_E;                 // E at each sheet
};

namespace detail {

inline Complex wavenumber(double omega, double mu, Complex eps) {
  Complex k = omega * std::sqrt(mu * eps);
  if (k.imag() < 0.0) k = -k;
  return k;
}

// Propagation of (E, H) across a uniform layer of thickness t.
inline Eigen::Matrix2cd layer_matrix(Complex eps, double t, double omega,
                                     double mu) {
  Complex k = wavenumber(omega, mu, eps);
  Complex z = std::sqrt(Complex(mu) / eps);
  Complex c = std::cos(k * t), s = std::sin(k * t);
  Eigen::Matrix2cd m;
  m << c, Complex(0, 1) * z * s, Complex(0, 1) * s / z, c;
  return m;
}

// Sheet jump [E] = 0, [H] = -sigma E.
inline Eigen::Matrix2cd sheet_matrix(Complex sigma) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
  m(1, 0) = -sigma;
  return m;
}

// int_0^t exp(a z) dz with a series fallback near a = 0.
inline Complex exp_integral(Complex a, double t) {
  if (std::abs(a) * t < 1e-8) return t * (1.0 + 0.5 * a * t);
  return (std::exp(a * t) - 1.0) / a;
}

}  // namespace detail

/// Assembles the stack for the sheet index set {k : kd in (-L, L-d)}
/// with the host trace eps(x3, x3/d) sampled piecewise-constantly at
/// sub-layer midpoints (sub_layers intervals per period).
inline StackProblem build_stack(const MaterialModel& materials, double d, double L,
                                int sub_layers = 16) {
  if (!(d > 0.0 && d < L))
    throw std::invalid_argument("build_stack: 0 < d < L required");
  if (sub_layers < 1) throw std::invalid_argument("build_stack: sub_layers >= 1");
  StackProblem s;
  s.half_length = L;
  s.spacing = d;
  s.omega = materials.omega;
  s.mu = materials.mu;

  long k_lo = static_cast<long>(std::floor(-L / d)) + 1;  // kd > -L
  long k_hi = static_cast<long>(std::ceil((L - d) / d)) - 1;  // kd < L-d
  for (long k = k_lo; k <= k_hi; ++k) {
    double z = k * d;
    s.sheet_positions.push_back(z);
    Eigen::Matrix2cd sig = materials.sigma(Vector3d(0, 0, z), Eigen::Vector2d(0, 0));
    s.sheet_sigma.push_back(d * sig(0, 0));
  }

  // Sub-layer grid on the absolute lattice m d / sub_layers so that every
  // sheet position is a grid point.
  double step = d / sub_layers;
  long m_lo = static_cast<long>(std::floor(-L / step));
  long m_hi = static_cast<long>(std::ceil(L / step));
  s.boundaries.push_back(-L);
  for (long m = m_lo; m <= m_hi; ++m) {
    double z = m * step;
    if (z > -L + 1e-14 * L && z < L - 1e-14 * L) s.boundaries.push_back(z);
  }
  s.boundaries.push_back(L);
  for (size_t i = 0; i + 1 < s.boundaries.size(); ++i) {
    double zm = 0.5 * (s.boundaries[i] + s.boundaries[i + 1]);
    Matrix3c eps = materials.epsilon(Vector3d(0, 0, zm),
                                     wrap_unit(Vector3d(0, 0, zm / d)));
    s.layer_eps.push_back(eps(0, 0));
  }
  s.lambda_left = std::sqrt(std::max(0.0, s.layer_eps.front().real()) / s.mu);
  s.lambda_right = std::sqrt(std::max(0.0, s.layer_eps.back().real()) / s.mu);
  return s;
}

/// Cascaded 2x2 transfer-matrix solve with incident/outgoing
/// decomposition at both ends. Interleaves layer propagation, sheet
/// jumps and source jumps in position order.
inline FieldSolution transfer_matrix_solve(const StackProblem& s,
                                           long samples = 2048) {
  const size_t nl = s.layer_eps.size();
  if (nl == 0 || s.boundaries.size() != nl + 1)
    throw std::invalid_argument("transfer_matrix_solve: inconsistent stack");
  FieldSolution sol;

  // Events at layer interfaces: optional sheet and/or source jump.
  auto find_events = [&](double z, Complex& sigma, Complex& source) {
    sigma = 0.0;
    source = 0.0;
    for (size_t k = 0; k < s.sheet_positions.size(); ++k)
      if (std::abs(s.sheet_positions[k] - z) < 1e-12) sigma += s.sheet_sigma[k];
    for (const auto& src : s.sources)
      if (std::abs(src.position - z) < 1e-12) source += src.amplitude;
  };

  // Cascade matrix and the affine source contribution:
  // state(L) = M state(-L) + w.
  Eigen::Matrix2cd M = Eigen::Matrix2cd::Identity();
  Eigen::Vector2cd w = Eigen::Vector2cd::Zero();
  double det_defect = 0.0;
  auto apply = [&](const Eigen::Matrix2cd& T) {
    det_defect = std::max(det_defect, std::abs(T.determinant() - 1.0));
    M = T * M;
    w = T * w;
  };
  for (size_t i = 0; i < nl; ++i) {
    Complex sigma, source;
    find_events(s.boundaries[i], sigma, source);
    if (sigma != 0.0) apply(detail::sheet_matrix(sigma));
    if (source != 0.0) w[1] += -source;
    apply(detail::layer_matrix(s.layer_eps[i],
                               s.boundaries[i + 1] - s.boundaries[i], s.omega,
                               s.mu));
  }
  sol.det_defect = det_defect;

  // Closure: E(-L) = inc + r, H(-L) = lambda_l (inc - r); H(L) = lambda_r E(L).
  const Complex inc = s.incident;
  const double ll = s.lambda_left, lr = s.lambda_right;
  Complex denom = M(1, 0) - ll * M(1, 1) - lr * M(0, 0) + lr * ll * M(0, 1);
  Complex numer = lr * M(0, 0) + lr * ll * M(0, 1) - M(1, 0) - ll * M(1, 1);
  Complex r_coeff = numer / denom;
  Complex w_part = (lr * w[0] - w[1]) / denom;
  sol.r = r_coeff * inc + w_part;
  Eigen::Vector2cd state(inc + sol.r, ll * (inc - sol.r));
  sol.t = (M * state + w)[0];

  // Walk again storing interface states and field traces.
  sol.segment_start.resize(nl + 1);
  sol.grid.resize(samples);
  sol.E.resize(samples);
  sol.H.resize(samples);
  sol.sheet_E.assign(s.sheet_positions.size(), 0.0);
  long gi = 0;
  const double L = s.half_length;
  for (size_t i = 0; i < nl; ++i) {
    Complex sigma, source;
    find_events(s.boundaries[i], sigma, source);
    if (sigma != 0.0) state = detail::sheet_matrix(sigma) * state;
    if (source != 0.0) state[1] += -source;
    sol.segment_start[i] = state;
    for (size_t k = 0; k < s.sheet_positions.size(); ++k)
      if (std::abs(s.sheet_positions[k] - s.boundaries[i]) < 1e-12)
        sol.sheet_E[k] = state[0];
    double z0 = s.boundaries[i], z1 = s.boundaries[i + 1];
    while (gi < samples) {
      double z = -L + (gi + 0.5) * (2.0 * L / samples);
      if (z >= z1) break;
      Eigen::Vector2cd v =
          detail::layer_matrix(s.layer_eps[i], z - z0, s.omega, s.mu) * state;
      sol.grid[gi] = z;
      sol.E[gi] = v[0];
      sol.H[gi] = v[1];
      ++gi;
    }
    state = detail::layer_matrix(s.layer_eps[i], z1 - z0, s.omega, s.mu) * state;
  }
  sol.segment_start[nl] = state;
  return sol;
}

/// Relative residual of the discrete power balance: boundary flux drop
/// equals bulk Im(eps) absorption plus sheet Re(sigma) absorption plus
/// source work. Per-layer |E|^2 integrals are evaluated in closed form.
inline double energy_balance_residual(const FieldSolution& sol,
                                      const StackProblem& s) {
  const size_t nl = s.layer_eps.size();
  if (sol.segment_start.size() != nl + 1)
    throw std::invalid_argument("energy_balance_residual: unsolved stack");
  double volume_abs = 0.0;
  for (size_t i = 0; i < nl; ++i) {
    Complex eps = s.layer_eps[i];
    Complex k = detail::wavenumber(s.omega, s.mu, eps);
    Complex z = std::sqrt(Complex(s.mu) / eps);
    Complex e0 = sol.segment_start[i][0], h0 = sol.segment_start[i][1];
    Complex a = 0.5 * (e0 + z * h0), b = 0.5 * (e0 - z * h0);
    double t = s.boundaries[i + 1] - s.boundaries[i];
    double i_aa = detail::exp_integral(Complex(-2.0 * k.imag()), t).real();
    double i_bb = detail::exp_integral(Complex(2.0 * k.imag()), t).real();
    Complex i_ab = detail::exp_integral(Complex(0.0, 2.0 * k.real()), t);
    double e_sq = std::norm(a) * i_aa + std::norm(b) * i_bb +
                  2.0 * (a * std::conj(b) * i_ab).real();
    volume_abs += s.omega * eps.imag() * e_sq;
  }
  double sheet_abs = 0.0;
  for (size_t k = 0; k < s.sheet_sigma.size(); ++k)
    sheet_abs += s.sheet_sigma[k].real() * std::norm(sol.sheet_E[k]);
  double source_work = 0.0;
  for (const auto& src : s.sources) {
    // Power delivered by the impressed sheet current, -Re(E conj(j));
    // E is continuous across the jump.
    for (size_t i = 0; i <= nl; ++i)
      if (i < nl && std::abs(s.boundaries[i] - src.position) < 1e-12)
        source_work -= (sol.segment_start[i][0] * std::conj(src.amplitude)).real();
  }
  Complex e_in = sol.segment_start.front()[0], h_in = sol.segment_start.front()[1];
  Complex e_out = sol.segment_start.back()[0], h_out = sol.segment_start.back()[1];
  double flux_in = (e_in * std::conj(h_in)).real();
  double flux_out = (e_out * std::conj(h_out)).real();
  double lhs = flux_in - flux_out + source_work;
  double rhs = volume_abs + sheet_abs;
  double scale = std::max({std::abs(flux_in), std::abs(flux_out),
                           std::abs(volume_abs) + std::abs(sheet_abs),
                           std::abs(source_work), 1e-300});
  return std::abs(lhs - rhs) / scale;
}

/// Worst relative defect of the sheet interface conditions recomputed
/// from the stored interface states: E continuous, H jump -sigma E.
inline double jump_fidelity(const FieldSolution& sol, const StackProblem& s) {
  double worst = 0.0;
  for (size_t k = 0; k < s.sheet_positions.size(); ++k) {
    // Interface index of the sheet.
    size_t bi = 0;
    while (bi + 1 < s.boundaries.size() &&
           std::abs(s.boundaries[bi] - s.sheet_positions[k]) > 1e-12)
      ++bi;
    if (bi == 0 || bi + 1 >= s.boundaries.size()) continue;
    // State just left of the sheet: propagate the previous segment.
    Eigen::Vector2cd left =
        detail::layer_matrix(s.layer_eps[bi - 1],
                             s.boundaries[bi] - s.boundaries[bi - 1], s.omega,
                             s.mu) *
        sol.segment_start[bi - 1];
    const Eigen::Vector2cd& right = sol.segment_start[bi];
    double scale = std::max(left.norm(), right.norm());
    if (scale == 0.0) continue;
    worst = std::max(worst, std::abs(right[0] - left[0]) / scale);
    Complex jump = right[1] - left[1] + s.sheet_sigma[k] * left[0];
    worst = std::max(worst, std::abs(jump) / scale);
  }
  return worst;
}

/// Single-layer reference solve with the homogenized tangential
/// permittivity and the same boundary closure as the fine-scale stack.
inline FieldSolution homogenized_solution(Complex eps_tangential, double L,
                                          double omega, double mu,
                                          double lambda_left, double lambda_right,
                                          Complex incident = 1.0,
                                          long samples = 2048) {
  StackProblem s;
  s.half_length = L;
  s.spacing = L;  // unused
  s.omega = omega;
  s.mu = mu;
  s.boundaries = {-L, L};
  s.layer_eps = {eps_tangential};
  s.incident = incident;
  s.lambda_left = lambda_left;
  s.lambda_right = lambda_right;
  return transfer_matrix_solve(s, samples);
}

struct ConvergenceRow {
  double d = 0.0;
  double error_e = 0.0;
  double error_h = 0.0;
  double bound_monitor = 0.0;  // |E|^2 volume + d-scaled sheet sum
  Complex t = 0.0;
};

namespace detail {

// Moving average over a centered window, evaluated on the interior
// where the window fits inside the domain.
inline std::vector<Complex> window_average(const std::vector<double>& grid,
                                           const std::vector<Complex>& f,
                                           double half_window, double L,
                                           std::vector<double>* interior = nullptr) {
  std::vector<Complex> out;
  if (interior) interior->clear();
  size_t lo = 0, hi = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    double z = grid[i];
    if (z - half_window < -L || z + half_window > L) continue;
    while (lo < grid.size() && grid[lo] < z - half_window) ++lo;
    if (hi < lo) hi = lo;
    while (hi < grid.size() && grid[hi] <= z + half_window) ++hi;
    Complex acc = 0.0;
    for (size_t j = lo; j < hi; ++j) acc += f[j];
    out.push_back(acc / static_cast<double>(hi - lo));
    if (interior) interior->push_back(z);
  }
  return out;
}

}  // namespace detail

/// d-sweep comparing moving-window averages of the fine-scale fields
/// against the homogenized reference in relative L2 norm on the
/// interior. eps_tangential is the homogenized tangential entry.
inline std::vector<ConvergenceRow> convergence_study(
    const MaterialModel& materials, double L, const std::vector<double>& d_sequence,
    double averaging_window, Complex eps_tangential, int sub_layers = 16,
    long samples = 4096) {
  if (d_sequence.empty())
    throw std::invalid_argument("convergence_study: empty d sequence");
  for (size_t i = 1; i < d_sequence.size(); ++i)
    if (d_sequence[i] >= d_sequence[i - 1])
      throw std::invalid_argument("convergence_study: d must be strictly decreasing");
  if (averaging_window > L / 4.0 + 1e-15)
    throw std::invalid_argument("convergence_study: window must be <= L/4");
  for (double d : d_sequence)
    if (averaging_window < d)
      throw std::invalid_argument("convergence_study: window smaller than spacing");

  std::vector<ConvergenceRow> rows;
  const double hw = averaging_window / 2.0;
  for (double d : d_sequence) {
    StackProblem s = build_stack(materials, d, L, sub_layers);
    FieldSolution fine = transfer_matrix_solve(s, samples);
    FieldSolution ref =
        homogenized_solution(eps_tangential, L, s.omega, s.mu, s.lambda_left,
                             s.lambda_right, s.incident, samples);
    std::vector<double> interior;
    auto fe = detail::window_average(fine.grid, fine.E, hw, L, &interior);
    auto fh = detail::window_average(fine.grid, fine.H, hw, L);
    auto re = detail::window_average(ref.grid, ref.E, hw, L);
    auto rh = detail::window_average(ref.grid, ref.H, hw, L);
    double ne = 0, nh = 0, de = 0, dh = 0;
    for (size_t i = 0; i < fe.size(); ++i) {
      ne += std::norm(fe[i] - re[i]);
      de += std::norm(re[i]);
      nh += std::norm(fh[i] - rh[i]);
      dh += std::norm(rh[i]);
    }
    ConvergenceRow row;
    row.d = d;
    row.error_e = de > 0 ? std::sqrt(ne / de) : std::sqrt(ne);
    row.error_h = dh > 0 ? std::sqrt(nh / dh) : std::sqrt(nh);
    row.t = fine.t;
    double e_sq = 0.0;
    double dz = 2.0 * L / samples;
    for (const Complex& e : fine.E) e_sq += std::norm(e) * dz;
    double sheet_sq = 0.0;
    for (const Complex& e : fine.sheet_E) sheet_sq += std::norm(e);
    row.bound_monitor = e_sq + d * sheet_sq;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace plasmhom

#endif  // PLASMHOM_FINESCALE_HPP
