// SPDX-License-Identifier: Apache-2.0

#ifndef PLASMHOM_CORE_HPP
#define PLASMHOM_CORE_HPP

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace plasmhom {

using Complex = std::complex<double>;
using Matrix3c = Eigen::Matrix3cd;
using Vector3c = Eigen::Vector3cd;
using Vector3d = Eigen::Vector3d;

/// 3x3 complex tensor for permittivities, conductivities and projectors.
struct ComplexTensor3 {
  Matrix3c entries = Matrix3c::Zero();

  static ComplexTensor3 identity() {
    ComplexTensor3 t;
    t.entries = Matrix3c::Identity();
    return t;
  }
  static ComplexTensor3 scalar(Complex s) {
    ComplexTensor3 t;
    t.entries = s * Matrix3c::Identity();
    return t;
  }
  bool finite() const {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (!std::isfinite(entries(i, j).real()) ||
            !std::isfinite(entries(i, j).imag()))
          return false;
    return true;
  }
};

/// Rank-2 orthogonal projector onto the plane normal to the given axis.
/// Axis numbering is 1-based (1|2|3).
inline Matrix3c tangential_projection(int normal_axis) {
  if (normal_axis < 1 || normal_axis > 3)
    throw std::invalid_argument("tangential_projection: axis must be 1, 2 or 3");
  Matrix3c p = Matrix3c::Identity();
  p(normal_axis - 1, normal_axis - 1) = 0.0;
  return p;
}

/// Volume coefficient field: (x, y) -> 3x3 complex matrix, Y-periodic in y.
using VolumeCoefficient = std::function<Matrix3c(const Vector3d& x, const Vector3d& y)>;
/// Surface coefficient field: (x, y') -> 2x2 complex tangential tensor,
/// periodic in y'. y' are the two in-sheet coordinates of the point on
/// the sheet; scalar conductivities are the scalar multiple of I_2.
using SurfaceCoefficient =
    std::function<Eigen::Matrix2cd(const Vector3d& x, const Eigen::Vector2d& yp)>;

inline double wrap_unit(double t) {
  double w = t - std::floor(t);
  return (w >= 1.0) ? 0.0 : w;
}

inline Vector3d wrap_unit(const Vector3d& y) {
  return Vector3d(wrap_unit(y[0]), wrap_unit(y[1]), wrap_unit(y[2]));
}

/// Material data for the rescaled problem: epsilon(x,y), sigma(x,y'),
/// angular frequency, scalar permeability and the impedance coefficient
/// of the absorbing closure.
struct MaterialModel {
  VolumeCoefficient epsilon;
  SurfaceCoefficient sigma;
  double omega = 1.0;
  double mu = 1.0;
  double lambda_imp = 1.0;

  static MaterialModel constants(Complex eps, Complex sig, double omega = 1.0,
                                 double mu = 1.0) {
    MaterialModel m;
    m.epsilon = [eps](const Vector3d&, const Vector3d&) {
      return Matrix3c(eps * Matrix3c::Identity());
    };
    m.sigma = scalar_sigma(sig);
    m.omega = omega;
    m.mu = mu;
    return m;
  }

  /// Scalar epsilon(y) profile with constant sigma.
  static MaterialModel scalar_profile(std::function<Complex(const Vector3d&)> eps_y,
                                      Complex sig, double omega = 1.0) {
    MaterialModel m;
    m.epsilon = [eps_y](const Vector3d&, const Vector3d& y) {
      return Matrix3c(eps_y(wrap_unit(y)) * Matrix3c::Identity());
    };
    m.sigma = scalar_sigma(sig);
    m.omega = omega;
    return m;
  }

  static SurfaceCoefficient scalar_sigma(Complex sig) {
    return [sig](const Vector3d&, const Eigen::Vector2d&) {
      return Eigen::Matrix2cd(sig * Eigen::Matrix2d::Identity());
    };
  }
};

/// Height-function sheet description. h and its gradient are callables on
/// the two tangential coordinates; both must be Y'-periodic.
struct GraphSheet {
  std::function<double(const Eigen::Vector2d&)> h;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> grad_h;
  int normal_axis = 3;
};

struct FlatSheet {
  int normal_axis = 3;
  double offset = 0.0;
};

/// Unit-cell discretization: structured periodic grid plus sheet placement.
struct CellGeometry {
  int resolution = 8;
  bool is_graph = false;
  FlatSheet flat;
  GraphSheet graph;

  static CellGeometry flat_sheet(int n, int axis = 3, double offset = 0.0) {
    CellGeometry g;
    g.resolution = n;
    g.flat = FlatSheet{axis, offset};
    g.validate();
    return g;
  }
  static CellGeometry graph_sheet(int n, GraphSheet gs) {
    CellGeometry g;
    g.resolution = n;
    g.is_graph = true;
    g.graph = std::move(gs);
    g.validate();
    return g;
  }

  void validate() const {
    if (resolution < 4)
      throw std::invalid_argument("CellGeometry: resolution must be >= 4");
    if (!is_graph) {
      if (flat.normal_axis < 1 || flat.normal_axis > 3)
        throw std::invalid_argument("CellGeometry: normal_axis must be 1, 2 or 3");
      double s = flat.offset * resolution;
      if (flat.offset < 0.0 || flat.offset >= 1.0 ||
          std::abs(s - std::round(s)) > 1e-12)
        throw std::invalid_argument(
            "CellGeometry: flat sheet offset must lie on a grid plane");
    } else {
      if (graph.normal_axis < 1 || graph.normal_axis > 3)
        throw std::invalid_argument("CellGeometry: normal_axis must be 1, 2 or 3");
      if (!graph.h || !graph.grad_h)
        throw std::invalid_argument("CellGeometry: graph sheet needs h and grad_h");
    }
  }

  int normal_axis() const { return is_graph ? graph.normal_axis : flat.normal_axis; }
};

/// Worst-case bounds of the sampled coefficient fields against the
/// admissibility assumption (strictly dissipative bulk, strictly
/// resistive sheet).
struct AdmissibilityReport {
  double min_im_eps = 0.0;
  double max_abs_eps = 0.0;
  double min_re_sigma = 0.0;
  double max_abs_sigma = 0.0;
  bool pass = false;
  long sample_count = 0;
};

namespace detail {

// Radical-inverse (van der Corput) sequence in the given prime base.
inline double radical_inverse(unsigned long n, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (n > 0) {
    r += f * static_cast<double>(n % base);
    n /= base;
    f *= inv;
  }
  return r;
}

inline double min_eig_hermitian_imag(const Matrix3c& m) {
  // Hermitian part of (m - m^H)/(2i).
  Matrix3c im_part = (m - m.adjoint()) / Complex(0.0, 2.0);
  Eigen::SelfAdjointEigenSolver<Matrix3c> es(im_part);
  return es.eigenvalues().minCoeff();
}

inline double min_eig_hermitian_real(const Eigen::Matrix2cd& m) {
  Eigen::Matrix2cd re_part = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(re_part);
  return es.eigenvalues().minCoeff();
}

}  // namespace detail

/// Samples epsilon and sigma over Omega x Y with a deterministic Halton
/// sequence and reports the worst values against the assumption bounds.
/// The floor c defaults to 1e-8 so degenerate lossless inputs fail.
inline AdmissibilityReport check_admissibility(const MaterialModel& m, long samples,
                                               double floor_c = 1e-8) {
  if (samples < 1) throw std::invalid_argument("check_admissibility: samples >= 1");
  static const unsigned primes[8] = {2, 3, 5, 7, 11, 13, 17, 19};
  AdmissibilityReport rep;
  rep.sample_count = samples;
  rep.min_im_eps = std::numeric_limits<double>::infinity();
  rep.min_re_sigma = std::numeric_limits<double>::infinity();
  for (long n = 0; n < samples; ++n) {
    Vector3d x, y;
    Eigen::Vector2d yp;
    for (int k = 0; k < 3; ++k) x[k] = detail::radical_inverse(n + 1, primes[k]);
    for (int k = 0; k < 3; ++k) y[k] = detail::radical_inverse(n + 1, primes[3 + k]);
    for (int k = 0; k < 2; ++k) yp[k] = detail::radical_inverse(n + 1, primes[6 + k]);
    Matrix3c eps = m.epsilon(x, y);
    rep.min_im_eps = std::min(rep.min_im_eps, detail::min_eig_hermitian_imag(eps));
    rep.max_abs_eps = std::max(rep.max_abs_eps, eps.cwiseAbs().maxCoeff());
    Eigen::Matrix2cd sig = m.sigma(x, yp);
    rep.min_re_sigma =
        std::min(rep.min_re_sigma, detail::min_eig_hermitian_real(sig));
    rep.max_abs_sigma = std::max(rep.max_abs_sigma, sig.cwiseAbs().maxCoeff());
  }
  rep.pass = rep.min_im_eps >= floor_c && rep.min_re_sigma >= floor_c &&
             std::isfinite(rep.max_abs_eps) && std::isfinite(rep.max_abs_sigma);
  return rep;
}

/// Minimum of Im(xi^H eps xi)/|xi|^2: exact 3x3 eigen-solve of the
/// Hermitian imaginary part plus unit-sphere sampling as a cross-check.
inline double coercivity_margin(const Matrix3c& eps_eff, long samples = 64) {
  if (samples < 1) throw std::invalid_argument("coercivity_margin: samples >= 1");
  double margin = detail::min_eig_hermitian_imag(eps_eff);
  static const unsigned primes[2] = {2, 3};
  for (long n = 0; n < samples; ++n) {
    double u = detail::radical_inverse(n + 1, primes[0]);
    double v = detail::radical_inverse(n + 1, primes[1]);
    double th = 2.0 * M_PI * u, z = 2.0 * v - 1.0, r = std::sqrt(1.0 - z * z);
    Vector3c xi(r * std::cos(th), r * std::sin(th), z);
    Complex q = xi.dot(eps_eff * xi);  // xi^H eps xi
    margin = std::min(margin, q.imag());
  }
  return margin;
}

}  // namespace plasmhom

#endif  // PLASMHOM_CORE_HPP
