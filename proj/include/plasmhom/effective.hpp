// SPDX-License-Identifier: Apache-2.0

#ifndef PLASMHOM_EFFECTIVE_HPP
#define PLASMHOM_EFFECTIVE_HPP

#include "plasmhom/cellsolver.hpp"
#include "plasmhom/core.hpp"
#include "plasmhom/mesh.hpp"

namespace plasmhom {

/// Effective permittivity with its coercivity margin and the entrywise
/// gap between the direct-average and energy-form assemblies.
struct EffectiveTensor {
  Matrix3c eps_eff = Matrix3c::Zero();
  double coercivity = 0.0;
  double formula_gap = 0.0;
};

namespace detail {

// Shared quadrature walk for both effective-tensor formulas. The energy
// flag switches the test direction from e_i to e_i + conj(grad chi_i).
inline Matrix3c effective_tensor_impl(const CellSystem& sys, const CellSolution& sol,
                                      bool energy) {
  const PeriodicMesh& mesh = sys.mesh;
  const int n1 = mesh.resolution;
  const double h = mesh.spacing();
  const Complex inv_iw = 1.0 / Complex(0.0, sys.materials.omega);
  ProblemFields fields(mesh, sys.materials, sys.x_macro);
  const auto& g2 = gauss2();
  Matrix3c result = Matrix3c::Zero();

  std::array<double, 8> sv;
  std::array<Vector3d, 8> sg;
  for (int ei = 0; ei < n1; ++ei) {
    for (int ej = 0; ej < n1; ++ej) {
      for (int ek = 0; ek < n1; ++ek) {
        auto nodes = mesh.element_nodes(ei, ej, ek);
        Vector3d origin = mesh.element_origin(ei, ej, ek);
        for (int qa = 0; qa < 2; ++qa) {
          for (int qb = 0; qb < 2; ++qb) {
            for (int qc = 0; qc < 2; ++qc) {
              Vector3d xi(g2[qa], g2[qb], g2[qc]);
              shape_trilinear(xi, sv, sg);
              auto vd = fields.volume(origin + h * xi);
              const double wq = h * h * h / 8.0;
              Eigen::Matrix3cd amb;  // column j: t_j + grad chi_j
              for (int j = 0; j < 3; ++j) {
                Vector3c grad = Vector3c::Zero();
                for (int c = 0; c < 8; ++c)
                  grad += sol.chi[j][nodes[c]] * (sg[c] / h);
                amb.col(j) = vd.directions.col(j).cast<Complex>() + grad;
              }
              Matrix3c flux = vd.eps * amb;  // eps-tilde (t_j + grad chi_j)
              if (energy) {
                result.noalias() += wq * (amb.conjugate().transpose() * flux);
              } else {
                result.noalias() +=
                    wq * (vd.grad_g.cast<Complex>() * flux);
              }
            }
          }
        }
      }
    }
  }

  for (const auto& f : mesh.sheet_faces) {
    auto nodes = mesh.face_nodes(f);
    for (int qa = 0; qa < 2; ++qa) {
      for (int qb = 0; qb < 2; ++qb) {
        Eigen::Vector2d xi(g2[qa], g2[qb]);
        Eigen::Vector2d yp((f.i + xi[0]) * h, (f.j + xi[1]) * h);
        auto sd = fields.surface(yp);
        const double wq = h * h / 4.0;
        Eigen::Matrix<double, 2, 4> grads;
        for (int c = 0; c < 4; ++c) {
          double f0 = (c & 1) ? xi[0] : 1.0 - xi[0];
          double f1 = (c & 2) ? xi[1] : 1.0 - xi[1];
          grads(0, c) = ((c & 1) ? 1.0 : -1.0) * f1 / h;
          grads(1, c) = f0 * ((c & 2) ? 1.0 : -1.0) / h;
        }
        Eigen::Matrix<Complex, 2, 3> amb;  // in-plane t_j + grad_T chi_j
        for (int j = 0; j < 3; ++j) {
          Eigen::Vector2cd grad = Eigen::Vector2cd::Zero();
          for (int c = 0; c < 4; ++c)
            grad += sol.chi[j][nodes[c]] * grads.col(c);
          amb.col(j) = sd.directions.col(j).cast<Complex>() + grad;
        }
        Eigen::Matrix<Complex, 2, 3> flux = sd.sigma * amb;
        if (energy) {
          result.noalias() -= (inv_iw * wq) * (amb.conjugate().transpose() * flux);
        } else {
          result.noalias() -=
              (inv_iw * wq) *
              (sd.directions.cast<Complex>().transpose() * flux);
        }
      }
    }
  }
  return result;
}

}  // namespace detail

/// Direct-average assembly of the effective permittivity: bulk average
/// of eps (I + grad chi) minus the scaled sheet average of
/// sigma P_T (I + grad chi).
inline Matrix3c effective_tensor(const CellSystem& sys, const CellSolution& sol) {
  return detail::effective_tensor_impl(sys, sol, false);
}

/// Energy-form assembly pairing e_j + grad chi_j against
/// e_i + conj(grad chi_i) in both integrals.
inline Matrix3c effective_tensor_energy(const CellSystem& sys,
                                        const CellSolution& sol) {
  return detail::effective_tensor_impl(sys, sol, true);
}

/// Both assemblies with gap and coercivity diagnostics.
inline EffectiveTensor compute_effective(const CellSystem& sys,
                                         const CellSolution& sol,
                                         long coercivity_samples = 256) {
  EffectiveTensor t;
  t.eps_eff = effective_tensor(sys, sol);
  Matrix3c alt = effective_tensor_energy(sys, sol);
  t.formula_gap = (t.eps_eff - alt).cwiseAbs().maxCoeff();
  t.coercivity = coercivity_margin(t.eps_eff, coercivity_samples);
  return t;
}

/// Maximum finite-difference divergence of the columns of eps over the
/// mesh quadrature points, relative to the coefficient magnitude.
inline double divergence_defect(const PeriodicMesh& mesh, const MaterialModel& m,
                                const Vector3d& x_macro = Vector3d::Zero()) {
  const int n1 = mesh.resolution;
  const double h = mesh.spacing();
  const double delta = h / 4.0;
  const auto& g2 = detail::gauss2();
  double worst = 0.0, scale = 0.0;
  for (int ei = 0; ei < n1; ++ei) {
    for (int ej = 0; ej < n1; ++ej) {
      for (int ek = 0; ek < n1; ++ek) {
        Vector3d origin = mesh.element_origin(ei, ej, ek);
        for (int qa = 0; qa < 2; ++qa) {
          for (int qb = 0; qb < 2; ++qb) {
            for (int qc = 0; qc < 2; ++qc) {
              Vector3d y = origin + h * Vector3d(g2[qa], g2[qb], g2[qc]);
              scale = std::max(scale,
                               m.epsilon(x_macro, wrap_unit(y)).cwiseAbs().maxCoeff());
              for (int j = 0; j < 3; ++j) {
                Complex div = 0.0;
                for (int d = 0; d < 3; ++d) {
                  Vector3d yp = y, ym = y;
                  yp[d] += delta;
                  ym[d] -= delta;
                  div += (m.epsilon(x_macro, wrap_unit(yp))(d, j) -
                          m.epsilon(x_macro, wrap_unit(ym))(d, j)) /
                         (2.0 * delta);
                }
                worst = std::max(worst, std::abs(div));
              }
            }
          }
        }
      }
    }
  }
  return scale > 0.0 ? worst / scale : worst;
}

/// Zero-corrector average valid when the columns of eps are divergence
/// free: eps_eff = int_Y eps dy - (1/i omega) int_Sigma sigma P_T do.
/// The precondition is checked numerically by centered differences.
inline Matrix3c analytic_simple(const MaterialModel& m, const CellGeometry& geometry,
                                double div_tol = 1e-12,
                                const Vector3d& x_macro = Vector3d::Zero()) {
  PeriodicMesh mesh = build_mesh(geometry);
  double defect = divergence_defect(mesh, m, x_macro);
  if (defect > div_tol)
    throw std::invalid_argument(
        "analytic_simple: eps columns are not divergence free (defect " +
        std::to_string(defect) + ")");
  CellSystem sys;
  sys.mesh = mesh;
  sys.materials = m;
  sys.x_macro = x_macro;
  CellSolution zero;
  for (auto& c : zero.chi) c = Eigen::VectorXcd::Zero(mesh.node_count());
  return detail::effective_tensor_impl(sys, zero, false);
}

/// Critical sheet spacing of the epsilon-near-zero regime,
/// d0 = (-i sigma_sheet / (omega eps_host)) / mean(f), split into its
/// real part and the magnitude of the imaginary residue (small when
/// Re sigma is nearly zero).
struct EnzSpacing {
  double d0 = 0.0;
  double imag_residue = 0.0;
};

inline EnzSpacing enz_spacing(Complex sigma_sheet, double omega, Complex eps_host,
                              double f_mean) {
  if (f_mean <= 0.0) throw std::invalid_argument("enz_spacing: f_mean must be > 0");
  if (sigma_sheet.imag() <= 0.0)
    throw std::invalid_argument("enz_spacing: Im(sigma_sheet) > 0 required");
  Complex d0 = (-Complex(0, 1) * sigma_sheet) / (omega * eps_host) / f_mean;
  return EnzSpacing{d0.real(), std::abs(d0.imag())};
}

/// Independent 1D oracle for a layered profile eps(t) along the sheet
/// normal with constant scalar sigma: tangential entries are the plain
/// average plus i sigma / omega, the normal entry is the harmonic mean.
/// Midpoint quadrature on a fine periodic grid, no FEM machinery.
inline Matrix3c layered_closed_form(const std::function<Complex(double)>& eps_profile,
                                    Complex sigma_const, double omega,
                                    int normal_axis = 3, long points = 1 << 14) {
  Complex mean = 0.0, inv_mean = 0.0;
  for (long i = 0; i < points; ++i) {
    Complex e = eps_profile((i + 0.5) / points);
    if (std::abs(e) == 0.0)
      throw std::invalid_argument("layered_closed_form: eps vanishes on the profile");
    mean += e;
    inv_mean += 1.0 / e;
  }
  mean /= static_cast<double>(points);
  inv_mean /= static_cast<double>(points);
  Complex tangential = mean + Complex(0, 1) * sigma_const / omega;
  Matrix3c t = tangential * Matrix3c::Identity();
  t(normal_axis - 1, normal_axis - 1) = 1.0 / inv_mean;
  return t;
}

}  // namespace plasmhom

#endif  // PLASMHOM_EFFECTIVE_HPP
