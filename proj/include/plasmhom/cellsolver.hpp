// SPDX-License-Identifier: Apache-2.0

#ifndef PLASMHOM_CELLSOLVER_HPP
#define PLASMHOM_CELLSOLVER_HPP

#include <random>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "plasmhom/core.hpp"
#include "plasmhom/mesh.hpp"

namespace plasmhom {

using SparseC = Eigen::SparseMatrix<Complex>;
using SparseD = Eigen::SparseMatrix<double>;

/// Assembled Galerkin system of the cell problem: volume and surface
/// parts of the sesquilinear form, the three direction right-hand
/// sides, the discrete H-norm Gram matrix and the zero-mean gauge row.
struct CellSystem {
  long n = 0;
  SparseC A_vol;   // -i omega eps grad u . grad v
  SparseC A_surf;  // sigma grad_T u . grad_T v
  SparseC A;       // A_vol + A_surf (+ optional i eta H shift)
  std::array<Eigen::VectorXcd, 3> rhs;
  SparseD H;       // grad.grad + surface grad_T.grad_T Gram matrix
  double coercivity_estimate = 0.0;  // min(omega min Im eps, min Re sigma)
  double gauge_weight = 0.0;         // entry of the mean-constraint row
  double eta_shift = 0.0;
  PeriodicMesh mesh;
  MaterialModel materials;
  Vector3d x_macro = Vector3d::Zero();
};

/// Three corrector fields with solver diagnostics.
struct CellSolution {
  std::array<Eigen::VectorXcd, 3> chi;
  std::array<double, 3> solver_residuals{{0.0, 0.0, 0.0}};
  std::array<Complex, 3> mean_values{{0.0, 0.0, 0.0}};
};

/// Equivalent flat-sheet material model for a graph-sheet geometry:
/// volume coefficient (grad g)^-1 eps(g(y)) (grad g)^-T (the Jacobian
/// determinant is 1) and surface coefficient sqrt(1+|grad h|^2) sigma G^-1.
inline MaterialModel pullback_coefficients(const MaterialModel& materials,
                                           const CellGeometry& geometry) {
  geometry.validate();
  if (!geometry.is_graph)
    throw std::invalid_argument("pullback_coefficients: geometry must be a graph sheet");
  PeriodicMesh mesh = build_mesh(geometry);
  MaterialModel flat = materials;
  int na = mesh.normal_axis;
  auto ta = mesh.tangential_axes;
  GraphSheet gs = geometry.graph;
  VolumeCoefficient eps = materials.epsilon;
  flat.epsilon = [eps, gs, na, ta](const Vector3d& x, const Vector3d& y) {
    Eigen::Vector2d yp(y[ta[0]], y[ta[1]]);
    Eigen::Vector2d gh = gs.grad_h(yp);
    Vector3d phys = y;
    phys[na] += gs.h(yp);
    Eigen::Matrix3d Jinv = Eigen::Matrix3d::Identity();
    Jinv(na, ta[0]) = -gh[0];
    Jinv(na, ta[1]) = -gh[1];
    return Matrix3c(Jinv * eps(x, wrap_unit(phys)) * Jinv.transpose());
  };
  SurfaceCoefficient sig = materials.sigma;
  flat.sigma = [sig, gs](const Vector3d& x, const Eigen::Vector2d& yp) {
    Eigen::Vector2d gh = gs.grad_h(yp);
    double w = std::sqrt(1.0 + gh.squaredNorm());
    Eigen::Matrix2d G = Eigen::Matrix2d::Identity() + gh * gh.transpose();
    return Eigen::Matrix2cd(w * sig(x, yp) * G.inverse());
  };
  return flat;
}

/// Galerkin assembly of the cell problem over trilinear periodic
/// elements with 2x2x2 Gauss quadrature (2x2 on sheet faces).
inline CellSystem assemble_cell_system(const PeriodicMesh& mesh,
                                       const MaterialModel& materials,
                                       const Vector3d& x_macro = Vector3d::Zero(),
                                       double eta_shift = 0.0) {
  if (mesh.sheet_faces.empty())
    throw std::invalid_argument("assemble_cell_system: empty sheet face list");
  const int n1 = mesh.resolution;
  const double h = mesh.spacing();
  const double omega = materials.omega;
  CellSystem sys;
  sys.n = mesh.node_count();
  sys.mesh = mesh;
  sys.materials = materials;
  sys.x_macro = x_macro;
  sys.eta_shift = eta_shift;
  sys.gauge_weight = h;  // scaled mean row; any nonzero scale fixes the gauge
  for (auto& r : sys.rhs) r = Eigen::VectorXcd::Zero(sys.n);

  ProblemFields fields(mesh, materials, x_macro);
  const auto& g2 = detail::gauss2();
  const Complex iw(0.0, omega);

  std::vector<Eigen::Triplet<Complex>> trip_vol, trip_surf;
  std::vector<Eigen::Triplet<double>> trip_h;
  trip_vol.reserve(static_cast<size_t>(mesh.element_count()) * 64);
  trip_h.reserve(static_cast<size_t>(mesh.element_count()) * 64 +
                 mesh.sheet_faces.size() * 16);
  double min_vol_coer = std::numeric_limits<double>::infinity();
  double min_surf_coer = std::numeric_limits<double>::infinity();

  std::array<double, 8> sv;
  std::array<Vector3d, 8> sg;
  for (int ei = 0; ei < n1; ++ei) {
    for (int ej = 0; ej < n1; ++ej) {
      for (int ek = 0; ek < n1; ++ek) {
        auto nodes = mesh.element_nodes(ei, ej, ek);
        Vector3d origin = mesh.element_origin(ei, ej, ek);
        Eigen::Matrix<Complex, 8, 8> ke = Eigen::Matrix<Complex, 8, 8>::Zero();
        Eigen::Matrix<double, 8, 8> he = Eigen::Matrix<double, 8, 8>::Zero();
        Eigen::Matrix<Complex, 8, 3> re = Eigen::Matrix<Complex, 8, 3>::Zero();
        for (int qa = 0; qa < 2; ++qa) {
          for (int qb = 0; qb < 2; ++qb) {
            for (int qc = 0; qc < 2; ++qc) {
              Vector3d xi(g2[qa], g2[qb], g2[qc]);
              detail::shape_trilinear(xi, sv, sg);
              Vector3d yq = origin + h * xi;
              auto vd = fields.volume(yq);
              const double wq = h * h * h / 8.0;  // equal Gauss weights
              Eigen::Matrix<double, 3, 8> grads;
              for (int c = 0; c < 8; ++c) grads.col(c) = sg[c] / h;
              ke.noalias() +=
                  wq * (grads.transpose() * ((-iw) * vd.eps) * grads).eval();
              he.noalias() += wq * (grads.transpose() * vd.metric * grads).eval();
              for (int j = 0; j < 3; ++j) {
                Vector3c fj = iw * (vd.eps * vd.directions.col(j));
                re.col(j) += wq * (grads.transpose() * fj);
              }
              Eigen::Matrix3d im_eps;
              for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                  im_eps(a, b) = ((vd.eps(a, b) - std::conj(vd.eps(b, a))) /
                                  Complex(0, 2))
                                     .real();
              Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix3d> ges(
                  im_eps, vd.metric, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
              min_vol_coer = std::min(min_vol_coer, ges.eigenvalues().minCoeff());
            }
          }
        }
        for (int a = 0; a < 8; ++a) {
          for (int b = 0; b < 8; ++b) {
            trip_vol.emplace_back(nodes[a], nodes[b], ke(a, b));
            trip_h.emplace_back(nodes[a], nodes[b], he(a, b));
          }
          for (int j = 0; j < 3; ++j) sys.rhs[j][nodes[a]] += re(a, j);
        }
      }
    }
  }

  // Sheet faces: bilinear trace basis, 2x2 Gauss.
  for (const auto& f : mesh.sheet_faces) {
    auto nodes = mesh.face_nodes(f);
    Eigen::Matrix<Complex, 4, 4> ke = Eigen::Matrix<Complex, 4, 4>::Zero();
    Eigen::Matrix<double, 4, 4> he = Eigen::Matrix<double, 4, 4>::Zero();
    Eigen::Matrix<Complex, 4, 3> re = Eigen::Matrix<Complex, 4, 3>::Zero();
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
          double d0 = (c & 1) ? 1.0 : -1.0;
          double d1 = (c & 2) ? 1.0 : -1.0;
          grads(0, c) = d0 * f1 / h;
          grads(1, c) = f0 * d1 / h;
        }
        ke.noalias() += wq * (grads.transpose() * sd.sigma * grads).eval();
        he.noalias() += wq * (grads.transpose() * sd.norm_metric * grads).eval();
        for (int j = 0; j < 3; ++j) {
          Eigen::Vector2cd fj = sd.sigma * sd.directions.col(j);
          re.col(j) += wq * (grads.transpose() * fj);
        }
        Eigen::Matrix2d re_sig;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            re_sig(a, b) =
                ((sd.sigma(a, b) + std::conj(sd.sigma(b, a))) / 2.0).real();
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> ges(
            re_sig, sd.norm_metric, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
        min_surf_coer = std::min(min_surf_coer, ges.eigenvalues().minCoeff());
      }
    }
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        trip_surf.emplace_back(nodes[a], nodes[b], ke(a, b));
        trip_h.emplace_back(nodes[a], nodes[b], he(a, b));
      }
      for (int j = 0; j < 3; ++j) sys.rhs[j][nodes[a]] -= re(a, j);
    }
  }

  sys.A_vol.resize(sys.n, sys.n);
  sys.A_vol.setFromTriplets(trip_vol.begin(), trip_vol.end());
  sys.A_surf.resize(sys.n, sys.n);
  sys.A_surf.setFromTriplets(trip_surf.begin(), trip_surf.end());
  sys.H.resize(sys.n, sys.n);
  sys.H.setFromTriplets(trip_h.begin(), trip_h.end());
  sys.A = sys.A_vol + sys.A_surf;
  if (eta_shift != 0.0) sys.A += Complex(0.0, eta_shift) * sys.H.cast<Complex>();
  sys.coercivity_estimate = std::min(omega * min_vol_coer, min_surf_coer);
  return sys;
}

/// Discrete H norm sqrt(u^H H u).
inline double h_norm(const CellSystem& sys, const Eigen::VectorXcd& u) {
  return std::sqrt(std::max(0.0, (u.adjoint() * (sys.H * u))[0].real()));
}

namespace detail {

inline SparseC augmented_matrix(const CellSystem& sys) {
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(sys.A.nonZeros() + 2 * sys.n);
  for (int k = 0; k < sys.A.outerSize(); ++k)
    for (SparseC::InnerIterator it(sys.A, k); it; ++it)
      trip.emplace_back(it.row(), it.col(), it.value());
  for (long i = 0; i < sys.n; ++i) {
    trip.emplace_back(sys.n, i, Complex(sys.gauge_weight, 0.0));
    trip.emplace_back(i, sys.n, Complex(sys.gauge_weight, 0.0));
  }
  SparseC aug(sys.n + 1, sys.n + 1);
  aug.setFromTriplets(trip.begin(), trip.end());
  return aug;
}

}  // namespace detail

/// Solves the three corrector problems with the zero-mean gauge imposed
/// as a rank-1 constraint. Direct sparse factorization up to N = 16,
/// ILU-preconditioned BiCGSTAB above (3D fill-in makes the direct
/// factorization slower than the runtime budget beyond that).
inline CellSolution solve_correctors(const CellSystem& sys, double tol = 1e-10,
                                     long max_iterations = 20000) {
  if (tol <= 0.0) throw std::invalid_argument("solve_correctors: tol > 0 required");
  CellSolution sol;
  SparseC aug = detail::augmented_matrix(sys);
  const bool direct = sys.mesh.resolution <= 12;

  Eigen::SparseLU<SparseC> lu;
  Eigen::BiCGSTAB<SparseC, Eigen::IncompleteLUT<Complex>> krylov;
  if (direct) {
    lu.compute(aug);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("solve_correctors: factorization failed");
  } else {
    krylov.preconditioner().setDroptol(1e-3);
    krylov.preconditioner().setFillfactor(10);
    krylov.setTolerance(tol * 0.1);
    krylov.setMaxIterations(max_iterations);
    krylov.compute(aug);
  }

  for (int j = 0; j < 3; ++j) {
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(sys.n + 1);
    b.head(sys.n) = sys.rhs[j];
    Eigen::VectorXcd u;
    if (direct) {
      u = lu.solve(b);
    } else {
      u = krylov.solve(b);
      if (krylov.info() != Eigen::Success &&
          krylov.error() > tol * 10)
        throw std::runtime_error(
            "solve_correctors: Krylov iteration did not converge, residual " +
            std::to_string(krylov.error()));
    }
    Eigen::VectorXcd chi = u.head(sys.n);
    double bnorm = b.norm();
    double res = bnorm > 0.0 ? (aug * u - b).norm() / bnorm : 0.0;
    if (res > tol)
      throw std::runtime_error("solve_correctors: solve residual " +
                               std::to_string(res) + " above tolerance");
    sol.chi[j] = chi;
    sol.solver_residuals[j] = res;
    sol.mean_values[j] = chi.mean();
  }
  return sol;
}

/// Independent verification of the solve: max over random periodic test
/// vectors of |b(chi_j, v) - r_j(v)| / (|v|_H * |chi_j|_H).
inline double corrector_residual(const CellSolution& sol, const CellSystem& sys,
                                 int trials, unsigned seed = 12345) {
  if (trials < 1) throw std::invalid_argument("corrector_residual: trials >= 1");
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXcd v(sys.n);
    for (long i = 0; i < sys.n; ++i) v[i] = Complex(gauss(rng), gauss(rng));
    double vn = h_norm(sys, v);
    if (vn == 0.0) continue;
    for (int j = 0; j < 3; ++j) {
      // b(chi_j, v) - r_j(v) = v^H (A chi_j - r_j) for the nodal basis.
      Complex defect = v.dot(sys.A * sol.chi[j] - sys.rhs[j]);
      double num = std::abs(defect);
      if (num == 0.0) continue;
      // The corrector complements a unit macroscopic field, so the
      // natural scale never drops below 1.
      double scale = std::max(1.0, h_norm(sys, sol.chi[j]));
      worst = std::max(worst, num / (vn * scale));
    }
  }
  return worst;
}

}  // namespace plasmhom

#endif  // PLASMHOM_CELLSOLVER_HPP
