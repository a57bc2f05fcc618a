// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "plasmhom/effective.hpp"

using namespace plasmhom;
using Catch::Approx;

namespace {

struct Solved {
  CellSystem sys;
  CellSolution sol;
};

Solved solve_fixture(const MaterialModel& m, const CellGeometry& g) {
  Solved s;
  s.sys = assemble_cell_system(build_mesh(g), m);
  s.sol = solve_correctors(s.sys);
  return s;
}

GraphSheet sine_sheet(double amp) {
  GraphSheet gs;
  gs.h = [amp](const Eigen::Vector2d& yp) {
    return amp * std::sin(2.0 * M_PI * yp[0]);
  };
  gs.grad_h = [amp](const Eigen::Vector2d& yp) {
    return Eigen::Vector2d(2.0 * M_PI * amp * std::cos(2.0 * M_PI * yp[0]), 0.0);
  };
  return gs;
}

}  // namespace

TEST_CASE("constant bulk without sheet gives the bulk tensor") {
  auto m = MaterialModel::constants({2.0, 0.1}, 0.0);
  auto s = solve_fixture(m, CellGeometry::flat_sheet(8));
  auto eff = effective_tensor(s.sys, s.sol);
  CHECK((eff - Complex(2.0, 0.1) * Matrix3c::Identity()).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("constant bulk with constant sheet adds i sigma / omega tangentially") {
  auto m = MaterialModel::constants({2.0, 0.1}, {0.01, 0.3});
  auto s = solve_fixture(m, CellGeometry::flat_sheet(8));
  auto eff = effective_tensor(s.sys, s.sol);
  Matrix3c want = Complex(2.0, 0.1) * Matrix3c::Identity() +
                  Complex(0, 1) * Complex(0.01, 0.3) * tangential_projection(3);
  CHECK((eff - want).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(eff(0, 0) == eff(1, 1));
  CHECK(eff(0, 0).real() == Approx(1.7));
  CHECK(eff(0, 0).imag() == Approx(0.11));
}

TEST_CASE("two-phase layered bulk matches arithmetic and harmonic means") {
  Complex e1{2.0, 0.1}, e2{4.0, 0.1};
  auto m = MaterialModel::scalar_profile(
      [=](const Vector3d& y) { return y[2] < 0.5 ? e1 : e2; }, 0.0);
  auto s = solve_fixture(m, CellGeometry::flat_sheet(8));
  auto eff = effective_tensor(s.sys, s.sol);
  Complex ma = 0.5 * (e1 + e2), mh = 2.0 * e1 * e2 / (e1 + e2);
  CHECK(std::abs(eff(0, 0) - ma) < 1e-9);
  CHECK(std::abs(eff(1, 1) - ma) < 1e-9);
  CHECK(std::abs(eff(2, 2) - mh) < 1e-9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(std::abs(eff(i, j)) < 1e-9);
}

TEST_CASE("dual-formula agreement on flat and curved fixtures") {
  std::vector<std::pair<MaterialModel, CellGeometry>> fixtures;
  fixtures.emplace_back(MaterialModel::constants({2.0, 0.1}, {0.01, 0.3}),
                        CellGeometry::flat_sheet(8));
  fixtures.emplace_back(
      MaterialModel::scalar_profile(
          [](const Vector3d& y) {
            return Complex(2.0, 0.1) + 0.5 * std::sin(2.0 * M_PI * y[2]);
          },
          {0.01, 0.3}),
      CellGeometry::flat_sheet(16));
  fixtures.emplace_back(
      MaterialModel::scalar_profile(
          [](const Vector3d& y) {
            return Complex(2.0, 0.1) + 0.3 * std::cos(2.0 * M_PI * y[0]);
          },
          {0.01, 0.3}),
      CellGeometry::graph_sheet(8, sine_sheet(0.125)));
  for (auto& [m, g] : fixtures) {
    auto s = solve_fixture(m, g);
    auto t = compute_effective(s.sys, s.sol);
    double scale = t.eps_eff.cwiseAbs().maxCoeff();
    CHECK(t.formula_gap <= 10.0 * 1e-10 * scale);
    CHECK(t.coercivity > 0.0);
  }
}

TEST_CASE("energy form is dissipative for random real directions") {
  auto m = MaterialModel::scalar_profile(
      [](const Vector3d& y) {
        return Complex(2.0, 0.1) + 0.5 * std::sin(2.0 * M_PI * y[2]);
      },
      {0.01, 0.3});
  auto s = solve_fixture(m, CellGeometry::flat_sheet(8));
  Matrix3c energy = effective_tensor_energy(s.sys, s.sol);

  // Independent evaluation of the dissipation quadratic form
  // int Im(eps) |xi + grad chi xi|^2 + (1/omega) int Re(sigma) |.|_T^2.
  ProblemFields fields(s.sys.mesh, s.sys.materials, Vector3d::Zero());
  const auto& g2 = detail::gauss2();
  const int n = s.sys.mesh.resolution;
  const double h = s.sys.mesh.spacing();
  std::mt19937 rng(5);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 100; ++trial) {
    Vector3d xi(gauss(rng), gauss(rng), gauss(rng));
    Complex quad = (xi.cast<Complex>().adjoint() *
                    (energy * xi.cast<Complex>()))(0);
    double dissipation = 0.0;
    std::array<double, 8> sv;
    std::array<Vector3d, 8> sg;
    for (int ei = 0; ei < n; ++ei)
      for (int ej = 0; ej < n; ++ej)
        for (int ek = 0; ek < n; ++ek) {
          auto nodes = s.sys.mesh.element_nodes(ei, ej, ek);
          Vector3d origin = s.sys.mesh.element_origin(ei, ej, ek);
          for (int qa = 0; qa < 2; ++qa)
            for (int qb = 0; qb < 2; ++qb)
              for (int qc = 0; qc < 2; ++qc) {
                Vector3d p(g2[qa], g2[qb], g2[qc]);
                detail::shape_trilinear(p, sv, sg);
                Vector3c v = xi.cast<Complex>();
                for (int j = 0; j < 3; ++j)
                  for (int c = 0; c < 8; ++c)
                    v += xi[j] * s.sol.chi[j][nodes[c]] * (sg[c] / h).cast<Complex>();
                auto vd = fields.volume(origin + h * p);
                dissipation += h * h * h / 8.0 * vd.eps(0, 0).imag() *
                               v.squaredNorm();
              }
        }
    for (const auto& f : s.sys.mesh.sheet_faces) {
      auto nodes = s.sys.mesh.face_nodes(f);
      for (int qa = 0; qa < 2; ++qa)
        for (int qb = 0; qb < 2; ++qb) {
          Eigen::Vector2d p(g2[qa], g2[qb]);
          Eigen::Vector2cd v(xi[0], xi[1]);
          for (int c = 0; c < 4; ++c) {
            double f0 = (c & 1) ? p[0] : 1.0 - p[0];
            double f1 = (c & 2) ? p[1] : 1.0 - p[1];
            Eigen::Vector2d grad(((c & 1) ? 1.0 : -1.0) * f1 / h,
                                 f0 * ((c & 2) ? 1.0 : -1.0) / h);
            for (int j = 0; j < 3; ++j)
              v += xi[j] * s.sol.chi[j][nodes[c]] * grad.cast<Complex>();
          }
          dissipation += h * h / 4.0 * 0.01 / 1.0 * v.squaredNorm();
        }
    }
    CHECK(quad.imag() >= 0.0);
    CHECK(quad.imag() == Approx(dissipation).epsilon(1e-8));
  }
}

TEST_CASE("analytic simple average reproduces the diagonal-profile example") {
  // eps = diag(eps_x, eps_t f(y1), eps_t f(y1)), sheet normal axis 1,
  // f = 1 + 0.5 sin(2 pi y1), mean(f) = 1.
  Complex ex{1.0, 0.01}, et{2.0, 0.01}, sig{0.0, 0.3};
  MaterialModel m;
  m.epsilon = [=](const Vector3d&, const Vector3d& y) {
    Matrix3c e = Matrix3c::Zero();
    Complex f = et * (1.0 + 0.5 * std::sin(2.0 * M_PI * y[0]));
    e(0, 0) = ex;
    e(1, 1) = f;
    e(2, 2) = f;
    return e;
  };
  m.sigma = MaterialModel::scalar_sigma(sig);
  m.omega = 1.0;
  auto geometry = CellGeometry::flat_sheet(16, 1);
  auto eff = analytic_simple(m, geometry);
  Complex tang = et + Complex(0, 1) * sig;
  CHECK(std::abs(eff(0, 0) - ex) < 1e-10);
  CHECK(std::abs(eff(1, 1) - tang) < 1e-10);
  CHECK(std::abs(eff(2, 2) - tang) < 1e-10);

  // Full FEM pipeline cross-check: corrector vanishes, tensors agree.
  auto s = solve_fixture(m, geometry);
  auto fem = effective_tensor(s.sys, s.sol);
  CHECK((fem - eff).cwiseAbs().maxCoeff() < 1e-8);
  for (int j = 0; j < 3; ++j) CHECK(h_norm(s.sys, s.sol.chi[j]) < 1e-9);
}

TEST_CASE("analytic simple with zero sigma is the plain volume average") {
  auto m = MaterialModel::constants({3.0, 0.2}, 0.0);
  auto eff = analytic_simple(m, CellGeometry::flat_sheet(8));
  CHECK((eff - Complex(3.0, 0.2) * Matrix3c::Identity()).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("analytic simple rejects non-divergence-free coefficients") {
  auto m = MaterialModel::scalar_profile(
      [](const Vector3d& y) {
        return Complex(2.0, 0.1) + 0.5 * std::sin(2.0 * M_PI * y[2]);
      },
      0.0);
  CHECK_THROWS_AS(analytic_simple(m, CellGeometry::flat_sheet(8)),
                  std::invalid_argument);
}

TEST_CASE("enz spacing arithmetic") {
  auto a = enz_spacing({0.0, 0.3}, 1.0, 2.0, 1.0);
  CHECK(a.d0 == Approx(0.15).epsilon(1e-15));
  CHECK(a.imag_residue == 0.0);
  auto b = enz_spacing({0.0, 0.3}, 2.0, 2.0, 1.0);
  CHECK(b.d0 == Approx(0.075).epsilon(1e-15));
  auto c = enz_spacing({0.001, 0.3}, 1.0, 2.0, 1.0);
  CHECK(c.d0 == Approx(0.15).epsilon(1e-12));
  CHECK(c.imag_residue == Approx(0.0005).epsilon(1e-12));
  CHECK_THROWS_AS(enz_spacing({0.0, 0.3}, 1.0, 2.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(enz_spacing({0.3, 0.0}, 1.0, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("layered closed form oracle") {
  auto c = layered_closed_form([](double) { return Complex(2.0, 0.1); }, 0.0, 1.0);
  CHECK((c - Complex(2.0, 0.1) * Matrix3c::Identity()).cwiseAbs().maxCoeff() <
        1e-11);
  Complex e1{2.0, 0.1}, e2{4.0, 0.1};
  auto two = layered_closed_form(
      [=](double t) { return t < 0.5 ? e1 : e2; }, 0.0, 1.0);
  CHECK(std::abs(two(2, 2) - 2.0 * e1 * e2 / (e1 + e2)) < 1e-11);
  auto sheet = layered_closed_form([](double) { return Complex(1.0, 0.0); },
                                   {0.0, 0.3}, 1.0);
  CHECK(sheet(0, 0).real() == Approx(0.7).epsilon(1e-15));
  CHECK(std::abs(sheet(0, 0).imag()) < 1e-15);
  CHECK(sheet(2, 2) == Complex(1.0, 0.0));
  CHECK_THROWS_AS(
      layered_closed_form([](double t) { return Complex(t < 0.25 ? 0.0 : 1.0, 0.0); },
                          0.0, 1.0),
      std::invalid_argument);
}

TEST_CASE("FEM pipeline agrees with the layered oracle including a sheet") {
  Complex e1{2.0, 0.1}, e2{4.0, 0.2}, sig{0.01, 0.3};
  auto m = MaterialModel::scalar_profile(
      [=](const Vector3d& y) { return y[2] < 0.5 ? e1 : e2; }, sig);
  auto s = solve_fixture(m, CellGeometry::flat_sheet(8));
  auto eff = effective_tensor(s.sys, s.sol);
  auto oracle =
      layered_closed_form([=](double t) { return t < 0.5 ? e1 : e2; }, sig, 1.0);
  CHECK((eff - oracle).cwiseAbs().maxCoeff() < 1e-9);
}
