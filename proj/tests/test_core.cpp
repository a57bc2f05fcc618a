// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "plasmhom/core.hpp"

using namespace plasmhom;
using Catch::Approx;

TEST_CASE("tangential projection is the rank-2 plane projector") {
  for (int axis = 1; axis <= 3; ++axis) {
    Matrix3c p = tangential_projection(axis);
    CHECK((p * p - p).cwiseAbs().maxCoeff() == 0.0);
    CHECK((p - p.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(p.trace().real() == Approx(2.0));
    CHECK(p(axis - 1, axis - 1) == Complex(0.0, 0.0));
  }
  CHECK((tangential_projection(3) -
         Eigen::Vector3cd(1, 1, 0).asDiagonal().toDenseMatrix())
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK_THROWS_AS(tangential_projection(0), std::invalid_argument);
  CHECK_THROWS_AS(tangential_projection(4), std::invalid_argument);
}

TEST_CASE("wrap_unit maps into [0,1)") {
  CHECK(wrap_unit(1.25) == Approx(0.25));
  CHECK(wrap_unit(-0.25) == Approx(0.75));
  CHECK(wrap_unit(3.0) == 0.0);
  CHECK(wrap_unit(-1e-18) < 1.0);
}

TEST_CASE("admissibility of strictly dissipative constants") {
  auto m = MaterialModel::constants({2.0, 0.1}, {0.01, 0.3});
  auto rep = check_admissibility(m, 256);
  CHECK(rep.pass);
  CHECK(rep.min_im_eps == Approx(0.1));
  CHECK(rep.min_re_sigma == Approx(0.01));
  CHECK(rep.max_abs_eps == Approx(2.0).margin(0.01));
  CHECK(rep.sample_count == 256);
}

TEST_CASE("admissibility rejects lossless and active coefficients") {
  auto lossless = MaterialModel::constants({2.0, 0.0}, {0.01, 0.3});
  CHECK_FALSE(check_admissibility(lossless, 64).pass);
  auto active = MaterialModel::constants({2.0, 0.1}, {-0.01, 0.3});
  CHECK_FALSE(check_admissibility(active, 64).pass);
}

TEST_CASE("admissibility finds the minimum of an oscillating loss profile") {
  // Im eps = 0.1 + 0.05 sin(2 pi y3): infimum 0.05.
  auto m = MaterialModel::scalar_profile(
      [](const Vector3d& y) {
        return Complex(2.0, 0.1 + 0.05 * std::sin(2.0 * M_PI * y[2]));
      },
      {0.01, 0.3});
  auto rep = check_admissibility(m, 4096);
  CHECK(rep.pass);
  CHECK(rep.min_im_eps == Approx(0.05).margin(1e-3));
}

TEST_CASE("admissibility handles tensor-valued surface conductivity") {
  auto m = MaterialModel::constants({2.0, 0.1}, {0.01, 0.3});
  m.sigma = [](const Vector3d&, const Eigen::Vector2d&) {
    Eigen::Matrix2cd s;
    s << Complex(0.05, 0.2), Complex(0.01, 0.0), Complex(0.01, 0.0),
        Complex(0.03, 0.1);
    return s;
  };
  auto rep = check_admissibility(m, 64);
  CHECK(rep.pass);
  // Smallest eigenvalue of the Hermitian part of Re sigma.
  Eigen::Matrix2d re;
  re << 0.05, 0.01, 0.01, 0.03;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(re);
  CHECK(rep.min_re_sigma == Approx(es.eigenvalues().minCoeff()));
}

TEST_CASE("coercivity margin of diagonal and isotropic tensors") {
  CHECK(coercivity_margin(Complex(2.0, 0.1) * Matrix3c::Identity()) ==
        Approx(0.1));
  Matrix3c d = Matrix3c::Zero();
  d(0, 0) = Complex(2.0, 0.1);
  d(1, 1) = Complex(2.0, 0.3);
  d(2, 2) = Complex(2.0, 0.2);
  CHECK(coercivity_margin(d) == Approx(0.1));
}

TEST_CASE("coercivity margin matches a constructed eigenbasis") {
  // Build Im part with eigenvalues {0.05, 0.1, 0.2} in a rotated basis.
  Eigen::Matrix3d rot =
      Eigen::AngleAxisd(0.7, Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  Eigen::Matrix3d im = rot * Eigen::Vector3d(0.05, 0.1, 0.2).asDiagonal() *
                       rot.transpose();
  Matrix3c t = Matrix3c::Identity() * 2.0 + Complex(0, 1) * im.cast<Complex>();
  CHECK(coercivity_margin(t) == Approx(0.05).epsilon(1e-12));
}

TEST_CASE("cell geometry validation") {
  CHECK_THROWS_AS(CellGeometry::flat_sheet(3), std::invalid_argument);
  CHECK_THROWS_AS(CellGeometry::flat_sheet(8, 5), std::invalid_argument);
  CHECK_THROWS_AS(CellGeometry::flat_sheet(8, 3, 0.3), std::invalid_argument);
  CHECK_NOTHROW(CellGeometry::flat_sheet(8, 3, 0.25));
  GraphSheet gs;
  CHECK_THROWS_AS(CellGeometry::graph_sheet(8, gs), std::invalid_argument);
}
