// SPDX-License-Identifier: Apache-2.0

#ifndef PLASMHOM_MESH_HPP
#define PLASMHOM_MESH_HPP

#include <array>
#include <vector>

#include "plasmhom/core.hpp"

namespace plasmhom {

/// One quadrilateral element face lying on the (possibly pulled-back)
/// sheet plane. Indices are the tangential grid coordinates of the
/// face's lower corner; weight is the surface measure factor
/// sqrt(1+|grad h|^2) evaluated at the face center (1 for flat sheets).
struct SheetFace {
  int i = 0;
  int j = 0;
  double weight = 1.0;
};

/// Structured periodic grid on Y = [0,1]^3 with N^3 trilinear hexahedra
/// and the sheet snapped to a grid plane. Graph sheets are represented
/// in pulled-back coordinates where the sheet is flat; the metric
/// factors live in the coefficient fields, the measure factor in the
/// face weights.
struct PeriodicMesh {
  int resolution = 0;
  int normal_axis = 2;          // 0-based normal axis of the sheet plane
  std::array<int, 2> tangential_axes{{0, 1}};
  int plane_index = 0;          // grid plane carrying the sheet
  std::vector<SheetFace> sheet_faces;
  CellGeometry geometry;

  double spacing() const { return 1.0 / resolution; }
  long node_count() const {
    long n = resolution;
    return n * n * n;
  }
  long element_count() const { return node_count(); }

  long node_index(int i, int j, int k) const {
    int n = resolution;
    auto w = [n](int v) { return ((v % n) + n) % n; };
    return (static_cast<long>(w(i)) * n + w(j)) * n + w(k);
  }

  /// Nodes of element (i,j,k), local corner order c = c0 + 2 c1 + 4 c2.
  std::array<long, 8> element_nodes(int i, int j, int k) const {
    std::array<long, 8> nodes;
    for (int c = 0; c < 8; ++c)
      nodes[c] = node_index(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
    return nodes;
  }

  /// Reference (pulled-back) coordinates of the lower corner of element
  /// (i,j,k).
  Vector3d element_origin(int i, int j, int k) const {
    double h = spacing();
    return Vector3d(i * h, j * h, k * h);
  }

  /// Nodes of sheet face f, bilinear corner order c = c0 + 2 c1 in the
  /// tangential axes.
  std::array<long, 4> face_nodes(const SheetFace& f) const {
    std::array<long, 4> nodes;
    for (int c = 0; c < 4; ++c) {
      int idx[3] = {0, 0, 0};
      idx[normal_axis] = plane_index;
      idx[tangential_axes[0]] = f.i + (c & 1);
      idx[tangential_axes[1]] = f.j + ((c >> 1) & 1);
      nodes[c] = node_index(idx[0], idx[1], idx[2]);
    }
    return nodes;
  }
};

/// Builds the periodic mesh for the given geometry. For flat sheets the
/// sheet plane is the grid plane at the given offset; for graph sheets
/// the pulled-back plane sits at reference offset 0 and faces carry the
/// measure weight sqrt(1+|grad h|^2).
inline PeriodicMesh build_mesh(const CellGeometry& geometry) {
  geometry.validate();
  PeriodicMesh mesh;
  mesh.geometry = geometry;
  int n = geometry.resolution;
  mesh.resolution = n;
  int na = geometry.normal_axis() - 1;
  mesh.normal_axis = na;
  mesh.tangential_axes = {na == 0 ? 1 : 0, na == 2 ? 1 : 2};
  if (!geometry.is_graph) {
    mesh.plane_index =
        static_cast<int>(std::llround(geometry.flat.offset * n)) % n;
  } else {
    mesh.plane_index = 0;
  }
  double h = 1.0 / n;
  mesh.sheet_faces.reserve(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      SheetFace f{i, j, 1.0};
      if (geometry.is_graph) {
        Eigen::Vector2d yc((i + 0.5) * h, (j + 0.5) * h);
        Eigen::Vector2d g = geometry.graph.grad_h(yc);
        f.weight = std::sqrt(1.0 + g.squaredNorm());
      }
      mesh.sheet_faces.push_back(f);
    }
  }
  return mesh;
}

namespace detail {

/// Trilinear shape values and reference gradients at a point of [0,1]^3.
inline void shape_trilinear(const Vector3d& xi, std::array<double, 8>& val,
                            std::array<Vector3d, 8>& grad) {
  for (int c = 0; c < 8; ++c) {
    double f[3], df[3];
    int cc[3] = {c & 1, (c >> 1) & 1, (c >> 2) & 1};
    for (int d = 0; d < 3; ++d) {
      f[d] = cc[d] ? xi[d] : 1.0 - xi[d];
      df[d] = cc[d] ? 1.0 : -1.0;
    }
    val[c] = f[0] * f[1] * f[2];
    grad[c] = Vector3d(df[0] * f[1] * f[2], f[0] * df[1] * f[2], f[0] * f[1] * df[2]);
  }
}

/// 2-point Gauss abscissae on [0,1].
inline const std::array<double, 2>& gauss2() {
  static const std::array<double, 2> g = {0.5 - 0.5 / std::sqrt(3.0),
                                          0.5 + 0.5 / std::sqrt(3.0)};
  return g;
}

}  // namespace detail

/// Coefficient fields of the (possibly pulled-back) cell problem,
/// evaluated in the reference coordinates of a PeriodicMesh. For flat
/// sheets this is the plain material model; for graph sheets it carries
/// the metric of the flattening diffeomorphism.
class ProblemFields {
 public:
  struct VolumeData {
    Matrix3c eps;                 // pulled-back volume coefficient
    Eigen::Matrix3d grad_g;       // Jacobian of the diffeomorphism
    Eigen::Matrix3d metric;       // (grad_g)^-1 (grad_g)^-T
    Eigen::Matrix3d directions;   // column j: (grad_g)^T e_j
  };
  struct SurfaceData {
    Eigen::Matrix2cd sigma;       // sqrt(1+|grad h|^2) sigma G^-1
    Eigen::Matrix2d norm_metric;  // sqrt(1+|grad h|^2) G^-1 (for the H norm)
    Eigen::Matrix<double, 2, 3> directions;  // in-plane components of (grad_g)^T e_j
    double weight = 1.0;          // sqrt(1+|grad h|^2)
  };

  ProblemFields(const PeriodicMesh& mesh, const MaterialModel& materials,
                const Vector3d& x_macro)
      : mesh_(&mesh), materials_(&materials), x_(x_macro) {}

  /// y is a point in the reference cell (pulled-back coordinates).
  VolumeData volume(const Vector3d& y) const {
    VolumeData d;
    const CellGeometry& g = mesh_->geometry;
    if (!g.is_graph) {
      d.eps = materials_->epsilon(x_, wrap_unit(y));
      d.grad_g.setIdentity();
      d.metric.setIdentity();
      d.directions.setIdentity();
      return d;
    }
    int na = mesh_->normal_axis;
    auto ta = mesh_->tangential_axes;
    Eigen::Vector2d yp(y[ta[0]], y[ta[1]]);
    Eigen::Vector2d gh = g.graph.grad_h(yp);
    Vector3d phys = y;
    phys[na] += g.graph.h(yp);
    Eigen::Matrix3d J = Eigen::Matrix3d::Identity();
    J(na, ta[0]) = gh[0];
    J(na, ta[1]) = gh[1];
    Eigen::Matrix3d Jinv = Eigen::Matrix3d::Identity();
    Jinv(na, ta[0]) = -gh[0];
    Jinv(na, ta[1]) = -gh[1];
    d.grad_g = J;
    d.metric = Jinv * Jinv.transpose();
    d.eps = Jinv * materials_->epsilon(x_, wrap_unit(phys)) * Jinv.transpose();
    d.directions = J.transpose();
    return d;
  }

  /// yp are the tangential coordinates of a point on the reference plane.
  SurfaceData surface(const Eigen::Vector2d& yp) const {
    SurfaceData d;
    const CellGeometry& g = mesh_->geometry;
    Eigen::Matrix2cd sig = materials_->sigma(
        x_, Eigen::Vector2d(wrap_unit(yp[0]), wrap_unit(yp[1])));
    if (!g.is_graph) {
      d.sigma = sig;
      d.norm_metric.setIdentity();
      d.directions.setZero();
      int ta0 = mesh_->tangential_axes[0], ta1 = mesh_->tangential_axes[1];
      d.directions(0, ta0) = 1.0;
      d.directions(1, ta1) = 1.0;
      d.weight = 1.0;
      return d;
    }
    Eigen::Vector2d gh = g.graph.grad_h(yp);
    double w = std::sqrt(1.0 + gh.squaredNorm());
    Eigen::Matrix2d G = Eigen::Matrix2d::Identity() + gh * gh.transpose();
    Eigen::Matrix2d Ginv = G.inverse();
    d.sigma = w * sig * Ginv;
    d.norm_metric = w * Ginv;
    d.weight = w;
    // In-plane components of (grad_g)^T e_j: identity on the tangential
    // axes, grad h on the normal axis.
    d.directions.setZero();
    int na = mesh_->normal_axis;
    int ta0 = mesh_->tangential_axes[0], ta1 = mesh_->tangential_axes[1];
    d.directions(0, ta0) = 1.0;
    d.directions(1, ta1) = 1.0;
    d.directions(0, na) = gh[0];
    d.directions(1, na) = gh[1];
    return d;
  }

  const PeriodicMesh& mesh() const { return *mesh_; }
  const MaterialModel& materials() const { return *materials_; }
  const Vector3d& x_macro() const { return x_; }

 private:
  const PeriodicMesh* mesh_;
  const MaterialModel* materials_;
  Vector3d x_;
};

}  // namespace plasmhom

#endif  // PLASMHOM_MESH_HPP
