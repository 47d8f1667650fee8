#pragma once

#include "eqop/tensor_field.hpp"

#include <Eigen/Core>
#include <Eigen/LU>

#include <vector>

namespace eqop {

/// Proper rotation that maps the cubic lattice onto itself: a signed
/// permutation matrix with determinant +1. In 2d only the upper-left 2x2
/// block is used and the z axis is fixed.
struct LatticeRotation {
  Eigen::Matrix3i matrix = Eigen::Matrix3i::Identity();
  int dim = 3;

  Eigen::Matrix3d as_double() const { return matrix.cast<double>(); }
  LatticeRotation inverse() const { return {matrix.transpose(), dim}; }

  /// Composition: (g * h) acts as g after h.
  friend LatticeRotation operator*(const LatticeRotation& g, const LatticeRotation& h) {
    return {g.matrix * h.matrix, g.dim};
  }
  bool operator==(const LatticeRotation& o) const { return matrix == o.matrix && dim == o.dim; }
};

/// The 4 lattice rotations in 2d or the 24 proper octahedral rotations in 3d,
/// identity first.
std::vector<LatticeRotation> lattice_rotations(int dim);

/// Rotation by a quarter turn about the z axis (x -> y).
LatticeRotation quarter_turn_z(int dim);

/// Matrix acting on the stored components of an order-l tensor: 1x1 identity
/// for scalars, the rotation itself for vectors, and conjugation
/// M -> g M g^T expressed in the order-2 basis.
Eigen::MatrixXd representation(const LatticeRotation& g, int l);

/// Rotates a field about the center of its grid: out(g x) = rho_l(g) u(x).
/// The grid must be a cube (equal extent and spacing on every axis) so that
/// the rotation permutes voxels exactly.
template <typename Scalar>
TensorField<Scalar> rotate_field(const TensorField<Scalar>& u, const LatticeRotation& g) {
  const Grid& grid = u.grid();
  if (g.dim != grid.dim) throw RuleError("rotation dimension does not match field");
  if (!grid.is_cube())
    throw RuleError("lattice rotation requires a cubic grid (equal extent and spacing)");

  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> rho =
      representation(g, u.l()).template cast<Scalar>();
  const Index n = grid.shape[0];
  TensorField<Scalar> out(grid, u.l());
  const int d = grid.dim;
  for (Index idx = 0; idx < u.voxels(); ++idx) {
    const auto ijk = grid.unflat(idx);
    // doubled centered coordinates are integers for any extent
    Eigen::Vector3i c2 = Eigen::Vector3i::Zero();
    for (int a = 0; a < d; ++a) c2[a] = static_cast<int>(2 * ijk[a] - (n - 1));
    const Eigen::Vector3i r2 = g.matrix * c2;
    std::array<Index, 3> dst{0, 0, 0};
    for (int a = 0; a < d; ++a) dst[a] = (r2[a] + (n - 1)) / 2;
    out.value(grid.flat(dst[0], dst[1], dst[2])) = rho * u.value(idx);
  }
  return out;
}

/// Circular shift by whole voxels: out(x + s) = u(x), indices wrapping.
template <typename Scalar>
TensorField<Scalar> translate_field(const TensorField<Scalar>& u, const std::array<Index, 3>& shift) {
  const Grid& g = u.grid();
  TensorField<Scalar> out(g, u.l());
  for (Index idx = 0; idx < u.voxels(); ++idx) {
    const auto ijk = g.unflat(idx);
    std::array<Index, 3> dst{0, 0, 0};
    for (int a = 0; a < g.dim; ++a) dst[a] = (((ijk[a] + shift[a]) % g.shape[a]) + g.shape[a]) % g.shape[a];
    out.value(g.flat(dst[0], dst[1], dst[2])) = u.value(idx);
  }
  return out;
}

}  // namespace eqop
