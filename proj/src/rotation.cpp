#include "eqop/rotation.hpp"

#include <algorithm>
#include <array>

namespace eqop {

std::vector<LatticeRotation> lattice_rotations(int dim) {
  std::vector<LatticeRotation> out;
  if (dim == 2) {
    Eigen::Matrix3i q = Eigen::Matrix3i::Identity();
    for (int k = 0; k < 4; ++k) {
      out.push_back({q, 2});
      q = quarter_turn_z(2).matrix * q;
    }
    return out;
  }
  if (dim != 3) throw RuleError("lattice rotations exist for dim 2 or 3 only");

  std::array<int, 3> perm{0, 1, 2};
  do {
    for (int signs = 0; signs < 8; ++signs) {
      Eigen::Matrix3i m = Eigen::Matrix3i::Zero();
      for (int row = 0; row < 3; ++row) m(row, perm[row]) = (signs >> row) & 1 ? -1 : 1;
      if (m.determinant() == 1) out.push_back({m, 3});
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::stable_partition(out.begin(), out.end(),
                        [](const LatticeRotation& g) { return g.matrix.isIdentity(); });
  return out;
}

LatticeRotation quarter_turn_z(int dim) {
  Eigen::Matrix3i m;
  m << 0, -1, 0,
       1, 0, 0,
       0, 0, 1;
  return {m, dim};
}

Eigen::MatrixXd representation(const LatticeRotation& g, int l) {
  const int d = g.dim;
  const Eigen::Matrix3d r = g.as_double();
  switch (l) {
    case 0: return Eigen::MatrixXd::Identity(1, 1);
    case 1: return r.topLeftCorner(d, d);
    case 2: {
      if (d != 3) throw RuleError("rotation order 2 is only supported in 3d");
      Eigen::MatrixXd rho(5, 5);
      for (int j = 0; j < 5; ++j) {
        const Eigen::Matrix3d rotated = r * l2_basis<double>(j) * r.transpose();
        rho.col(j) = l2_from_matrix<double>(rotated);
      }
      return rho;
    }
    default:
      throw RuleError("rotation order " + std::to_string(l) + " is not supported");
  }
}

}  // namespace eqop
