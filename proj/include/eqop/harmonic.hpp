#pragma once

#include "eqop/errors.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <string>

namespace eqop {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Number of stored components for a tensor of rotation order `l` in `dim`
/// dimensions: 1 for scalars, `dim` for vectors, 5 for 3d traceless
/// symmetric matrices. Order 2 in 2d and orders above 2 are rejected.
inline int components_for(int l, int dim) {
  if (dim != 2 && dim != 3) throw RuleError("dimension must be 2 or 3");
  switch (l) {
    case 0: return 1;
    case 1: return dim;
    case 2:
      if (dim == 3) return 5;
      throw RuleError("rotation order 2 is only supported in 3d");
    default:
      throw RuleError("rotation order " + std::to_string(l) +
                      " is not supported (0, 1 or 2)");
  }
}

/// Orthonormal (Frobenius) basis of 3x3 traceless symmetric matrices used to
/// store order-2 tensors:
///
///   E0 = (xx - yy) / sqrt(2)
///   E1 = (2zz - xx - yy) / sqrt(6)
///   E2 = (xy + yx) / sqrt(2)
///   E3 = (xz + zx) / sqrt(2)
///   E4 = (yz + zy) / sqrt(2)
///
/// Component k of a matrix M is <M, Ek>_F, so the Euclidean norm of the
/// component tuple equals the Frobenius norm of M and the order-2 dot product
/// is the Frobenius inner product.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> l2_basis(int k) {
  using std::sqrt;
  const Scalar s2 = Scalar(1) / sqrt(Scalar(2));
  const Scalar s6 = Scalar(1) / sqrt(Scalar(6));
  Eigen::Matrix<Scalar, 3, 3> e = Eigen::Matrix<Scalar, 3, 3>::Zero();
  switch (k) {
    case 0: e(0, 0) = s2; e(1, 1) = -s2; break;
    case 1: e(0, 0) = -s6; e(1, 1) = -s6; e(2, 2) = 2 * s6; break;
    case 2: e(0, 1) = e(1, 0) = s2; break;
    case 3: e(0, 2) = e(2, 0) = s2; break;
    case 4: e(1, 2) = e(2, 1) = s2; break;
    default: throw RuleError("order-2 basis index out of range");
  }
  return e;
}

template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, 3, 3> l2_to_matrix(const Eigen::MatrixBase<Derived>& c) {
  Eigen::Matrix<Scalar, 3, 3> m = Eigen::Matrix<Scalar, 3, 3>::Zero();
  for (int k = 0; k < 5; ++k) m += c[k] * l2_basis<Scalar>(k);
  return m;
}

/// Projects a symmetric matrix onto the traceless basis. Any trace part is
/// discarded.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, 5, 1> l2_from_matrix(const Eigen::MatrixBase<Derived>& m) {
  Eigen::Matrix<Scalar, 5, 1> c;
  for (int k = 0; k < 5; ++k) c[k] = (m.derived().array() * l2_basis<Scalar>(k).array()).sum();
  return c;
}

/// Unit harmonic tensor Y_l evaluated at a unit direction: 1, r_hat, or
/// 3 r_hat r_hat^T - I, returned in the component basis above. Only the
/// first `dim` entries of `r_hat` are read.
template <typename Scalar>
VectorX<Scalar> unit_harmonic(int l, int dim, const Eigen::Matrix<Scalar, 3, 1>& r_hat) {
  VectorX<Scalar> y(components_for(l, dim));
  switch (l) {
    case 0: y[0] = Scalar(1); break;
    case 1: y = r_hat.head(dim); break;
    case 2: {
      const Eigen::Matrix<Scalar, 3, 3> m =
          Scalar(3) * r_hat * r_hat.transpose() - Eigen::Matrix<Scalar, 3, 3>::Identity();
      y = l2_from_matrix<Scalar>(m);
      break;
    }
  }
  return y;
}

}  // namespace eqop
