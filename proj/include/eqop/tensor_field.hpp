#pragma once

#include "eqop/grid.hpp"
#include "eqop/harmonic.hpp"
#include "eqop/tensor_product.hpp"

#include <Eigen/Core>

namespace eqop {

/// Order-l tensor field sampled on a Grid. Components are stored as the rows
/// of a row-major (C x N) matrix, so each component is a contiguous scalar
/// field in voxel order.
template <typename Scalar>
class TensorField {
 public:
  using Data = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  TensorField() = default;

  /// Zero field.
  TensorField(const Grid& grid, int l)
      : grid_(grid), l_(l), data_(Data::Zero(components_for(l, grid.dim), grid.size())) {}

  TensorField(const Grid& grid, int l, Data data) : grid_(grid), l_(l), data_(std::move(data)) {
    if (data_.rows() != components_for(l, grid.dim) || data_.cols() != grid.size())
      throw RuleError("field data must be " + std::to_string(components_for(l, grid.dim)) +
                      " x " + std::to_string(grid.size()));
    if (!data_.allFinite()) throw FormatError("field values must be finite");
  }

  const Grid& grid() const { return grid_; }
  int l() const { return l_; }
  int dim() const { return grid_.dim; }
  Index components() const { return data_.rows(); }
  Index voxels() const { return data_.cols(); }

  const Data& data() const { return data_; }
  Data& data() { return data_; }

  auto component(Index c) { return data_.row(c); }
  auto component(Index c) const { return data_.row(c); }
  auto value(Index voxel) { return data_.col(voxel); }
  auto value(Index voxel) const { return data_.col(voxel); }

  /// Replaces the boundary flag, keeping values.
  TensorField with_boundary(Boundary b) const {
    TensorField out = *this;
    out.grid_.boundary = b;
    return out;
  }

  TensorField& operator+=(const TensorField& o) {
    check_compatible(o);
    data_ += o.data_;
    return *this;
  }
  TensorField& operator-=(const TensorField& o) {
    check_compatible(o);
    data_ -= o.data_;
    return *this;
  }
  TensorField& operator*=(Scalar s) {
    data_ *= s;
    return *this;
  }

  friend TensorField operator+(TensorField a, const TensorField& b) { return a += b; }
  friend TensorField operator-(TensorField a, const TensorField& b) { return a -= b; }
  friend TensorField operator*(Scalar s, TensorField a) { return a *= s; }
  friend TensorField operator*(TensorField a, Scalar s) { return a *= s; }

  void check_compatible(const TensorField& o) const {
    if (!grid_.same_lattice(o.grid_)) throw RuleError("fields live on different grids");
    if (l_ != o.l_) throw RuleError("fields have different rotation orders");
  }

 private:
  Grid grid_;
  int l_ = 0;
  Data data_;
};

using Field = TensorField<double>;

/// Applies the tensor product voxel by voxel.
template <typename Scalar>
TensorField<Scalar> pointwise_product(const TensorField<Scalar>& u, const TensorField<Scalar>& w,
                                      const Rule& rule) {
  if (!u.grid().same_lattice(w.grid())) throw RuleError("pointwise product: grid mismatch");
  if (u.l() != rule.lu || w.l() != rule.lh)
    throw RuleError("pointwise product: field orders do not match rule " + to_string(rule));
  validate(rule, u.dim());
  TensorField<Scalar> out(u.grid(), rule.lv);
  for (Index i = 0; i < u.voxels(); ++i)
    out.value(i) = tensor_product<Scalar>(u.value(i), w.value(i), rule, u.dim());
  return out;
}

/// Per-voxel Euclidean norm of the component tuple (Frobenius norm for l = 2).
template <typename Scalar>
TensorField<Scalar> field_norm(const TensorField<Scalar>& u) {
  typename TensorField<Scalar>::Data n = u.data().colwise().norm();
  return TensorField<Scalar>(u.grid(), 0, std::move(n));
}

/// Scalar field that is 1 everywhere.
template <typename Scalar = double>
TensorField<Scalar> constant_scalar(const Grid& grid, Scalar value = Scalar(1)) {
  return TensorField<Scalar>(grid, 0,
                             TensorField<Scalar>::Data::Constant(1, grid.size(), value));
}

/// Field with the same tuple at every voxel.
template <typename Scalar, typename Derived>
TensorField<Scalar> constant_field(const Grid& grid, int l, const Eigen::MatrixBase<Derived>& v) {
  TensorField<Scalar> f(grid, l);
  if (v.size() != f.components()) throw RuleError("constant value has wrong component count");
  f.data() = v.template cast<Scalar>().replicate(1, grid.size());
  return f;
}

/// Largest absolute component value.
template <typename Scalar>
Scalar max_abs(const TensorField<Scalar>& u) {
  return u.data().size() ? u.data().cwiseAbs().maxCoeff() : Scalar(0);
}

}  // namespace eqop
