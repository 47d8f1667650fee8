#pragma once

#include "eqop/harmonic.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <string>
#include <vector>

namespace eqop {

enum class Product { scalar, dot, cross, matvec };

std::string to_string(Product p);
Product product_from_string(const std::string& s);

/// A tensor-product rule (l_u, l_h) -> l_v together with the product that
/// realises it. The product is needed because in 2d both the dot product and
/// the pseudo-scalar cross product map (1,1) -> 0.
struct Rule {
  int lu = 0;
  int lh = 0;
  int lv = 0;
  Product product = Product::scalar;

  bool operator==(const Rule&) const = default;
};

std::string to_string(const Rule& r);

/// Supported rules:
///   (0,l)->l and (l,0)->l   scalar product
///   (l,l)->0, l in {1,2}    dot product (Frobenius for l = 2)
///   (1,1)->1                cross product, 3d
///   (1,1)->0                pseudo-scalar cross product u_x h_y - u_y h_x, 2d
///   (2,1)->1                traceless symmetric matrix times vector, 3d
std::string supported_rules_text();

/// Resolves the default product for an order triple. (1,1)->0 resolves to the
/// dot product; use `cross_rule` for the 2d pseudo-scalar cross product.
Rule make_rule(int lu, int lh, int lv, int dim);

/// Checks a fully specified rule against the dimension.
void validate(const Rule& rule, int dim);

/// Cross product rule for the dimension: (1,1)->1 in 3d, (1,1)->0 in 2d.
Rule cross_rule(int dim);

/// Pointwise tensor product of two component tuples. Bilinear in (u, h).
template <typename Scalar, typename DerivedU, typename DerivedH>
VectorX<Scalar> tensor_product(const Eigen::MatrixBase<DerivedU>& u,
                               const Eigen::MatrixBase<DerivedH>& h,
                               const Rule& rule, int dim) {
  validate(rule, dim);
  if (u.size() != components_for(rule.lu, dim) || h.size() != components_for(rule.lh, dim))
    throw RuleError("component count does not match rule " + to_string(rule));

  VectorX<Scalar> v(components_for(rule.lv, dim));
  switch (rule.product) {
    case Product::scalar:
      if (rule.lu == 0)
        v = u[0] * h;
      else
        v = u * h[0];
      break;
    case Product::dot:
      v[0] = u.dot(h);
      break;
    case Product::cross:
      if (dim == 3) {
        const Eigen::Matrix<Scalar, 3, 1> a(u[0], u[1], u[2]);
        const Eigen::Matrix<Scalar, 3, 1> b(h[0], h[1], h[2]);
        v = a.cross(b);
      } else {
        v[0] = u[0] * h[1] - u[1] * h[0];
      }
      break;
    case Product::matvec: {
      const Eigen::Matrix<Scalar, 3, 1> b(h[0], h[1], h[2]);
      v = l2_to_matrix<Scalar>(u) * b;
      break;
    }
  }
  return v;
}

/// One term of the expansion (u (x) h)[p] = sum_{m,n} C_mnp u[m] h[n].
struct ProductCoefficient {
  int m;
  int n;
  int p;
  double c;
};

/// Nonzero expansion coefficients of a rule in the component basis, obtained
/// by evaluating the product on pairs of basis tuples.
std::vector<ProductCoefficient> expansion_coefficients(const Rule& rule, int dim);

}  // namespace eqop
