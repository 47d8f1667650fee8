#include "eqop/tensor_product.hpp"

namespace eqop {

std::string to_string(Product p) {
  switch (p) {
    case Product::scalar: return "scalar";
    case Product::dot: return "dot";
    case Product::cross: return "cross";
    case Product::matvec: return "matvec";
  }
  return "?";
}

Product product_from_string(const std::string& s) {
  if (s == "scalar") return Product::scalar;
  if (s == "dot") return Product::dot;
  if (s == "cross") return Product::cross;
  if (s == "matvec") return Product::matvec;
  throw FormatError("unknown product '" + s + "' (expected scalar|dot|cross|matvec)");
}

std::string to_string(const Rule& r) {
  return "(" + std::to_string(r.lu) + "," + std::to_string(r.lh) + ")->" +
         std::to_string(r.lv) + " " + to_string(r.product);
}

std::string supported_rules_text() {
  return "supported rules: (0,l)->l scalar; (l,0)->l scalar; (1,1)->0 dot; "
         "(2,2)->0 dot [3d]; (1,1)->1 cross [3d]; (1,1)->0 cross [2d, "
         "pseudo-scalar]; (2,1)->1 matvec [3d]";
}

namespace {

bool is_valid(const Rule& r, int dim) {
  if (dim != 2 && dim != 3) return false;
  const int max_l = dim == 3 ? 2 : 1;
  for (int l : {r.lu, r.lh, r.lv})
    if (l < 0 || l > max_l) return false;

  switch (r.product) {
    case Product::scalar:
      return (r.lu == 0 && r.lh == r.lv) || (r.lh == 0 && r.lu == r.lv);
    case Product::dot:
      return r.lu == r.lh && r.lu >= 1 && r.lv == 0;
    case Product::cross:
      return r.lu == 1 && r.lh == 1 && r.lv == (dim == 3 ? 1 : 0);
    case Product::matvec:
      return dim == 3 && r.lu == 2 && r.lh == 1 && r.lv == 1;
  }
  return false;
}

[[noreturn]] void reject(const Rule& r, int dim) {
  throw RuleError("unsupported tensor product " + to_string(r) + " in " +
                  std::to_string(dim) + "d; " + supported_rules_text());
}

}  // namespace

void validate(const Rule& rule, int dim) {
  if (!is_valid(rule, dim)) reject(rule, dim);
}

Rule make_rule(int lu, int lh, int lv, int dim) {
  Rule r{lu, lh, lv, Product::scalar};
  if ((lu == 0 && lh == lv) || (lh == 0 && lu == lv))
    r.product = Product::scalar;
  else if (lu == lh && lv == 0)
    r.product = Product::dot;
  else if (lu == 1 && lh == 1 && lv == 1)
    r.product = Product::cross;
  else if (lu == 2 && lh == 1 && lv == 1)
    r.product = Product::matvec;
  validate(r, dim);
  return r;
}

Rule cross_rule(int dim) {
  Rule r{1, 1, dim == 3 ? 1 : 0, Product::cross};
  validate(r, dim);
  return r;
}

std::vector<ProductCoefficient> expansion_coefficients(const Rule& rule, int dim) {
  validate(rule, dim);
  const int cu = components_for(rule.lu, dim);
  const int ch = components_for(rule.lh, dim);
  std::vector<ProductCoefficient> out;
  for (int m = 0; m < cu; ++m) {
    for (int n = 0; n < ch; ++n) {
      const Eigen::VectorXd eu = Eigen::VectorXd::Unit(cu, m);
      const Eigen::VectorXd eh = Eigen::VectorXd::Unit(ch, n);
      const Eigen::VectorXd v = tensor_product<double>(eu, eh, rule, dim);
      for (int p = 0; p < v.size(); ++p)
        if (v[p] != 0.0) out.push_back({m, n, p, v[p]});
    }
  }
  return out;
}

}  // namespace eqop
