#include "checks.hpp"

#include "eqop/learn.hpp"
#include "eqop/operators.hpp"
#include "eqop/rotation.hpp"

#include <random>

namespace eqop::cli {

namespace {

Field random_on(const Grid& g, int l, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Field f(g, l);
  for (Index i = 0; i < f.data().size(); ++i) f.data().data()[i] = d(rng);
  return f;
}

double rel_dev(const Field& a, const Field& b) {
  const double diff = (a.data() - b.data()).cwiseAbs().maxCoeff();
  const double scale = b.data().cwiseAbs().maxCoeff();
  return scale > 0.0 ? diff / scale : diff;
}

double interior_max_abs(const Field& f, Index margin) {
  const Grid& g = f.grid();
  double m = 0.0;
  for (Index idx = 0; idx < g.size(); ++idx) {
    const auto ijk = g.unflat(idx);
    bool inside = true;
    for (int a = 0; a < g.dim; ++a) inside = inside && ijk[a] >= margin && ijk[a] < g.shape[a] - margin;
    if (inside) m = std::max(m, f.value(idx).cwiseAbs().maxCoeff());
  }
  return m;
}

void corrupt(KernelField& k) {
  if (k.grid().shape[0] < 3) k = embed_kernel(k, kernel_grid(k.grid(), 1));
  const Grid& g = k.grid();
  const auto r = k.radius();
  const double bump = 0.37 * (max_abs(k.field) + 1.0);
  k.field.value(g.flat(r[0] + 1, r[1], g.dim == 3 ? r[2] : 0))[0] += bump;
}

std::vector<Rule> neural_rules(int dim) {
  if (dim == 2)
    return {make_rule(0, 0, 0, 2), make_rule(0, 1, 1, 2), make_rule(1, 1, 0, 2), cross_rule(2),
            make_rule(1, 0, 1, 2)};
  return {make_rule(0, 0, 0, 3), make_rule(0, 1, 1, 3), make_rule(1, 1, 0, 3), cross_rule(3),
          make_rule(1, 0, 1, 3), make_rule(2, 1, 1, 3), make_rule(0, 2, 2, 3), make_rule(2, 2, 0, 3)};
}

}  // namespace

std::vector<CheckResult> run_property_checks(const Field& u, const CheckOptions& opt) {
  const Grid& g = u.grid();
  const int d = g.dim;
  auto input = [&](int l) { return l == u.l() ? u : random_on(g, l, opt.seed * 7919 + 101 + l); };
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  std::vector<std::pair<EquivariantOp, int>> ops;
  for (const std::string& name : operator_names()) {
    if (name == "gauss_law" && d != 3) continue;
    const EquivariantOp op = make_operator(name, g, u.l(), {0.1, 1.0});
    ops.emplace_back(op, op.rule.lu);
  }
  const auto rules = neural_rules(d);
  for (int i = 0; i < opt.neural_ops; ++i) {
    const Rule r = rules[static_cast<std::size_t>(rng() % rules.size())];
    const RadialBasis b = RadialBasis::defaults(g, r.lh);
    Eigen::VectorXd p(b.size());
    for (Index k = 0; k < p.size(); ++k) p[k] = unif(rng);
    const NeuralOp nop(g, r, ParamRadial(b, p));
    ops.emplace_back(EquivariantOp{"neural_" + std::to_string(i) + "(" + to_string(r) + ")", nop.kernel(), r,
                                   Path::fourier, {}},
                     r.lu);
  }

  std::vector<CheckResult> out;

  if (g.is_cube()) {
    const auto rots = lattice_rotations(d);
    for (auto [op, lu] : ops) {
      if (opt.corrupt_kernel) corrupt(op.kernel);
      const Field x = input(lu);
      const Field y = op(x);
      double worst = 0.0;
      for (const auto& rot : rots) worst = std::max(worst, rel_dev(op(rotate_field(x, rot)), rotate_field(y, rot)));
      out.push_back({"equivariance", op.name, worst, 1e-10});
    }
  }

  for (const auto& [op, lu] : ops) {
    if (op.name != "laplacian" && op.name != "grad" && op.name != "inverse_laplacian" &&
        op.name.rfind("neural_0", 0) != 0)
      continue;
    const Field a = input(lu);
    const Field b = random_on(g, lu, opt.seed + 999);
    const double s = 0.7, t = -1.3;
    out.push_back({"linearity", op.name, rel_dev(op(s * a + t * b), s * op(a) + t * op(b)), 1e-10});
  }

  {
    std::vector<std::pair<std::string, std::pair<KernelField, Rule>>> pairs{
        {"grad", {gradient_stencil(g), make_rule(0, 1, 1, d)}},
        {"laplacian", {laplacian_stencil(g, LaplacianForm::composite), make_rule(0, 0, 0, d)}},
        {"curl", {gradient_stencil(g), cross_rule(d)}},
        {"gaussian", {sample_kernel(kernel_grid(g, 2), gaussian_profile(1.5), 0), make_rule(0, 0, 0, d)}}};
    KernelField rs{random_on(kernel_grid(g, 1), 1, opt.seed + 5), KernelKind::stencil, "random"};
    pairs.push_back({"random_stencil", {rs, make_rule(1, 1, 0, d)}});
    for (const auto& [name, kr] : pairs) {
      const auto& [k, r] = kr;
      const Field x = input(r.lu);
      const Field a = conv_direct(x, k, make_plan(r, d, Path::direct, g.boundary));
      const Field b = conv_fourier(x, k, make_plan(r, d, Path::fourier, g.boundary));
      out.push_back({"path_equivalence", name, rel_dev(b, a), 1e-10});
    }
  }

  {
    double h = g.spacing[0];
    for (int a = 1; a < d; ++a) h = std::min(h, g.spacing[a]);
    const Field f = input(0);
    const double fs = std::max(max_abs(f), 1e-300) / (h * h);
    out.push_back({"calculus", "curl(grad f)", interior_max_abs(curl(grad(f)), 2) / fs, 1e-10});
    out.push_back({"calculus", "div(grad f) - laplacian f", interior_max_abs(div(grad(f)) - laplacian(f), 2) / fs,
                   1e-10});
    if (d == 3) {
      const Field v = input(1);
      const double vs = std::max(max_abs(v), 1e-300) / (h * h);
      out.push_back({"calculus", "div(curl v)", interior_max_abs(div(curl(v)), 2) / vs, 1e-10});
    }
  }
  return out;
}

}  // namespace eqop::cli
