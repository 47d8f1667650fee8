#include "eqop/operators.hpp"

#include <cmath>

namespace eqop {

Field EquivariantOp::apply(const Field& u) const {
  if (u.l() != rule.lu)
    throw RuleError("operator '" + name + "' expects an order-" + std::to_string(rule.lu) +
                    " field, got order " + std::to_string(u.l()));
  if (u.dim() != kernel.grid().dim || !u.grid().same_spacing(kernel.grid()))
    throw RuleError("operator '" + name + "' was built for a different grid");
  const Boundary b = boundary.value_or(u.grid().boundary);
  return conv(u, kernel, make_plan(rule, u.dim(), path, b));
}

EquivariantOp identity_op(const Grid& grid, int l) {
  return {"identity", delta_stencil(grid), make_rule(l, 0, l, grid.dim), Path::direct, {}};
}

EquivariantOp grad_op(const Grid& grid) {
  return {"grad", gradient_stencil(grid), make_rule(0, 1, 1, grid.dim), Path::direct, {}};
}

EquivariantOp div_op(const Grid& grid) {
  return {"div", gradient_stencil(grid), make_rule(1, 1, 0, grid.dim), Path::direct, {}};
}

EquivariantOp curl_op(const Grid& grid) {
  // u x h with the gradient stencil gives sum_a d_a u x e_a = -curl u
  KernelField k = gradient_stencil(grid);
  k.field *= -1.0;
  k.profile_name = "curl";
  return {"curl", std::move(k), cross_rule(grid.dim), Path::direct, {}};
}

EquivariantOp laplacian_op(const Grid& grid, LaplacianForm form) {
  return {"laplacian", laplacian_stencil(grid, form), make_rule(0, 0, 0, grid.dim), Path::direct,
          {}};
}

EquivariantOp inverse_laplacian_op(const Grid& grid) {
  Grid zero = grid;
  zero.boundary = Boundary::zero;
  const RadialProfile prof = grid.dim == 3 ? inverse_r_profile() : log_r_profile();
  return {"inverse_laplacian", sample_kernel(full_range_kernel_grid(zero), prof, 0),
          make_rule(0, 0, 0, grid.dim), Path::fourier, Boundary::zero};
}

EquivariantOp gauss_law_op(const Grid& grid) {
  if (grid.dim != 3) throw RuleError("gauss_law is defined in 3d only");
  Grid zero = grid;
  zero.boundary = Boundary::zero;
  return {"gauss_law", sample_kernel(full_range_kernel_grid(zero), inverse_r2_profile(), 1),
          make_rule(0, 1, 1, 3), Path::fourier, Boundary::zero};
}

EquivariantOp diffusion_op(const Grid& grid, double diffusivity, double time) {
  const RadialProfile prof = gaussian_diffusion_profile(diffusivity, time, grid.dim);
  Index radius = 1;
  for (int a = 0; a < grid.dim; ++a) {
    Index r = static_cast<Index>(std::ceil(prof.support_radius / grid.spacing[a]));
    if (grid.boundary == Boundary::zero) r = std::min(r, grid.shape[a] - 1);
    radius = std::max({radius, r});
  }
  KernelField k = sample_kernel(kernel_grid(grid, radius), prof, 0);
  const double mass = k.field.data().sum() * grid.voxel_volume();
  k.field *= 1.0 / mass;
  return {"diffusion", std::move(k), make_rule(0, 0, 0, grid.dim), Path::fourier, {}};
}

Field grad(const Field& u) { return grad_op(u.grid()).apply(u); }
Field div(const Field& u) { return div_op(u.grid()).apply(u); }
Field curl(const Field& u) { return curl_op(u.grid()).apply(u); }
Field laplacian(const Field& u) { return laplacian_op(u.grid()).apply(u); }
Field inverse_laplacian(const Field& u) { return inverse_laplacian_op(u.grid()).apply(u); }
Field gauss_law(const Field& u) { return gauss_law_op(u.grid()).apply(u); }
Field diffusion(const Field& u, double diffusivity, double time) {
  return diffusion_op(u.grid(), diffusivity, time).apply(u);
}

const std::vector<std::string>& operator_names() {
  static const std::vector<std::string> names{"identity",  "grad",
                                              "div",       "curl",
                                              "laplacian", "inverse_laplacian",
                                              "gauss_law", "diffusion"};
  return names;
}

EquivariantOp make_operator(const std::string& name, const Grid& grid, int input_l,
                            const OperatorParams& params) {
  if (name == "identity") return identity_op(grid, input_l);
  if (name == "grad") return grad_op(grid);
  if (name == "div") return div_op(grid);
  if (name == "curl") return curl_op(grid);
  if (name == "laplacian") return laplacian_op(grid);
  if (name == "inverse_laplacian") return inverse_laplacian_op(grid);
  if (name == "gauss_law") return gauss_law_op(grid);
  if (name == "diffusion") return diffusion_op(grid, params.diffusivity, params.time);
  std::string known;
  for (const auto& n : operator_names()) known += (known.empty() ? "" : ", ") + n;
  throw FormatError("unknown operator '" + name + "' (registry: " + known + ")");
}

}  // namespace eqop
