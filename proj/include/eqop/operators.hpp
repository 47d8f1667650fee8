#pragma once

#include "eqop/conv.hpp"
#include "eqop/kernel.hpp"

#include <optional>
#include <string>
#include <vector>

namespace eqop {

/// A kernel bundled with its product rule and convolution path. Built for one
/// grid lattice; `apply` is pure.
struct EquivariantOp {
  std::string name;
  KernelField kernel;
  Rule rule;
  Path path = Path::direct;
  /// Forced boundary mode; when empty the input grid's mode is used.
  std::optional<Boundary> boundary;

  Field apply(const Field& u) const;
  Field operator()(const Field& u) const { return apply(u); }
};

EquivariantOp identity_op(const Grid& grid, int l);
EquivariantOp grad_op(const Grid& grid);
EquivariantOp div_op(const Grid& grid);
/// 3d: (1,1)->1 cross product; 2d: pseudo-scalar (1,1)->0.
EquivariantOp curl_op(const Grid& grid);
/// Default form matches div(grad(.)) exactly; the compact form is the
/// nearest-neighbour stencil.
EquivariantOp laplacian_op(const Grid& grid, LaplacianForm form = LaplacianForm::composite);
/// Free-space potential v with laplacian(v) = -u: 1/(4 pi r) in 3d,
/// -ln(r)/(2 pi) in 2d. Always zero padded.
EquivariantOp inverse_laplacian_op(const Grid& grid);
/// Coulomb field E = -grad(inverse_laplacian(u)) via the 1/(4 pi r^2) r_hat
/// kernel, 3d only. Always zero padded.
EquivariantOp gauss_law_op(const Grid& grid);
/// Heat kernel for diffusivity D over time t, renormalized to unit discrete
/// mass so the total is conserved under periodic boundaries.
EquivariantOp diffusion_op(const Grid& grid, double diffusivity, double time);

Field grad(const Field& u);
Field div(const Field& u);
Field curl(const Field& u);
Field laplacian(const Field& u);
Field inverse_laplacian(const Field& u);
Field gauss_law(const Field& u);
Field diffusion(const Field& u, double diffusivity, double time);

struct OperatorParams {
  double diffusivity = 0.0;
  double time = 0.0;
};

/// identity, grad, div, curl, laplacian, inverse_laplacian, gauss_law, diffusion
const std::vector<std::string>& operator_names();

/// Registry lookup; `input_l` selects the identity's order.
EquivariantOp make_operator(const std::string& name, const Grid& grid, int input_l,
                            const OperatorParams& params = {});

}  // namespace eqop
