#pragma once

#include "eqop/eqf.hpp"
#include "eqop/tensor_field.hpp"

#include <functional>
#include <limits>
#include <map>
#include <string>

namespace eqop {

/// How a radial profile is evaluated at r = 0.
enum class OriginRule {
  evaluate,  ///< call the profile at r = 0 (finite profiles)
  zero,      ///< self-interaction excluded: kernel value 0 at the center
  none,      ///< no rule; sampling a singular profile fails
};

/// Scalar radial function R(|r|). Depends on the distance only, so any
/// kernel built from it is isotropic by construction.
struct RadialProfile {
  std::string name;
  std::function<double(double)> radial;
  double support_radius = std::numeric_limits<double>::infinity();
  bool singular_at_origin = false;
  OriginRule origin_rule = OriginRule::evaluate;

  double operator()(double r) const { return radial(r); }
};

enum class KernelKind { sampled, stencil };

std::string to_string(KernelKind k);
KernelKind kernel_kind_from_string(const std::string& s);

/// Kernel h = R(r) Y_l(r_hat) stored as a tensor field on a centered
/// odd-extent grid. Stencils are compact finite-difference kernels.
struct KernelField {
  Field field;
  KernelKind kind = KernelKind::sampled;
  std::string profile_name;
  double support_radius = std::numeric_limits<double>::infinity();

  int l() const { return field.l(); }
  const Grid& grid() const { return field.grid(); }
  /// Voxels from the center to the edge along each axis.
  std::array<Index, 3> radius() const;
  Index center_index() const;
};

/// Samples R(|r|) Y_l(r_hat) at every voxel offset of a centered kernel grid
/// (odd extent per axis). Offsets beyond the support radius are zero; the
/// center follows the profile's origin rule, and is always zero for l >= 1
/// where r_hat is undefined.
KernelField sample_kernel(const Grid& kernel_grid, const RadialProfile& profile, int l_h);

/// Central-difference stencil of order 1: convolving a scalar with it under
/// the scalar product yields the gradient, under the dot product the
/// divergence. Weights +e_a/(2 h_a V) at -e_a and -e_a/(2 h_a V) at +e_a.
KernelField gradient_stencil(const Grid& grid);

/// Center weight 1/V, so convolution is the identity.
KernelField delta_stencil(const Grid& grid);

enum class LaplacianForm {
  compact,    ///< (2 dim + 1)-point stencil on nearest neighbours
  composite,  ///< (2 dim + 1)-point stencil at +-2 voxels; equals div of the central gradient
};

KernelField laplacian_stencil(const Grid& grid, LaplacianForm form);

/// Places a kernel at the center of a larger centered kernel grid with the
/// same spacing.
KernelField embed_kernel(const KernelField& k, const Grid& kernel_grid);

/// exp(-r^2 / sigma^2); unnormalized, value 1 at the origin.
RadialProfile gaussian_profile(double sigma);
/// Free-space Green's function of -laplacian in 3d: 1/(4 pi r), zero at origin.
RadialProfile inverse_r_profile();
/// Coulomb field magnitude in 3d: 1/(4 pi r^2) = -d/dr of inverse_r; zero at origin.
RadialProfile inverse_r2_profile();
/// Free-space Green's function of -laplacian in 2d: -ln(r)/(2 pi), zero at origin.
RadialProfile log_r_profile();
/// Heat kernel (4 pi D t)^(-dim/2) exp(-r^2 / (4 D t)).
RadialProfile gaussian_diffusion_profile(double diffusivity, double time, int dim);

/// Library lookup: gaussian(sigma), inverse_r, inverse_r2, log_r,
/// gaussian_diffusion(D, t). Parameters are read from `params` by name.
RadialProfile named_profile(const std::string& name, int dim,
                            const std::map<std::string, double>& params = {});

void save_kernel(const std::string& path, const KernelField& k);
KernelField load_kernel(const std::string& path);

}  // namespace eqop
