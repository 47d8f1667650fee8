#pragma once

#include "eqop/kernel.hpp"
#include "eqop/tensor_field.hpp"
#include "eqop/tensor_product.hpp"

#include <complex>
#include <memory>
#include <vector>

namespace eqop {

enum class Path { direct, fourier };

std::string to_string(Path p);
Path path_from_string(const std::string& s);

/// Tensor-field convolution decomposed into scalar convolutions:
/// v[p] = sum_{m,n} C_mnp (u[m] * h[n]) V.
struct ConvPlan {
  Rule rule;
  Path path = Path::fourier;
  Boundary boundary = Boundary::zero;
  std::vector<ProductCoefficient> coefficients;
};

ConvPlan make_plan(const Rule& rule, int dim, Path path, Boundary boundary);

/// Direct for stencils, Fourier for sampled kernels.
Path default_path(const KernelField& h);

/// v(r) = sum_{r'} u(r') (x) h(r - r') V over the grid of `u`, with the
/// boundary mode taken from the plan. The output lives on u's grid.
Field conv(const Field& u, const KernelField& h, const ConvPlan& plan);
/// Convenience overload: default path for the kernel, boundary of u's grid.
Field conv(const Field& u, const KernelField& h, const Rule& rule);

Field conv_direct(const Field& u, const KernelField& h, const ConvPlan& plan);
Field conv_fourier(const Field& u, const KernelField& h, const ConvPlan& plan);

/// Smallest n' >= n whose only prime factors are 2, 3, 5 and 7.
Index next_fast_size(Index n);

/// Fourier-path convolver that transforms the input once and can then be
/// applied to many kernels sharing one kernel grid. Used by the fitter,
/// where every basis kernel is convolved with the same input.
class SpectralConvolver {
 public:
  SpectralConvolver(const Field& u, const Grid& kernel_grid, Boundary boundary);
  ~SpectralConvolver();
  SpectralConvolver(SpectralConvolver&&) noexcept;
  SpectralConvolver& operator=(SpectralConvolver&&) noexcept;

  Field apply(const KernelField& h, const Rule& rule) const;

  const std::array<Index, 3>& padded_shape() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Number of worker threads used for independent scalar transforms and
/// direct-path components. Defaults to 1.
void set_num_threads(int n);
int num_threads();

}  // namespace eqop
