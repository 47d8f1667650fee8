#pragma once

#include "eqop/conv.hpp"
#include "eqop/kernel.hpp"

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

namespace eqop {

/// Fixed hyperparameters of a trainable radial function:
///
///   R(r) = sum_n A_n exp(-r^2 / sigma_n^2)
///        + sum_n B_n r^(-k_n)      (r >= r_min, else 0)
///        + sum_n C_n (stencil of derivative order n)
///
/// Stencil order 0 is the delta stencil (l_h = 0); order 1 is the central
/// gradient stencil (l_h = 1). Amplitudes are ordered gaussians, powers,
/// stencils.
struct RadialBasis {
  std::vector<double> gaussian_widths;
  std::vector<int> power_exponents;
  double power_rmin = 1.0;
  std::vector<int> stencil_orders;

  Index size() const {
    return static_cast<Index>(gaussian_widths.size() + power_exponents.size() +
                              stencil_orders.size());
  }
  std::string term_name(Index k) const;

  /// 8 Gaussian widths log-spaced over [h, L/4] (L the shortest domain side),
  /// powers {1, 2} with r_min = h, and the stencil whose order matches l_h.
  static RadialBasis defaults(const Grid& grid, int l_h);
};

struct ParamRadial {
  RadialBasis basis;
  Eigen::VectorXd amplitudes;
  /// Per-amplitude flag; frozen amplitudes keep their value during fitting.
  std::vector<bool> trainable;

  explicit ParamRadial(RadialBasis b = {});
  ParamRadial(RadialBasis b, Eigen::VectorXd amps);

  /// Sampled part of R (Gaussians and power laws); stencil terms have no
  /// pointwise value.
  double radial(double r) const;
  Index size() const { return basis.size(); }
};

/// Neural equivariant operator: a ParamRadial kernel with a product rule on
/// a fixed grid, applied on the Fourier path.
class NeuralOp {
 public:
  NeuralOp(const Grid& grid, const Rule& rule, ParamRadial param);

  const Grid& grid() const { return grid_; }
  const Grid& kernel_grid() const { return kernel_grid_; }
  const Rule& rule() const { return rule_; }
  int l_h() const { return rule_.lh; }
  const ParamRadial& param() const { return param_; }

  void set_amplitudes(const Eigen::VectorXd& a);
  const Eigen::VectorXd& amplitudes() const { return param_.amplitudes; }

  /// Unit-amplitude kernel of basis term k on the operator's kernel grid.
  const KernelField& basis_kernel(Index k) const { return basis_[static_cast<std::size_t>(k)]; }
  /// sum_k p_k * basis_kernel(k).
  KernelField kernel() const;

 private:
  Grid grid_;
  Grid kernel_grid_;
  Rule rule_;
  ParamRadial param_;
  std::vector<KernelField> basis_;
};

Field apply_neural(const NeuralOp& op, const Field& u);

struct Sample {
  Field input;
  Field target;
};
using Dataset = std::vector<Sample>;

/// Basis responses stacked over a dataset: column k holds conv(u, basis_k)
/// for every sample, component and voxel; `target` is stacked the same way.
struct BasisDesign {
  Eigen::MatrixXd responses;
  Eigen::VectorXd target;
  double target_energy = 0.0;
};

BasisDesign basis_design(const NeuralOp& op, const Dataset& data);

/// Relative mean squared error: sum |L(u) - v|^2 / sum |v|^2 over the dataset.
double loss(const NeuralOp& op, const Dataset& data);
double loss(const BasisDesign& design, const Eigen::VectorXd& amplitudes);

/// Exact gradient of `loss` with respect to the amplitudes; frozen entries
/// are zero.
Eigen::VectorXd grad_params(const NeuralOp& op, const Dataset& data);
Eigen::VectorXd grad_params(const BasisDesign& design, const Eigen::VectorXd& amplitudes,
                            const std::vector<bool>& trainable);

struct FitResult {
  Eigen::VectorXd amplitudes;
  double loss = 0.0;
  /// Condition number of the column-scaled normal matrix before the ridge.
  double condition = 0.0;
};

/// Solves the (Jacobi-scaled) normal equations with ridge `ridge` times the
/// mean diagonal. Throws NumericalError with the condition estimate if the
/// system is singular even with the ridge.
FitResult fit_least_squares(const NeuralOp& op, const Dataset& data, double ridge = 1e-10);

struct DescentResult {
  Eigen::VectorXd amplitudes;
  /// Loss before the first step and after every step.
  std::vector<double> trace;
};

/// Raised when the loss exceeds 1e6 times its initial value.
struct DivergenceError : NumericalError {
  DivergenceError(const std::string& what, std::vector<double> t)
      : NumericalError(what), trace(std::move(t)) {}
  std::vector<double> trace;
};

/// Plain gradient descent on the amplitudes starting from op's current values.
DescentResult fit_gradient_descent(const NeuralOp& op, const Dataset& data, int steps,
                                   double step_size);

enum class Activation { relu, identity };

/// Per-channel norm nonlinearity: u_j -> act(a_j |u_j| + b_j) u_j / |u_j|,
/// zero where |u_j| = 0.
struct NonlinearLayer {
  std::vector<double> scale;
  std::vector<double> bias;
  Activation activation = Activation::relu;

  std::vector<Field> apply(std::span<const Field> channels) const;
};

/// Channel index standing for the constant scalar field 1.
inline constexpr int kIdentityChannel = -1;

struct AttentionTerm {
  int output = 0;
  int a = 0;
  int b = 0;
  Rule rule;
  double weight = 1.0;
};

/// output_j = sum over terms of weight * pointwise_product(u_a, u_b, rule).
struct AttentionLayer {
  std::vector<int> output_orders;
  std::vector<AttentionTerm> terms;

  /// Every (a, b) pair, the identity channel included, with every product
  /// that maps (l_a, l_b) to an output order. Pairs with no valid rule are
  /// left out. Weights start at 1.
  static AttentionLayer all_pairs(const std::vector<int>& input_orders,
                                  const std::vector<int>& output_orders, int dim);

  std::vector<Field> apply(std::span<const Field> channels) const;
};

/// Text manifest holding everything needed to rebuild a NeuralOp.
std::string model_manifest(const NeuralOp& op);
NeuralOp parse_model_manifest(const std::string& text);
void save_model(const std::string& path, const NeuralOp& op);
NeuralOp load_model(const std::string& path);

}  // namespace eqop
