#include "eqop/learn.hpp"

#include "eqop/text.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace eqop {

std::string RadialBasis::term_name(Index k) const {
  const auto ng = static_cast<Index>(gaussian_widths.size());
  const auto np = static_cast<Index>(power_exponents.size());
  if (k < 0 || k >= size()) throw RuleError("basis term index out of range");
  if (k < ng) return "gaussian(" + format_double(gaussian_widths[k]) + ")";
  if (k < ng + np) return "power(" + std::to_string(power_exponents[k - ng]) + ")";
  return "stencil(" + std::to_string(stencil_orders[k - ng - np]) + ")";
}

RadialBasis RadialBasis::defaults(const Grid& grid, int l_h) {
  double h = grid.spacing[0];
  double side = static_cast<double>(grid.shape[0]) * grid.spacing[0];
  for (int a = 1; a < grid.dim; ++a) {
    h = std::min(h, grid.spacing[a]);
    side = std::min(side, static_cast<double>(grid.shape[a]) * grid.spacing[a]);
  }
  const double lo = h;
  const double hi = std::max(h, side / 4.0);
  RadialBasis b;
  constexpr int n = 8;
  for (int i = 0; i < n; ++i)
    b.gaussian_widths.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  b.power_exponents = {1, 2};
  b.power_rmin = h;
  if (l_h == 0) b.stencil_orders = {0};
  if (l_h == 1) b.stencil_orders = {1};
  return b;
}

ParamRadial::ParamRadial(RadialBasis b)
    : basis(std::move(b)),
      amplitudes(Eigen::VectorXd::Zero(basis.size())),
      trainable(static_cast<std::size_t>(basis.size()), true) {}

ParamRadial::ParamRadial(RadialBasis b, Eigen::VectorXd amps) : ParamRadial(std::move(b)) {
  if (amps.size() != basis.size()) throw RuleError("amplitude count does not match basis size");
  amplitudes = std::move(amps);
}

double ParamRadial::radial(double r) const {
  double s = 0.0;
  Index k = 0;
  for (double w : basis.gaussian_widths) s += amplitudes[k++] * std::exp(-r * r / (w * w));
  for (int e : basis.power_exponents) {
    if (r >= basis.power_rmin) s += amplitudes[k] * std::pow(r, -std::abs(e));
    ++k;
  }
  return s;
}

namespace {

void check_basis(const RadialBasis& b, int l_h) {
  for (double w : b.gaussian_widths)
    if (!(w > 0.0) || !std::isfinite(w)) throw RuleError("gaussian widths must be positive");
  for (int e : b.power_exponents)
    if (e == 0) throw RuleError("power exponents must be nonzero");
  if (!b.power_exponents.empty() && !(b.power_rmin > 0.0))
    throw RuleError("power-law inner cutoff must be positive");
  for (int o : b.stencil_orders) {
    if (o != 0 && o != 1) throw RuleError("stencil order must be 0 or 1");
    if (o != l_h)
      throw RuleError("stencil of order " + std::to_string(o) + " needs kernel order " +
                      std::to_string(o) + ", operator has " + std::to_string(l_h));
  }
}

}  // namespace

NeuralOp::NeuralOp(const Grid& grid, const Rule& rule, ParamRadial param)
    : grid_(grid), kernel_grid_(full_range_kernel_grid(grid)), rule_(rule), param_(std::move(param)) {
  validate(rule_, grid_.dim);
  check_basis(param_.basis, rule_.lh);
  if (param_.amplitudes.size() != param_.basis.size())
    throw RuleError("amplitude count does not match basis size");
  if (static_cast<Index>(param_.trainable.size()) != param_.basis.size())
    throw RuleError("trainable mask size does not match basis size");

  for (double w : param_.basis.gaussian_widths)
    basis_.push_back(sample_kernel(kernel_grid_, gaussian_profile(w), rule_.lh));
  for (int e : param_.basis.power_exponents) {
    const double rmin = param_.basis.power_rmin;
    const int k = std::abs(e);
    RadialProfile p{"power", [rmin, k](double r) { return r >= rmin ? std::pow(r, -k) : 0.0; }};
    basis_.push_back(sample_kernel(kernel_grid_, p, rule_.lh));
  }
  for (int o : param_.basis.stencil_orders)
    basis_.push_back(embed_kernel(o == 0 ? delta_stencil(grid_) : gradient_stencil(grid_), kernel_grid_));
}

void NeuralOp::set_amplitudes(const Eigen::VectorXd& a) {
  if (a.size() != param_.basis.size()) throw RuleError("amplitude count does not match basis size");
  if (!a.allFinite()) throw NumericalError("amplitudes must be finite");
  param_.amplitudes = a;
}

KernelField NeuralOp::kernel() const {
  KernelField k{Field(kernel_grid_, rule_.lh), KernelKind::sampled, "neural"};
  for (std::size_t i = 0; i < basis_.size(); ++i)
    k.field.data() += param_.amplitudes[static_cast<Index>(i)] * basis_[i].field.data();
  return k;
}

Field apply_neural(const NeuralOp& op, const Field& u) {
  if (u.l() != op.rule().lu)
    throw RuleError("neural operator expects an order-" + std::to_string(op.rule().lu) +
                    " field, got order " + std::to_string(u.l()));
  if (!u.grid().same_lattice(op.grid())) throw RuleError("neural operator was built for a different grid");
  return conv(u, op.kernel(), make_plan(op.rule(), u.dim(), Path::fourier, op.grid().boundary));
}

namespace {

void check_dataset(const NeuralOp& op, const Dataset& data) {
  if (data.empty()) throw FormatError("dataset is empty");
  for (const Sample& s : data) {
    if (!s.input.grid().same_lattice(op.grid()) || !s.target.grid().same_lattice(op.grid()))
      throw RuleError("dataset field lives on a different grid than the operator");
    if (s.input.l() != op.rule().lu || s.target.l() != op.rule().lv)
      throw RuleError("dataset field orders do not match rule " + to_string(op.rule()));
  }
}

}  // namespace

BasisDesign basis_design(const NeuralOp& op, const Dataset& data) {
  check_dataset(op, data);
  const Index k = op.param().size();
  if (k == 0) throw RuleError("radial basis is empty");
  const Index per = data.front().target.data().size();
  const Index rows = per * static_cast<Index>(data.size());

  BasisDesign d;
  d.responses.resize(rows, k);
  d.target.resize(rows);
  for (std::size_t s = 0; s < data.size(); ++s) {
    const Index off = static_cast<Index>(s) * per;
    const SpectralConvolver sc(data[s].input, op.kernel_grid(), op.grid().boundary);
    for (Index j = 0; j < k; ++j) {
      const Field r = sc.apply(op.basis_kernel(j), op.rule());
      d.responses.col(j).segment(off, per) = r.data().reshaped<Eigen::RowMajor>();
    }
    d.target.segment(off, per) = data[s].target.data().reshaped<Eigen::RowMajor>();
  }
  d.target_energy = d.target.squaredNorm();
  if (!(d.target_energy > 0.0)) throw NumericalError("dataset targets are identically zero");
  return d;
}

double loss(const BasisDesign& d, const Eigen::VectorXd& amplitudes) {
  return (d.responses * amplitudes - d.target).squaredNorm() / d.target_energy;
}

double loss(const NeuralOp& op, const Dataset& data) {
  check_dataset(op, data);
  double num = 0.0;
  double den = 0.0;
  for (const Sample& s : data) {
    num += (apply_neural(op, s.input).data() - s.target.data()).squaredNorm();
    den += s.target.data().squaredNorm();
  }
  if (!(den > 0.0)) throw NumericalError("dataset targets are identically zero");
  return num / den;
}

Eigen::VectorXd grad_params(const BasisDesign& d, const Eigen::VectorXd& amplitudes,
                            const std::vector<bool>& trainable) {
  Eigen::VectorXd g =
      (2.0 / d.target_energy) * (d.responses.transpose() * (d.responses * amplitudes - d.target));
  for (Index i = 0; i < g.size(); ++i)
    if (!trainable[static_cast<std::size_t>(i)]) g[i] = 0.0;
  return g;
}

Eigen::VectorXd grad_params(const NeuralOp& op, const Dataset& data) {
  return grad_params(basis_design(op, data), op.amplitudes(), op.param().trainable);
}

FitResult fit_least_squares(const NeuralOp& op, const Dataset& data, double ridge) {
  const BasisDesign d = basis_design(op, data);
  const Eigen::VectorXd& p0 = op.amplitudes();
  const auto& mask = op.param().trainable;

  std::vector<Index> free;
  for (Index i = 0; i < p0.size(); ++i)
    if (mask[static_cast<std::size_t>(i)]) free.push_back(i);

  FitResult res;
  res.amplitudes = p0;
  if (free.empty()) {
    res.loss = loss(d, p0);
    res.condition = 1.0;
    return res;
  }

  // frozen terms move to the right-hand side
  Eigen::VectorXd rhs_target = d.target;
  for (Index i = 0; i < p0.size(); ++i)
    if (!mask[static_cast<std::size_t>(i)]) rhs_target -= p0[i] * d.responses.col(i);

  const auto nf = static_cast<Index>(free.size());
  Eigen::MatrixXd phi(d.responses.rows(), nf);
  for (Index j = 0; j < nf; ++j) phi.col(j) = d.responses.col(free[static_cast<std::size_t>(j)]);

  Eigen::VectorXd scale = phi.colwise().norm().transpose();
  for (Index j = 0; j < nf; ++j)
    if (!(scale[j] > 0.0))
      throw NumericalError("basis term " + op.param().basis.term_name(free[static_cast<std::size_t>(j)]) +
                           " has no response on the dataset; condition estimate inf");

  const Eigen::MatrixXd a = phi * scale.cwiseInverse().asDiagonal();
  Eigen::MatrixXd gram = a.transpose() * a;
  const Eigen::VectorXd b = a.transpose() * rhs_target;

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  const double emax = es.eigenvalues().maxCoeff();
  const double emin = es.eigenvalues().minCoeff();
  res.condition = emin > 0.0 ? emax / emin : std::numeric_limits<double>::infinity();

  const double lambda = ridge * gram.trace() / static_cast<double>(nf);
  gram.diagonal().array() += lambda;
  const double reg_cond = (emax + lambda) / std::max(emin + lambda, 0.0);
  if (!(reg_cond < 1e15))
    throw NumericalError("normal equations are singular (condition estimate " +
                         format_double(res.condition) + ")");

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("normal equations are singular (condition estimate " +
                         format_double(res.condition) + ")");
  const Eigen::VectorXd x = ldlt.solve(b).cwiseQuotient(scale);
  if (!x.allFinite()) throw NumericalError("least-squares solution is not finite");

  for (Index j = 0; j < nf; ++j) res.amplitudes[free[static_cast<std::size_t>(j)]] = x[j];
  res.loss = loss(d, res.amplitudes);
  return res;
}

DescentResult fit_gradient_descent(const NeuralOp& op, const Dataset& data, int steps,
                                   double step_size) {
  if (!(step_size > 0.0)) throw RuleError("step size must be positive");
  if (steps < 0) throw RuleError("step count must be non-negative");
  const BasisDesign d = basis_design(op, data);
  DescentResult res{op.amplitudes(), {}};
  const double initial = loss(d, res.amplitudes);
  res.trace.push_back(initial);
  for (int s = 0; s < steps; ++s) {
    res.amplitudes -= step_size * grad_params(d, res.amplitudes, op.param().trainable);
    const double l = loss(d, res.amplitudes);
    res.trace.push_back(l);
    if (!std::isfinite(l) || l > 1e6 * initial)
      throw DivergenceError("gradient descent diverged at step " + std::to_string(s + 1) +
                                " (loss " + format_double(l) + ")",
                            res.trace);
  }
  return res;
}

std::vector<Field> NonlinearLayer::apply(std::span<const Field> channels) const {
  if (channels.size() != scale.size() || channels.size() != bias.size())
    throw RuleError("nonlinear layer has " + std::to_string(scale.size()) + " channels, got " +
                    std::to_string(channels.size()));
  std::vector<Field> out;
  out.reserve(channels.size());
  for (std::size_t j = 0; j < channels.size(); ++j) {
    const Field& u = channels[j];
    Field v(u.grid(), u.l());
    for (Index i = 0; i < u.voxels(); ++i) {
      const double n = u.value(i).norm();
      if (n == 0.0) continue;
      double s = scale[j] * n + bias[j];
      if (activation == Activation::relu) s = std::max(s, 0.0);
      v.value(i) = (s / n) * u.value(i);
    }
    out.push_back(std::move(v));
  }
  return out;
}

AttentionLayer AttentionLayer::all_pairs(const std::vector<int>& input_orders,
                                         const std::vector<int>& output_orders, int dim) {
  AttentionLayer layer;
  layer.output_orders = output_orders;
  const int n = static_cast<int>(input_orders.size());
  auto order = [&](int c) { return c == kIdentityChannel ? 0 : input_orders[static_cast<std::size_t>(c)]; };
  for (int j = 0; j < static_cast<int>(output_orders.size()); ++j)
    for (int a = kIdentityChannel; a < n; ++a)
      for (int b = kIdentityChannel; b < n; ++b)
        for (Product p : {Product::scalar, Product::dot, Product::cross, Product::matvec}) {
          const Rule r{order(a), order(b), output_orders[static_cast<std::size_t>(j)], p};
          try {
            validate(r, dim);
          } catch (const RuleError&) {
            continue;
          }
          layer.terms.push_back({j, a, b, r, 1.0});
        }
  return layer;
}

std::vector<Field> AttentionLayer::apply(std::span<const Field> channels) const {
  if (channels.empty()) throw RuleError("attention layer needs at least one input channel");
  const Grid& g = channels.front().grid();
  const Field one = constant_scalar(g);
  auto pick = [&](int c) -> const Field& {
    if (c == kIdentityChannel) return one;
    if (c < 0 || c >= static_cast<int>(channels.size()))
      throw RuleError("attention term refers to missing channel " + std::to_string(c));
    return channels[static_cast<std::size_t>(c)];
  };
  std::vector<Field> out;
  for (int l : output_orders) out.emplace_back(g, l);
  for (const AttentionTerm& t : terms) {
    if (t.output < 0 || t.output >= static_cast<int>(out.size()))
      throw RuleError("attention term refers to missing output " + std::to_string(t.output));
    if (t.rule.lv != output_orders[static_cast<std::size_t>(t.output)])
      throw RuleError("attention rule " + to_string(t.rule) + " does not produce output order " +
                      std::to_string(output_orders[static_cast<std::size_t>(t.output)]));
    Field p = pointwise_product(pick(t.a), pick(t.b), t.rule);
    out[static_cast<std::size_t>(t.output)] += t.weight * p;
  }
  return out;
}

namespace {

template <typename T>
std::string join_ints(const std::vector<T>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(xs[i]);
  }
  return s;
}

std::string join_axes(const auto& xs, int dim) {
  std::vector<double> v(xs.begin(), xs.begin() + dim);
  return join_doubles(v);
}

}  // namespace

std::string model_manifest(const NeuralOp& op) {
  const Grid& g = op.grid();
  const RadialBasis& b = op.param().basis;
  KeyValueText kv;
  kv.add("format", std::string("eqop-model-1"));
  kv.add("dim", std::to_string(g.dim));
  std::vector<long long> shape(g.shape.begin(), g.shape.begin() + g.dim);
  kv.add("shape", join_ints(shape));
  kv.add("spacing", join_axes(g.spacing, g.dim));
  kv.add("origin", join_axes(g.origin, g.dim));
  kv.add("boundary", to_string(g.boundary));
  kv.add("rule", join_ints(std::vector<int>{op.rule().lu, op.rule().lh, op.rule().lv}));
  kv.add("product", to_string(op.rule().product));
  kv.add("gaussian_widths", join_doubles(b.gaussian_widths));
  kv.add("power_exponents", join_ints(b.power_exponents));
  kv.add("power_rmin", b.power_rmin);
  kv.add("stencil_orders", join_ints(b.stencil_orders));
  const Eigen::VectorXd& a = op.amplitudes();
  kv.add("amplitudes", join_doubles(std::vector<double>(a.data(), a.data() + a.size())));
  std::vector<int> mask(op.param().trainable.begin(), op.param().trainable.end());
  kv.add("trainable", join_ints(mask));
  return kv.str();
}

NeuralOp parse_model_manifest(const std::string& text) {
  const KeyValueText kv = KeyValueText::parse(text);
  if (!kv.has("format") || kv.get("format") != "eqop-model-1")
    throw FormatError("not an eqop model manifest");
  const Grid g = parse_grid_tokens(kv.get("dim"), kv.get("shape"), kv.get("spacing"),
                                   kv.get("origin"), kv.get("boundary"));
  const auto ls = parse_ints(kv.get("rule"));
  if (ls.size() != 3) throw FormatError("model rule must have three orders");
  const Rule rule{static_cast<int>(ls[0]), static_cast<int>(ls[1]), static_cast<int>(ls[2]),
                  product_from_string(kv.get("product"))};

  RadialBasis b;
  b.gaussian_widths = parse_doubles(kv.get("gaussian_widths"));
  for (long long e : parse_ints(kv.get("power_exponents"))) b.power_exponents.push_back(static_cast<int>(e));
  b.power_rmin = parse_double(kv.get("power_rmin"));
  for (long long o : parse_ints(kv.get("stencil_orders"))) b.stencil_orders.push_back(static_cast<int>(o));

  const auto amps = parse_doubles(kv.get("amplitudes"));
  if (static_cast<Index>(amps.size()) != b.size())
    throw FormatError("model has " + std::to_string(amps.size()) + " amplitudes for " +
                      std::to_string(b.size()) + " basis terms");
  ParamRadial p(b, Eigen::Map<const Eigen::VectorXd>(amps.data(), static_cast<Index>(amps.size())));
  const auto mask = parse_ints(kv.get("trainable"));
  if (static_cast<Index>(mask.size()) != b.size()) throw FormatError("trainable mask has wrong length");
  for (std::size_t i = 0; i < mask.size(); ++i) p.trainable[i] = mask[i] != 0;
  return NeuralOp(g, rule, std::move(p));
}

void save_model(const std::string& path, const NeuralOp& op) { write_text_file(path, model_manifest(op)); }

NeuralOp load_model(const std::string& path) { return parse_model_manifest(read_text_file(path)); }

}  // namespace eqop
