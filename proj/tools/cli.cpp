#include "cli.hpp"

#include "checks.hpp"

#include "eqop/conv.hpp"
#include "eqop/eqf.hpp"
#include "eqop/learn.hpp"
#include "eqop/operators.hpp"
#include "eqop/sim.hpp"
#include "eqop/text.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

namespace eqop::cli {

namespace fs = std::filesystem;

double RunReport::metric_value(const std::string& k) const {
  for (const auto& [name, v] : metrics)
    if (name == k) return v;
  throw std::out_of_range("no metric " + k);
}

std::string RunReport::text() const {
  std::ostringstream s;
  s << "eqop " << command << "\n";
  for (const auto& [k, v] : inputs) s << "  input      " << k << ": " << v << "\n";
  for (const auto& [k, v] : parameters) s << "  parameter  " << k << ": " << v << "\n";
  for (const auto& [k, v] : metrics) s << "  metric     " << k << ": " << format_double(v) << "\n";
  for (const auto& o : outputs) s << "  output     " << o << "\n";
  for (const auto& n : notes) s << n << "\n";
  return s.str();
}

std::string RunReport::key_values() const {
  KeyValueText kv;
  kv.add("command", command);
  for (const auto& [k, v] : inputs) kv.add("input." + k, v);
  for (const auto& [k, v] : parameters) kv.add("param." + k, v);
  for (const auto& [k, v] : metrics) kv.add("metric." + k, v);
  for (const auto& o : outputs) kv.add("output", o);
  return kv.str();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> axis_values(const std::string& s, int dim, double fallback, const char* what) {
  if (s.empty()) return std::vector<double>(static_cast<std::size_t>(dim), fallback);
  std::vector<double> v = parse_doubles(s);
  if (v.size() == 1) v.assign(static_cast<std::size_t>(dim), v[0]);
  if (static_cast<int>(v.size()) != dim)
    throw FormatError(std::string(what) + " needs 1 or " + std::to_string(dim) + " values");
  return v;
}

Grid grid_from_flags(const std::string& shape, const std::string& spacing, const std::string& origin,
                     const std::string& boundary) {
  std::vector<Index> n;
  for (long long x : parse_ints(shape)) n.push_back(static_cast<Index>(x));
  if (n.size() != 2 && n.size() != 3) throw FormatError("shape needs 2 or 3 extents");
  const int dim = static_cast<int>(n.size());
  const auto h = axis_values(spacing, dim, 1.0, "spacing");
  const auto o = axis_values(origin, dim, 0.0, "origin");
  return Grid::make(n, h, o, boundary_from_string(boundary));
}

Eigen::Vector3d grid_center(const Grid& g) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (int a = 0; a < g.dim; ++a)
    c[a] = g.origin[a] + 0.5 * static_cast<double>(g.shape[a] - 1) * g.spacing[a];
  return c;
}

std::array<Index, 3> center_index(const Grid& g) {
  std::array<Index, 3> c{0, 0, 0};
  for (int a = 0; a < g.dim; ++a) c[a] = g.shape[a] / 2;
  return c;
}

Field random_density(const Grid& g, int l, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Field f(g, l);
  for (Index i = 0; i < f.data().size(); ++i) f.data().data()[i] = d(rng);
  return f;
}

void add_field_metrics(RunReport& r, const std::string& prefix, const Field& f) {
  r.metric(prefix + "_max_abs", max_abs(f));
  r.metric(prefix + "_l2", f.data().norm() * std::sqrt(f.grid().voxel_volume()));
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path q(p);
  return q.is_absolute() ? q : base / q;
}

std::pair<std::string, std::string> split_pair(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw FormatError("expected 'input.eqf,target.eqf', got '" + s + "'");
  return {parts[0], parts[1]};
}

// apply ------------------------------------------------------------------

struct ApplyArgs {
  std::string op;
  std::string input;
  std::string output;
  std::string path;
  std::string boundary;
  double diffusivity = 0.1;
  double time = 1.0;
};

RunReport cmd_apply(const ApplyArgs& a) {
  const auto t0 = Clock::now();
  RunReport r;
  r.command = "apply";
  r.input("operator", a.op);
  r.input("field", a.input);
  Field u = load_eqf(a.input).field;
  if (!a.boundary.empty()) u = u.with_boundary(boundary_from_string(a.boundary));
  r.param("boundary", to_string(u.grid().boundary));

  const auto& names = operator_names();
  const bool is_named = std::find(names.begin(), names.end(), a.op) != names.end();
  Field v;
  if (!is_named && fs::is_regular_file(a.op)) {
    const NeuralOp op = load_model(a.op);
    const Path p = a.path.empty() ? Path::fourier : path_from_string(a.path);
    r.param("path", to_string(p));
    r.param("rule", to_string(op.rule()));
    if (!u.grid().same_lattice(op.grid())) throw RuleError("model was fitted on a different grid");
    if (u.l() != op.rule().lu) throw RuleError("model expects an order-" + std::to_string(op.rule().lu) + " field");
    v = conv(u, op.kernel(), make_plan(op.rule(), u.dim(), p, u.grid().boundary));
  } else {
    EquivariantOp op = make_operator(a.op, u.grid(), u.l(), {a.diffusivity, a.time});
    if (!a.path.empty()) op.path = path_from_string(a.path);
    r.param("path", to_string(op.path));
    r.param("rule", to_string(op.rule));
    if (a.op == "diffusion") {
      r.param("diffusivity", format_double(a.diffusivity));
      r.param("time", format_double(a.time));
    }
    // the identity is exact: the payload is copied rather than convolved
    v = a.op == "identity" ? u : op.apply(u);
  }
  save_eqf(a.output, v);

  add_field_metrics(r, "input", u);
  add_field_metrics(r, "output", v);
  Index arg = 0;
  const Eigen::VectorXd norms = v.data().colwise().norm().transpose();
  r.metric("output_max_norm", norms.maxCoeff(&arg));
  const auto ijk = v.grid().unflat(arg);
  r.metric("output_max_norm_i", static_cast<double>(ijk[0]));
  r.metric("output_max_norm_j", static_cast<double>(ijk[1]));
  if (v.dim() == 3) r.metric("output_max_norm_k", static_cast<double>(ijk[2]));
  r.metric("wall_time_s", seconds_since(t0));
  r.outputs.push_back(a.output);
  return r;
}

// fit --------------------------------------------------------------------

struct FitArgs {
  std::vector<std::string> pairs;
  std::vector<std::string> tests;
  std::string dataset;
  std::string rule;
  std::string product;
  std::optional<std::string> widths;
  std::optional<std::string> powers;
  std::optional<double> rmin;
  std::optional<std::string> stencils;
  std::string method = "ls";
  int steps = 1000;
  double step_size = 0.0;
  double ridge = 1e-10;
  std::string model;
  std::string csv;
  std::string reference;
  std::string test_operator;
  int test_random = 0;
  std::uint64_t seed = 0;
};

std::optional<std::function<double(double)>> reference_profile(const std::string& name) {
  if (name.empty()) return std::nullopt;
  if (name == "inverse_r") return [](double r) { return 1.0 / (4.0 * std::numbers::pi * r); };
  if (name == "inverse_r2") return [](double r) { return 1.0 / (4.0 * std::numbers::pi * r * r); };
  if (name == "log_r") return [](double r) { return -std::log(r) / (2.0 * std::numbers::pi); };
  throw FormatError("unknown reference '" + name + "' (inverse_r, inverse_r2, log_r)");
}

double dataset_error(const NeuralOp& op, const Dataset& d, double* worst) {
  double num = 0.0, den = 0.0;
  *worst = 0.0;
  for (const Sample& s : d) {
    const double e = (apply_neural(op, s.input).data() - s.target.data()).squaredNorm();
    const double t = s.target.data().squaredNorm();
    num += e;
    den += t;
    *worst = std::max(*worst, t > 0.0 ? e / t : e);
  }
  return den > 0.0 ? num / den : num;
}

RunReport cmd_fit(const FitArgs& a) {
  const auto t0 = Clock::now();
  RunReport r;
  r.command = "fit";

  std::vector<std::pair<std::string, std::string>> train_files, test_files;
  for (const auto& p : a.pairs) train_files.push_back(split_pair(p));
  for (const auto& p : a.tests) test_files.push_back(split_pair(p));
  if (!a.dataset.empty()) {
    r.input("dataset", a.dataset);
    const fs::path base = fs::path(a.dataset).parent_path();
    const KeyValueText kv = KeyValueText::parse(read_text_file(a.dataset));
    for (const auto& p : kv.get_all("pair")) {
      auto [x, y] = split_pair(p);
      train_files.emplace_back(resolve(base, x).string(), resolve(base, y).string());
    }
    for (const auto& p : kv.get_all("test")) {
      auto [x, y] = split_pair(p);
      test_files.emplace_back(resolve(base, x).string(), resolve(base, y).string());
    }
  }
  if (train_files.empty()) throw FormatError("fit needs at least one training pair");

  auto load = [](const std::vector<std::pair<std::string, std::string>>& files) {
    Dataset d;
    for (const auto& [x, y] : files) d.push_back({load_eqf(x).field, load_eqf(y).field});
    return d;
  };
  const Dataset train = load(train_files);
  Dataset test = load(test_files);
  for (std::size_t i = 0; i < train_files.size(); ++i)
    r.input("pair" + std::to_string(i), train_files[i].first + "," + train_files[i].second);

  const Grid& g = train.front().input.grid();
  for (const Sample& s : train)
    if (!s.input.grid().same_lattice(g) || !s.target.grid().same_lattice(g))
      throw RuleError("training pairs live on different grids");

  const auto ls = parse_ints(a.rule);
  if (ls.size() != 3) throw FormatError("--rule needs three orders, e.g. 0,0,0");
  Rule rule = make_rule(static_cast<int>(ls[0]), static_cast<int>(ls[1]), static_cast<int>(ls[2]), g.dim);
  if (!a.product.empty()) {
    rule.product = product_from_string(a.product);
    validate(rule, g.dim);
  }
  r.param("rule", to_string(rule));

  RadialBasis b = RadialBasis::defaults(g, rule.lh);
  if (a.widths) b.gaussian_widths = parse_doubles(*a.widths);
  if (a.powers) {
    b.power_exponents.clear();
    for (long long e : parse_ints(*a.powers)) b.power_exponents.push_back(static_cast<int>(e));
  }
  if (a.rmin) b.power_rmin = *a.rmin;
  if (a.stencils) {
    b.stencil_orders.clear();
    for (long long o : parse_ints(*a.stencils)) b.stencil_orders.push_back(static_cast<int>(o));
  }
  r.param("gaussian_widths", join_doubles(b.gaussian_widths));
  r.param("power_rmin", format_double(b.power_rmin));
  r.param("basis_size", std::to_string(b.size()));
  r.param("method", a.method);

  NeuralOp op(g, rule, ParamRadial(b));
  if (a.method == "ls") {
    const FitResult fit = fit_least_squares(op, train, a.ridge);
    op.set_amplitudes(fit.amplitudes);
    r.metric("condition", fit.condition);
  } else if (a.method == "gd") {
    double step = a.step_size;
    if (!(step > 0.0)) {
      // 1 / largest curvature of the quadratic loss
      const BasisDesign d = basis_design(op, train);
      const Eigen::MatrixXd h = 2.0 / d.target_energy * d.responses.transpose() * d.responses;
      step = 1.0 / h.diagonal().sum();
    }
    r.param("steps", std::to_string(a.steps));
    r.param("step_size", format_double(step));
    const DescentResult fit = fit_gradient_descent(op, train, a.steps, step);
    op.set_amplitudes(fit.amplitudes);
    r.metric("initial_loss", fit.trace.front());
  } else {
    throw FormatError("--method must be ls or gd");
  }

  double worst = 0.0;
  r.metric("train_error", dataset_error(op, train, &worst));

  if (a.test_random > 0) {
    if (a.test_operator.empty()) throw FormatError("--test-random needs --test-operator");
    const EquivariantOp oracle = make_operator(a.test_operator, g, rule.lu);
    for (int i = 0; i < a.test_random; ++i) {
      Field u = random_density(g, rule.lu, a.seed + 1000 + static_cast<std::uint64_t>(i));
      Field v = oracle(u);
      test.push_back({std::move(u), std::move(v)});
    }
    r.param("test_operator", a.test_operator);
    r.param("seed", std::to_string(a.seed));
  }
  if (!test.empty()) {
    for (const Sample& s : test)
      if (!s.input.grid().same_lattice(g) || !s.target.grid().same_lattice(g))
        throw RuleError("test pairs live on a different grid than the training pairs");
    r.metric("test_error", dataset_error(op, test, &worst));
    r.metric("test_error_max", worst);
    r.metric("test_samples", static_cast<double>(test.size()));
  }

  const auto ref = reference_profile(a.reference);
  double h = g.spacing[0];
  Index nmin = g.shape[0];
  for (int ax = 1; ax < g.dim; ++ax) {
    h = std::min(h, g.spacing[ax]);
    nmin = std::min(nmin, g.shape[ax]);
  }
  std::ostringstream csv;
  csv << (ref ? "r,R_fitted,R_reference\n" : "r,R_fitted\n");
  double dev = 0.0;
  for (Index k = 4; k <= 2 * nmin; ++k) {
    const double rr = 0.25 * static_cast<double>(k) * h;
    const double fv = op.param().radial(rr);
    csv << format_double(rr) << ',' << format_double(fv);
    if (ref) {
      const double rv = (*ref)(rr);
      csv << ',' << format_double(rv);
      if (rr >= 2.0 * h - 1e-12 && rr <= 4.0 * h + 1e-12) dev = std::max(dev, std::abs(fv - rv) / std::abs(rv));
    }
    csv << '\n';
  }
  if (ref) {
    r.param("reference", a.reference);
    r.metric("radial_max_rel_dev_2h_4h", dev);
  }
  if (!a.csv.empty()) {
    write_text_file(a.csv, csv.str());
    r.outputs.push_back(a.csv);
  }
  if (!a.model.empty()) {
    save_model(a.model, op);
    r.outputs.push_back(a.model);
  }
  for (Index k = 0; k < op.param().size(); ++k)
    r.notes.push_back("  amplitude  " + b.term_name(k) + " = " + format_double(op.amplitudes()[k]));
  r.metric("wall_time_s", seconds_since(t0));
  return r;
}

// simulate ---------------------------------------------------------------

struct SimArgs {
  double diffusivity = 0.0;
  double wx = 0.0, wy = 0.0, wz = 0.0;
  double dt = 0.0;
  int steps = 0;
  std::string source;
  std::string u0;
  std::string outdir;
  std::string boundary = "periodic";
};

RunReport cmd_simulate(const SimArgs& a) {
  const auto t0 = Clock::now();
  RunReport r;
  r.command = "simulate";
  if (a.u0.empty() && a.source.empty()) throw FormatError("simulate needs --u0 or --source to fix the grid");
  const Boundary bnd = boundary_from_string(a.boundary);
  std::optional<Field> src;
  if (!a.source.empty()) {
    src = load_eqf(a.source).field.with_boundary(bnd);
    r.input("source", a.source);
  }
  Field u0 = a.u0.empty() ? Field(src->grid(), 0) : load_eqf(a.u0).field.with_boundary(bnd);
  if (!a.u0.empty()) r.input("u0", a.u0);
  const Grid& g = u0.grid();

  Eigen::VectorXd w(g.dim);
  w[0] = a.wx;
  w[1] = a.wy;
  if (g.dim == 3) w[2] = a.wz;
  else if (a.wz != 0.0) throw RuleError("--wz given for a 2d grid");
  const auto model = DiffusionAdvectionModel::make(g, a.diffusivity, w, src, a.dt);
  r.param("D", format_double(a.diffusivity));
  r.param("wind", join_doubles(std::vector<double>(w.data(), w.data() + w.size())));
  r.param("dt", format_double(a.dt));
  r.param("steps", std::to_string(a.steps));
  r.param("boundary", to_string(bnd));
  r.metric("max_stable_dt", model.max_stable_dt());

  const auto frames = simulate(model, u0, a.steps);
  const double v = g.voxel_volume();
  const double m0 = u0.data().sum() * v;
  const double rate = model.source.data().sum() * v;
  double drift = 0.0;
  double scale = std::abs(m0);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const double mk = frames[k].data().sum() * v;
    scale = std::max(scale, std::abs(mk));
    drift = std::max(drift, std::abs(mk - m0 - static_cast<double>(k) * a.dt * rate));
  }
  r.metric("mass_initial", m0);
  r.metric("mass_final", frames.back().data().sum() * v);
  r.metric("mass_drift", scale > 0.0 ? drift / scale : drift);
  r.metric("frames", static_cast<double>(frames.size()));

  Trajectory t{frames, a.dt, src, a.diffusivity, w};
  r.outputs.push_back(save_trajectory(a.outdir, t));
  r.metric("wall_time_s", seconds_since(t0));
  return r;
}

// estimate ---------------------------------------------------------------

struct EstimateArgs {
  std::string manifest;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

RunReport cmd_estimate(const EstimateArgs& a) {
  const auto t0 = Clock::now();
  RunReport r;
  r.command = "estimate";
  r.input("trajectory", a.manifest);
  const Trajectory t = load_trajectory(a.manifest);
  std::vector<Field> frames = t.frames;
  if (a.noise > 0.0) {
    frames = add_noise(frames, a.noise, a.seed);
    r.param("noise", format_double(a.noise));
    r.param("seed", std::to_string(a.seed));
  }
  const ParameterEstimate e = estimate_parameters(frames, t.dt, t.source);
  r.metric("D", e.diffusivity);
  const char* axes[] = {"wx", "wy", "wz"};
  for (Index i = 0; i < e.wind.size(); ++i) r.metric(axes[i], e.wind[i]);
  r.metric("residual", e.residual);
  r.metric("condition", e.condition);
  if (t.diffusivity && *t.diffusivity != 0.0)
    r.metric("D_rel_error", std::abs(e.diffusivity - *t.diffusivity) / std::abs(*t.diffusivity));
  if (t.wind && t.wind->size() == e.wind.size()) {
    for (Index i = 0; i < e.wind.size(); ++i)
      if ((*t.wind)[i] != 0.0)
        r.metric(std::string(axes[i]) + "_rel_error", std::abs(e.wind[i] - (*t.wind)[i]) / std::abs((*t.wind)[i]));
    if (t.wind->norm() > 0.0) r.metric("w_rel_error", (e.wind - *t.wind).norm() / t.wind->norm());
  }
  r.metric("wall_time_s", seconds_since(t0));
  return r;
}

// check ------------------------------------------------------------------

struct CheckArgs {
  std::string input;
  std::string random_shape;
  int l = 0;
  std::string spacing;
  std::string boundary = "zero";
  std::uint64_t seed = 0;
  bool corrupt = false;
};

RunReport cmd_check(const CheckArgs& a, bool& all_pass) {
  const auto t0 = Clock::now();
  RunReport r;
  r.command = "check";
  Field u;
  if (!a.input.empty()) {
    u = load_eqf(a.input).field;
    r.input("field", a.input);
  } else {
    const Grid g = grid_from_flags(a.random_shape.empty() ? "9,9,9" : a.random_shape, a.spacing, "", a.boundary);
    u = random_density(g, a.l, a.seed);
    r.param("random_shape", a.random_shape.empty() ? "9,9,9" : a.random_shape);
    r.param("l", std::to_string(a.l));
  }
  r.param("seed", std::to_string(a.seed));
  if (a.corrupt) r.param("corrupt_kernel", "1");
  const auto results = run_property_checks(u, {a.seed, 5, a.corrupt});
  all_pass = true;
  r.notes.push_back("  suite,property,max_deviation,tolerance,result");
  for (const auto& c : results) {
    r.metric(c.suite + "." + c.name, c.deviation);
    r.notes.push_back("  " + c.suite + "," + c.name + "," + format_double(c.deviation) + "," +
                      format_double(c.tolerance) + "," + (c.pass() ? "pass" : "FAIL"));
    all_pass = all_pass && c.pass();
  }
  r.metric("checks", static_cast<double>(results.size()));
  r.metric("all_pass", all_pass ? 1.0 : 0.0);
  r.metric("wall_time_s", seconds_since(t0));
  return r;
}

// generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string kind;
  std::string output;
  std::string shape = "16,16,16";
  std::string spacing;
  std::string origin;
  std::string boundary = "zero";
  int l = 0;
  double sigma = 3.0;
  double charge = 1.0;
  std::string at;
  std::uint64_t seed = 0;
};

RunReport cmd_generate(const GenerateArgs& a) {
  RunReport r;
  r.command = "generate";
  const Grid g = grid_from_flags(a.shape, a.spacing, a.origin, a.boundary);
  r.param("kind", a.kind);
  r.param("shape", a.shape);
  Field f;
  std::array<Index, 3> at = center_index(g);
  if (!a.at.empty()) {
    const auto v = parse_ints(a.at);
    if (static_cast<int>(v.size()) != g.dim) throw FormatError("--at needs one index per axis");
    for (int i = 0; i < g.dim; ++i) at[i] = static_cast<Index>(v[i]);
  }
  if (a.kind == "random") {
    f = random_density(g, a.l, a.seed);
    r.param("seed", std::to_string(a.seed));
  } else if (a.kind == "zero") {
    f = Field(g, a.l);
  } else if (a.kind == "point") {
    f = point_emitter(g, at, a.charge);
  } else if (a.kind == "dipole") {
    // +q and -q two voxels apart along x around the center
    auto lo = at, hi = at;
    lo[0] -= 1;
    hi[0] += 1;
    f = point_emitter(g, lo, a.charge) - point_emitter(g, hi, a.charge);
  } else if (a.kind == "gaussian") {
    f = Field(g, 0);
    const Eigen::Vector3d c = grid_center(g);
    for (Index i = 0; i < g.size(); ++i)
      f.value(i)[0] = std::exp(-(g.position(g.unflat(i)) - c).squaredNorm() / (2.0 * a.sigma * a.sigma));
    r.param("sigma", format_double(a.sigma));
  } else {
    throw FormatError("unknown field kind '" + a.kind + "' (random, zero, point, dipole, gaussian)");
  }
  save_eqf(a.output, f);
  r.outputs.push_back(a.output);
  add_field_metrics(r, "field", f);
  return r;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, RunReport& report) {
  CLI::App app{"Rotation-equivariant operators on tensor fields"};
  app.require_subcommand(1);
  int threads = 1;
  std::string report_path;
  bool quiet = false;
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--report", report_path, "Write the key=value report to this file");
  app.add_flag("--quiet", quiet, "Print only the key=value report");

  std::function<RunReport()> run;
  bool check_pass = true;

  ApplyArgs aa;
  auto* apply = app.add_subcommand("apply", "Apply a named operator or a fitted model to a field");
  apply->add_option("operator", aa.op, "Operator name or model manifest")->required();
  apply->add_option("input", aa.input, "Input EQF")->required();
  apply->add_option("output", aa.output, "Output EQF")->required();
  apply->add_option("--path", aa.path, "direct|fourier");
  apply->add_option("--boundary", aa.boundary, "zero|periodic (overrides the file)");
  apply->add_option("--D", aa.diffusivity, "Diffusivity for the diffusion operator");
  apply->add_option("--t", aa.time, "Time for the diffusion operator");
  apply->callback([&] { run = [&] { return cmd_apply(aa); }; });

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit a neural operator's radial amplitudes");
  fit->add_option("--pair", fa.pairs, "Training pair input.eqf,target.eqf");
  fit->add_option("--test", fa.tests, "Held-out pair input.eqf,target.eqf");
  fit->add_option("--dataset", fa.dataset, "Manifest with pair= and test= lines");
  fit->add_option("--rule", fa.rule, "l_u,l_h,l_v")->required();
  fit->add_option("--product", fa.product, "scalar|dot|cross|matvec");
  fit->add_option("--widths", fa.widths, "Gaussian widths");
  fit->add_option("--powers", fa.powers, "Power-law exponents");
  fit->add_option("--rmin", fa.rmin, "Power-law inner cutoff");
  fit->add_option("--stencils", fa.stencils, "Stencil orders");
  fit->add_option("--method", fa.method, "ls|gd");
  fit->add_option("--steps", fa.steps, "Gradient-descent steps");
  fit->add_option("--step-size", fa.step_size, "Gradient-descent step (default from curvature)");
  fit->add_option("--ridge", fa.ridge, "Relative ridge for least squares");
  fit->add_option("--model", fa.model, "Write the model manifest here");
  fit->add_option("--csv", fa.csv, "Write sampled R(r) here");
  fit->add_option("--reference", fa.reference, "inverse_r|inverse_r2|log_r");
  fit->add_option("--test-operator", fa.test_operator, "Named operator producing random test targets");
  fit->add_option("--test-random", fa.test_random, "Number of random test inputs");
  fit->add_option("--seed", fa.seed, "Seed for random test inputs");
  fit->callback([&] { run = [&] { return cmd_fit(fa); }; });

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "Explicit-Euler diffusion-advection run");
  sim->add_option("--D", sa.diffusivity, "Diffusivity")->required();
  sim->add_option("--wx", sa.wx, "Wind x");
  sim->add_option("--wy", sa.wy, "Wind y");
  sim->add_option("--wz", sa.wz, "Wind z");
  sim->add_option("--dt", sa.dt, "Time step")->required();
  sim->add_option("--steps", sa.steps, "Steps")->required();
  sim->add_option("--source", sa.source, "Source EQF");
  sim->add_option("--u0", sa.u0, "Initial state EQF");
  sim->add_option("--outdir", sa.outdir, "Trajectory directory")->required();
  sim->add_option("--boundary", sa.boundary, "zero|periodic");
  sim->callback([&] { run = [&] { return cmd_simulate(sa); }; });

  EstimateArgs ea;
  auto* est = app.add_subcommand("estimate", "Estimate D and w from a trajectory");
  est->add_option("trajectory", ea.manifest, "Trajectory manifest or directory")->required();
  est->add_option("--noise", ea.noise, "Relative Gaussian noise added to frames");
  est->add_option("--seed", ea.seed, "Noise seed");
  est->callback([&] { run = [&] { return cmd_estimate(ea); }; });

  CheckArgs ca;
  auto* chk = app.add_subcommand("check", "Run the property suites");
  chk->add_option("input", ca.input, "Input EQF (omit for a random field)");
  chk->add_option("--random", ca.random_shape, "Shape of the random field, e.g. 9,9,9");
  chk->add_option("--l", ca.l, "Order of the random field");
  chk->add_option("--spacing", ca.spacing, "Spacing of the random field");
  chk->add_option("--boundary", ca.boundary, "Boundary of the random field");
  chk->add_option("--seed", ca.seed, "Seed");
  chk->add_flag("--corrupt-kernel", ca.corrupt, "Test hook: break kernel symmetry")->group("");
  chk->callback([&] { run = [&] { return cmd_check(ca, check_pass); }; });

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Write a synthetic field");
  gen->add_option("kind", ga.kind, "random|zero|point|dipole|gaussian")->required();
  gen->add_option("output", ga.output, "Output EQF")->required();
  gen->add_option("--shape", ga.shape, "Extents, e.g. 16,16,16");
  gen->add_option("--spacing", ga.spacing, "Spacing (one value or one per axis)");
  gen->add_option("--origin", ga.origin, "Origin");
  gen->add_option("--boundary", ga.boundary, "zero|periodic");
  gen->add_option("--l", ga.l, "Order for random/zero fields");
  gen->add_option("--sigma", ga.sigma, "Gaussian width");
  gen->add_option("--charge", ga.charge, "Point/dipole charge");
  gen->add_option("--at", ga.at, "Voxel index for point/dipole");
  gen->add_option("--seed", ga.seed, "Seed");
  gen->callback([&] { run = [&] { return cmd_generate(ga); }; });

  std::vector<const char*> argv{"eqop"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    set_num_threads(threads);
    report = run();
    if (!quiet) out << report.text() << "\n";
    out << report.key_values();
    if (!report_path.empty()) write_text_file(report_path, report.key_values());
    return check_pass ? 0 : 4;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const RuleError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunReport r;
  return run_cli(args, out, err, r);
}

}  // namespace eqop::cli
