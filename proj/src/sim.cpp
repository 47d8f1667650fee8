#include "eqop/sim.hpp"

#include "eqop/conv.hpp"
#include "eqop/eqf.hpp"
#include "eqop/kernel.hpp"
#include "eqop/text.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>

namespace eqop {

namespace {

double min_spacing(const Grid& g) {
  double h = g.spacing[0];
  for (int a = 1; a < g.dim; ++a) h = std::min(h, g.spacing[a]);
  return h;
}

Field laplacian_direct(const Field& u) {
  return conv(u, laplacian_stencil(u.grid(), LaplacianForm::compact),
              make_plan(make_rule(0, 0, 0, u.dim()), u.dim(), Path::direct, u.grid().boundary));
}

Field gradient_direct(const Field& u) {
  return conv(u, gradient_stencil(u.grid()),
              make_plan(make_rule(0, 1, 1, u.dim()), u.dim(), Path::direct, u.grid().boundary));
}

void check_scalar_on(const Grid& g, const Field& u, const char* what) {
  if (u.l() != 0) throw RuleError(std::string(what) + " must be a scalar field");
  if (!u.grid().same_lattice(g)) throw RuleError(std::string(what) + " lives on a different grid");
}

}  // namespace

DiffusionAdvectionModel DiffusionAdvectionModel::make(const Grid& grid, double diffusivity,
                                                      const Eigen::VectorXd& wind,
                                                      std::optional<Field> source, double dt) {
  if (!(diffusivity >= 0.0) || !std::isfinite(diffusivity))
    throw RuleError("diffusivity must be finite and non-negative");
  if (wind.size() != grid.dim)
    throw RuleError("wind needs " + std::to_string(grid.dim) + " components, got " +
                    std::to_string(wind.size()));
  if (!wind.allFinite()) throw RuleError("wind must be finite");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw RuleError("dt must be positive");
  DiffusionAdvectionModel m;
  m.grid = grid;
  m.diffusivity = diffusivity;
  m.wind.head(grid.dim) = wind;
  if (source) {
    check_scalar_on(grid, *source, "source");
    m.source = std::move(*source);
  } else {
    m.source = Field(grid, 0);
  }
  m.dt = dt;
  return m;
}

double DiffusionAdvectionModel::max_stable_dt() const {
  const double h = min_spacing(grid);
  double lim = std::numeric_limits<double>::infinity();
  if (diffusivity > 0.0) lim = std::min(lim, h * h / (2.0 * grid.dim * diffusivity));
  const double speed = wind.head(grid.dim).norm();
  if (speed > 0.0) lim = std::min(lim, h / speed);
  return 0.5 * lim;
}

void DiffusionAdvectionModel::check_stability() const {
  const double lim = max_stable_dt();
  if (dt > lim)
    throw NumericalError("dt = " + format_double(dt) + " violates the stability guard; use dt <= " +
                         format_double(lim));
}

Field time_derivative(const DiffusionAdvectionModel& m, const Field& u) {
  check_scalar_on(m.grid, u, "state");
  Field out = m.source;
  if (m.diffusivity != 0.0) out += m.diffusivity * laplacian_direct(u);
  if (m.wind.head(m.grid.dim).any()) {
    const Field g = gradient_direct(u);
    for (int a = 0; a < m.grid.dim; ++a) out.data().row(0) -= m.wind[a] * g.data().row(a);
  }
  return out;
}

Field step_euler(const DiffusionAdvectionModel& m, const Field& u) {
  m.check_stability();
  return u + m.dt * time_derivative(m, u);
}

std::vector<Field> simulate(const DiffusionAdvectionModel& m, const Field& u0, int n_steps) {
  if (n_steps < 0) throw RuleError("step count must be non-negative");
  check_scalar_on(m.grid, u0, "initial state");
  m.check_stability();
  std::vector<Field> traj{u0};
  traj.reserve(static_cast<std::size_t>(n_steps) + 1);
  for (int s = 0; s < n_steps; ++s) {
    Field next = traj.back();
    next.data() += m.dt * time_derivative(m, traj.back()).data();
    if (!next.data().allFinite())
      throw NumericalError("non-finite value at step " + std::to_string(s + 1));
    traj.push_back(std::move(next));
  }
  return traj;
}

Field point_emitter(const Grid& grid, const std::array<Index, 3>& at, double rate) {
  for (int a = 0; a < grid.dim; ++a)
    if (at[a] < 0 || at[a] >= grid.shape[a]) throw RuleError("emitter position outside the grid");
  Field s(grid, 0);
  s.value(grid.flat(at[0], at[1], grid.dim == 3 ? at[2] : 0))[0] = rate / grid.voxel_volume();
  return s;
}

ParameterEstimate estimate_parameters(const std::vector<Field>& frames, double dt,
                                      const std::optional<Field>& source) {
  if (frames.size() < 2) throw RuleError("parameter estimation needs at least 2 frames");
  if (!(dt > 0.0)) throw RuleError("dt must be positive");
  const Grid& g = frames.front().grid();
  for (const Field& f : frames) check_scalar_on(g, f, "frame");
  if (source) check_scalar_on(g, *source, "source");

  const int d = g.dim;
  const Index n = g.size();
  const auto pairs = static_cast<Index>(frames.size() - 1);
  Eigen::MatrixXd x(n * pairs, 1 + d);
  Eigen::VectorXd y(n * pairs);
  for (Index k = 0; k < pairs; ++k) {
    const Field& u = frames[static_cast<std::size_t>(k)];
    const Field lap = laplacian_direct(u);
    const Field grd = gradient_direct(u);
    x.col(0).segment(k * n, n) = lap.data().row(0).transpose();
    for (int a = 0; a < d; ++a) x.col(1 + a).segment(k * n, n) = -grd.data().row(a).transpose();
    Eigen::VectorXd rate =
        (frames[static_cast<std::size_t>(k + 1)].data().row(0) - u.data().row(0)).transpose() / dt;
    if (source) rate -= source->data().row(0).transpose();
    y.segment(k * n, n) = rate;
  }

  const Eigen::VectorXd scale = x.colwise().norm().transpose();
  for (Index c = 0; c < scale.size(); ++c)
    if (!(scale[c] > 0.0))
      throw NumericalError("features are rank deficient (" +
                           std::string(c == 0 ? "laplacian" : "gradient") +
                           " feature vanishes); condition estimate inf");
  const Eigen::MatrixXd xs = x * scale.cwiseInverse().asDiagonal();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(xs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  ParameterEstimate est;
  est.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                          : std::numeric_limits<double>::infinity();
  if (!(est.condition < 1e12))
    throw NumericalError("features are rank deficient (condition estimate " +
                         format_double(est.condition) + ")");
  const Eigen::VectorXd theta = svd.solve(y).cwiseQuotient(scale);
  est.diffusivity = theta[0];
  est.wind = theta.tail(d);
  const double yn = y.norm();
  const double rn = (x * theta - y).norm();
  est.residual = yn > 0.0 ? rn / yn : rn;
  return est;
}

std::vector<Field> add_noise(const std::vector<Field>& frames, double rel, std::uint64_t seed) {
  if (!(rel >= 0.0)) throw RuleError("noise level must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Field> out;
  out.reserve(frames.size());
  for (const Field& f : frames) {
    Field n = f;
    const double rms = std::sqrt(f.data().squaredNorm() / static_cast<double>(f.data().size()));
    const double sigma = rel * rms;
    for (Index i = 0; i < n.data().size(); ++i) n.data().data()[i] += sigma * normal(rng);
    out.push_back(std::move(n));
  }
  return out;
}

namespace {

std::string frame_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04zu.eqf", k);
  return buf;
}

}  // namespace

std::string save_trajectory(const std::string& dir, const Trajectory& t) {
  namespace fs = std::filesystem;
  if (t.frames.empty()) throw RuleError("trajectory has no frames");
  fs::create_directories(dir);
  KeyValueText kv;
  kv.add("format", std::string("eqop-trajectory-1"));
  kv.add("dt", t.dt);
  kv.add("n_steps", std::to_string(t.frames.size() - 1));
  kv.add("boundary", to_string(t.frames.front().grid().boundary));
  if (t.diffusivity) kv.add("diffusivity", *t.diffusivity);
  if (t.wind) kv.add("wind", join_doubles(std::vector<double>(t.wind->data(), t.wind->data() + t.wind->size())));
  if (t.source) {
    save_eqf((fs::path(dir) / "source.eqf").string(), *t.source);
    kv.add("source", std::string("source.eqf"));
  }
  for (std::size_t k = 0; k < t.frames.size(); ++k) {
    save_eqf((fs::path(dir) / frame_name(k)).string(), t.frames[k]);
    kv.add("frame", frame_name(k));
  }
  const std::string manifest = (fs::path(dir) / "trajectory.txt").string();
  write_text_file(manifest, kv.str());
  return manifest;
}

Trajectory load_trajectory(const std::string& path) {
  namespace fs = std::filesystem;
  fs::path manifest(path);
  if (fs::is_directory(manifest)) manifest /= "trajectory.txt";
  const fs::path dir = manifest.parent_path();
  const KeyValueText kv = KeyValueText::parse(read_text_file(manifest.string()));
  if (!kv.has("format") || kv.get("format") != "eqop-trajectory-1")
    throw FormatError("not an eqop trajectory manifest: " + manifest.string());

  Trajectory t;
  t.dt = parse_double(kv.get("dt"));
  if (kv.has("diffusivity")) t.diffusivity = parse_double(kv.get("diffusivity"));
  if (kv.has("wind")) {
    const auto w = parse_doubles(kv.get("wind"));
    t.wind = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Index>(w.size()));
  }
  if (kv.has("source")) t.source = load_eqf((dir / kv.get("source")).string()).field;
  for (const std::string& f : kv.get_all("frame")) t.frames.push_back(load_eqf((dir / f).string()).field);
  if (kv.has("n_steps") && parse_int(kv.get("n_steps")) + 1 != static_cast<long long>(t.frames.size()))
    throw FormatError("trajectory manifest frame count does not match n_steps");
  if (t.frames.empty()) throw FormatError("trajectory manifest lists no frames");
  return t;
}

}  // namespace eqop
