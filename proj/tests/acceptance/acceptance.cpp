// One PASS/FAIL line per criterion; exit status is the number of failures.

#include "checks.hpp"
#include "cli.hpp"

#include "eqop/conv.hpp"
#include "eqop/learn.hpp"
#include "eqop/operators.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

using namespace eqop;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
  std::printf("%s %d %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

struct CliRun {
  int code = 0;
  cli::RunReport report;
  std::string err;
};

CliRun cli_run(const std::vector<std::string>& args) {
  CliRun r;
  std::ostringstream out, err;
  r.code = cli::run_cli(args, out, err, r.report);
  r.err = err.str();
  if (r.code != 0) std::cerr << "eqop " << args.front() << " exited " << r.code << ": " << r.err;
  return r;
}

double seconds(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Field random_field(const Grid& g, int l, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Field f(g, l);
  for (Index i = 0; i < f.data().size(); ++i) f.data().data()[i] = d(rng);
  return f;
}

double rel_dev(const Field& a, const Field& b) {
  const double scale = b.data().cwiseAbs().maxCoeff();
  const double diff = (a.data() - b.data()).cwiseAbs().maxCoeff();
  return scale > 0.0 ? diff / scale : diff;
}

struct OneShot {
  bool ok = false;
  double train = 0, test = 0, test_max = 0, radial_dev = 0, time = 0;
};

OneShot one_shot(const fs::path& dir, const std::string& source_kind, const std::string& op, const std::string& rule,
                 const std::string& reference) {
  OneShot s;
  const auto t0 = Clock::now();
  const std::string q = (dir / (op + "_q.eqf")).string();
  const std::string t = (dir / (op + "_t.eqf")).string();
  if (cli_run({"generate", source_kind, q, "--shape", "16,16,16"}).code != 0) return s;
  if (cli_run({"apply", op, q, t}).code != 0) return s;
  const CliRun f = cli_run({"fit", "--pair", q + "," + t, "--rule", rule, "--test-operator", op, "--test-random", "20",
                            "--seed", "1", "--reference", reference, "--csv", (dir / (op + "_R.csv")).string()});
  if (f.code != 0) return s;
  s.ok = true;
  s.train = f.report.metric_value("train_error");
  s.test = f.report.metric_value("test_error");
  s.test_max = f.report.metric_value("test_error_max");
  s.radial_dev = f.report.metric_value("radial_max_rel_dev_2h_4h");
  s.time = seconds(t0);
  return s;
}

}  // namespace

int main() {
  set_num_threads(1);
  const fs::path dir = fs::temp_directory_path() / "eqop_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  // 1-3: one-shot fits on a single 16^3 sample
  const OneShot pot = one_shot(dir, "dipole", "inverse_laplacian", "0,0,0", "inverse_r");
  report(1, "one-shot inverse Laplacian (16^3, 1 dipole pair, 20 random tests)",
         pot.ok && pot.train < 2e-3 && pot.test_max < 1e-2 && pot.time < 30.0,
         "train=" + fmt(pot.train) + " test=" + fmt(pot.test) + " test_max=" + fmt(pot.test_max) +
             " time=" + fmt(pot.time) + "s");
  const OneShot field = one_shot(dir, "point", "gauss_law", "0,1,1", "inverse_r2");
  report(2, "one-shot Gauss law (16^3, 1 charge pair, 20 random tests)",
         field.ok && field.train < 2e-3 && field.test_max < 1e-2 && field.time < 30.0,
         "train=" + fmt(field.train) + " test=" + fmt(field.test) + " test_max=" + fmt(field.test_max) +
             " time=" + fmt(field.time) + "s");
  report(3, "fitted radial functions on r in [2h, 4h]", pot.ok && field.ok && pot.radial_dev < 0.05 &&
                                                              field.radial_dev < 0.05,
         "1/(4 pi r) dev=" + fmt(pot.radial_dev) + " 1/(4 pi r^2) dev=" + fmt(field.radial_dev));

  // 4: diffusion-advection parameters from 50 frames
  {
    const auto t0 = Clock::now();
    const std::string src = (dir / "emitter.eqf").string();
    const std::string traj = (dir / "traj").string();
    bool ok = cli_run({"generate", "point", src, "--shape", "32,32", "--boundary", "periodic", "--at", "10,20"})
                  .code == 0 &&
              cli_run({"simulate", "--D", "0.1", "--wx", "0.2", "--wy", "-0.1", "--dt", "1", "--steps", "49",
                       "--source", src, "--outdir", traj})
                      .code == 0;
    double clean = 1.0, noisy = 1.0;
    auto worst = [](const cli::RunReport& r) {
      return std::max({r.metric_value("D_rel_error"), r.metric_value("wx_rel_error"),
                       r.metric_value("wy_rel_error")});
    };
    if (ok) {
      const CliRun a = cli_run({"estimate", traj});
      const CliRun b = cli_run({"estimate", traj, "--noise", "0.01", "--seed", "7"});
      ok = a.code == 0 && b.code == 0;
      if (ok) {
        clean = worst(a.report);
        noisy = worst(b.report);
      }
    }
    const double t = seconds(t0);
    report(4, "diffusion-advection estimation (32^2, 50 frames)", ok && clean < 1e-6 && noisy < 0.05 && t < 10.0,
           "noiseless max rel err=" + fmt(clean) + " 1% noise max rel err=" + fmt(noisy) + " time=" + fmt(t) + "s");
  }

  // 5 and 7 share the property-check suites
  const Grid g9 = Grid::cube(3, 9);
  const auto checks = cli::run_property_checks(random_field(g9, 0, 3), {3, 5, false});
  {
    double worst = 0.0;
    int n = 0;
    bool ok = true;
    for (const auto& c : checks)
      if (c.suite == "equivariance") {
        worst = std::max(worst, c.deviation);
        ok = ok && c.pass();
        ++n;
      }
    report(5, "equivariance over 24 rotations, named + 5 neural operators (9^3)", ok && n >= 12,
           std::to_string(n) + " operators, max dev=" + fmt(worst));
  }

  // 6: direct vs Fourier on random stencils
  {
    std::mt19937_64 rng(6);
    const std::vector<Rule> rules{make_rule(0, 0, 0, 3), make_rule(0, 1, 1, 3), make_rule(1, 1, 0, 3),
                                  cross_rule(3),         make_rule(1, 0, 1, 3), make_rule(2, 1, 1, 3),
                                  make_rule(0, 2, 2, 3), make_rule(2, 2, 0, 3), make_rule(1, 0, 1, 3),
                                  make_rule(2, 0, 2, 3)};
    double worst = 0.0;
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const Rule& r = rules[i];
      const Boundary b = i % 2 ? Boundary::periodic : Boundary::zero;
      const std::vector<Index> shape{8, 9, 7};
      const std::vector<double> h{1.0, 1.0, 1.0}, o{0.0, 0.0, 0.0};
      const Grid g = Grid::make(shape, h, o, b);
      const KernelField k{random_field(kernel_grid(g, 1 + static_cast<Index>(i % 2)), r.lh, rng()), KernelKind::stencil,
                          "random"};
      const Field u = random_field(g, r.lu, rng());
      const Field a = conv_direct(u, k, make_plan(r, 3, Path::direct, b));
      const Field f = conv_fourier(u, k, make_plan(r, 3, Path::fourier, b));
      worst = std::max(worst, rel_dev(f, a));
    }
    report(6, "direct vs Fourier convolution on 10 random pairs", worst < 1e-10, "max rel err=" + fmt(worst));
  }

  {
    double worst = 0.0;
    bool ok = true;
    int n = 0;
    for (const auto& c : checks)
      if (c.suite == "calculus") {
        worst = std::max(worst, c.deviation);
        ok = ok && c.pass();
        ++n;
      }
    report(7, "curl grad, div curl, div grad - laplacian (interior)", ok && n == 3, "max dev=" + fmt(worst));
  }

  // 8: analytic parameter gradient vs central differences
  {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const Grid g = Grid::cube(3, 9);
    const std::vector<Rule> rules{make_rule(0, 0, 0, 3), make_rule(0, 1, 1, 3), make_rule(1, 1, 0, 3), cross_rule(3),
                                  make_rule(2, 1, 1, 3)};
    double worst = 0.0;
    for (const Rule& r : rules) {
      const RadialBasis b = RadialBasis::defaults(g, r.lh);
      Eigen::VectorXd p(b.size());
      for (Index k = 0; k < p.size(); ++k) p[k] = unif(rng);
      const NeuralOp op(g, r, ParamRadial(b, p));
      const Dataset data{{random_field(g, r.lu, rng()), random_field(g, r.lv, rng())}};
      const BasisDesign d = basis_design(op, data);
      const Eigen::VectorXd gr = grad_params(op, data);
      Eigen::VectorXd fd(p.size());
      for (Index k = 0; k < p.size(); ++k) {
        const double h = 1e-5 * std::max(1.0, std::abs(p[k]));
        Eigen::VectorXd pp = p, pm = p;
        pp[k] += h;
        pm[k] -= h;
        fd[k] = (loss(d, pp) - loss(d, pm)) / (2.0 * h);
      }
      worst = std::max(worst, (fd - gr).norm() / gr.norm());
    }
    report(8, "parameter gradient vs central differences, 5 configurations", worst < 1e-6,
           "max rel err=" + fmt(worst));
  }

  // 9: Fourier-path cost from 32^3 to 64^3
  {
    auto best_time = [](Index n) {
      const Grid g = Grid::cube(3, n);
      const EquivariantOp op = inverse_laplacian_op(g);
      const Field u = random_field(g, 0, 9);
      const ConvPlan plan = make_plan(op.rule, 3, Path::fourier, g.boundary);
      double best = 1e300;
      for (int rep = 0; rep < 3; ++rep) {
        const auto t0 = Clock::now();
        const Field v = conv_fourier(u, op.kernel, plan);
        best = std::min(best, seconds(t0));
        if (!std::isfinite(v.data()(0, 0))) best = 1e300;
      }
      return best;
    };
    const double t32 = best_time(32);
    const double t64 = best_time(64);
    const double factor = t64 / t32;
    report(9, "Fourier-path scaling 32^3 -> 64^3", factor < 16.0,
           "factor=" + fmt(factor) + " (t32=" + fmt(t32) + "s t64=" + fmt(t64) + "s)");
  }

  fs::remove_all(dir);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures;
}
