#include "doctest.h"
#include "test_util.hpp"

#include "eqop/conv.hpp"

#include <numbers>

using namespace eqop;
using eqop::test::rel_dev;
using eqop::test::random_field;
using eqop::test::random_vector;

namespace {

std::vector<Rule> all_rules(int dim) {
  std::vector<Rule> rules{make_rule(0, 0, 0, dim), make_rule(0, 1, 1, dim), make_rule(1, 0, 1, dim),
                          make_rule(1, 1, 0, dim), cross_rule(dim)};
  if (dim == 3) {
    rules.push_back(make_rule(0, 2, 2, 3));
    rules.push_back(make_rule(2, 0, 2, 3));
    rules.push_back(make_rule(2, 2, 0, 3));
    rules.push_back(make_rule(2, 1, 1, 3));
  }
  return rules;
}

KernelField random_stencil(const Grid& g, int l, std::uint64_t seed) {
  KernelField k;
  k.field = random_field(kernel_grid(g, 1), l, seed);
  k.kind = KernelKind::stencil;
  return k;
}

}  // namespace

TEST_CASE("expansion coefficients reproduce the pointwise product") {
  std::mt19937_64 rng(3);
  for (int dim : {2, 3}) {
    for (const Rule& rule : all_rules(dim)) {
      const auto coeffs = expansion_coefficients(rule, dim);
      for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd u = random_vector(components_for(rule.lu, dim), rng);
        const Eigen::VectorXd h = random_vector(components_for(rule.lh, dim), rng);
        Eigen::VectorXd v = Eigen::VectorXd::Zero(components_for(rule.lv, dim));
        for (const auto& c : coeffs) v[c.p] += c.c * u[c.m] * h[c.n];
        CHECK((v - tensor_product<double>(u, h, rule, dim)).norm() < 1e-12);
      }
    }
  }
}

TEST_CASE("next_fast_size") {
  CHECK(next_fast_size(1) == 1);
  CHECK(next_fast_size(11) == 12);
  CHECK(next_fast_size(13) == 14);
  CHECK(next_fast_size(31) == 32);
  CHECK(next_fast_size(127) == 128);
  CHECK(next_fast_size(97) == 98);
}

TEST_CASE("identity and impulse response") {
  const Grid g = Grid::cube(3, 9);
  const Field u = random_field(g, 1, 5);
  for (Path path : {Path::direct, Path::fourier}) {
    const auto plan = make_plan(make_rule(1, 0, 1, 3), 3, path, Boundary::zero);
    CHECK(rel_dev(conv(u, delta_stencil(g), plan), u) < 1e-14);
  }

  // unit-mass impulse at the center reproduces the kernel
  Field impulse(g, 0);
  impulse.value(g.flat(4, 4, 4))[0] = 1.0 / g.voxel_volume();
  const KernelField gauss = sample_kernel(kernel_grid(g, 4), gaussian_profile(1.5), 0);
  const Field out = conv(impulse, gauss, make_rule(0, 0, 0, 3));
  CHECK(rel_dev(out, gauss.field) < 1e-12);
}

TEST_CASE("point charge field matches Coulomb") {
  const Grid g = Grid::cube(3, 17, 0.5);
  Field q(g, 0);
  q.value(g.flat(8, 8, 8))[0] = 1.0 / g.voxel_volume();
  const KernelField k = sample_kernel(full_range_kernel_grid(g), inverse_r2_profile(), 1);
  const Field e = conv(q, k, make_rule(0, 1, 1, 3));
  const Eigen::Vector3d at = e.value(g.flat(12, 8, 8));  // r = 2 along +x
  const double expected = 1.0 / (4.0 * std::numbers::pi * 2.0 * 2.0);
  CHECK(at[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(at[1]) < 1e-15);
  CHECK(std::abs(at[2]) < 1e-15);
  CHECK(expected == doctest::Approx(1.0 / (16.0 * std::numbers::pi)));
}

TEST_CASE("direct and Fourier paths agree") {
  std::uint64_t seed = 100;
  for (int dim : {2, 3}) {
    const Grid base = Grid::cube(dim, 8);
    for (Boundary b : {Boundary::zero, Boundary::periodic}) {
      for (const Rule& rule : all_rules(dim)) {
        const Field u = random_field(base, rule.lu, seed++);
        const KernelField h = random_stencil(base, rule.lh, seed++);
        const Field d = conv_direct(u, h, make_plan(rule, dim, Path::direct, b));
        const Field f = conv_fourier(u, h, make_plan(rule, dim, Path::fourier, b));
        CHECK(rel_dev(f, d) < 1e-10);
      }
    }
  }
  SUBCASE("long-range kernel, anisotropic grid") {
    const std::array<Index, 3> shape{6, 7, 9};
    const std::array<double, 3> sp{1.0, 1.0, 1.0};
    for (Boundary b : {Boundary::zero, Boundary::periodic}) {
      const Grid g = Grid::make(shape, sp, {}, b);
      const Field u = random_field(g, 1, 77);
      const KernelField h = sample_kernel(full_range_kernel_grid(g), inverse_r_profile(), 0);
      const Rule rule = make_rule(1, 0, 1, 3);
      CHECK(rel_dev(conv_fourier(u, h, make_plan(rule, 3, Path::fourier, b)),
                    conv_direct(u, h, make_plan(rule, 3, Path::direct, b))) < 1e-10);
    }
  }
  SUBCASE("periodic kernel wider than the domain aliases the same way on both paths") {
    const Grid g = Grid::cube(2, 5, 1.0, Boundary::periodic);
    const Field u = random_field(g, 0, 78);
    const KernelField h = sample_kernel(kernel_grid(g, 4), gaussian_profile(2.0), 0);
    const Rule rule = make_rule(0, 0, 0, 2);
    CHECK(rel_dev(conv_fourier(u, h, make_plan(rule, 2, Path::fourier, Boundary::periodic)),
                  conv_direct(u, h, make_plan(rule, 2, Path::direct, Boundary::periodic))) < 1e-10);
  }
}

TEST_CASE("periodic constant field picks up the kernel mass") {
  const Grid g = Grid::cube(3, 12, 0.5, Boundary::periodic);
  const Field c = constant_scalar(g, 3.0);
  const KernelField k = sample_kernel(kernel_grid(g, 5), gaussian_profile(0.8), 0);
  const double mass = k.field.data().sum() * g.voxel_volume();
  const Field out = conv(c, k, make_rule(0, 0, 0, 3));
  CHECK(((out.data().array() - 3.0 * mass).abs().maxCoeff()) < 1e-12);
}

TEST_CASE("linearity") {
  const Grid g = Grid::cube(3, 8);
  const KernelField h = sample_kernel(full_range_kernel_grid(g), gaussian_profile(2.0), 1);
  const Rule rule = make_rule(1, 1, 0, 3);
  const Field u = random_field(g, 1, 1), w = random_field(g, 1, 2);
  const double a = 0.37, b = -2.1;
  const Field lhs = conv(a * u + b * w, h, rule);
  const Field rhs = a * conv(u, h, rule) + b * conv(w, h, rule);
  CHECK(rel_dev(lhs, rhs) < 1e-12);
}

TEST_CASE("translation invariance under periodic boundary") {
  const Grid g = Grid::cube(3, 8, 1.0, Boundary::periodic);
  const Field u = random_field(g, 1, 9);
  const KernelField h = sample_kernel(full_range_kernel_grid(g), gaussian_profile(1.2), 1);
  const Rule rule = cross_rule(3);
  const std::array<Index, 3> s{3, -2, 5};
  for (Path path : {Path::direct, Path::fourier}) {
    const auto plan = make_plan(rule, 3, path, Boundary::periodic);
    const Field lhs = conv(translate_field(u, s), h, plan);
    const Field rhs = translate_field(conv(u, h, plan), s);
    CHECK(rel_dev(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("rotation equivariance for radially symmetric kernels") {
  std::uint64_t seed = 500;
  for (int dim : {2, 3}) {
    for (Boundary b : {Boundary::zero, Boundary::periodic}) {
      const Grid g = Grid::cube(dim, dim == 3 ? 7 : 10, 1.0, b);
      for (const Rule& rule : all_rules(dim)) {
        const Field u = random_field(g, rule.lu, seed++);
        const KernelField h = sample_kernel(full_range_kernel_grid(g), gaussian_profile(1.7), rule.lh);
        const Field v = conv(u, h, rule);
        for (const auto& rot : lattice_rotations(dim)) {
          const Field lhs = conv(rotate_field(u, rot), h, rule);
          CHECK(rel_dev(lhs, rotate_field(v, rot)) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("a non-radial kernel breaks equivariance") {
  const Grid g = Grid::cube(3, 7);
  KernelField h = sample_kernel(full_range_kernel_grid(g), gaussian_profile(1.7), 0);
  h.field.value(h.grid().flat(7, 6, 6))[0] += 0.5;
  const Field u = random_field(g, 0, 1);
  const auto q = quarter_turn_z(3);
  const Rule rule = make_rule(0, 0, 0, 3);
  CHECK(rel_dev(conv(rotate_field(u, q), h, rule), rotate_field(conv(u, h, rule), q)) > 1e-3);
}

TEST_CASE("conv rejects incompatible inputs") {
  const Grid g = Grid::cube(3, 6);
  const Field u = random_field(g, 0, 1);
  CHECK_THROWS_AS(conv(u, gradient_stencil(Grid::cube(3, 6, 0.5)), make_rule(0, 1, 1, 3)), RuleError);
  CHECK_THROWS_AS(conv(u, gradient_stencil(g), make_rule(0, 0, 0, 3)), RuleError);
  CHECK_THROWS_AS(conv(u, gradient_stencil(Grid::cube(2, 6)), make_rule(0, 1, 1, 2)), RuleError);
}

TEST_CASE("thread count does not change results beyond rounding") {
  const Grid g = Grid::cube(3, 8);
  const Field u = random_field(g, 2, 4);
  const KernelField h = sample_kernel(full_range_kernel_grid(g), gaussian_profile(1.0), 1);
  const Rule rule = make_rule(2, 1, 1, 3);
  const Field one = conv(u, h, rule);
  set_num_threads(4);
  const Field four = conv(u, h, rule);
  const Field four_direct = conv_direct(u, h, make_plan(rule, 3, Path::direct, Boundary::zero));
  set_num_threads(1);
  CHECK(rel_dev(four, one) < 1e-14);
  CHECK(rel_dev(four_direct, one) < 1e-10);
}
