#include "doctest.h"
#include "test_util.hpp"

#include "eqop/eqf.hpp"
#include "eqop/rotation.hpp"

#include <sstream>

using namespace eqop;
using eqop::test::random_field;
using eqop::test::random_vector;

namespace {

std::vector<Rule> rules_for(int dim) {
  std::vector<Rule> rules;
  const int max_l = dim == 3 ? 2 : 1;
  for (int l = 0; l <= max_l; ++l) {
    rules.push_back(make_rule(0, l, l, dim));
    rules.push_back(make_rule(l, 0, l, dim));
  }
  rules.push_back(make_rule(1, 1, 0, dim));
  rules.push_back(cross_rule(dim));
  if (dim == 3) {
    rules.push_back(make_rule(2, 2, 0, 3));
    rules.push_back(make_rule(2, 1, 1, 3));
  }
  return rules;
}

}  // namespace

TEST_CASE("tensor_product basic cases") {
  Eigen::VectorXd s(1);
  s << 2.0;
  const Eigen::Vector3d ex(1, 0, 0), ey(0, 1, 0), ez(0, 0, 1);

  CHECK(tensor_product<double>(s, ex, make_rule(0, 1, 1, 3), 3).isApprox(Eigen::Vector3d(2, 0, 0)));
  CHECK(tensor_product<double>(ex, ey, make_rule(1, 1, 1, 3), 3).isApprox(ez));
  const Eigen::Vector3d v(1, 2, 3);
  CHECK(tensor_product<double>(v, v, make_rule(1, 1, 0, 3), 3)[0] == doctest::Approx(14.0));

  // (3 z z^T - I) z = 2 z
  const Eigen::VectorXd y2 = unit_harmonic<double>(2, 3, ez);
  const Eigen::VectorXd mv = tensor_product<double>(y2, ez, make_rule(2, 1, 1, 3), 3);
  CHECK((mv - Eigen::Vector3d(0, 0, 2)).norm() < 1e-14);
}

TEST_CASE("2d cross product is the pseudo-scalar z component") {
  const Eigen::Vector2d a(1, 0), b(0, 1);
  CHECK(tensor_product<double>(a, b, cross_rule(2), 2)[0] == 1.0);
  CHECK(tensor_product<double>(b, a, cross_rule(2), 2)[0] == -1.0);
  CHECK(make_rule(1, 1, 0, 2).product == Product::dot);
}

TEST_CASE("unsupported rules are rejected with the rule listing") {
  CHECK_THROWS_AS(make_rule(1, 1, 1, 2), RuleError);
  CHECK_THROWS_AS(make_rule(2, 2, 2, 3), RuleError);
  CHECK_THROWS_AS(make_rule(1, 2, 1, 3), RuleError);
  CHECK_THROWS_AS(validate(Rule{1, 1, 0, Product::cross}, 3), RuleError);
  try {
    make_rule(0, 2, 2, 2);
    FAIL("expected throw");
  } catch (const RuleError& e) {
    CHECK(std::string(e.what()).find("supported rules") != std::string::npos);
  }
}

TEST_CASE("order-2 basis is Frobenius orthonormal and traceless") {
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(l2_basis<double>(i).trace()) < 1e-15);
    CHECK((l2_basis<double>(i) - l2_basis<double>(i).transpose()).norm() == 0.0);
    for (int j = 0; j < 5; ++j) {
      const double ip = (l2_basis<double>(i).array() * l2_basis<double>(j).array()).sum();
      CHECK(ip == doctest::Approx(i == j ? 1.0 : 0.0));
    }
  }
  std::mt19937_64 rng(1);
  const Eigen::Vector3d r = random_vector(3, rng).normalized();
  const Eigen::Matrix3d y = l2_to_matrix<double>(unit_harmonic<double>(2, 3, r));
  CHECK((y - (3.0 * r * r.transpose() - Eigen::Matrix3d::Identity())).norm() < 1e-14);
}

TEST_CASE("tensor_product is bilinear") {
  std::mt19937_64 rng(7);
  for (int dim : {2, 3}) {
    for (const Rule& rule : rules_for(dim)) {
      const int cu = components_for(rule.lu, dim), ch = components_for(rule.lh, dim);
      for (int trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd u = random_vector(cu, rng), w = random_vector(cu, rng);
        const Eigen::VectorXd h = random_vector(ch, rng), k = random_vector(ch, rng);
        const double a = 0.7, b = -1.3;
        const Eigen::VectorXd lhs = tensor_product<double>(a * u + b * w, h, rule, dim);
        const Eigen::VectorXd rhs =
            a * tensor_product<double>(u, h, rule, dim) + b * tensor_product<double>(w, h, rule, dim);
        CHECK((lhs - rhs).norm() < 1e-14);
        const Eigen::VectorXd lhs2 = tensor_product<double>(u, a * h + b * k, rule, dim);
        const Eigen::VectorXd rhs2 =
            a * tensor_product<double>(u, h, rule, dim) + b * tensor_product<double>(u, k, rule, dim);
        CHECK((lhs2 - rhs2).norm() < 1e-14);
      }
    }
  }
}

TEST_CASE("tensor products commute with every lattice rotation") {
  std::mt19937_64 rng(11);
  for (int dim : {2, 3}) {
    for (const auto& g : lattice_rotations(dim)) {
      for (const Rule& rule : rules_for(dim)) {
        const Eigen::VectorXd u = random_vector(components_for(rule.lu, dim), rng);
        const Eigen::VectorXd h = random_vector(components_for(rule.lh, dim), rng);
        const Eigen::VectorXd lhs = representation(g, rule.lv) * tensor_product<double>(u, h, rule, dim);
        const Eigen::VectorXd rhs = tensor_product<double>(
            representation(g, rule.lu) * u, representation(g, rule.lh) * h, rule, dim);
        CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, lhs.norm()));
      }
    }
  }
}

TEST_CASE("lattice rotation groups") {
  const auto g2 = lattice_rotations(2);
  const auto g3 = lattice_rotations(3);
  CHECK(g2.size() == 4);
  CHECK(g3.size() == 24);
  CHECK(g3.front().matrix.isIdentity());
  for (const auto& g : g3) {
    CHECK(g.matrix.determinant() == 1);
    // closure
    for (const auto& h : g3)
      CHECK(std::find(g3.begin(), g3.end(), g * h) != g3.end());
  }
  for (const auto& g : g3) {
    const Eigen::MatrixXd rho = representation(g, 2);
    CHECK((rho * rho.transpose() - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-14);
  }
}

TEST_CASE("grid invariants") {
  const std::array<Index, 3> shape{4, 5, 6};
  const std::array<double, 3> spacing{0.5, 1.0, 2.0};
  const std::array<double, 3> origin{-1.0, 0.0, 3.0};
  const Grid g = Grid::make(shape, spacing, origin, Boundary::periodic);
  CHECK(g.size() == 120);
  CHECK(g.voxel_volume() == 1.0);
  const Eigen::Vector3d p = g.position({3, 2, 1});
  CHECK(p == Eigen::Vector3d(-1.0 + 1.5, 2.0, 5.0));
  CHECK(g.unflat(g.flat(3, 4, 5)) == std::array<Index, 3>{3, 4, 5});

  const std::array<Index, 2> small{2, 5};
  const std::array<double, 2> sp{1.0, 1.0};
  CHECK_THROWS_AS(Grid::make(small, sp), RuleError);
  const std::array<Index, 2> ok{3, 5};
  const std::array<double, 2> bad{1.0, 0.0};
  CHECK_THROWS_AS(Grid::make(ok, bad), RuleError);
  const std::array<Index, 1> one{5};
  const std::array<double, 1> one_sp{1.0};
  CHECK_THROWS_AS(Grid::make(one, one_sp), RuleError);
}

TEST_CASE("tensor fields enforce component counts and finiteness") {
  const Grid g = Grid::cube(3, 3);
  CHECK(Field(g, 0).components() == 1);
  CHECK(Field(g, 1).components() == 3);
  CHECK(Field(g, 2).components() == 5);
  CHECK(Field(Grid::cube(2, 3), 1).components() == 2);
  CHECK_THROWS_AS(Field(Grid::cube(2, 3), 2), RuleError);
  CHECK_THROWS_AS(Field(g, 3), RuleError);
  Field::Data d = Field::Data::Zero(1, g.size());
  d(0, 4) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(Field(g, 0, d), FormatError);
}

TEST_CASE("pointwise products and norms") {
  const Grid g = Grid::cube(3, 5);
  const Field v = random_field(g, 1, 3);
  const Field one = constant_scalar(g);

  CHECK(pointwise_product(one, v, make_rule(0, 1, 1, 3)).data() == v.data());
  const Field sq = pointwise_product(v, v, make_rule(1, 1, 0, 3));
  CHECK((sq.data().row(0) - v.data().colwise().squaredNorm()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(pointwise_product(v, v, cross_rule(3)).data().cwiseAbs().maxCoeff() == 0.0);

  const Field other(Grid::cube(3, 4), 1);
  CHECK_THROWS_AS(pointwise_product(v, other, make_rule(1, 1, 0, 3)), RuleError);

  const Field s = random_field(g, 0, 4);
  CHECK(field_norm(s).data() == s.data().cwiseAbs());
  const Field c = constant_field<double>(g, 1, Eigen::Vector3d(3, 4, 0));
  CHECK((field_norm(c).data().array() - 5.0).abs().maxCoeff() < 1e-15);
  CHECK(field_norm(Field(g, 2)).data().isZero());
}

TEST_CASE("rotate_field") {
  const Grid g = Grid::cube(3, 5);
  const auto qz = quarter_turn_z(3);

  SUBCASE("scalars are only permuted") {
    const Field s = random_field(g, 0, 5);
    const Field r = rotate_field(s, qz);
    // voxel (i, j, k) goes to (4 - j, i, k) under x -> y
    for (Index i = 0; i < 5; ++i)
      for (Index j = 0; j < 5; ++j)
        CHECK(r.value(g.flat(4 - j, i, 2))[0] == s.value(g.flat(i, j, 2))[0]);
  }
  SUBCASE("constant x vector turns into y") {
    const Field c = constant_field<double>(g, 1, Eigen::Vector3d(1, 0, 0));
    const Field r = rotate_field(c, qz);
    CHECK(r.data() == constant_field<double>(g, 1, Eigen::Vector3d(0, 1, 0)).data());
  }
  SUBCASE("inverse and group action are exact") {
    for (int l : {0, 1, 2}) {
      const Field u = random_field(g, l, 10 + l);
      const auto rots = lattice_rotations(3);
      for (const auto& a : rots) {
        const Field back = rotate_field(rotate_field(u, a), a.inverse());
        CHECK((back.data() - u.data()).cwiseAbs().maxCoeff() < 1e-15);
      }
      for (std::size_t i = 0; i < rots.size(); i += 5)
        for (std::size_t j = 0; j < rots.size(); j += 7) {
          const Field lhs = rotate_field(rotate_field(u, rots[j]), rots[i]);
          const Field rhs = rotate_field(u, rots[i] * rots[j]);
          CHECK((lhs.data() - rhs.data()).cwiseAbs().maxCoeff() < 1e-14);
        }
    }
  }
  SUBCASE("norm is invariant up to permutation") {
    const Field u = random_field(Grid::cube(3, 4), 2, 12);
    for (const auto& a : lattice_rotations(3)) {
      const Field lhs = field_norm(rotate_field(u, a));
      const Field rhs = rotate_field(field_norm(u), a);
      CHECK((lhs.data() - rhs.data()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("2d quarter turns and even extents") {
    const Field u = random_field(Grid::cube(2, 6), 1, 13);
    const auto q = quarter_turn_z(2);
    Field r = u;
    for (int k = 0; k < 4; ++k) r = rotate_field(r, q);
    CHECK((r.data() - u.data()).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("non-cubic grids are rejected") {
    const std::array<Index, 3> shape{5, 5, 6};
    const std::array<double, 3> sp{1, 1, 1};
    CHECK_THROWS_AS(rotate_field(Field(Grid::make(shape, sp), 0), qz), RuleError);
  }
}

TEST_CASE("EQF round trip is bit exact") {
  std::mt19937_64 rng(99);
  for (int dim : {2, 3}) {
    for (int l = 0; l <= (dim == 3 ? 2 : 1); ++l) {
      std::vector<Index> shape;
      std::vector<double> spacing, origin;
      for (int a = 0; a < dim; ++a) {
        shape.push_back(3 + static_cast<Index>(rng() % 4));
        spacing.push_back(0.1 + 0.37 * a);
        origin.push_back(-1.0 / 3.0 + a);
      }
      Field f = random_field(Grid::make(shape, spacing, origin, Boundary::periodic), l, rng());
      f.data()(0, 0) = -0.0;
      f.data()(0, 1) = 1e-310;  // subnormal
      std::stringstream ss;
      write_eqf(ss, f);
      const auto rec = read_eqf(ss);
      CHECK(rec.field.grid() == f.grid());
      CHECK(rec.field.l() == l);
      CHECK(std::memcmp(rec.field.data().data(), f.data().data(), sizeof(double) * f.data().size()) == 0);
      CHECK_FALSE(rec.kind.has_value());
    }
  }
}

TEST_CASE("EQF header layout and errors") {
  const Field f(Grid::cube(2, 3, 0.5), 1);
  CHECK(eqf_header(f) == "EQF1 dim=2 l=1 shape=3,3 spacing=0.5,0.5 origin=0,0 boundary=zero\n");
  CHECK(eqf_header(f, "stencil").find(" kind=stencil\n") != std::string::npos);

  std::stringstream ss;
  write_eqf(ss, f);
  const std::string bytes = ss.str();
  CHECK(bytes.size() == eqf_header(f).size() + 2 * 9 * 8);

  auto parse = [](const std::string& s) {
    std::stringstream in(s);
    return read_eqf(in);
  };
  CHECK_THROWS_AS(parse("EQF2 dim=2\n"), FormatError);
  CHECK_THROWS_AS(parse("EQF1 dim=2 l=0 shape=3,3 spacing=1,1 origin=0,0\n"), FormatError);
  CHECK_THROWS_AS(parse("EQF1 dim=2 l=2 shape=3,3 spacing=1,1 origin=0,0 boundary=zero\n"), FormatError);
  CHECK_THROWS_AS(parse("EQF1 dim=2 l=0 shape=3,3 spacing=1,1 origin=0,0 boundary=zero\nabc"), FormatError);
  CHECK_THROWS_AS(parse(bytes.substr(0, bytes.size() - 1)), FormatError);
}
