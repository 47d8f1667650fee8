#pragma once

#include "eqop/tensor_field.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace eqop::cli {

struct CheckResult {
  std::string suite;
  std::string name;
  double deviation = 0.0;
  double tolerance = 0.0;
  bool pass() const { return deviation < tolerance; }
};

struct CheckOptions {
  std::uint64_t seed = 0;
  /// Number of random neural operators in the equivariance suite.
  int neural_ops = 5;
  /// Test hook: breaks the radial symmetry of every kernel in the
  /// equivariance suite by perturbing one off-center voxel.
  bool corrupt_kernel = false;
};

/// Equivariance, linearity, path-equivalence and calculus-identity suites.
/// `u` is used wherever an operator accepts its order; other orders get
/// seeded random fields on the same grid. Equivariance needs a cubic grid
/// and is skipped otherwise.
std::vector<CheckResult> run_property_checks(const Field& u, const CheckOptions& opt);

}  // namespace eqop::cli
