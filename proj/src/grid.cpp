#include "eqop/grid.hpp"

#include "eqop/errors.hpp"

#include <cmath>

namespace eqop {

std::string to_string(Boundary b) {
  return b == Boundary::periodic ? "periodic" : "zero";
}

Boundary boundary_from_string(const std::string& s) {
  if (s == "zero") return Boundary::zero;
  if (s == "periodic") return Boundary::periodic;
  throw FormatError("unknown boundary '" + s + "' (expected zero|periodic)");
}

Grid Grid::make(std::span<const Index> shape, std::span<const double> spacing,
                std::span<const double> origin, Boundary boundary) {
  const auto dim = static_cast<int>(shape.size());
  if (dim != 2 && dim != 3)
    throw RuleError("grid dimension must be 2 or 3, got " + std::to_string(dim));
  if (spacing.size() != shape.size())
    throw RuleError("spacing needs " + std::to_string(dim) + " entries");
  if (!origin.empty() && origin.size() != shape.size())
    throw RuleError("origin needs " + std::to_string(dim) + " entries");

  Grid g;
  g.dim = dim;
  g.boundary = boundary;
  for (int a = 0; a < dim; ++a) {
    if (shape[a] < 3)
      throw RuleError("grid extent must be >= 3 on every axis");
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
      throw RuleError("grid spacing must be positive and finite");
    g.shape[a] = shape[a];
    g.spacing[a] = spacing[a];
    g.origin[a] = origin.empty() ? 0.0 : origin[a];
  }
  return g;
}

Grid Grid::cube(int dim, Index n, double h, Boundary boundary) {
  const std::array<Index, 3> shape{n, n, n};
  const std::array<double, 3> spacing{h, h, h};
  return make(std::span(shape).first(dim), std::span(spacing).first(dim), {},
              boundary);
}

double Grid::voxel_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= spacing[a];
  return v;
}

Eigen::Vector3d Grid::position(const std::array<Index, 3>& idx) const {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  for (int a = 0; a < dim; ++a)
    p[a] = origin[a] + static_cast<double>(idx[a]) * spacing[a];
  return p;
}

bool Grid::same_lattice(const Grid& other) const {
  return dim == other.dim && shape == other.shape && same_spacing(other);
}

bool Grid::same_spacing(const Grid& other) const {
  if (dim != other.dim) return false;
  for (int a = 0; a < dim; ++a)
    if (spacing[a] != other.spacing[a]) return false;
  return true;
}

bool Grid::is_cube() const {
  for (int a = 1; a < dim; ++a)
    if (shape[a] != shape[0] || spacing[a] != spacing[0]) return false;
  return true;
}

Grid kernel_grid(const Grid& field, Index radius) {
  if (radius < 1) throw RuleError("kernel radius must be >= 1 voxel");
  Grid g = field;
  g.boundary = Boundary::zero;
  for (int a = 0; a < field.dim; ++a) {
    g.shape[a] = 2 * radius + 1;
    g.origin[a] = -static_cast<double>(radius) * field.spacing[a];
  }
  return g;
}

Grid full_range_kernel_grid(const Grid& field) {
  Grid g = field;
  g.boundary = Boundary::zero;
  for (int a = 0; a < field.dim; ++a) {
    Index r = field.boundary == Boundary::periodic ? (field.shape[a] - 1) / 2
                                                   : field.shape[a] - 1;
    g.shape[a] = 2 * r + 1;
    g.origin[a] = -static_cast<double>(r) * field.spacing[a];
  }
  return g;
}

}  // namespace eqop
