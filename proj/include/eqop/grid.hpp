#pragma once

#include <Eigen/Core>

#include <array>
#include <span>
#include <string>

namespace eqop {

using Index = Eigen::Index;

enum class Boundary { zero, periodic };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

/// Regular orthogonal 2d/3d lattice. Voxels are stored row-major with axis 0
/// slowest. In 2d the third axis is a dummy of extent 1.
struct Grid {
  int dim = 3;
  std::array<Index, 3> shape{1, 1, 1};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  std::array<double, 3> origin{0.0, 0.0, 0.0};
  Boundary boundary = Boundary::zero;

  /// Validating constructor. `shape`, `spacing` and `origin` carry `dim`
  /// entries; an empty `origin` means all zeros.
  static Grid make(std::span<const Index> shape, std::span<const double> spacing,
                   std::span<const double> origin = {},
                   Boundary boundary = Boundary::zero);

  /// Cube of `n` voxels per axis with isotropic spacing `h`.
  static Grid cube(int dim, Index n, double h = 1.0,
                   Boundary boundary = Boundary::zero);

  Index size() const { return shape[0] * shape[1] * shape[2]; }
  double voxel_volume() const;

  Index flat(Index i, Index j, Index k = 0) const {
    return (i * shape[1] + j) * shape[2] + k;
  }
  std::array<Index, 3> unflat(Index idx) const {
    const Index k = idx % shape[2];
    const Index rest = idx / shape[2];
    return {rest / shape[1], rest % shape[1], k};
  }

  /// World coordinate of a voxel: origin + index * spacing.
  Eigen::Vector3d position(const std::array<Index, 3>& idx) const;

  /// Same lattice (shape and spacing) regardless of origin and boundary.
  bool same_lattice(const Grid& other) const;
  bool same_spacing(const Grid& other) const;

  /// Equal extent and spacing on every active axis.
  bool is_cube() const;

  bool operator==(const Grid&) const = default;
};

/// Centered odd-extent grid with the spacing of `field`, `radius` voxels on
/// each side of the center. Its origin puts the center voxel at 0.
Grid kernel_grid(const Grid& field, Index radius);

/// Kernel grid large enough that every voxel pair of `field` interacts:
/// radius n-1 for zero padding, (n-1)/2 for periodic wrap.
Grid full_range_kernel_grid(const Grid& field);

}  // namespace eqop
