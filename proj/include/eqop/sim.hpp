#pragma once

#include "eqop/tensor_field.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eqop {

/// du/dt = D laplacian(u) - w . grad(u) + source, stepped with explicit Euler.
/// The Laplacian is the compact nearest-neighbour stencil, the gradient the
/// central difference; boundaries follow the grid.
struct DiffusionAdvectionModel {
  Grid grid;
  double diffusivity = 0.0;
  /// Wind velocity; entries past grid.dim are ignored.
  Eigen::Vector3d wind = Eigen::Vector3d::Zero();
  /// Emission rate density (l = 0).
  Field source;
  double dt = 0.0;

  /// Validates and builds a model. A missing source means no emission.
  static DiffusionAdvectionModel make(const Grid& grid, double diffusivity,
                                      const Eigen::VectorXd& wind, std::optional<Field> source,
                                      double dt);

  /// Largest dt accepted by the stability guard:
  /// 0.5 * min(h^2 / (2 dim D), h / |w|), h the smallest spacing.
  double max_stable_dt() const;
  /// Throws NumericalError naming the largest stable dt when violated.
  void check_stability() const;
};

Field time_derivative(const DiffusionAdvectionModel& m, const Field& u);
Field step_euler(const DiffusionAdvectionModel& m, const Field& u);
/// Trajectory [u0, u1, ..., u_n]. Throws NumericalError naming the step if a
/// non-finite value appears.
std::vector<Field> simulate(const DiffusionAdvectionModel& m, const Field& u0, int n_steps);

/// Single-voxel emitter of total rate `rate` (density rate / V).
Field point_emitter(const Grid& grid, const std::array<Index, 3>& at, double rate = 1.0);

struct ParameterEstimate {
  double diffusivity = 0.0;
  Eigen::VectorXd wind;
  /// |X theta - y| / |y| over all frame pairs.
  double residual = 0.0;
  /// Condition number of the column-scaled feature matrix.
  double condition = 0.0;
};

/// Least squares for (D, w) from successive frame differences:
/// (u_{k+1} - u_k)/dt - source = D lap(u_k) - sum_a w_a d_a u_k.
/// Throws NumericalError when the features are rank deficient.
ParameterEstimate estimate_parameters(const std::vector<Field>& frames, double dt,
                                      const std::optional<Field>& source = std::nullopt);

/// Adds i.i.d. Gaussian noise with standard deviation rel times each frame's
/// RMS value. Deterministic for a given seed.
std::vector<Field> add_noise(const std::vector<Field>& frames, double rel, std::uint64_t seed);

struct Trajectory {
  std::vector<Field> frames;
  double dt = 0.0;
  std::optional<Field> source;
  /// Generation parameters when known.
  std::optional<double> diffusivity;
  std::optional<Eigen::VectorXd> wind;
};

/// Writes frame_0000.eqf, ..., source.eqf (if any) and trajectory.txt into
/// `dir`, returning the manifest path.
std::string save_trajectory(const std::string& dir, const Trajectory& t);
/// Accepts the manifest path or the directory holding it.
Trajectory load_trajectory(const std::string& path);

}  // namespace eqop
