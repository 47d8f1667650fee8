#include "eqop/kernel.hpp"

#include <cmath>
#include <numbers>

namespace eqop {

std::string to_string(KernelKind k) { return k == KernelKind::stencil ? "stencil" : "sampled"; }

KernelKind kernel_kind_from_string(const std::string& s) {
  if (s == "sampled") return KernelKind::sampled;
  if (s == "stencil") return KernelKind::stencil;
  throw FormatError("unknown kernel kind '" + s + "'");
}

std::array<Index, 3> KernelField::radius() const {
  const Grid& g = grid();
  std::array<Index, 3> r{0, 0, 0};
  for (int a = 0; a < g.dim; ++a) r[a] = (g.shape[a] - 1) / 2;
  return r;
}

Index KernelField::center_index() const {
  const auto r = radius();
  return grid().flat(r[0], r[1], r[2]);
}

namespace {

void require_centered(const Grid& g) {
  for (int a = 0; a < g.dim; ++a)
    if (g.shape[a] % 2 == 0)
      throw RuleError("kernel grids need an odd extent on every axis");
}

}  // namespace

KernelField sample_kernel(const Grid& kgrid, const RadialProfile& profile, int l_h) {
  require_centered(kgrid);
  if (profile.singular_at_origin && profile.origin_rule == OriginRule::none)
    throw RuleError("profile '" + profile.name + "' is singular at r = 0 and has no origin rule");

  KernelField k;
  k.field = Field(kgrid, l_h);
  k.kind = KernelKind::sampled;
  k.profile_name = profile.name;
  k.support_radius = profile.support_radius;

  const int d = kgrid.dim;
  std::array<Index, 3> half{0, 0, 0};
  for (int a = 0; a < d; ++a) half[a] = (kgrid.shape[a] - 1) / 2;

  for (Index idx = 0; idx < kgrid.size(); ++idx) {
    const auto ijk = kgrid.unflat(idx);
    Eigen::Vector3d offset = Eigen::Vector3d::Zero();
    for (int a = 0; a < d; ++a)
      offset[a] = static_cast<double>(ijk[a] - half[a]) * kgrid.spacing[a];
    const double r = offset.norm();

    if (r == 0.0) {
      if (l_h == 0 && profile.origin_rule == OriginRule::evaluate)
        k.field.value(idx)[0] = profile(0.0);
      continue;
    }
    if (r > profile.support_radius) continue;
    const Eigen::Vector3d r_hat = offset / r;
    k.field.value(idx) = profile(r) * unit_harmonic<double>(l_h, d, r_hat);
  }
  return k;
}

KernelField gradient_stencil(const Grid& grid) {
  KernelField k;
  k.field = Field(kernel_grid(grid, 1), 1);
  k.kind = KernelKind::stencil;
  k.profile_name = "gradient";
  k.support_radius = 0.0;
  const double vol = grid.voxel_volume();
  const Grid& kg = k.field.grid();
  for (int a = 0; a < grid.dim; ++a) {
    std::array<Index, 3> minus{1, 1, 1}, plus{1, 1, 1};
    if (grid.dim == 2) minus[2] = plus[2] = 0;
    minus[a] = 0;
    plus[a] = 2;
    const double w = 1.0 / (2.0 * grid.spacing[a] * vol);
    k.field.value(kg.flat(minus[0], minus[1], minus[2]))[a] = w;
    k.field.value(kg.flat(plus[0], plus[1], plus[2]))[a] = -w;
  }
  for (int a = 0; a < grid.dim; ++a) k.support_radius = std::max(k.support_radius, grid.spacing[a]);
  return k;
}

KernelField delta_stencil(const Grid& grid) {
  KernelField k;
  k.field = Field(kernel_grid(grid, 1), 0);
  k.kind = KernelKind::stencil;
  k.profile_name = "delta";
  k.support_radius = 0.0;
  k.field.value(k.center_index())[0] = 1.0 / grid.voxel_volume();
  return k;
}

KernelField laplacian_stencil(const Grid& grid, LaplacianForm form) {
  const Index reach = form == LaplacianForm::compact ? 1 : 2;
  KernelField k;
  k.field = Field(kernel_grid(grid, reach), 0);
  k.kind = KernelKind::stencil;
  k.profile_name = form == LaplacianForm::compact ? "laplacian_compact" : "laplacian";
  const double vol = grid.voxel_volume();
  const Grid& kg = k.field.grid();
  const Index c = k.center_index();
  for (int a = 0; a < grid.dim; ++a) {
    const double step = static_cast<double>(reach) * grid.spacing[a];
    const double w = 1.0 / (step * step * vol);
    std::array<Index, 3> lo{reach, reach, reach}, hi{reach, reach, reach};
    if (grid.dim == 2) lo[2] = hi[2] = 0;
    lo[a] = 0;
    hi[a] = 2 * reach;
    k.field.value(kg.flat(lo[0], lo[1], lo[2]))[0] += w;
    k.field.value(kg.flat(hi[0], hi[1], hi[2]))[0] += w;
    k.field.value(c)[0] -= 2.0 * w;
    k.support_radius = std::max(k.support_radius, step);
  }
  return k;
}

KernelField embed_kernel(const KernelField& k, const Grid& target) {
  require_centered(target);
  if (!k.grid().same_spacing(target)) throw RuleError("embed_kernel: spacing mismatch");
  const auto r_src = k.radius();
  std::array<Index, 3> r_dst{0, 0, 0};
  for (int a = 0; a < target.dim; ++a) {
    r_dst[a] = (target.shape[a] - 1) / 2;
    if (r_dst[a] < r_src[a]) throw RuleError("embed_kernel: target grid is smaller than kernel");
  }
  KernelField out = k;
  out.field = Field(target, k.l());
  const Grid& src = k.grid();
  for (Index idx = 0; idx < src.size(); ++idx) {
    const auto ijk = src.unflat(idx);
    std::array<Index, 3> dst{0, 0, 0};
    for (int a = 0; a < target.dim; ++a) dst[a] = ijk[a] - r_src[a] + r_dst[a];
    out.field.value(target.flat(dst[0], dst[1], dst[2])) = k.field.value(idx);
  }
  return out;
}

RadialProfile gaussian_profile(double sigma) {
  if (!(sigma > 0.0)) throw FormatError("gaussian width must be positive");
  return {"gaussian", [sigma](double r) { return std::exp(-(r * r) / (sigma * sigma)); },
          std::numeric_limits<double>::infinity(), false, OriginRule::evaluate};
}

RadialProfile inverse_r_profile() {
  return {"inverse_r", [](double r) { return 1.0 / (4.0 * std::numbers::pi * r); },
          std::numeric_limits<double>::infinity(), true, OriginRule::zero};
}

RadialProfile inverse_r2_profile() {
  return {"inverse_r2", [](double r) { return 1.0 / (4.0 * std::numbers::pi * r * r); },
          std::numeric_limits<double>::infinity(), true, OriginRule::zero};
}

RadialProfile log_r_profile() {
  return {"log_r", [](double r) { return -std::log(r) / (2.0 * std::numbers::pi); },
          std::numeric_limits<double>::infinity(), true, OriginRule::zero};
}

RadialProfile gaussian_diffusion_profile(double diffusivity, double time, int dim) {
  if (!(diffusivity > 0.0) || !(time > 0.0))
    throw FormatError("gaussian_diffusion needs D > 0 and t > 0");
  const double four_dt = 4.0 * diffusivity * time;
  const double norm = std::pow(std::numbers::pi * four_dt, -0.5 * dim);
  const double sigma = std::sqrt(2.0 * diffusivity * time);
  return {"gaussian_diffusion",
          [four_dt, norm](double r) { return norm * std::exp(-(r * r) / four_dt); },
          8.0 * sigma, false, OriginRule::evaluate};
}

RadialProfile named_profile(const std::string& name, int dim,
                            const std::map<std::string, double>& params) {
  auto param = [&](const char* key) {
    const auto it = params.find(key);
    if (it == params.end())
      throw FormatError("profile '" + name + "' needs parameter '" + key + "'");
    return it->second;
  };
  if (name == "gaussian") return gaussian_profile(param("sigma"));
  if (name == "gaussian_diffusion")
    return gaussian_diffusion_profile(param("D"), param("t"), dim);
  if (name == "inverse_r" || name == "inverse_r2") {
    if (dim != 3) throw FormatError("profile '" + name + "' is defined in 3d only");
    return name == "inverse_r" ? inverse_r_profile() : inverse_r2_profile();
  }
  if (name == "log_r") {
    if (dim != 2) throw FormatError("profile 'log_r' is defined in 2d only");
    return log_r_profile();
  }
  throw FormatError("unknown profile '" + name +
                    "' (known: gaussian, inverse_r, inverse_r2, log_r, gaussian_diffusion)");
}

void save_kernel(const std::string& path, const KernelField& k) {
  save_eqf(path, k.field, to_string(k.kind));
}

KernelField load_kernel(const std::string& path) {
  auto rec = load_eqf(path);
  KernelField k;
  k.kind = rec.kind ? kernel_kind_from_string(*rec.kind) : KernelKind::sampled;
  k.field = std::move(rec.field);
  k.profile_name = "file:" + path;
  require_centered(k.grid());
  return k;
}

}  // namespace eqop
