#include "eqop/conv.hpp"

#include <fftw3.h>

#include <atomic>
#include <map>
#include <mutex>
#include <set>
#include <thread>

namespace eqop {

std::string to_string(Path p) { return p == Path::direct ? "direct" : "fourier"; }

Path path_from_string(const std::string& s) {
  if (s == "direct") return Path::direct;
  if (s == "fourier") return Path::fourier;
  throw FormatError("unknown path '" + s + "' (expected direct|fourier)");
}

namespace {

std::atomic<int> g_threads{1};

// FFTW's planner is not reentrant; execution with new-array functions is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <typename Fn>
void parallel_for(Index count, Fn&& fn) {
  const int threads = std::min<Index>(g_threads.load(), count);
  if (threads <= 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::jthread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (Index i = next++; i < count; i = next++) fn(i);
    });
}

void check_inputs(const Field& u, const KernelField& h, const ConvPlan& plan) {
  if (u.dim() != h.grid().dim) throw RuleError("conv: field and kernel dimension differ");
  if (!u.grid().same_spacing(h.grid()))
    throw RuleError("conv: kernel spacing must equal field spacing");
  if (u.l() != plan.rule.lu || h.l() != plan.rule.lh)
    throw RuleError("conv: field order " + std::to_string(u.l()) + " and kernel order " +
                    std::to_string(h.l()) + " do not match rule " + to_string(plan.rule));
  for (int a = 0; a < h.grid().dim; ++a)
    if (h.grid().shape[a] % 2 == 0) throw RuleError("conv: kernel extent must be odd");
}

struct Segment {
  Index dst;
  Index src;
  Index len;
};

// Pieces of one axis where out[dst + t] reads in[src + t] for a kernel offset.
std::vector<Segment> axis_segments(Index n, Index offset, Boundary b) {
  std::vector<Segment> segs;
  if (b == Boundary::zero) {
    const Index lo = std::max<Index>(0, offset);
    const Index hi = std::min<Index>(n, n + offset);
    if (hi > lo) segs.push_back({lo, lo - offset, hi - lo});
  } else {
    const Index s = ((offset % n) + n) % n;
    if (n - s > 0) segs.push_back({s, 0, n - s});
    if (s > 0) segs.push_back({0, n - s, s});
  }
  return segs;
}

using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic>;

// out += sum_o w(o) in(r - o) for the nonzero taps of one kernel component.
void scalar_direct(const Grid& g, const double* in, const KernelField& h, Index comp,
                   Boundary b, double* out) {
  const Grid& kg = h.grid();
  const auto rad = h.radius();
  for (Index kidx = 0; kidx < kg.size(); ++kidx) {
    const double w = h.field.value(kidx)[comp];
    if (w == 0.0) continue;
    const auto kijk = kg.unflat(kidx);
    std::array<std::vector<Segment>, 3> segs;
    for (int a = 0; a < 3; ++a)
      segs[a] = a < g.dim ? axis_segments(g.shape[a], kijk[a] - rad[a], b)
                          : std::vector<Segment>{{0, 0, 1}};
    for (const auto& s0 : segs[0])
      for (Index i = 0; i < s0.len; ++i)
        for (const auto& s1 : segs[1])
          for (Index j = 0; j < s1.len; ++j)
            for (const auto& s2 : segs[2]) {
              const Index d = g.flat(s0.dst + i, s1.dst + j, s2.dst);
              const Index s = g.flat(s0.src + i, s1.src + j, s2.src);
              Eigen::Map<RowVec>(out + d, s2.len) += w * Eigen::Map<const RowVec>(in + s, s2.len);
            }
  }
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwDeleter>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

RealBuffer alloc_real(Index n) {
  return RealBuffer(static_cast<double*>(fftw_malloc(sizeof(double) * static_cast<std::size_t>(n))));
}
ComplexBuffer alloc_complex(Index n) {
  return ComplexBuffer(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(n))));
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;

}  // namespace

void set_num_threads(int n) { g_threads = std::max(1, n); }
int num_threads() { return g_threads.load(); }

Index next_fast_size(Index n) {
  for (Index m = std::max<Index>(n, 1);; ++m) {
    Index r = m;
    for (Index p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

ConvPlan make_plan(const Rule& rule, int dim, Path path, Boundary boundary) {
  return {rule, path, boundary, expansion_coefficients(rule, dim)};
}

Path default_path(const KernelField& h) {
  return h.kind == KernelKind::stencil ? Path::direct : Path::fourier;
}

Field conv(const Field& u, const KernelField& h, const ConvPlan& plan) {
  return plan.path == Path::direct ? conv_direct(u, h, plan) : conv_fourier(u, h, plan);
}

Field conv(const Field& u, const KernelField& h, const Rule& rule) {
  return conv(u, h, make_plan(rule, u.dim(), default_path(h), u.grid().boundary));
}

Field conv_direct(const Field& u, const KernelField& h, const ConvPlan& plan) {
  check_inputs(u, h, plan);
  const Grid& g = u.grid();
  const double vol = g.voxel_volume();

  // group by (m, n) so each scalar convolution is computed once
  std::map<std::pair<int, int>, std::vector<std::pair<int, double>>> pairs;
  for (const auto& c : plan.coefficients) pairs[{c.m, c.n}].emplace_back(c.p, c.c);
  std::vector<std::pair<std::pair<int, int>, std::vector<std::pair<int, double>>>> work(
      pairs.begin(), pairs.end());

  std::vector<RowVec> partial(work.size());
  parallel_for(static_cast<Index>(work.size()), [&](Index w) {
    const auto [m, n] = work[w].first;
    partial[w] = RowVec::Zero(g.size());
    scalar_direct(g, u.component(m).data(), h, n, plan.boundary, partial[w].data());
  });

  Field v(g, plan.rule.lv);
  for (std::size_t w = 0; w < work.size(); ++w)
    for (const auto& [p, c] : work[w].second) v.component(p) += (c * vol) * partial[w];
  return v;
}

Field conv_fourier(const Field& u, const KernelField& h, const ConvPlan& plan) {
  check_inputs(u, h, plan);
  SpectralConvolver sc(u, h.grid(), plan.boundary);
  return sc.apply(h, plan.rule);
}

struct SpectralConvolver::Impl {
  Grid grid;
  Boundary boundary;
  std::array<Index, 3> kernel_radius{0, 0, 0};
  std::array<Index, 3> padded{1, 1, 1};
  Index real_size = 0;
  Index complex_size = 0;
  int lu = 0;
  std::vector<ComplexBuffer> u_hat;
  PlanHandle forward;
  PlanHandle backward;

  Index padded_flat(Index i, Index j, Index k) const { return (i * padded[1] + j) * padded[2] + k; }

  // Real-space array for one scalar component, laid out in the padded box.
  void scatter_field(const double* comp, double* dst) const {
    std::fill(dst, dst + real_size, 0.0);
    for (Index i = 0; i < grid.shape[0]; ++i)
      for (Index j = 0; j < grid.shape[1]; ++j)
        std::copy_n(comp + grid.flat(i, j, 0), grid.shape[2], dst + padded_flat(i, j, 0));
  }

  // Kernel taps wrapped to offset mod padded extent; taps that alias under
  // periodic wrap are summed.
  void scatter_kernel(const KernelField& h, Index comp, double* dst) const {
    std::fill(dst, dst + real_size, 0.0);
    const Grid& kg = h.grid();
    const auto rad = h.radius();
    for (Index idx = 0; idx < kg.size(); ++idx) {
      const double w = h.field.value(idx)[comp];
      if (w == 0.0) continue;
      const auto ijk = kg.unflat(idx);
      std::array<Index, 3> pos{0, 0, 0};
      for (int a = 0; a < grid.dim; ++a) {
        const Index o = ijk[a] - rad[a];
        pos[a] = ((o % padded[a]) + padded[a]) % padded[a];
      }
      dst[padded_flat(pos[0], pos[1], pos[2])] += w;
    }
  }

  void gather(const double* src, double scale, double* comp) const {
    for (Index i = 0; i < grid.shape[0]; ++i)
      for (Index j = 0; j < grid.shape[1]; ++j) {
        const double* s = src + padded_flat(i, j, 0);
        double* d = comp + grid.flat(i, j, 0);
        for (Index k = 0; k < grid.shape[2]; ++k) d[k] = scale * s[k];
      }
  }
};

SpectralConvolver::SpectralConvolver(const Field& u, const Grid& kgrid, Boundary boundary)
    : impl_(std::make_unique<Impl>()) {
  Impl& s = *impl_;
  s.grid = u.grid();
  s.boundary = boundary;
  s.lu = u.l();
  const int d = s.grid.dim;
  if (kgrid.dim != d) throw RuleError("conv: field and kernel dimension differ");
  for (int a = 0; a < d; ++a) {
    if (kgrid.shape[a] % 2 == 0) throw RuleError("conv: kernel extent must be odd");
    s.kernel_radius[a] = (kgrid.shape[a] - 1) / 2;
    const Index n = s.grid.shape[a];
    const Index r = s.kernel_radius[a];
    s.padded[a] = boundary == Boundary::periodic ? n : next_fast_size(std::max(n + r, 2 * r + 1));
  }
  s.real_size = s.padded[0] * s.padded[1] * s.padded[2];
  const Index last = s.padded[d - 1];
  s.complex_size = s.real_size / last * (last / 2 + 1);

  int dims[3] = {static_cast<int>(s.padded[0]), static_cast<int>(s.padded[1]),
                 static_cast<int>(s.padded[2])};
  {
    auto r = alloc_real(s.real_size);
    auto c = alloc_complex(s.complex_size);
    std::lock_guard lock(planner_mutex());
    s.forward.reset(fftw_plan_dft_r2c(d, dims, r.get(), c.get(), FFTW_ESTIMATE));
    s.backward.reset(fftw_plan_dft_c2r(d, dims, c.get(), r.get(), FFTW_ESTIMATE));
  }
  if (!s.forward || !s.backward) throw NumericalError("FFTW planning failed");

  s.u_hat.resize(static_cast<std::size_t>(u.components()));
  parallel_for(u.components(), [&](Index m) {
    auto r = alloc_real(s.real_size);
    s.scatter_field(u.component(m).data(), r.get());
    s.u_hat[m] = alloc_complex(s.complex_size);
    fftw_execute_dft_r2c(s.forward.get(), r.get(), s.u_hat[m].get());
  });
}

SpectralConvolver::~SpectralConvolver() = default;
SpectralConvolver::SpectralConvolver(SpectralConvolver&&) noexcept = default;
SpectralConvolver& SpectralConvolver::operator=(SpectralConvolver&&) noexcept = default;

const std::array<Index, 3>& SpectralConvolver::padded_shape() const { return impl_->padded; }

Field SpectralConvolver::apply(const KernelField& h, const Rule& rule) const {
  const Impl& s = *impl_;
  const int d = s.grid.dim;
  if (h.grid().dim != d || !h.grid().same_spacing(s.grid))
    throw RuleError("conv: kernel grid incompatible with field grid");
  if (rule.lu != s.lu || rule.lh != h.l())
    throw RuleError("conv: orders do not match rule " + to_string(rule));
  if (s.boundary == Boundary::zero) {
    const auto rad = h.radius();
    for (int a = 0; a < d; ++a)
      if (rad[a] > s.kernel_radius[a])
        throw RuleError("conv: kernel larger than the convolver was sized for");
  }
  const auto coeffs = expansion_coefficients(rule, d);

  std::set<int> needed;
  for (const auto& c : coeffs) needed.insert(c.n);
  std::map<int, ComplexBuffer> h_hat;
  for (int n : needed) h_hat[n] = nullptr;
  std::vector<int> needed_list(needed.begin(), needed.end());
  parallel_for(static_cast<Index>(needed_list.size()), [&](Index i) {
    const int n = needed_list[i];
    auto r = alloc_real(s.real_size);
    s.scatter_kernel(h, n, r.get());
    auto c = alloc_complex(s.complex_size);
    fftw_execute_dft_r2c(s.forward.get(), r.get(), c.get());
    h_hat.at(n) = std::move(c);
  });

  Field v(s.grid, rule.lv);
  const double scale = s.grid.voxel_volume() / static_cast<double>(s.real_size);
  parallel_for(v.components(), [&](Index p) {
    auto acc = alloc_complex(s.complex_size);
    auto* a = reinterpret_cast<std::complex<double>*>(acc.get());
    std::fill(a, a + s.complex_size, std::complex<double>(0.0, 0.0));
    bool any = false;
    for (const auto& c : coeffs) {
      if (c.p != p) continue;
      any = true;
      const auto* uh = reinterpret_cast<const std::complex<double>*>(s.u_hat[c.m].get());
      const auto* hh = reinterpret_cast<const std::complex<double>*>(h_hat.at(c.n).get());
      for (Index k = 0; k < s.complex_size; ++k) a[k] += c.c * uh[k] * hh[k];
    }
    if (!any) return;
    auto r = alloc_real(s.real_size);
    fftw_execute_dft_c2r(s.backward.get(), acc.get(), r.get());
    s.gather(r.get(), scale, v.component(p).data());
  });
  return v;
}

}  // namespace eqop
