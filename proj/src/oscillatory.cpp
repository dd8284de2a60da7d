#include "heisosc/oscillatory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "heisosc/linalg.hpp"

namespace heisosc {

namespace {

double bump_exp(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

}  // namespace

double smooth_step(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = bump_exp(u);
  return a / (a + bump_exp(1.0 - u));
}

double psi_cutoff(double r) { return 1.0 - smooth_step(2.0 * r - 1.0); }

double theta_partition(double r) { return psi_cutoff(0.5 * r) - psi_cutoff(r); }

double dyadic_weight(int j, double r) { return theta_partition(std::ldexp(r, j)); }

double window(double u, double plateau) {
  const double au = std::abs(u);
  if (au >= 1.0) return 0.0;
  if (au <= plateau) return 1.0;
  return smooth_step((1.0 - au) / (1.0 - plateau));
}

// ---------------------------------------------------------------- grids

GridSpec GridSpec::cube(std::vector<double> center, std::vector<double> half_width, int n_points) {
  GridSpec g;
  g.points.assign(center.size(), n_points);
  g.center = std::move(center);
  g.half_width = std::move(half_width);
  g.validate();
  return g;
}

void GridSpec::validate() const {
  if (center.empty()) throw DimensionError("grid needs at least one axis");
  if (half_width.size() != center.size() || points.size() != center.size()) {
    throw DimensionError("grid center, half widths and point counts differ in length");
  }
  for (std::size_t k = 0; k < center.size(); ++k) {
    if (points[k] < 4) throw DomainError("grid needs at least 4 points per axis");
    if (!(half_width[k] > 0.0) || !std::isfinite(half_width[k])) {
      throw DomainError("grid half widths must be positive and finite");
    }
  }
}

std::size_t GridSpec::size() const noexcept {
  std::size_t s = 1;
  for (int p : points) s *= static_cast<std::size_t>(p);
  return s;
}

double GridSpec::spacing(std::size_t axis) const { return 2.0 * half_width.at(axis) / points.at(axis); }

double GridSpec::coord(std::size_t axis, int i) const {
  return center[axis] - half_width[axis] + spacing(axis) * (i + 0.5);
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (std::size_t k = 0; k < dim(); ++k) v *= spacing(k);
  return v;
}

void GridSpec::node(std::size_t flat, std::span<double> out) const {
  for (std::size_t k = dim(); k-- > 0;) {
    const auto nk = static_cast<std::size_t>(points[k]);
    out[k] = coord(k, static_cast<int>(flat % nk));
    flat /= nk;
  }
}

std::vector<double> GridSpec::node(std::size_t flat) const {
  std::vector<double> out(dim());
  node(flat, out);
  return out;
}

OperatorGrids generic_grids(const GroupContext& ctx, std::vector<double> p0, std::vector<double> half, int n_points) {
  if (p0.size() != static_cast<std::size_t>(ctx.dim()) || half.size() != p0.size()) {
    throw DimensionError("generic grids need a centre and half widths of length 2n+1");
  }
  std::vector<double> zero(p0.size(), 0.0);
  return {GridSpec::cube(std::move(p0), half, n_points), GridSpec::cube(std::move(zero), half, n_points)};
}

OperatorGrids dyadic_grids(const GroupContext& ctx, const QuasiNormSpec& norm, int n_points, double in_half) {
  if (!(in_half > 0.0)) throw DomainError("input half width must be positive");
  const auto d = static_cast<std::size_t>(ctx.dim());
  GridSpec in = GridSpec::cube(std::vector<double>(d, 0.0), std::vector<double>(d, in_half), n_points);
  const double h = in.spacing(0);
  // every smooth norm here bounds |z_i| <= rho and |z_t| <= rho^2, and the support is rho(bz) <= 2
  const double zx = 2.0 / norm.b;
  const double zt = 4.0 / norm.b;
  const double twist = 2.0 * std::abs(ctx.a) * 2.0 * ctx.n * in_half * zx;
  GridSpec out;
  out.center.assign(d, 0.0);
  out.half_width.resize(d);
  out.points.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double need = k + 1 == d ? in_half + zt + twist : in_half + zx;
    const int pts = static_cast<int>(std::ceil(2.0 * need / h - 1e-9));
    out.points[k] = pts;
    out.half_width[k] = 0.5 * pts * h;
  }
  out.validate();
  return {std::move(out), std::move(in)};
}

namespace {

PointWeight box_window(const GridSpec& g, double plateau) {
  return [c = g.center, h = g.half_width, plateau](std::span<const double> x) {
    double w = 1.0;
    for (std::size_t k = 0; k < c.size(); ++k) w *= window((x[k] - c[k]) / h[k], plateau);
    return w;
  };
}

}  // namespace

GenericKernel group_generic_kernel(double lambda, const PhaseSpec& phase, const OperatorGrids& grids,
                                   double plateau) {
  GenericKernel k;
  k.lambda = lambda;
  k.group_phase = phase;
  k.amp_out = box_window(grids.out, plateau);
  k.amp_in = box_window(grids.in, plateau);
  return k;
}

// ---------------------------------------------------------------- kernel pieces

namespace {

void check_smooth(const QuasiNormSpec& norm) {
  if (!is_smooth(norm.kind)) throw DomainError("oscillatory kernels need a smooth quasi-norm");
}

/// q^{-1} p written out so the hot loops do not allocate.
template <class T>
void displacement(const GroupContext& ctx, std::span<const T> p, std::span<const T> q, std::span<T> z) {
  const std::size_t m = z.size() - 1;
  for (std::size_t i = 0; i < m; ++i) z[i] = p[i] - q[i];
  z[m] = p[m] - q[m] +
         2.0 * ctx.a *
             (pairing_raw<T>(ctx.variant, ctx.n, q.first(m), p.first(m)) -
              pairing_raw<T>(ctx.variant, ctx.n, q.first(m), q.first(m)));
}

/// rho(bz) for a displacement stored in a scratch buffer (scaled in place).
double rho_scaled(const QuasiNormSpec& norm, std::span<double> z) {
  for (auto& v : z) v *= norm.b;
  const double phi = phi_scalar_raw<double>(norm.kind, std::span<const double>(z.data(), z.size()));
  return std::pow(phi, norm.kind == NormKind::Rho2 ? 0.5 : 0.25);
}

cplx dyadic_core(const GroupContext& ctx, const DyadicKernel& k, std::span<double> z) {
  const double rho = rho_scaled(k.norm, z);
  const double th = theta_partition(rho);
  if (th == 0.0) return 0.0;
  const double mag = std::exp2(k.j * k.alpha) * th * std::pow(rho, -(2.0 * ctx.n + 2.0 + k.alpha));
  return std::polar(mag, std::exp2(k.j * k.beta) * std::pow(rho, -k.beta));
}

/// Unscaled phase on jets (rho^{-beta} for group phases and dyadic kernels,
/// the user callable otherwise).
Jet2 phase_jet(const OscKernelSpec& spec, std::span<const Jet2> p, std::span<const Jet2> q, std::span<Jet2> z) {
  if (const auto* g = std::get_if<GenericKernel>(&spec.mode)) {
    if (!g->group_phase) return g->phase(p, q);
    displacement<Jet2>(spec.ctx, p, q, z);
    return phase_raw<Jet2>(*g->group_phase, std::span<const Jet2>(z.data(), z.size()));
  }
  const auto& dk = std::get<DyadicKernel>(spec.mode);
  displacement<Jet2>(spec.ctx, p, q, z);
  return phase_raw<Jet2>(PhaseSpec(dk.norm, dk.beta), std::span<const Jet2>(z.data(), z.size()));
}

/// Nodes on a strided sub-lattice that always contains both ends of each axis.
std::vector<std::size_t> sample_nodes(const GridSpec& g, std::size_t max_nodes) {
  const auto d = g.dim();
  const auto per_axis = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(max_nodes), 1.0 / d))));
  std::vector<std::vector<int>> idx(d);
  for (std::size_t k = 0; k < d; ++k) {
    const int n = g.points[k];
    if (static_cast<std::size_t>(n) <= per_axis) {
      for (int i = 0; i < n; ++i) idx[k].push_back(i);
    } else {
      for (std::size_t s = 0; s < per_axis; ++s) {
        idx[k].push_back(static_cast<int>(std::lround(static_cast<double>(s) * (n - 1) / (per_axis - 1))));
      }
    }
  }
  std::vector<std::size_t> out{0};
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<std::size_t> next;
    for (auto base : out) {
      for (int i : idx[k]) next.push_back(base * static_cast<std::size_t>(g.points[k]) + static_cast<std::size_t>(i));
    }
    out = std::move(next);
  }
  return out;
}

/// Pairs where the kernel vanishes identically do not need resolving.
bool active_pair(const OscKernelSpec& spec, std::span<const double> p, std::span<const double> q,
                 std::vector<double>& z) {
  if (const auto* g = std::get_if<GenericKernel>(&spec.mode)) {
    if (g->amp_out && g->amp_out(p) == 0.0) return false;
    if (g->amp_in && g->amp_in(q) == 0.0) return false;
    return !g->amplitude || g->amplitude(p, q) != 0.0;
  }
  const auto& dk = std::get<DyadicKernel>(spec.mode);
  displacement<double>(spec.ctx, p, q, z);
  const double rho = rho_scaled(dk.norm, z);
  return rho > 0.5 && rho < 2.0;
}

}  // namespace

double unit_phase_increment(const OscKernelSpec& spec, const OperatorGrids& grids) {
  const auto& go = grids.out;
  const auto& gi = grids.in;
  go.validate();
  gi.validate();
  const bool generic = std::holds_alternative<GenericKernel>(spec.mode);
  if (generic) {
    const auto& g = std::get<GenericKernel>(spec.mode);
    if (!g.group_phase && !g.phase) throw DomainError("generic kernel needs a phase");
    if (g.group_phase) check_smooth(g.group_phase->norm);
  } else {
    check_smooth(std::get<DyadicKernel>(spec.mode).norm);
  }
  const bool group = !generic || std::get<GenericKernel>(spec.mode).group_phase.has_value();
  if (group && (go.dim() != static_cast<std::size_t>(spec.ctx.dim()) || gi.dim() != go.dim())) {
    throw DimensionError("grids must have 2n+1 axes for group kernels");
  }

  const std::size_t pairs_full = go.size() * gi.size();
  constexpr std::size_t kAllPairs = 2'000'000;
  std::vector<std::size_t> out_nodes(go.size()), in_nodes(gi.size());
  for (std::size_t i = 0; i < out_nodes.size(); ++i) out_nodes[i] = i;
  for (std::size_t i = 0; i < in_nodes.size(); ++i) in_nodes[i] = i;
  std::vector<std::size_t> out_sample = out_nodes, in_sample = in_nodes;
  if (pairs_full > kAllPairs) {
    out_sample = sample_nodes(go, std::max<std::size_t>(64, kAllPairs / std::max<std::size_t>(1, gi.size())));
    in_sample = sample_nodes(gi, std::max<std::size_t>(64, kAllPairs / std::max<std::size_t>(1, go.size())));
  }

  const std::size_t dp = go.dim(), dq = gi.dim();
  std::vector<double> p(dp), q(dq);
  std::vector<Jet2> pj(dp), qj(dq), zj(std::max(dp, dq));
  auto load = [](std::vector<Jet2>& j, std::span<const double> v) {
    for (std::size_t i = 0; i < v.size(); ++i) j[i] = Jet2(v[i]);
  };
  auto grad_p = [&](std::span<const double> pp, std::span<const double> qq, std::size_t k) {
    load(pj, pp);
    load(qj, qq);
    pj[k].d1 = 1.0;
    return phase_jet(spec, pj, qj, std::span<Jet2>(zj.data(), dp)).d1;
  };
  auto grad_q = [&](std::span<const double> pp, std::span<const double> qq, std::size_t k) {
    load(pj, pp);
    load(qj, qq);
    qj[k].d1 = 1.0;
    return phase_jet(spec, pj, qj, std::span<Jet2>(zj.data(), dp)).d1;
  };
  const std::vector<double> p0 = go.center, q0 = gi.center;
  std::vector<double> zbuf(dp);

  // raw phase, and the demodulated one for generic kernels; either resolving is enough
  double raw = 0.0;
  double demod = 0.0;
  auto record = [&](double d, double d0, double h) {
    raw = std::max(raw, std::abs(d) * h);
    const double dm = std::abs(d - d0) * h;
    demod = std::isfinite(dm) ? std::max(demod, dm) : std::numeric_limits<double>::infinity();
  };
  for (auto ip : out_nodes) {
    go.node(ip, p);
    for (auto iq : in_sample) {
      gi.node(iq, q);
      if (!active_pair(spec, p, q, zbuf)) continue;
      for (std::size_t k = 0; k < dp; ++k) record(grad_p(p, q, k), generic ? grad_p(p, q0, k) : 0.0, go.spacing(k));
    }
  }
  for (auto iq : in_nodes) {
    gi.node(iq, q);
    for (auto ip : out_sample) {
      go.node(ip, p);
      if (!active_pair(spec, p, q, zbuf)) continue;
      for (std::size_t k = 0; k < dq; ++k) record(grad_q(p, q, k), generic ? grad_q(p0, q, k) : 0.0, gi.spacing(k));
    }
  }
  return generic ? std::min(raw, demod) : raw;
}

// ---------------------------------------------------------------- operator

OscOperator::OscOperator(OscKernelSpec spec, OperatorGrids grids) : spec_(std::move(spec)), grids_(std::move(grids)) {
  const auto& go = grids_.out;
  const auto& gi = grids_.in;
  go.validate();
  gi.validate();
  if (displacement_type() && (go.dim() != static_cast<std::size_t>(spec_.ctx.dim()) || gi.dim() != go.dim())) {
    throw DimensionError("grids must have 2n+1 axes for group kernels");
  }
  amp_out_.assign(go.size(), 1.0);
  amp_in_.assign(gi.size(), 1.0);
  if (const auto* g = std::get_if<GenericKernel>(&spec_.mode)) {
    std::vector<double> x(go.dim());
    if (g->amp_out) {
      for (std::size_t i = 0; i < go.size(); ++i) {
        go.node(i, x);
        amp_out_[i] = g->amp_out(x);
      }
    }
    x.resize(gi.dim());
    if (g->amp_in) {
      for (std::size_t i = 0; i < gi.size(); ++i) {
        gi.node(i, x);
        amp_in_[i] = g->amp_in(x);
      }
    }
  }
  nt_out_ = static_cast<std::size_t>(go.points.back());
  nt_in_ = static_cast<std::size_t>(gi.points.back());
  nx_out_ = go.size() / nt_out_;
  nx_in_ = gi.size() / nt_in_;
  const bool same_dt = std::abs(go.spacing(go.dim() - 1) - gi.spacing(gi.dim() - 1)) <=
                       1e-12 * go.spacing(go.dim() - 1);
  if (displacement_type() && same_dt && plan_toeplitz() <= kCacheEntries) {
    path_ = Path::Toeplitz;
  } else if (go.size() * gi.size() <= kCacheEntries) {
    path_ = Path::Dense;
  } else if (go.size() * gi.size() <= kMaxPairs) {
    path_ = Path::OnTheFly;
  } else {
    throw CapacityError("operator with " + std::to_string(go.size()) + " x " + std::to_string(gi.size()) +
                        " nodes exceeds the evaluation budget");
  }
  check_resolution();
  if (path_ == Path::Toeplitz) build_toeplitz();
  if (path_ == Path::Dense) build_dense();
}

double OscOperator::oscillation_scale() const noexcept {
  if (const auto* g = std::get_if<GenericKernel>(&spec_.mode)) return g->lambda;
  const auto& dk = std::get<DyadicKernel>(spec_.mode);
  return std::exp2(dk.j * dk.beta);
}

void OscOperator::check_resolution() {
  const double unit = unit_phase_increment(spec_, grids_);
  const double scale = oscillation_scale();
  max_increment_ = unit * std::abs(scale);
  if (max_increment_ <= kMaxIncrement) return;
  if (const auto* g = std::get_if<GenericKernel>(&spec_.mode)) {
    const double feasible = kMaxIncrement / unit;
    throw NyquistError("grid does not resolve lambda = " + std::to_string(g->lambda) + " (phase step " +
                           std::to_string(max_increment_) + " > pi/2); largest feasible lambda is " +
                           std::to_string(feasible),
                       max_increment_, feasible);
  }
  const auto& dk = std::get<DyadicKernel>(spec_.mode);
  // increment at scale j is 2^{j beta} times the unit value
  const double feasible = std::floor(std::log2(kMaxIncrement / unit) / dk.beta);
  const double jmax = feasible < 0.0 ? -1.0 : feasible;
  throw NyquistError("grid does not resolve dyadic j = " + std::to_string(dk.j) + " (phase step " +
                         std::to_string(max_increment_) + " > pi/2); largest feasible j is " +
                         std::to_string(static_cast<int>(jmax)),
                     max_increment_, jmax);
}

bool OscOperator::displacement_type() const {
  if (const auto* g = std::get_if<GenericKernel>(&spec_.mode)) {
    return g->group_phase.has_value() && !g->amplitude;
  }
  return true;
}

cplx OscOperator::core(std::span<const double> p, std::span<const double> q, std::vector<double>& z) const {
  z.resize(p.size());
  if (const auto* g = std::get_if<GenericKernel>(&spec_.mode)) {
    const double amp = g->amplitude ? g->amplitude(p, q) : 1.0;
    if (amp == 0.0) return 0.0;
    double phi = 0.0;
    if (g->group_phase) {
      displacement<double>(spec_.ctx, p, q, z);
      phi = phase_raw<double>(*g->group_phase, std::span<const double>(z));
    } else {
      std::vector<Jet2> pj(p.begin(), p.end()), qj(q.begin(), q.end());
      phi = g->phase(pj, qj).v;
    }
    return std::polar(amp, g->lambda * phi);
  }
  displacement<double>(spec_.ctx, p, q, z);
  return dyadic_core(spec_.ctx, std::get<DyadicKernel>(spec_.mode), z);
}

// Lag m of block (xo, xi) pairs t_out index i with t_in index k when
// m = i - k + nt_in - 1. Dyadic kernels vanish unless |b z_x| <= 2 and
// |b z_t| <= 4, which bounds the lags worth storing.
std::size_t OscOperator::plan_toeplitz() {
  const auto& go = grids_.out;
  const auto& gi = grids_.in;
  const std::size_t lag = nt_out_ + nt_in_ - 1;
  const std::size_t d = go.dim();
  const std::size_t m_x = d - 1;
  const double ht = go.spacing(d - 1);
  const double dt0 = go.coord(d - 1, 0) - gi.coord(d - 1, 0);
  const auto* dk = std::get_if<DyadicKernel>(&spec_.mode);
  blocks_.assign(nx_out_ * nx_in_, Block{});
  std::vector<double> p(d), q(d);
  std::size_t total = 0;
  for (std::size_t xo = 0; xo < nx_out_; ++xo) {
    go.node(xo * nt_out_, p);
    for (std::size_t xi = 0; xi < nx_in_; ++xi) {
      Block& b = blocks_[xo * nx_in_ + xi];
      b.lo = 0;
      b.hi = static_cast<std::uint32_t>(lag);
      if (dk) {
        gi.node(xi * nt_in_, q);
        const double zx = 2.0 / dk->norm.b * (1.0 + 1e-12);
        bool inside = true;
        for (std::size_t i = 0; i < m_x; ++i) inside = inside && std::abs(p[i] - q[i]) <= zx;
        if (!inside) {
          b.hi = 0;
          continue;
        }
        const double c = dt0 + 2.0 * spec_.ctx.a *
                                   pairing_raw<double>(spec_.ctx.variant, spec_.ctx.n,
                                                       std::span<const double>(q).first(m_x),
                                                       std::span<const double>(p).first(m_x));
        const double zt = 4.0 / dk->norm.b * (1.0 + 1e-12);
        const double shift = static_cast<double>(nt_in_ - 1);
        const double lo = std::ceil((-zt - c) / ht + shift);
        const double hi = std::floor((zt - c) / ht + shift) + 1.0;
        b.lo = static_cast<std::uint32_t>(std::clamp(lo, 0.0, static_cast<double>(lag)));
        b.hi = static_cast<std::uint32_t>(std::clamp(hi, static_cast<double>(b.lo), static_cast<double>(lag)));
      }
      b.offset = total;
      total += b.hi - b.lo;
    }
  }
  return total;
}

void OscOperator::build_toeplitz() {
  const auto& go = grids_.out;
  const auto& gi = grids_.in;
  const std::size_t d = go.dim();
  const double ht = go.spacing(d - 1);
  const Block& last = blocks_.back();
  cache_.assign(last.offset + (last.hi - last.lo), cplx(0.0));
  const double t_out0 = go.coord(d - 1, 0);
  const double t_in0 = gi.coord(d - 1, 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t xo = 0; xo < nx_out_; ++xo) {
    std::vector<double> p(d), q(d), z(d);
    go.node(xo * nt_out_, p);
    for (std::size_t xi = 0; xi < nx_in_; ++xi) {
      const Block& b = blocks_[xo * nx_in_ + xi];
      if (b.hi == b.lo) continue;
      gi.node(xi * nt_in_, q);
      q[d - 1] = t_in0;
      for (std::size_t m = b.lo; m < b.hi; ++m) {
        p[d - 1] = t_out0 + ht * (static_cast<double>(m) - static_cast<double>(nt_in_ - 1));
        cache_[b.offset + m - b.lo] = core(p, q, z);
      }
    }
  }
}

void OscOperator::build_dense() {
  const auto& go = grids_.out;
  const auto& gi = grids_.in;
  cache_.assign(go.size() * gi.size(), cplx(0.0));
#pragma omp parallel for schedule(static)
  for (std::size_t ip = 0; ip < go.size(); ++ip) {
    std::vector<double> p(go.dim()), q(gi.dim()), z;
    go.node(ip, p);
    for (std::size_t iq = 0; iq < gi.size(); ++iq) {
      gi.node(iq, q);
      cache_[ip * gi.size() + iq] = core(p, q, z);
    }
  }
}

cplx OscOperator::kernel(std::size_t p, std::size_t q) const {
  const auto& go = grids_.out;
  const auto& gi = grids_.in;
  if (p >= go.size() || q >= gi.size()) throw DimensionError("kernel index out of range");
  cplx c;
  switch (path_) {
    case Path::Toeplitz: {
      const std::size_t m = p % nt_out_ + nt_in_ - 1 - q % nt_in_;
      const Block& b = blocks_[(p / nt_out_) * nx_in_ + q / nt_in_];
      c = m >= b.lo && m < b.hi ? cache_[b.offset + m - b.lo] : cplx(0.0);
      break;
    }
    case Path::Dense:
      c = cache_[p * gi.size() + q];
      break;
    case Path::OnTheFly: {
      std::vector<double> z;
      c = core(go.node(p), gi.node(q), z);
      break;
    }
  }
  return amp_out_[p] * amp_in_[q] * c;
}

GridFunction OscOperator::apply(const GridFunction& f) const {
  const auto& go = grids_.out;
  const auto& gi = grids_.in;
  if (f.size() != gi.size()) throw DimensionError("input has the wrong number of grid values");
  const double w = gi.cell_volume();
  GridFunction fs(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) fs[i] = f[i] * (amp_in_[i] * w);
  GridFunction out(go.size(), cplx(0.0));

  if (path_ == Path::Toeplitz) {
    const auto nti = static_cast<std::ptrdiff_t>(nt_in_);
#pragma omp parallel for schedule(static)
    for (std::size_t xo = 0; xo < nx_out_; ++xo) {
      cplx* o = &out[xo * nt_out_];
      for (std::size_t xi = 0; xi < nx_in_; ++xi) {
        const Block& b = blocks_[xo * nx_in_ + xi];
        if (b.hi == b.lo) continue;
        const cplx* k = cache_.data() + b.offset;  // k[m - lo]
        const cplx* g = &fs[xi * nt_in_];
        const auto lo = static_cast<std::ptrdiff_t>(b.lo), hi = static_cast<std::ptrdiff_t>(b.hi);
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(nt_out_); ++i) {
          const std::ptrdiff_t s0 = std::max<std::ptrdiff_t>(0, i + nti - hi);
          const std::ptrdiff_t s1 = std::min<std::ptrdiff_t>(nti - 1, i + nti - 1 - lo);
          cplx acc = 0.0;
          for (std::ptrdiff_t s = s0; s <= s1; ++s) acc += k[i - s + nti - 1 - lo] * g[s];
          o[i] += acc;
        }
      }
    }
  } else if (path_ == Path::Dense) {
#pragma omp parallel for schedule(static)
    for (std::size_t ip = 0; ip < go.size(); ++ip) {
      const cplx* k = &cache_[ip * gi.size()];
      cplx acc = 0.0;
      for (std::size_t iq = 0; iq < gi.size(); ++iq) acc += k[iq] * fs[iq];
      out[ip] = acc;
    }
  } else {
#pragma omp parallel for schedule(static)
    for (std::size_t ip = 0; ip < go.size(); ++ip) {
      std::vector<double> p = go.node(ip), q(gi.dim()), z;
      cplx acc = 0.0;
      for (std::size_t iq = 0; iq < gi.size(); ++iq) {
        gi.node(iq, q);
        acc += core(p, q, z) * fs[iq];
      }
      out[ip] = acc;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= amp_out_[i];
  return out;
}

GridFunction OscOperator::apply_adjoint(const GridFunction& g) const {
  const auto& go = grids_.out;
  const auto& gi = grids_.in;
  if (g.size() != go.size()) throw DimensionError("input has the wrong number of grid values");
  const double w = go.cell_volume();
  GridFunction gs(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) gs[i] = g[i] * (amp_out_[i] * w);
  GridFunction out(gi.size(), cplx(0.0));

  if (path_ == Path::Toeplitz) {
    const auto nti = static_cast<std::ptrdiff_t>(nt_in_);
    const auto nto = static_cast<std::ptrdiff_t>(nt_out_);
#pragma omp parallel for schedule(static)
    for (std::size_t xi = 0; xi < nx_in_; ++xi) {
      cplx* o = &out[xi * nt_in_];
      for (std::size_t xo = 0; xo < nx_out_; ++xo) {
        const Block& b = blocks_[xo * nx_in_ + xi];
        if (b.hi == b.lo) continue;
        const cplx* k = cache_.data() + b.offset;
        const cplx* h = &gs[xo * nt_out_];
        const auto lo = static_cast<std::ptrdiff_t>(b.lo), hi = static_cast<std::ptrdiff_t>(b.hi);
        for (std::ptrdiff_t s = 0; s < nti; ++s) {
          const std::ptrdiff_t i0 = std::max<std::ptrdiff_t>(0, lo + s - nti + 1);
          const std::ptrdiff_t i1 = std::min<std::ptrdiff_t>(nto, hi + s - nti + 1);
          cplx acc = 0.0;
          for (std::ptrdiff_t i = i0; i < i1; ++i) acc += std::conj(k[i - s + nti - 1 - lo]) * h[i];
          o[s] += acc;
        }
      }
    }
  } else if (path_ == Path::Dense) {
    const std::size_t nq = gi.size();
#pragma omp parallel for schedule(static)
    for (std::size_t iq = 0; iq < nq; ++iq) {
      cplx acc = 0.0;
      for (std::size_t ip = 0; ip < go.size(); ++ip) acc += std::conj(cache_[ip * nq + iq]) * gs[ip];
      out[iq] = acc;
    }
  } else {
#pragma omp parallel for schedule(static)
    for (std::size_t iq = 0; iq < gi.size(); ++iq) {
      std::vector<double> q = gi.node(iq), p(go.dim()), z;
      cplx acc = 0.0;
      for (std::size_t ip = 0; ip < go.size(); ++ip) {
        go.node(ip, p);
        acc += std::conj(core(p, q, z)) * gs[ip];
      }
      out[iq] = acc;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= amp_in_[i];
  return out;
}

GridFunction apply(const OscKernelSpec& spec, const OperatorGrids& grids, const GridFunction& f) {
  return OscOperator(spec, grids).apply(f);
}

GridFunction apply_adjoint(const OscKernelSpec& spec, const OperatorGrids& grids, const GridFunction& g) {
  return OscOperator(spec, grids).apply_adjoint(g);
}

cplx inner_product(const GridSpec& grid, const GridFunction& f, const GridFunction& g) {
  if (f.size() != grid.size() || g.size() != grid.size()) throw DimensionError("grid function size mismatch");
  cplx acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * std::conj(g[i]);
  return acc * grid.cell_volume();
}

double l2_norm(const GridSpec& grid, const GridFunction& f) { return std::sqrt(inner_product(grid, f, f).real()); }

// ---------------------------------------------------------------- norms

NormEstimate power_norm(const std::function<GridFunction(const GridFunction&)>& normal_op, const GridSpec& domain,
                        const PowerOptions& opts) {
  if (opts.max_iterations < 1) throw DomainError("power iteration needs at least one iteration");
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  GridFunction v(domain.size());
  for (auto& c : v) {
    const double re = gauss(rng);
    c = cplx(re, gauss(rng));
  }
  const double n0 = l2_norm(domain, v);
  for (auto& c : v) c /= n0;

  NormEstimate est;
  double prev = -1.0;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    GridFunction w = normal_op(v);
    const double sigma2 = inner_product(domain, w, v).real();
    const double nw = l2_norm(domain, w);
    est.iterations = it;
    est.norm = std::sqrt(std::max(sigma2, 0.0));
    if (nw == 0.0) {
      est.norm = 0.0;
      est.converged = true;
      return est;
    }
    if (prev >= 0.0 && std::abs(sigma2 - prev) <= opts.rel_tol * std::abs(sigma2)) {
      est.converged = true;
      return est;
    }
    prev = sigma2;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / nw;
  }
  return est;
}

NormEstimate operator_norm(const OscOperator& op, const PowerOptions& opts) {
  return power_norm([&](const GridFunction& v) { return op.apply_adjoint(op.apply(v)); }, op.grids().in, opts);
}

NormEstimate operator_norm(const OscKernelSpec& spec, const OperatorGrids& grids, const PowerOptions& opts) {
  return operator_norm(OscOperator(spec, grids), opts);
}

bool grid_converged(double norm, double refined_norm, double tol) {
  if (std::isnan(norm) || std::isnan(refined_norm)) return false;
  const double scale = std::max(std::abs(norm), std::abs(refined_norm));
  if (scale == 0.0) return true;
  return std::abs(norm - refined_norm) < tol * scale;
}

DecaySeries decay_fit(std::vector<DecayPoint> points) {
  if (points.size() < 3) throw DomainError("decay fit needs at least three scales");
  DecaySeries s;
  s.points = std::move(points);
  std::vector<double> lx, ly, ax, ay;
  bool all = true;
  for (const auto& p : s.points) {
    if (!(p.scale > 0.0) || !(p.norm > 0.0)) throw DomainError("decay fit needs positive scales and norms");
    ax.push_back(std::log(p.scale));
    ay.push_back(std::log(p.norm));
    if (p.grid_converged) {
      lx.push_back(ax.back());
      ly.push_back(ay.back());
    } else {
      all = false;
    }
  }
  const bool enough = lx.size() >= 3;
  const LineFit f = enough ? fit_line(lx, ly) : fit_line(ax, ay);
  s.slope = f.slope;
  s.intercept = f.intercept;
  s.residual = f.residual;
  s.grid_converged = all;
  return s;
}

GenericSetup group_phase_setup(const GroupContext& ctx, const PhaseSpec& phase, std::vector<double> p0,
                               std::vector<double> half) {
  return [ctx, phase, p0, half](double lambda, int n_points) {
    OperatorGrids grids = generic_grids(ctx, p0, half, n_points);
    OscKernelSpec spec{ctx, group_generic_kernel(lambda, phase, grids)};
    return std::make_pair(std::move(spec), std::move(grids));
  };
}

GenericSetup euclidean_product_setup() {
  return [](double lambda, int n_points) {
    OperatorGrids grids{GridSpec::cube({0.0}, {1.0}, n_points), GridSpec::cube({0.0}, {1.0}, n_points)};
    GenericKernel k;
    k.lambda = lambda;
    k.phase = [](std::span<const Jet2> p, std::span<const Jet2> q) { return p[0] * q[0]; };
    k.amp_out = box_window(grids.out, 0.3);
    k.amp_in = box_window(grids.in, 0.3);
    return std::make_pair(OscKernelSpec{GroupContext{}, std::move(k)}, std::move(grids));
  };
}

namespace {

int refined_points(int n) { return static_cast<int>(std::lround(1.5 * n)); }

}  // namespace

DecaySeries generic_decay(const GenericSetup& setup, std::span<const double> lambdas, int n_points,
                          const PowerOptions& opts) {
  std::vector<DecayPoint> pts;
  for (double lam : lambdas) {
    DecayPoint dp;
    dp.scale = lam;
    auto [spec, grids] = setup(lam, n_points);
    dp.norm = operator_norm(spec, grids, opts).norm;
    auto [spec2, grids2] = setup(lam, refined_points(n_points));
    try {
      dp.refined_norm = operator_norm(spec2, grids2, opts).norm;
    } catch (const CapacityError&) {
      dp.refined_norm = std::numeric_limits<double>::quiet_NaN();
    }
    dp.grid_converged = grid_converged(dp.norm, dp.refined_norm);
    pts.push_back(dp);
  }
  return decay_fit(std::move(pts));
}

// ---------------------------------------------------------------- dyadic

int max_feasible_j(const GroupContext& ctx, double alpha, double beta, const QuasiNormSpec& norm, int n_points,
                   double in_half) {
  OscKernelSpec spec{ctx, DyadicKernel{0, alpha, beta, norm}};
  const double unit = unit_phase_increment(spec, dyadic_grids(ctx, norm, n_points, in_half));
  if (unit == 0.0) return std::numeric_limits<int>::max();
  const double j = std::floor(std::log2(OscOperator::kMaxIncrement / unit) / beta);
  return j < 0.0 ? -1 : static_cast<int>(j);
}

NormEstimate dyadic_norm(const GroupContext& ctx, const DyadicKernel& k, int n_points, const PowerOptions& opts,
                         double in_half) {
  if (!(k.beta > 0.0)) throw DomainError("beta must be positive");
  return operator_norm(OscKernelSpec{ctx, k}, dyadic_grids(ctx, k.norm, n_points, in_half), opts);
}

DyadicSeries dyadic_series(const GroupContext& ctx, double alpha, double beta, const QuasiNormSpec& norm,
                           std::span<const int> js, int n_points, const PowerOptions& opts, double in_half) {
  if (js.empty()) throw DomainError("dyadic series needs at least one j");
  DyadicSeries s;
  s.alpha = alpha;
  s.beta = beta;
  s.grid_converged = true;
  for (int j : js) {
    DyadicPoint p;
    p.j = j;
    const DyadicKernel k{j, alpha, beta, norm};
    const NormEstimate e = dyadic_norm(ctx, k, n_points, opts, in_half);
    p.norm = e.norm;
    p.iterations = e.iterations;
    try {
      p.refined_norm = dyadic_norm(ctx, k, refined_points(n_points), opts, in_half).norm;
    } catch (const CapacityError&) {
      p.refined_norm = std::numeric_limits<double>::quiet_NaN();
    }
    p.grid_converged = grid_converged(p.norm, p.refined_norm);
    s.grid_converged = s.grid_converged && p.grid_converged;
    s.points.push_back(p);
  }
  std::vector<double> v;
  for (const auto& p : s.points) v.push_back(p.norm);
  for (std::size_t i = 1; i < v.size(); ++i) s.log2_increments.push_back(std::log2(v[i] / v[i - 1]));
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  s.median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  for (double x : v) s.max_ratio_to_median = std::max(s.max_ratio_to_median, std::max(x / s.median, s.median / x));
  return s;
}

// ---------------------------------------------------------------- diagnostics

EnvelopeReport kernel_envelope(const GroupContext& ctx, const GenericKernel& k, std::span<const double> lambdas,
                               std::span<const double> x, std::span<const double> z, const GridSpec& grid) {
  grid.validate();
  if (lambdas.empty()) throw DomainError("envelope needs at least one lambda");
  if (x.size() != z.size()) throw DimensionError("x and z must have the same length");
  if (!k.group_phase && !k.phase) throw DomainError("generic kernel needs a phase");
  const OscKernelSpec spec{ctx, k};
  const std::size_t dq = grid.dim();
  std::vector<double> q(dq);
  std::vector<Jet2> xj(x.size()), zj(z.size()), qj(dq), buf(std::max(x.size(), dq));

  EnvelopeReport r;
  r.lambdas.assign(lambdas.begin(), lambdas.end());
  if (x.size() == static_cast<std::size_t>(ctx.dim())) {
    std::vector<double> d(x.size());
    displacement<double>(ctx, x, z, d);
    r.displacement = norm_raw<double>(QuasiNormSpec(NormKind::Rho1), std::span<const double>(d));
  } else {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - z[i]) * (x[i] - z[i]);
    r.displacement = std::sqrt(s);
  }

  // phase difference and its q-gradient at every node
  std::vector<double> dphi(grid.size()), amp(grid.size());
  double unit = 0.0;
  for (std::size_t iq = 0; iq < grid.size(); ++iq) {
    grid.node(iq, q);
    for (std::size_t i = 0; i < x.size(); ++i) {
      xj[i] = Jet2(x[i]);
      zj[i] = Jet2(z[i]);
    }
    for (std::size_t i = 0; i < dq; ++i) qj[i] = Jet2(q[i]);
    dphi[iq] = phase_jet(spec, xj, qj, buf).v - phase_jet(spec, zj, qj, buf).v;
    for (std::size_t kx = 0; kx < dq; ++kx) {
      qj[kx].d1 = 1.0;
      const double g = phase_jet(spec, xj, qj, buf).d1 - phase_jet(spec, zj, qj, buf).d1;
      qj[kx].d1 = 0.0;
      unit = std::max(unit, std::abs(g) * grid.spacing(kx));
    }
    const double ao = k.amp_out ? k.amp_out(x) * k.amp_out(z) : 1.0;
    const double ai = k.amp_in ? k.amp_in(q) : 1.0;
    const double pa = k.amplitude ? k.amplitude(x, q) * k.amplitude(z, q) : 1.0;
    amp[iq] = ao * ai * ai * pa;
  }
  const double w = grid.cell_volume();
  for (double lam : lambdas) {
    if (unit * std::abs(lam) > OscOperator::kMaxIncrement) {
      const double feasible = OscOperator::kMaxIncrement / unit;
      throw NyquistError("envelope grid does not resolve lambda = " + std::to_string(lam) +
                             "; largest feasible lambda is " + std::to_string(feasible),
                         unit * std::abs(lam), feasible);
    }
    cplx acc = 0.0;
    for (std::size_t iq = 0; iq < grid.size(); ++iq) acc += std::polar(amp[iq], lam * dphi[iq]);
    r.values.push_back(std::abs(acc) * w);
  }

  r.non_increasing = true;
  for (std::size_t i = 2; i < r.values.size(); ++i) {
    if (r.values[i] > r.values[i - 1] * (1.0 + 1e-9)) r.non_increasing = false;
  }
  const bool positive = std::all_of(r.values.begin(), r.values.end(), [](double v) { return v > 0.0; });
  if (r.values.size() >= 2 && positive && r.displacement > 0.0) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      lx.push_back(std::log1p(r.lambdas[i] * r.displacement));
      ly.push_back(std::log(r.values[i]));
    }
    const LineFit f = fit_line(lx, ly);
    r.slope = f.slope;
    r.residual = f.residual;
  } else if (!positive) {
    r.slope = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

OrthogonalityReport cross_check_almost_orthogonality(const GroupContext& ctx, double alpha, double beta,
                                                     const QuasiNormSpec& norm, int j, std::span<const int> gaps,
                                                     int n_points, const PowerOptions& opts, double in_half) {
  if (gaps.empty()) throw DomainError("orthogonality check needs at least one gap");
  const OperatorGrids grids = dyadic_grids(ctx, norm, n_points, in_half);
  const OscOperator tj(OscKernelSpec{ctx, DyadicKernel{j, alpha, beta, norm}}, grids);
  OrthogonalityReport r;
  r.j = j;
  for (int g : gaps) {
    if (g < 0) throw DomainError("gaps must be nonnegative");
    const OscOperator tk(OscKernelSpec{ctx, DyadicKernel{j + g, alpha, beta, norm}}, grids);
    // A = T_j^* T_k, A^*A = T_k^* T_j T_j^* T_k
    auto normal = [&](const GridFunction& v) {
      return tk.apply_adjoint(tj.apply(tj.apply_adjoint(tk.apply(v))));
    };
    r.gaps.push_back(g);
    r.norms.push_back(power_norm(normal, grids.in, opts).norm);
  }
  r.non_increasing = true;
  for (std::size_t i = 1; i < r.norms.size(); ++i) {
    const double dec = std::log2(r.norms[i - 1] / r.norms[i]);
    r.log2_decrements.push_back(dec);
    if (r.norms[i] > r.norms[i - 1] * (1.0 + 1e-9)) r.non_increasing = false;
  }
  if (r.norms.size() >= 2) {
    std::vector<double> gx, ly;
    for (std::size_t i = 0; i < r.norms.size(); ++i) {
      gx.push_back(r.gaps[i]);
      ly.push_back(std::log2(r.norms[i]));
    }
    r.rate = -fit_line(gx, ly).slope;
  }
  return r;
}

}  // namespace heisosc
