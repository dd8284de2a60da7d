#include "heisosc/fields.hpp"

namespace heisosc {

namespace {

void check_index(const GroupContext& ctx, int j) {
  if (j < 0 || j > 2 * ctx.n) {
    throw DimensionError("field index " + std::to_string(j) + " outside 0.." + std::to_string(2 * ctx.n));
  }
}

void check_phase_point(const GroupContext& ctx, const PhaseSpec& phase, const GroupPoint& p) {
  check_point(ctx, p);
  if (!is_smooth(phase.norm.kind)) throw DomainError("rho0 is not smooth; no Hessian available");
  if (p.is_identity()) throw DomainError("the phase has a pole at the origin");
}

}  // namespace

void check_field_context(const GroupContext& ctx) {
  if (ctx.variant == Variant::Polarized && ctx.n != 1) {
    throw DomainError("polarized invariant fields are implemented for n = 1 only");
  }
}

std::vector<double> field_coefficients(const GroupContext& ctx, Side side, int j, const GroupPoint& p) {
  check_field_context(ctx);
  check_point(ctx, p);
  check_index(ctx, j);
  std::vector<double> out(static_cast<std::size_t>(ctx.dim()));
  field_coefficients_raw<double>(ctx, side, j, p.coords(), out);
  return out;
}

std::vector<double> left_coefficients(const GroupContext& ctx, int j, const GroupPoint& p) {
  return field_coefficients(ctx, Side::Left, j, p);
}

std::vector<double> right_coefficients(const GroupContext& ctx, int k, const GroupPoint& p) {
  return field_coefficients(ctx, Side::Right, k, p);
}

double apply_field(const GroupContext& ctx, Side side, int j, const ScalarFn& f, const GroupPoint& p) {
  const auto c = field_coefficients(ctx, side, j, p);
  std::vector<Jet2> q(c.size());
  for (std::size_t m = 0; m < c.size(); ++m) q[m] = Jet2(p.coords()[m], c[m], 0.0, 0.0);
  return f(q).d1;
}

std::vector<double> field_gradient(const GroupContext& ctx, Side side, const ScalarFn& f, const GroupPoint& p) {
  std::vector<double> g(static_cast<std::size_t>(ctx.dim()));
  for (int j = 0; j < ctx.dim(); ++j) g[static_cast<std::size_t>(j)] = apply_field(ctx, side, j, f, p);
  return g;
}

Matrix mixed_hessian(const GroupContext& ctx, const ScalarFn& f, const GroupPoint& p) {
  check_field_context(ctx);
  check_point(ctx, p);
  const int d = ctx.dim();
  const auto pc = p.coords();
  Matrix h(d, d);
  std::vector<double> v(static_cast<std::size_t>(d));
  std::vector<Jet2> pv(static_cast<std::size_t>(d)), w(static_cast<std::size_t>(d)), q(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    field_coefficients_raw<double>(ctx, Side::Left, j, pc, v);
    // p moved along the left field; d1 of the right coefficients is then D_v w.
    for (int m = 0; m < d; ++m) pv[m] = Jet2(pc[m], v[m], 0.0, 0.0);
    for (int k = 0; k < d; ++k) {
      field_coefficients_raw<Jet2>(ctx, Side::Right, k, pv, w);
      for (int m = 0; m < d; ++m) q[m] = Jet2(pc[m], v[m], w[m].v, w[m].d1);
      h(j, k) = f(q).d12;
    }
  }
  return h;
}

ScalarFn phase_function(const PhaseSpec& spec) {
  if (!is_smooth(spec.norm.kind)) throw DomainError("rho0 is not smooth; no jet phase available");
  return [spec](std::span<const Jet2> c) { return phase_raw<Jet2>(spec, c); };
}

double mixed_hessian_det(const GroupContext& ctx, const PhaseSpec& phase, const GroupPoint& p) {
  check_phase_point(ctx, phase, p);
  return determinant(mixed_hessian(ctx, phase_function(phase), p));
}

double normalized_mixed_hessian_det(const GroupContext& ctx, const PhaseSpec& phase, const GroupPoint& p,
                                   DetNormalization mode) {
  check_phase_point(ctx, phase, p);
  return normalized_determinant(mixed_hessian(ctx, phase_function(phase), p), mode);
}

}  // namespace heisosc
