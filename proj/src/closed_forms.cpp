#include "heisosc/closed_forms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "heisosc/errors.hpp"
#include "heisosc/fields.hpp"
#include "heisosc/sampling.hpp"

namespace heisosc {

namespace {

struct Parts {
  double x2;  // |x|^2
  double t;
};

Parts parts(const GroupPoint& p) {
  if (p.is_identity()) throw DomainError("closed forms are undefined at the origin");
  double x2 = 0.0;
  for (double v : p.x()) x2 += v * v;
  return {x2, p.t()};
}

void require_n1(const GroupPoint& p) {
  if (p.n() != 1) throw DimensionError("this closed form is stated for n = 1 only");
}

}  // namespace

const std::vector<CaseInfo>& all_cases() {
  static const std::vector<CaseInfo> cases = {
      {ClosedFormCase::KoranyiFull, "koranyi-full", NormKind::Rho1, Variant::Full, false, false, false},
      {ClosedFormCase::MinkowskiFull, "minkowski-full", NormKind::Rho2, Variant::Full, false, false, true},
      {ClosedFormCase::Rho3N1, "rho3-n1", NormKind::Rho3, Variant::Full, true, false, true},
      {ClosedFormCase::PolarizedKoranyiN1, "polarized-koranyi", NormKind::Rho1, Variant::Polarized, true, false, true},
      {ClosedFormCase::PolarizedMinkowskiN1, "polarized-minkowski", NormKind::Rho2, Variant::Polarized, true, false,
       true},
      {ClosedFormCase::EuclideanKoranyi, "euclidean-koranyi", NormKind::Rho1, Variant::Full, false, true, false},
      {ClosedFormCase::EuclideanMinkowski, "euclidean-minkowski", NormKind::Rho2, Variant::Full, false, true, false},
  };
  return cases;
}

const CaseInfo& case_info(ClosedFormCase c) {
  for (const auto& info : all_cases()) {
    if (info.id == c) return info;
  }
  throw DomainError("unknown closed-form case");
}

ClosedFormCase case_from_string(const std::string& name) {
  for (const auto& info : all_cases()) {
    if (name == info.name) return info.id;
  }
  throw DomainError("unknown closed-form case '" + name + "'");
}

std::string to_string(ClosedFormCase c) { return case_info(c).name; }

void check_case_context(ClosedFormCase c, const GroupContext& ctx) {
  const auto& info = case_info(c);
  if (ctx.variant != info.variant) {
    throw DomainError(std::string(info.name) + " needs the " + to_string(info.variant) + " group");
  }
  if (info.n1_only && ctx.n != 1) throw DomainError(std::string(info.name) + " is stated for n = 1 only");
  if (info.euclidean && ctx.a != 0.0) throw DomainError(std::string(info.name) + " needs a = 0");
}

double lift_quartic(double bracket, double phi, double beta, int d) {
  return std::pow(-beta / 4.0, d) * std::pow(phi, -(beta + 8.0) * d / 4.0) * bracket;
}

double lift_quadratic(double bracket, double phi, double beta, int d) {
  return std::pow(-beta / 2.0, d) * std::pow(phi, -(beta + 4.0) * d / 2.0) * bracket;
}

double f1(double x_norm2, double t, double a, double beta) {
  const double x4 = x_norm2 * x_norm2;
  const double t2 = t * t;
  return 2.0 * (beta + 1.0) * x4 * x4 + (3.0 * (beta + 2.0) - 2.0 * a * a) * x4 * t2 + (beta + 2.0) * a * a * t2 * t2;
}

double script_A(const GroupPoint& p) {
  const auto [x2, t] = parts(p);
  const double ph = phi2(p);
  return x2 / (ph * ph) + 2.0 * t * t / (ph * ph * ph);
}

double f2(const GroupPoint& p, double a, double /*beta*/) {
  const auto [x2, t] = parts(p);
  const double ph = phi2(p);
  const double A = script_A(p);
  const double t2 = t * t;
  const double a2 = a * a;
  return A * std::pow(ph, 4) * x2 + 4.0 * ph * ph * t2 * (1.0 - a2) + 16.0 * a2 * t2 * t2 +
         4.0 * a2 * t2 * t2 * t2 / (ph * ph);
}

double g2(const GroupPoint& p, double a) {
  const auto [x2, t] = parts(p);
  const double ph = phi2(p);
  const double A = script_A(p);
  return A * ph * ((ph * ph + 4.0 * a * a * t * t) * t * t + ph * ph * ph * x2);
}

double closed_det_koranyi(int n, double a, double beta, const GroupPoint& p) {
  if (p.n() != n) throw DimensionError("point dimension does not match n");
  const auto [x2, t] = parts(p);
  const double phi = x2 * x2 + t * t;
  const double bracket =
      -std::pow(4.0 * phi, 2 * n) * std::pow(x2 * x2 + a * a * t * t, n - 1) * f1(x2, t, a, beta);
  return lift_quartic(bracket, phi, beta, 2 * n + 1);
}

double closed_det_minkowski(int n, double a, double beta, const GroupPoint& p, FormulaRevision rev) {
  if (p.n() != n) throw DimensionError("point dimension does not match n");
  const double t = parts(p).t;
  const double ph = phi2(p);
  const double A = script_A(p);
  double inner = f2(p, a, beta);
  if (rev == FormulaRevision::Corrected) inner += beta * g2(p, a);
  const double rhs = -std::pow(2.0, 2 * n + 1) * std::pow(A, 2 * n - 1) * std::pow(ph, -(2 * n + 5)) *
                     std::pow(ph * ph + 4.0 * a * a * t * t, n - 1) * inner;
  return lift_quadratic(rhs / std::pow(A, 4 * n + 2), ph, beta, 2 * n + 1);
}

double closed_det_rho3_n1(double a, double beta, const GroupPoint& p, FormulaRevision rev) {
  require_n1(p);
  const double t = parts(p).t;
  const double x1 = p.x(0), y1 = p.x(1);
  const double phi = phi_scalar(NormKind::Rho3, p);
  const double q = x1 * x1 * y1 * y1;
  const double s4 = std::pow(x1, 4) + std::pow(y1, 4);
  const double t2 = t * t;
  double inner = 0.0;
  if (rev == FormulaRevision::Corrected) {
    inner = a * a * ((beta + 2.0) * t2 * t2 - 2.0 * s4 * t2) + 6.0 * (beta + 1.0) * q * s4 +
            9.0 * (beta + 2.0) * q * t2;
  } else {
    // printed bracket, the a = 1 specialization of the one above
    inner = 6.0 * (beta + 1.0) * phi * q + (beta + 2.0) * t2 * t2 + 3.0 * (beta + 4.0) * q * t2 - 2.0 * s4 * t2;
  }
  return lift_quartic(-16.0 * phi * phi * inner, phi, beta, 3);
}

double closed_det_polarized(NormFamily family, double a, double beta, const GroupPoint& p, FormulaRevision rev) {
  require_n1(p);
  const auto [x2, t] = parts(p);
  const double m = p.x(0) * p.x(1) * t;  // x1 x2 t
  if (family == NormFamily::Koranyi) {
    const double phi = x2 * x2 + t * t;
    const double common = 2.0 * (beta + 1.0) * x2 * x2 * x2 * x2 + 3.0 * (beta + 2.0) * x2 * x2 * t * t;
    const double bracket = rev == FormulaRevision::Corrected
                               ? -16.0 * phi * phi * (common + 2.0 * (beta + 2.0) * a * phi * m)
                               : -16.0 * (common - 2.0 * (beta + 2.0) * a * phi * m);
    return lift_quartic(bracket, phi, beta, 3);
  }
  const double ph = phi2(p);
  const double A = script_A(p);
  const double x4 = x2 * x2;
  double rhs = 0.0;
  if (rev == FormulaRevision::Corrected) {
    rhs = -8.0 * A * std::pow(ph, -5) *
          (beta * A * ph * (ph * ph + 2.0 * a * m) + 2.0 * A * ph * ph * ph + 4.0 * A * ph * a * m - x4);
  } else {
    rhs = -8.0 * A * std::pow(ph, -7) *
          (beta * A * ph * (ph * ph - a * m) + (2.0 * A * ph * ph * ph - 2.0 * A * ph * a * m - x4));
  }
  return lift_quadratic(rhs / std::pow(A, 6), ph, beta, 3);
}

double closed_det_euclidean(NormFamily family, int n, double beta, const GroupPoint& p) {
  if (p.n() != n) throw DimensionError("point dimension does not match n");
  const auto [x2, t] = parts(p);
  const int d = 2 * n + 1;
  if (family == NormFamily::Koranyi) {
    const double phi = x2 * x2 + t * t;
    const double bracket = -std::pow(4.0 * phi, 2 * n) * std::pow(x2, 2 * n) *
                           (2.0 * (beta + 1.0) * x2 * x2 + 3.0 * (beta + 2.0) * t * t);
    return lift_quartic(bracket, phi, beta, d);
  }
  const double ph = phi2(p);
  const double A = script_A(p);
  const double rhs = -std::pow(2.0, 2 * n + 1) * std::pow(A, 2 * n - 1) * std::pow(ph, -5) *
                     (beta * A * ph * ph * ph + A * ph * ph * x2 + 4.0 * t * t);
  return lift_quadratic(rhs / std::pow(A, 4 * n + 2), ph, beta, d);
}

double closed_det(ClosedFormCase c, const GroupContext& ctx, double beta, const GroupPoint& p, FormulaRevision rev) {
  check_case_context(c, ctx);
  check_point(ctx, p);
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  switch (c) {
    case ClosedFormCase::KoranyiFull: return closed_det_koranyi(ctx.n, ctx.a, beta, p);
    case ClosedFormCase::MinkowskiFull: return closed_det_minkowski(ctx.n, ctx.a, beta, p, rev);
    case ClosedFormCase::Rho3N1: return closed_det_rho3_n1(ctx.a, beta, p, rev);
    case ClosedFormCase::PolarizedKoranyiN1: return closed_det_polarized(NormFamily::Koranyi, ctx.a, beta, p, rev);
    case ClosedFormCase::PolarizedMinkowskiN1:
      return closed_det_polarized(NormFamily::Minkowski, ctx.a, beta, p, rev);
    case ClosedFormCase::EuclideanKoranyi: return closed_det_euclidean(NormFamily::Koranyi, ctx.n, beta, p);
    case ClosedFormCase::EuclideanMinkowski: return closed_det_euclidean(NormFamily::Minkowski, ctx.n, beta, p);
  }
  throw DomainError("unknown closed-form case");
}

std::vector<HessianCheckRow> hessian_check(const std::vector<ClosedFormCase>& cases,
                                           const HessianCheckOptions& opts) {
  if (opts.samples < 1) throw DomainError("hessian_check needs at least one sample");
  std::vector<HessianCheckRow> rows;
  for (const auto c : cases) {
    const auto& info = case_info(c);
    const PhaseSpec base(QuasiNormSpec(info.kind), 1.0);
    for (const int n : opts.n_grid) {
      if (info.n1_only && n != 1) continue;
      SamplerSpec sampler;
      sampler.seed = opts.seed;
      sampler.count = opts.samples;
      sampler.region = Region::Annulus;
      const auto points = sample_points(sampler, n, QuasiNormSpec(NormKind::Rho1));
      for (const double a : opts.a_grid) {
        if (info.euclidean != (a == 0.0)) continue;
        const GroupContext ctx(n, a, info.variant);
        for (const double beta : opts.beta_grid) {
          const PhaseSpec phase(base.norm, beta);
          HessianCheckRow row{c, opts.revision, n, a, beta, static_cast<int>(points.size()), 0.0, points.front()};
          for (const auto& p : points) {
            const double ad = mixed_hessian_det(ctx, phase, p);
            const double cf = closed_det(c, ctx, beta + opts.beta_shift, p, opts.revision);
            const double err = std::abs(ad - cf) / std::max({std::abs(ad), std::abs(cf), 1e-300});
            if (!(err <= row.max_rel_error)) {
              row.max_rel_error = std::isnan(err) ? std::numeric_limits<double>::infinity() : err;
              row.worst = p;
            }
          }
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

}  // namespace heisosc
