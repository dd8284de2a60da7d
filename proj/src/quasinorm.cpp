#include "heisosc/quasinorm.hpp"

#include <algorithm>

namespace heisosc {

std::string to_string(NormKind k) {
  switch (k) {
    case NormKind::Rho0: return "rho0";
    case NormKind::Rho1: return "koranyi";
    case NormKind::Rho2: return "minkowski";
    case NormKind::Rho3: return "rho3";
  }
  return "?";
}

NormKind norm_kind_from_string(const std::string& name) {
  if (name == "rho0" || name == "max") return NormKind::Rho0;
  if (name == "rho1" || name == "koranyi") return NormKind::Rho1;
  if (name == "rho2" || name == "minkowski") return NormKind::Rho2;
  if (name == "rho3") return NormKind::Rho3;
  throw DomainError("unknown norm '" + name + "'");
}

bool is_smooth(NormKind k) noexcept { return k != NormKind::Rho0; }

QuasiNormSpec::QuasiNormSpec(NormKind k, double scale) : kind(k), b(scale) {
  if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("norm scale b must be positive");
}

PhaseSpec::PhaseSpec(QuasiNormSpec nrm, double beta_) : norm(nrm), beta(beta_) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive");
}

double evaluate_raw(const QuasiNormSpec& spec, std::span<const double> c) {
  const double b = spec.b;
  const double t = b * c.back();
  switch (spec.kind) {
    case NormKind::Rho0: {
      double m = std::sqrt(std::abs(t));
      for (std::size_t i = 0; i + 1 < c.size(); ++i) m = std::max(m, std::abs(b * c[i]));
      return m;
    }
    case NormKind::Rho1: {
      const double x2 = b * b * detail::sq_norm_x(c);
      return std::pow(x2 * x2 + t * t, 0.25);
    }
    case NormKind::Rho2: {
      const double x2 = b * b * detail::sq_norm_x(c);
      return std::sqrt(0.5 * (x2 + std::sqrt(x2 * x2 + 4.0 * t * t)));
    }
    case NormKind::Rho3: {
      double s = t * t;
      for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        const double y = b * c[i];
        s += (y * y) * (y * y);
      }
      return std::pow(s, 0.25);
    }
  }
  return 0.0;
}

double evaluate(const QuasiNormSpec& spec, const GroupPoint& p) { return evaluate_raw(spec, p.coords()); }

double phi2(const GroupPoint& p) {
  if (p.is_identity()) throw DomainError("phi2 has no positive root at the origin");
  return detail::phi2_raw<double>(p.coords());
}

double phi_scalar(NormKind kind, const GroupPoint& p) { return phi_scalar_raw<double>(kind, p.coords()); }

double phase(const PhaseSpec& spec, const GroupPoint& p) {
  if (p.is_identity()) throw DomainError("phase has a pole at the origin");
  if (spec.norm.kind == NormKind::Rho0) return std::pow(evaluate(spec.norm, p), -spec.beta);
  return phase_raw<double>(spec, p.coords());
}

}  // namespace heisosc
