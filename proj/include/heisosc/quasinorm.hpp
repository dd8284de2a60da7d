#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "heisosc/group.hpp"
#include "heisosc/jet.hpp"

namespace heisosc {

/// Rho0 = max norm, Rho1 = Koranyi, Rho2 = Minkowski functional of the
/// Euclidean ball, Rho3 = fourth-power coordinate norm.
enum class NormKind { Rho0, Rho1, Rho2, Rho3 };

std::string to_string(NormKind k);
/// Accepts rho0..rho3 as well as max, koranyi, minkowski.
NormKind norm_kind_from_string(const std::string& name);
bool is_smooth(NormKind k) noexcept;

struct QuasiNormSpec {
  NormKind kind = NormKind::Rho1;
  double b = 1.0;

  QuasiNormSpec() = default;
  QuasiNormSpec(NormKind k, double scale = 1.0);
};

struct PhaseSpec {
  QuasiNormSpec norm;
  double beta = 1.0;

  PhaseSpec() = default;
  PhaseSpec(QuasiNormSpec nrm, double beta_);
};

namespace detail {

template <class T>
T sq_norm_x(std::span<const T> c) {
  T s = T(0.0);
  for (std::size_t i = 0; i + 1 < c.size(); ++i) s = s + c[i] * c[i];
  return s;
}

/// Positive root of phi^2 - |x|^2 phi - t^2 = 0; both terms are nonnegative.
template <class T>
T phi2_raw(std::span<const T> c) {
  using std::sqrt;
  const T x2 = sq_norm_x(c);
  const T& t = c.back();
  return 0.5 * (x2 + sqrt(x2 * x2 + 4.0 * t * t));
}

}  // namespace detail

/// phi1 = |x|^4 + t^2, phi2 = rho2^2, phi3 = sum x_i^4 + t^2, at b = 1.
template <class T>
T phi_scalar_raw(NormKind kind, std::span<const T> c) {
  using std::sqrt;
  const T& t = c.back();
  switch (kind) {
    case NormKind::Rho1: {
      const T x2 = detail::sq_norm_x(c);
      return x2 * x2 + t * t;
    }
    case NormKind::Rho2:
      return detail::phi2_raw(c);
    case NormKind::Rho3: {
      T s = t * t;
      for (std::size_t i = 0; i + 1 < c.size(); ++i) s = s + (c[i] * c[i]) * (c[i] * c[i]);
      return s;
    }
    case NormKind::Rho0:
      break;
  }
  throw DomainError("phi scalar is defined for rho1, rho2 and rho3 only");
}

/// Phi = rho(bx, bt)^{-beta} for a smooth norm kind, written via phi so
/// that only one fractional power is taken.
template <class T>
T phase_raw(const PhaseSpec& spec, std::span<const T> c) {
  using std::pow;
  const double b = spec.norm.b;
  std::span<const T> arg = c;
  std::vector<T> scaled;
  if (b != 1.0) {
    scaled.assign(c.begin(), c.end());
    for (auto& v : scaled) v = b * v;
    arg = scaled;
  }
  const T phi = phi_scalar_raw<T>(spec.norm.kind, arg);
  const double e = spec.norm.kind == NormKind::Rho2 ? -spec.beta / 2.0 : -spec.beta / 4.0;
  return pow(phi, e);
}

/// rho(bx, bt) for a smooth norm kind, on jets or doubles.
template <class T>
T norm_raw(const QuasiNormSpec& spec, std::span<const T> c) {
  using std::pow;
  std::vector<T> scaled(c.begin(), c.end());
  for (auto& v : scaled) v = spec.b * v;
  const T phi = phi_scalar_raw<T>(spec.kind, std::span<const T>(scaled));
  return pow(phi, spec.kind == NormKind::Rho2 ? 0.5 : 0.25);
}

double evaluate(const QuasiNormSpec& spec, const GroupPoint& p);
double evaluate_raw(const QuasiNormSpec& spec, std::span<const double> c);
double phi2(const GroupPoint& p);
double phi_scalar(NormKind kind, const GroupPoint& p);
double phase(const PhaseSpec& spec, const GroupPoint& p);

}  // namespace heisosc
