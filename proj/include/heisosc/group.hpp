#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "heisosc/errors.hpp"

namespace heisosc {

enum class Variant { Full, Polarized };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

/// Lie structure of the group: R^{2n+1} with product
///   (x,t).(y,s) = (x+y, s+t - 2a x^T J y)
/// where J is the standard symplectic matrix (Full) or [[0,I],[0,0]]
/// (Polarized). a = 0 gives nonisotropic Euclidean space.
struct GroupContext {
  int n = 1;
  double a = 1.0;
  Variant variant = Variant::Full;

  GroupContext() = default;
  GroupContext(int n_, double a_, Variant v = Variant::Full);

  int dim() const noexcept { return 2 * n + 1; }
  bool euclidean() const noexcept { return a == 0.0; }
};

/// Element of the group manifold, stored flat as (x_1..x_2n, t).
class GroupPoint {
 public:
  GroupPoint() = default;
  GroupPoint(std::vector<double> x, double t);

  static GroupPoint identity(int n);
  static GroupPoint from_coords(std::vector<double> coords);

  int n() const noexcept { return static_cast<int>(coords_.size() / 2); }
  int dim() const noexcept { return static_cast<int>(coords_.size()); }
  std::span<const double> x() const noexcept {
    return std::span<const double>(coords_).first(coords_.size() - 1);
  }
  double x(int i) const { return coords_.at(static_cast<std::size_t>(i)); }
  double t() const noexcept { return coords_.back(); }
  std::span<const double> coords() const noexcept { return coords_; }

  bool is_identity() const noexcept;

  friend bool operator==(const GroupPoint&, const GroupPoint&) = default;

 private:
  std::vector<double> coords_{0.0, 0.0, 0.0};
};

/// x^T J y (Full) or x^T J_pol y (Polarized) for x, y of length 2n.
/// Templated so the same expression serves doubles and jets.
template <class T>
T pairing_raw(Variant variant, int n, std::span<const T> x, std::span<const T> y) {
  T acc = T(0.0);
  if (variant == Variant::Full) {
    for (int j = 0; j < n; ++j) {
      acc = acc + x[j] * y[j + n] - x[j + n] * y[j];
    }
  } else {
    for (int j = 0; j < n; ++j) {
      acc = acc + x[j] * y[j + n];
    }
  }
  return acc;
}

/// Flat-coordinate product; all spans have length 2n+1. `out` may alias neither input.
template <class T>
void multiply_raw(const GroupContext& ctx, std::span<const T> p, std::span<const T> q, std::span<T> out) {
  const int m = 2 * ctx.n;
  for (int i = 0; i < m; ++i) out[i] = p[i] + q[i];
  out[m] = p[m] + q[m] - 2.0 * ctx.a * pairing_raw<T>(ctx.variant, ctx.n, p.first(m), q.first(m));
}

/// (x,t)^{-1} = (-x, -t - 2a <x,x>); the correction vanishes for the
/// antisymmetric Full pairing but not for the polarized one.
template <class T>
void inverse_raw(const GroupContext& ctx, std::span<const T> p, std::span<T> out) {
  const int m = 2 * ctx.n;
  for (int i = 0; i < m; ++i) out[i] = -p[i];
  out[m] = -p[m] - 2.0 * ctx.a * pairing_raw<T>(ctx.variant, ctx.n, p.first(m), p.first(m));
}

/// Flat-coordinate q^{-1}.p, the kernel displacement variable.
template <class T>
void relative_raw(const GroupContext& ctx, std::span<const T> q, std::span<const T> p, std::span<T> out) {
  std::vector<T> qinv(q.size());
  inverse_raw<T>(ctx, q, std::span<T>(qinv));
  multiply_raw<T>(ctx, std::span<const T>(qinv), p, out);
}

double symplectic_pairing(const GroupContext& ctx, std::span<const double> x, std::span<const double> y);

GroupPoint multiply(const GroupContext& ctx, const GroupPoint& p, const GroupPoint& q);
GroupPoint inverse(const GroupContext& ctx, const GroupPoint& p);
GroupPoint dilate(const GroupPoint& p, double delta);
/// q^{-1} . p
GroupPoint relative(const GroupContext& ctx, const GroupPoint& q, const GroupPoint& p);

/// Throws DimensionError unless p lives in the context's R^{2n+1}.
void check_point(const GroupContext& ctx, const GroupPoint& p);

}  // namespace heisosc
