#include "heisosc/group.hpp"

#include <algorithm>
#include <cmath>

namespace heisosc {

std::string to_string(Variant v) { return v == Variant::Full ? "full" : "polarized"; }

Variant variant_from_string(const std::string& name) {
  if (name == "full") return Variant::Full;
  if (name == "polarized" || name == "pol") return Variant::Polarized;
  throw DomainError("unknown group variant '" + name + "'");
}

GroupContext::GroupContext(int n_, double a_, Variant v) : n(n_), a(a_), variant(v) {
  if (n < 1) throw DomainError("group dimension n must be >= 1");
  if (!std::isfinite(a)) throw DomainError("twist parameter a must be finite");
}

GroupPoint::GroupPoint(std::vector<double> x, double t) : coords_(std::move(x)) {
  if (coords_.empty() || coords_.size() % 2 != 0) {
    throw DimensionError("x must have even, nonzero length 2n");
  }
  coords_.push_back(t);
}

GroupPoint GroupPoint::identity(int n) {
  if (n < 1) throw DomainError("group dimension n must be >= 1");
  return GroupPoint(std::vector<double>(static_cast<std::size_t>(2 * n), 0.0), 0.0);
}

GroupPoint GroupPoint::from_coords(std::vector<double> coords) {
  if (coords.size() < 3 || coords.size() % 2 != 1) {
    throw DimensionError("flat coordinates must have odd length 2n+1 >= 3");
  }
  const double t = coords.back();
  coords.pop_back();
  return GroupPoint(std::move(coords), t);
}

bool GroupPoint::is_identity() const noexcept {
  return std::all_of(coords_.begin(), coords_.end(), [](double v) { return v == 0.0; });
}

void check_point(const GroupContext& ctx, const GroupPoint& p) {
  if (p.dim() != ctx.dim()) {
    throw DimensionError("point has " + std::to_string(p.dim()) + " coordinates, context expects " +
                         std::to_string(ctx.dim()));
  }
}

double symplectic_pairing(const GroupContext& ctx, std::span<const double> x, std::span<const double> y) {
  const auto m = static_cast<std::size_t>(2 * ctx.n);
  if (x.size() != m || y.size() != m) {
    throw DimensionError("pairing expects vectors of length 2n = " + std::to_string(m));
  }
  return pairing_raw<double>(ctx.variant, ctx.n, x, y);
}

GroupPoint multiply(const GroupContext& ctx, const GroupPoint& p, const GroupPoint& q) {
  check_point(ctx, p);
  check_point(ctx, q);
  std::vector<double> out(static_cast<std::size_t>(ctx.dim()));
  multiply_raw<double>(ctx, p.coords(), q.coords(), out);
  return GroupPoint::from_coords(std::move(out));
}

GroupPoint inverse(const GroupContext& ctx, const GroupPoint& p) {
  check_point(ctx, p);
  std::vector<double> c(p.coords().size());
  inverse_raw<double>(ctx, p.coords(), c);
  return GroupPoint::from_coords(std::move(c));
}

GroupPoint dilate(const GroupPoint& p, double delta) {
  if (!(delta > 0.0)) throw DomainError("dilation factor must be positive");
  std::vector<double> c(p.coords().begin(), p.coords().end());
  for (std::size_t i = 0; i + 1 < c.size(); ++i) c[i] *= delta;
  c.back() *= delta * delta;
  return GroupPoint::from_coords(std::move(c));
}

GroupPoint relative(const GroupContext& ctx, const GroupPoint& q, const GroupPoint& p) {
  return multiply(ctx, inverse(ctx, q), p);
}

}  // namespace heisosc
