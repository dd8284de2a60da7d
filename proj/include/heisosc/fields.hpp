#pragma once

#include <functional>
#include <span>
#include <vector>

#include "heisosc/group.hpp"
#include "heisosc/jet.hpp"
#include "heisosc/linalg.hpp"
#include "heisosc/quasinorm.hpp"

namespace heisosc {

enum class Side { Left, Right };

/// Scalar function evaluated on flat jet coordinates (x_1..x_2n, t).
using ScalarFn = std::function<Jet2(std::span<const Jet2>)>;

/// Throws unless the context supports invariant fields (Polarized needs n = 1).
void check_field_context(const GroupContext& ctx);

/// Coefficients of the j-th left or right invariant field at p, 0-based:
/// j < 2n are the horizontal fields and j = 2n is T = d/dt.
///
/// Full:      X^l_j = d_j + 2a x_{j+n} d_t,  X^l_{j+n} = d_{j+n} - 2a x_j d_t
///            (right fields flip the sign of the t-coefficient).
/// Polarized: X^l_1 = d_1,  X^l_2 = d_2 - 2a x_1 d_t,
///            X^r_1 = d_1 - 2a x_2 d_t,  X^r_2 = d_2   (1-based names).
template <class T>
void field_coefficients_raw(const GroupContext& ctx, Side side, int j, std::span<const T> p, std::span<T> out) {
  const int n = ctx.n;
  for (auto& c : out) c = T(0.0);
  out[j] = T(1.0);
  if (j == 2 * n) return;
  const double s = side == Side::Left ? 1.0 : -1.0;
  if (ctx.variant == Variant::Full) {
    out[2 * n] = j < n ? (2.0 * s * ctx.a) * p[j + n] : (-2.0 * s * ctx.a) * p[j - n];
  } else if (side == Side::Left && j == 1) {
    out[2] = (-2.0 * ctx.a) * p[0];
  } else if (side == Side::Right && j == 0) {
    out[2] = (-2.0 * ctx.a) * p[1];
  }
}

std::vector<double> field_coefficients(const GroupContext& ctx, Side side, int j, const GroupPoint& p);
std::vector<double> left_coefficients(const GroupContext& ctx, int j, const GroupPoint& p);
std::vector<double> right_coefficients(const GroupContext& ctx, int k, const GroupPoint& p);

/// (X_j f)(p).
double apply_field(const GroupContext& ctx, Side side, int j, const ScalarFn& f, const GroupPoint& p);

/// All 2n+1 first derivatives (X_0 f, ..., X_2n f)(p).
std::vector<double> field_gradient(const GroupContext& ctx, Side side, const ScalarFn& f, const GroupPoint& p);

/// Entries X^l_j X^r_k f (p). The outer derivative also differentiates the
/// position-dependent coefficients of X^r_k, which is why the matrix is not
/// symmetric in general.
Matrix mixed_hessian(const GroupContext& ctx, const ScalarFn& f, const GroupPoint& p);

/// Phi = rho(bx, bt)^{-beta} as a jet function; needs a smooth norm kind.
ScalarFn phase_function(const PhaseSpec& spec);

double mixed_hessian_det(const GroupContext& ctx, const PhaseSpec& phase, const GroupPoint& p);
double normalized_mixed_hessian_det(const GroupContext& ctx, const PhaseSpec& phase, const GroupPoint& p,
                                   DetNormalization mode = DetNormalization::RowNorms);

}  // namespace heisosc
