#pragma once

#include <string>
#include <vector>

#include "heisosc/group.hpp"
#include "heisosc/linalg.hpp"
#include "heisosc/quasinorm.hpp"
#include "heisosc/sampling.hpp"

namespace heisosc {

/// (beta+2)/2 (2beta+5 + sqrt((2beta+5)^2 - 9)); the Koranyi threshold on a^2.
double c_beta(double beta);

/// 4a^4 - 4(beta+2)(2beta+5)a^2 + 9(beta+2)^2.
double discriminant(double a, double beta);

/// Positive roots s of f1 = 0 written as |x|^4 = s t^2, ascending.
/// A double root (a^2 = C_beta) is reported once.
std::vector<double> paraboloid_slopes(double a, double beta);

/// The single slope at a^2 = C_beta.
double critical_slope(double beta);

enum class Verdict { Certified, DegeneracyFound, Inconclusive };
std::string to_string(Verdict v);

struct NearZero {
  GroupPoint point;
  double normalized_det = 0.0;
};

struct CertOptions {
  double tol = 1e-7;
  /// Refined minima in [tol, near_miss_factor*tol) are Inconclusive.
  double near_miss_factor = 10.0;
  int refine_steps = 50;
  int refine_starts = 8;
  /// Frobenius by default: row scaling hides zeros where whole rows vanish
  /// (the Euclidean Koranyi Hessian on the t axis).
  DetNormalization normalization = DetNormalization::Frobenius;
};

struct CertReport {
  int n = 1;
  double a = 0.0;
  double b = 1.0;
  double beta = 1.0;
  NormKind norm = NormKind::Rho1;
  Variant variant = Variant::Full;
  int sample_count = 0;
  double min_abs_normalized_det = 0.0;
  GroupPoint argmin;
  bool sign_change = false;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<NearZero> near_zero;  ///< in the original (a, b) coordinates
};

/// Minimizes |normalized det| by coordinate descent on the level set of
/// the b = 1 norm through the start point; step halves on stagnation.
NearZero refine_minimum(const GroupContext& ctx, const PhaseSpec& phase, const GroupPoint& start, int steps,
                        DetNormalization mode = DetNormalization::Frobenius);

/// Samples the normalized mixed-Hessian determinant, refines the smallest
/// values and bisects sign changes. The problem is first reduced from
/// (a, b) to (a/b, 1) through p -> b p.
CertReport certify(const GroupContext& ctx, const QuasiNormSpec& spec, double beta, const SamplerSpec& sampler,
                   const CertOptions& opts = {});

/// Dense hyperspherical-angle grid over the unit quasi-sphere, t axis as
/// polar axis, `resolution` intervals per polar angle (twice that for the
/// azimuth). Sign changes between neighbours are bisected and local minima
/// refined.
/// Returns clustered, refined points with |normalized det| < tol.
std::vector<NearZero> zero_scan(const GroupContext& ctx, const QuasiNormSpec& spec, double beta, int resolution,
                                double tol = 1e-7, DetNormalization mode = DetNormalization::Frobenius);

struct SeparationReport {
  double infimum = 0.0;
  GroupPoint arg_x;  ///< (x, t)
  GroupPoint arg_y;  ///< (y, s)
  int admissible_pairs = 0;
};

/// Sampled infimum of |grad_{(y,s)} [rho(y,s)^{-beta} - rho((x,t).(y,s))^{-beta}]|
/// over (y,s) in the sampler's annulus and (x,t) with rho((x,t).(y,s)) >= ratio rho(y,s).
SeparationReport gradient_separation(const GroupContext& ctx, const QuasiNormSpec& spec, double beta, double ratio,
                                     const SamplerSpec& sampler);

struct DichotomyReport {
  double c0 = 0.0;
  GroupPoint worst;
  double worst_delta = 1.0;
  int horizontal_branch = 0;  ///< samples where the d/dx_j branch was the cheaper one
  int vertical_branch = 0;
};

/// Smallest c0 such that every sampled (x,t) with c^{-1} <= rho(delta x, delta^2 t) <= c,
/// delta in (0, 1], satisfies c0^{-1} <= |d rho/dx_j| <= c0 for some j or
/// c0^{-1} delta <= |d rho/dt| <= c0 delta.
DichotomyReport annulus_dichotomy(const QuasiNormSpec& spec, int n, const SamplerSpec& sampler, double c);

struct RegionCheck {
  bool inside = false;
  std::string description;
};

/// Whether (a, b, beta) lies in the parameter region of the boundedness theorems:
/// Koranyi 0 < a^2/b^2 < C_beta, Minkowski a^2/b^2 <= 1. Other norms have no region.
RegionCheck theorem_region(NormKind kind, double a, double b, double beta);

}  // namespace heisosc
