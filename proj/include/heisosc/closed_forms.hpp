#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "heisosc/group.hpp"
#include "heisosc/quasinorm.hpp"

namespace heisosc {

enum class ClosedFormCase {
  KoranyiFull,
  MinkowskiFull,
  Rho3N1,
  PolarizedKoranyiN1,
  PolarizedMinkowskiN1,
  EuclideanKoranyi,
  EuclideanMinkowski,
};

/// Corrected is the version that matches the determinant of the invariant
/// fields; Printed is the commonly quoted variant of the formula, for the
/// cases where the two differ (MinkowskiFull, Rho3N1 away from a = 1 and
/// both polarized cases).
enum class FormulaRevision { Corrected, Printed };

enum class NormFamily { Koranyi, Minkowski };

struct CaseInfo {
  ClosedFormCase id;
  const char* name;
  NormKind kind;
  Variant variant;
  bool n1_only;
  bool euclidean;  ///< requires a = 0
  bool has_printed_variant;
};

const std::vector<CaseInfo>& all_cases();
const CaseInfo& case_info(ClosedFormCase c);
ClosedFormCase case_from_string(const std::string& name);
std::string to_string(ClosedFormCase c);

/// Chain-rule lift of det(phi A - c B) to det(X^l_j X^r_k Phi) in dimension d.
/// Quartic family (phi1, phi3, Phi = phi^{-beta/4}):
///   det = (-beta/4)^d phi^{-(beta+8) d/4} bracket.
double lift_quartic(double bracket, double phi, double beta, int d);
/// Quadratic family (phi2, Phi = phi^{-beta/2}):
///   det = (-beta/2)^d phi^{-(beta+4) d/2} bracket.
double lift_quadratic(double bracket, double phi, double beta, int d);

double f1(double x_norm2, double t, double a, double beta);
double script_A(const GroupPoint& p);
/// The beta-independent part of the Minkowski bracket.
double f2(const GroupPoint& p, double a, double beta);
/// Coefficient of beta in the Minkowski bracket.
double g2(const GroupPoint& p, double a);

double closed_det_koranyi(int n, double a, double beta, const GroupPoint& p);
double closed_det_minkowski(int n, double a, double beta, const GroupPoint& p,
                            FormulaRevision rev = FormulaRevision::Corrected);
double closed_det_rho3_n1(double a, double beta, const GroupPoint& p,
                          FormulaRevision rev = FormulaRevision::Corrected);
double closed_det_polarized(NormFamily family, double a, double beta, const GroupPoint& p,
                            FormulaRevision rev = FormulaRevision::Corrected);
double closed_det_euclidean(NormFamily family, int n, double beta, const GroupPoint& p);

/// Dispatches on the case; validates (n, a, variant) applicability.
double closed_det(ClosedFormCase c, const GroupContext& ctx, double beta, const GroupPoint& p,
                  FormulaRevision rev = FormulaRevision::Corrected);

/// Throws DomainError when the case does not apply to the context.
void check_case_context(ClosedFormCase c, const GroupContext& ctx);

struct HessianCheckOptions {
  std::vector<double> a_grid{0.0, 0.3, 1.0, 3.0};
  std::vector<double> beta_grid{0.5, 1.0, 2.0};
  std::vector<int> n_grid{1, 2};
  int samples = 200;
  std::uint64_t seed = 0;
  /// Test hook: the closed form is evaluated at beta + beta_shift.
  double beta_shift = 0.0;
  FormulaRevision revision = FormulaRevision::Corrected;
};

struct HessianCheckRow {
  ClosedFormCase id = ClosedFormCase::KoranyiFull;
  FormulaRevision revision = FormulaRevision::Corrected;
  int n = 1;
  double a = 0.0;
  double beta = 1.0;
  int samples = 0;
  double max_rel_error = 0.0;
  GroupPoint worst;
};

/// AD determinant against the closed form on annulus points (Koranyi norm in
/// [1/2, 2]) for every applicable (n, a, beta) of the grids. Combinations the
/// case does not apply to are skipped.
std::vector<HessianCheckRow> hessian_check(const std::vector<ClosedFormCase>& cases,
                                           const HessianCheckOptions& opts = {});

}  // namespace heisosc
