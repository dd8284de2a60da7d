#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "heisosc/group.hpp"
#include "heisosc/jet.hpp"
#include "heisosc/quasinorm.hpp"

namespace heisosc {

using cplx = std::complex<double>;
using GridFunction = std::vector<cplx>;

/// C-infinity step: 0 for u <= 0, 1 for u >= 1.
double smooth_step(double u);
/// 1 on r <= 1/2, 0 on r >= 1.
double psi_cutoff(double r);
/// theta(r) = psi(r/2) - psi(r). Supported in [1/2, 2]; sum_{j>=0} theta(2^j r) = 1 on (0, 1].
double theta_partition(double r);
double dyadic_weight(int j, double r);
/// Smooth window on (-1, 1), equal to 1 on |u| <= plateau.
double window(double u, double plateau = 0.3);

/// Tensor midpoint grid on a box. Nodes are flattened row-major with the
/// last axis fastest.
struct GridSpec {
  std::vector<double> center;
  std::vector<double> half_width;
  std::vector<int> points;

  static GridSpec cube(std::vector<double> center, std::vector<double> half_width, int n_points);

  void validate() const;
  std::size_t dim() const noexcept { return center.size(); }
  std::size_t size() const noexcept;
  double spacing(std::size_t axis) const;
  double coord(std::size_t axis, int i) const;
  double cell_volume() const;
  void node(std::size_t flat, std::span<double> out) const;
  std::vector<double> node(std::size_t flat) const;
};

struct OperatorGrids {
  GridSpec out;
  GridSpec in;
};

using TwoPointPhase = std::function<Jet2(std::span<const Jet2> p, std::span<const Jet2> q)>;
using PointWeight = std::function<double(std::span<const double>)>;
using PairAmplitude = std::function<double(std::span<const double> p, std::span<const double> q)>;

/// T f(p) = sum_q Psi(p,q) e^{i lambda Phi(p,q)} f(q) w_q.
///
/// Psi = amp_out(p) amp_in(q) amplitude(p,q), unset factors count as 1.
/// With `group_phase` set, Phi(p,q) = rho(q^{-1} p)^{-beta} and `phase` is
/// ignored; that together with an unset pair amplitude enables the cached
/// path that exploits translation structure in t.
struct GenericKernel {
  double lambda = 1.0;
  std::optional<PhaseSpec> group_phase;
  TwoPointPhase phase;
  PointWeight amp_out;
  PointWeight amp_in;
  PairAmplitude amplitude;
};

/// Rescaled dyadic piece: K(z) = 2^{j alpha} theta(rho) rho^{-2n-2-alpha} e^{i 2^{j beta} rho^{-beta}},
/// rho = rho(bz), acting by group convolution T f(p) = sum_q K(q^{-1} p) f(q) w_q.
struct DyadicKernel {
  int j = 0;
  double alpha = 1.5;
  double beta = 1.0;
  QuasiNormSpec norm;
};

struct OscKernelSpec {
  GroupContext ctx;
  std::variant<GenericKernel, DyadicKernel> mode;
};

/// Boxes for the Koranyi-type generic experiment: output box around p0,
/// input box around the identity, both cubes of `half` with `n_points` per axis.
OperatorGrids generic_grids(const GroupContext& ctx, std::vector<double> p0, std::vector<double> half, int n_points);
/// Input box [-in_half, in_half]^{2n+1}; output box covering every p = q.z with
/// q in the input box and z in the kernel support, same spacing per axis.
OperatorGrids dyadic_grids(const GroupContext& ctx, const QuasiNormSpec& norm, int n_points, double in_half = 0.5);
/// Generic kernel with the two-point phase rho(q^{-1}p)^{-beta} and window amplitudes on both boxes.
GenericKernel group_generic_kernel(double lambda, const PhaseSpec& phase, const OperatorGrids& grids,
                                   double plateau = 0.3);

/// Largest phase change between neighbouring grid nodes over the support of
/// the kernel, per unit oscillation scale (lambda or 2^{j beta}). Generic
/// kernels also try the demodulated phase
/// Phi(p,q) - Phi(p,q0) - Phi(p0,q) + Phi(p0,q0) with p0, q0 the box centres
/// and report the smaller of the two; the removed factors are unimodular
/// diagonal scalings and leave the norm unchanged. On large grids one side
/// is a strided sub-lattice that keeps the box corners.
double unit_phase_increment(const OscKernelSpec& spec, const OperatorGrids& grids);

/// Discretised operator. Construction checks phase resolution and, when it
/// fits the memory budget, caches kernel values.
class OscOperator {
 public:
  static constexpr double kMaxIncrement = 1.5707963267948966;  // pi/2 per cell
  static constexpr std::size_t kCacheEntries = std::size_t{1} << 26;
  /// Kernel evaluations per application above which construction throws CapacityError.
  static constexpr std::size_t kMaxPairs = std::size_t{1} << 31;

  OscOperator(OscKernelSpec spec, OperatorGrids grids);

  GridFunction apply(const GridFunction& f) const;
  GridFunction apply_adjoint(const GridFunction& g) const;
  cplx kernel(std::size_t p, std::size_t q) const;

  const OperatorGrids& grids() const noexcept { return grids_; }
  const OscKernelSpec& spec() const noexcept { return spec_; }
  /// Largest phase change between neighbouring nodes found by the guard.
  double max_increment() const noexcept { return max_increment_; }
  /// Oscillation scale: lambda (generic) or 2^{j beta} (dyadic).
  double oscillation_scale() const noexcept;

 private:
  enum class Path { Toeplitz, Dense, OnTheFly };

  void check_resolution();
  bool displacement_type() const;
  cplx core(std::span<const double> p, std::span<const double> q, std::vector<double>& z) const;
  std::size_t plan_toeplitz();
  void build_toeplitz();
  void build_dense();

  OscKernelSpec spec_;
  OperatorGrids grids_;
  Path path_ = Path::OnTheFly;
  std::vector<double> amp_out_;
  std::vector<double> amp_in_;
  struct Block {
    std::size_t offset = 0;
    std::uint32_t lo = 0, hi = 0;  // stored lags [lo, hi)
  };
  std::vector<Block> blocks_;
  std::vector<cplx> cache_;
  std::size_t nt_out_ = 1, nt_in_ = 1, nx_out_ = 0, nx_in_ = 0;
  double max_increment_ = 0.0;
};

GridFunction apply(const OscKernelSpec& spec, const OperatorGrids& grids, const GridFunction& f);
GridFunction apply_adjoint(const OscKernelSpec& spec, const OperatorGrids& grids, const GridFunction& g);

/// Weighted inner product sum f conj(g) w on a grid.
cplx inner_product(const GridSpec& grid, const GridFunction& f, const GridFunction& g);
double l2_norm(const GridSpec& grid, const GridFunction& f);

struct PowerOptions {
  int max_iterations = 300;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;
};

struct NormEstimate {
  double norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Largest singular value of A from the normal operator A*A on `domain`.
NormEstimate power_norm(const std::function<GridFunction(const GridFunction&)>& normal_op,
                        const GridSpec& domain, const PowerOptions& opts = {});
NormEstimate operator_norm(const OscOperator& op, const PowerOptions& opts = {});
NormEstimate operator_norm(const OscKernelSpec& spec, const OperatorGrids& grids, const PowerOptions& opts = {});

struct DecayPoint {
  double scale = 0.0;
  double norm = 0.0;
  double refined_norm = 0.0;  // same experiment on the 1.5x grid, NaN if it does not fit
  bool grid_converged = false;
};

struct DecaySeries {
  std::vector<DecayPoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  /// All points grid-converged; the slope is only meaningful when set.
  bool grid_converged = false;
};

inline constexpr double kGridTolerance = 0.05;

bool grid_converged(double norm, double refined_norm, double tol = kGridTolerance);
/// Log-log least squares over grid-converged points (over all points if
/// fewer than three converged, with the flag cleared).
DecaySeries decay_fit(std::vector<DecayPoint> points);

/// Generic experiment builder: kernel for a given lambda and grid resolution.
using GenericSetup = std::function<std::pair<OscKernelSpec, OperatorGrids>(double lambda, int n_points)>;

/// Koranyi-type two-point phase experiment with window amplitudes.
GenericSetup group_phase_setup(const GroupContext& ctx, const PhaseSpec& phase, std::vector<double> p0,
                               std::vector<double> half);
/// One-dimensional sanity experiment Phi(x,y) = x y on [-1,1]^2.
GenericSetup euclidean_product_setup();

/// Norms at n_points and round(1.5 n_points) for each lambda, then decay_fit.
/// Throws NyquistError naming the largest feasible lambda.
DecaySeries generic_decay(const GenericSetup& setup, std::span<const double> lambdas, int n_points,
                          const PowerOptions& opts = {});

struct DyadicPoint {
  int j = 0;
  double norm = 0.0;
  double refined_norm = 0.0;
  bool grid_converged = false;
  int iterations = 0;
};

struct DyadicSeries {
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<DyadicPoint> points;
  std::vector<double> log2_increments;
  double median = 0.0;
  double max_ratio_to_median = 0.0;  // max over j of max(norm/median, median/norm)
  bool grid_converged = false;
};

/// Largest j accepted by the Nyquist guard on dyadic_grids(n_points); -1 if none.
int max_feasible_j(const GroupContext& ctx, double alpha, double beta, const QuasiNormSpec& norm, int n_points,
                   double in_half = 0.5);
/// Operator norm of the rescaled dyadic piece j on dyadic_grids(n_points).
NormEstimate dyadic_norm(const GroupContext& ctx, const DyadicKernel& k, int n_points, const PowerOptions& opts = {},
                         double in_half = 0.5);
DyadicSeries dyadic_series(const GroupContext& ctx, double alpha, double beta, const QuasiNormSpec& norm,
                           std::span<const int> js, int n_points, const PowerOptions& opts = {},
                           double in_half = 0.5);

struct EnvelopeReport {
  std::vector<double> lambdas;
  std::vector<double> values;  // |K_lambda(x, z)|
  double displacement = 0.0;   // rho_1(z^{-1} x)
  double slope = 0.0;          // of log|K| against log(1 + lambda * displacement)
  double residual = 0.0;
  bool non_increasing = false;  // beyond the first scale
};

/// K_lambda(x,z) = sum_y Psi(x,y) conj Psi(z,y) e^{i lambda (Phi(x,y) - Phi(z,y))} w_y,
/// the kernel of T T*, integrated over `grid`.
EnvelopeReport kernel_envelope(const GroupContext& ctx, const GenericKernel& k, std::span<const double> lambdas,
                               std::span<const double> x, std::span<const double> z, const GridSpec& grid);

struct OrthogonalityReport {
  int j = 0;
  std::vector<int> gaps;               // |j - j'|
  std::vector<double> norms;           // ||T_j^* T_{j'}||
  std::vector<double> log2_decrements; // log2(norm[k-1] / norm[k])
  bool non_increasing = false;
  double rate = 0.0;  // fitted decrement per unit gap
};

/// ||T_j^* T_{j+g}|| for g in `gaps` on a common grid.
OrthogonalityReport cross_check_almost_orthogonality(const GroupContext& ctx, double alpha, double beta,
                                                     const QuasiNormSpec& norm, int j, std::span<const int> gaps,
                                                     int n_points, const PowerOptions& opts = {},
                                                     double in_half = 0.5);

}  // namespace heisosc
