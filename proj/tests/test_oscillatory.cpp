#include <Eigen/Dense>
#include <random>

#include "doctest.h"
#include "heisosc/oscillatory.hpp"
#include "test_support.hpp"

using namespace heisosc;
using testing_support::close;

namespace {

GridFunction random_function(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  GridFunction f(n);
  for (auto& c : f) {
    const double re = g(rng);
    c = cplx(re, g(rng));
  }
  return f;
}

double adjoint_defect(const OscOperator& op, std::uint64_t seed) {
  const auto f = random_function(op.grids().in.size(), seed);
  const auto g = random_function(op.grids().out.size(), seed + 1);
  const cplx lhs = inner_product(op.grids().out, op.apply(f), g);
  const cplx rhs = inner_product(op.grids().in, f, op.apply_adjoint(g));
  return std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);
}

double dense_sigma_max(const OscOperator& op) {
  const auto& go = op.grids().out;
  const auto& gi = op.grids().in;
  Eigen::MatrixXcd m(go.size(), gi.size());
  const double s = std::sqrt(go.cell_volume() * gi.cell_volume());
  for (std::size_t p = 0; p < go.size(); ++p) {
    for (std::size_t q = 0; q < gi.size(); ++q) m(p, q) = op.kernel(p, q) * s;
  }
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues()(0);
}

const GroupContext kH1(1, 1.0);
const PhaseSpec kKoranyi(QuasiNormSpec(NormKind::Rho1), 1.0);

}  // namespace

TEST_CASE("partition of unity") {
  double sum = 0.0;
  for (int j = 0; j < 60; ++j) sum += dyadic_weight(j, 1.0);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));

  for (int j = 0; j < 10; ++j) CHECK(dyadic_weight(j, 2.5) == 0.0);
  CHECK(theta_partition(0.5) == 0.0);
  CHECK(theta_partition(2.0) == 0.0);
  CHECK(theta_partition(1.0) > 0.0);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double r = 1.0 - u(rng);  // (0, 1]
    double s = 0.0;
    for (int j = 0; j < 1100 && std::ldexp(r, j) <= 4.0; ++j) s += dyadic_weight(j, r);
    worst = std::max(worst, std::abs(s - 1.0));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("grid layout") {
  const GridSpec g = GridSpec::cube({0.0, 1.0}, {1.0, 2.0}, 4);
  CHECK(g.size() == 16);
  CHECK(g.cell_volume() == doctest::Approx(0.5 * 1.0));
  const auto n1 = g.node(1);
  CHECK(n1[0] == doctest::Approx(-0.75));
  CHECK(n1[1] == doctest::Approx(1.0 - 2.0 + 1.5));
  CHECK_THROWS_AS(GridSpec::cube({0.0}, {1.0}, 3), DomainError);
  CHECK_THROWS_AS(GridSpec::cube({0.0}, {-1.0}, 8), DomainError);
}

TEST_CASE("zero oscillation is plain quadrature") {
  const OperatorGrids grids = generic_grids(kH1, {0, 0, 1}, {0.3, 0.3, 0.3}, 5);
  GenericKernel k = group_generic_kernel(0.0, kKoranyi, grids);
  const OscOperator op(OscKernelSpec{kH1, k}, grids);
  const auto f = random_function(grids.in.size(), 3);
  const auto out = op.apply(f);
  for (std::size_t p : {std::size_t{0}, std::size_t{37}, grids.out.size() - 1}) {
    cplx direct = 0.0;
    const auto pp = grids.out.node(p);
    for (std::size_t q = 0; q < grids.in.size(); ++q) {
      direct += k.amp_out(pp) * k.amp_in(grids.in.node(q)) * f[q] * grids.in.cell_volume();
    }
    CHECK(std::abs(out[p] - direct) <= 1e-13 * std::abs(direct));
  }
}

TEST_CASE("delta input returns a kernel column") {
  const OperatorGrids grids = generic_grids(kH1, {0, 0, 1}, {0.3, 0.3, 0.3}, 5);
  const OscOperator op(OscKernelSpec{kH1, group_generic_kernel(8.0, kKoranyi, grids)}, grids);
  const std::size_t q0 = 62;
  GridFunction f(grids.in.size(), 0.0);
  f[q0] = 1.0;
  const auto out = op.apply(f);
  for (std::size_t p = 0; p < grids.out.size(); p += 7) {
    CHECK(std::abs(out[p] - op.kernel(p, q0) * grids.in.cell_volume()) <= 1e-15);
  }
}

TEST_CASE("cached kernels match the formula") {
  SUBCASE("generic group phase") {
    const OperatorGrids grids = generic_grids(kH1, {0.2, 0, 1}, {0.3, 0.3, 0.3}, 6);
    const GenericKernel k = group_generic_kernel(5.0, kKoranyi, grids);
    const OscOperator op(OscKernelSpec{kH1, k}, grids);
    for (std::size_t p = 0; p < grids.out.size(); p += 13) {
      for (std::size_t q = 0; q < grids.in.size(); q += 11) {
        const auto pp = grids.out.node(p), qq = grids.in.node(q);
        const GroupPoint z = relative(kH1, GroupPoint::from_coords(qq), GroupPoint::from_coords(pp));
        const cplx want = k.amp_out(pp) * k.amp_in(qq) * std::polar(1.0, 5.0 * phase(kKoranyi, z));
        CHECK(std::abs(op.kernel(p, q) - want) <= 1e-12);
      }
    }
  }
  SUBCASE("generic group phase, polarized law") {
    const GroupContext pol(1, 1.0, Variant::Polarized);
    const OperatorGrids grids = generic_grids(pol, {0.2, 0.3, 1}, {0.3, 0.3, 0.3}, 6);
    const GenericKernel k = group_generic_kernel(5.0, kKoranyi, grids);
    const OscOperator op(OscKernelSpec{pol, k}, grids);
    for (std::size_t p = 0; p < grids.out.size(); p += 13) {
      for (std::size_t q = 0; q < grids.in.size(); q += 11) {
        const auto pp = grids.out.node(p), qq = grids.in.node(q);
        const GroupPoint z = relative(pol, GroupPoint::from_coords(qq), GroupPoint::from_coords(pp));
        const cplx want = k.amp_out(pp) * k.amp_in(qq) * std::polar(1.0, 5.0 * phase(kKoranyi, z));
        CHECK(std::abs(op.kernel(p, q) - want) <= 1e-12);
      }
    }
  }
  SUBCASE("dyadic") {
    const QuasiNormSpec nk(NormKind::Rho1);
    const OperatorGrids grids = dyadic_grids(kH1, nk, 4);
    const OscOperator op(OscKernelSpec{kH1, DyadicKernel{0, 1.5, 1.0, nk}}, grids);
    int nonzero = 0;
    for (std::size_t p = 0; p < grids.out.size(); p += 17) {
      for (std::size_t q = 0; q < grids.in.size(); q += 5) {
        const GroupPoint z = relative(kH1, GroupPoint::from_coords(grids.in.node(q)),
                                      GroupPoint::from_coords(grids.out.node(p)));
        const double rho = evaluate(nk, z);
        const double th = theta_partition(rho);
        const cplx want = th == 0.0 ? cplx(0.0) : th * std::pow(rho, -5.5) * std::polar(1.0, 1.0 / rho);
        CHECK(std::abs(op.kernel(p, q) - want) <= 1e-12 * std::max(1.0, std::abs(want)));
        nonzero += want != 0.0;
      }
    }
    CHECK(nonzero > 100);
  }
}

TEST_CASE("adjoint identity") {
  SUBCASE("generic group phase") {
    const OperatorGrids grids = generic_grids(kH1, {0, 0, 1}, {0.3, 0.3, 0.3}, 6);
    const OscOperator op(OscKernelSpec{kH1, group_generic_kernel(9.0, kKoranyi, grids)}, grids);
    CHECK(adjoint_defect(op, 1) <= 1e-12);
  }
  SUBCASE("callable phase with pair amplitude") {
    auto [spec, grids] = euclidean_product_setup()(20.0, 40);
    std::get<GenericKernel>(spec.mode).amplitude = [](std::span<const double> p, std::span<const double> q) {
      return 1.0 + 0.5 * p[0] * q[0];
    };
    const OscOperator op(spec, grids);
    CHECK(adjoint_defect(op, 2) <= 1e-12);
  }
  SUBCASE("dyadic") {
    const QuasiNormSpec nk(NormKind::Rho1);
    const OscOperator op(OscKernelSpec{kH1, DyadicKernel{0, 1.5, 1.0, nk}}, dyadic_grids(kH1, nk, 4));
    CHECK(adjoint_defect(op, 3) <= 1e-12);
  }
}

TEST_CASE("operator norm") {
  SUBCASE("scaled identity") {
    const GridSpec g = GridSpec::cube({0.0}, {1.0}, 16);
    GenericKernel k;
    k.lambda = 0.0;
    k.phase = [](std::span<const Jet2>, std::span<const Jet2>) { return Jet2(0.0); };
    const double inv_w = 1.0 / g.cell_volume();
    k.amplitude = [inv_w](std::span<const double> p, std::span<const double> q) { return p[0] == q[0] ? inv_w : 0.0; };
    const auto e = operator_norm(OscKernelSpec{GroupContext{}, k}, OperatorGrids{g, g});
    CHECK(e.converged);
    CHECK(e.norm == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("rank one") {
    const OperatorGrids grids = generic_grids(kH1, {0, 0, 1}, {0.3, 0.3, 0.3}, 6);
    const GenericKernel k = group_generic_kernel(0.0, kKoranyi, grids);
    const auto e = operator_norm(OscKernelSpec{kH1, k}, grids);
    GridFunction u(grids.out.size()), v(grids.in.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = k.amp_out(grids.out.node(i));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = k.amp_in(grids.in.node(i));
    CHECK(e.norm == doctest::Approx(l2_norm(grids.out, u) * l2_norm(grids.in, v)).epsilon(1e-6));
  }
  SUBCASE("dense SVD on small grids") {
    for (double lam : {0.0, 6.0}) {
      const OperatorGrids grids = generic_grids(kH1, {0, 0, 1}, {0.3, 0.3, 0.3}, 6);
      const OscOperator op(OscKernelSpec{kH1, group_generic_kernel(lam, kKoranyi, grids)}, grids);
      const auto e = operator_norm(op, PowerOptions{2000, 1e-13, 5});
      CHECK(e.norm == doctest::Approx(dense_sigma_max(op)).epsilon(1e-6));
    }
  }
  SUBCASE("seeds") {
    auto [spec, grids] = euclidean_product_setup()(16.0, 64);
    const OscOperator op(spec, grids);
    const auto a = operator_norm(op, PowerOptions{300, 1e-10, 1});
    const auto b = operator_norm(op, PowerOptions{300, 1e-10, 1});
    const auto c = operator_norm(op, PowerOptions{300, 1e-10, 99});
    CHECK(a.norm == b.norm);
    CHECK(a.norm == doctest::Approx(c.norm).epsilon(1e-6));
  }
  SUBCASE("larger lambda, smaller norm") {
    double prev = 1e300;
    for (double lam : {4.0, 8.0, 16.0}) {
      auto [spec, grids] = group_phase_setup(kH1, kKoranyi, {0, 0, 1}, {0.2, 0.2, 0.2})(lam, 8);
      const double n = operator_norm(spec, grids).norm;
      CHECK(n < prev);
      prev = n;
    }
  }
}

TEST_CASE("nyquist guard") {
  auto [spec, grids] = euclidean_product_setup()(64.0, 16);
  try {
    OscOperator op(spec, grids);
    FAIL("expected a Nyquist error");
  } catch (const NyquistError& e) {
    CHECK(e.max_increment() > OscOperator::kMaxIncrement);
    const double lam_max = e.max_feasible();
    CHECK(lam_max > 1.0);
    CHECK(lam_max < 64.0);
    auto [spec2, grids2] = euclidean_product_setup()(0.99 * lam_max, 16);
    CHECK_NOTHROW(OscOperator(spec2, grids2));
  }

  const QuasiNormSpec nk(NormKind::Rho1);
  const int jmax = max_feasible_j(kH1, 1.5, 1.0, nk, 4);
  REQUIRE(jmax >= 0);
  try {
    OscOperator op(OscKernelSpec{kH1, DyadicKernel{jmax + 1, 1.5, 1.0, nk}}, dyadic_grids(kH1, nk, 4));
    FAIL("expected a Nyquist error");
  } catch (const NyquistError& e) {
    CHECK(e.max_feasible() == jmax);
  }
}

TEST_CASE("decay fits") {
  std::vector<double> lams{8, 16, 32, 64};
  const DecaySeries s = generic_decay(euclidean_product_setup(), lams, 128);
  CHECK(s.grid_converged);
  CHECK(s.slope == doctest::Approx(-0.5).epsilon(0.2));
  CHECK(s.slope >= -0.6);
  CHECK(s.slope <= -0.4);

  const DecaySeries other = generic_decay(euclidean_product_setup(), lams, 128, PowerOptions{300, 1e-6, 42});
  CHECK(std::abs(other.slope - s.slope) <= 0.05);

  GenericSetup flat = [](double lambda, int n) {
    auto [spec, grids] = euclidean_product_setup()(lambda, n);
    std::get<GenericKernel>(spec.mode).phase = [](std::span<const Jet2>, std::span<const Jet2>) { return Jet2(0.0); };
    return std::make_pair(spec, grids);
  };
  const DecaySeries z = generic_decay(flat, lams, 64);
  CHECK(std::abs(z.slope) <= 0.05);

  CHECK_THROWS_AS(decay_fit({{1, 1, 1, true}, {2, 1, 1, true}}), DomainError);
  const DecaySeries mixed = decay_fit({{1, 1, 1, true}, {2, 0.5, 0.5, true}, {4, 0.25, 0.4, false}, {8, 0.125, 0.125, true}});
  CHECK_FALSE(mixed.grid_converged);
  CHECK(mixed.slope == doctest::Approx(-1.0));
}

TEST_CASE("dyadic pieces") {
  const QuasiNormSpec nk(NormKind::Rho1);
  const OperatorGrids grids = dyadic_grids(kH1, nk, 4);
  // every output node a grid step away from the box still sees zero kernel
  CHECK(grids.out.spacing(0) == doctest::Approx(grids.in.spacing(0)));
  CHECK(grids.out.spacing(2) == doctest::Approx(grids.in.spacing(2)));

  SUBCASE("j = 0 coincides with the generic operator at lambda = 1") {
    const double alpha = 1.5;
    GenericKernel g;
    g.lambda = 1.0;
    g.group_phase = PhaseSpec(nk, 1.0);
    g.amplitude = [alpha](std::span<const double> p, std::span<const double> q) {
      std::vector<double> z(p.size());
      relative_raw<double>(kH1, q, p, z);
      const double rho = norm_raw<double>(QuasiNormSpec(NormKind::Rho1), std::span<const double>(z));
      const double th = theta_partition(rho);
      return th == 0.0 ? 0.0 : th * std::pow(rho, -4.0 - alpha);
    };
    const OscOperator gen(OscKernelSpec{kH1, g}, grids);
    const OscOperator dy(OscKernelSpec{kH1, DyadicKernel{0, alpha, 1.0, nk}}, grids);
    const PowerOptions opts{500, 1e-12, 3};
    CHECK(operator_norm(gen, opts).norm == doctest::Approx(operator_norm(dy, opts).norm).epsilon(1e-9));
  }
  SUBCASE("composition with itself") {
    const int gaps[] = {0};
    const PowerOptions opts{500, 1e-12, 3};
    const auto r = cross_check_almost_orthogonality(kH1, 1.5, 1.0, nk, 0, gaps, 4, opts);
    const double n0 = dyadic_norm(kH1, DyadicKernel{0, 1.5, 1.0, nk}, 4, opts).norm;
    CHECK(r.norms[0] == doctest::Approx(n0 * n0).epsilon(1e-8));
  }
  SUBCASE("non-smooth norm rejected") {
    CHECK_THROWS_AS(OscOperator(OscKernelSpec{kH1, DyadicKernel{0, 1.5, 1.0, QuasiNormSpec(NormKind::Rho0)}}, grids),
                    DomainError);
  }
}

TEST_CASE("kernel envelope") {
  auto [spec, grids] = euclidean_product_setup()(1.0, 400);
  const auto& k = std::get<GenericKernel>(spec.mode);
  const std::vector<double> lams{8, 16, 32, 64};
  const std::vector<double> x{0.5}, z{-0.5}, same{0.5};

  const auto diag = kernel_envelope(GroupContext{}, k, lams, x, same, grids.in);
  double mass = 0.0;
  for (std::size_t i = 0; i < grids.in.size(); ++i) {
    const double a = k.amp_in(grids.in.node(i));
    mass += a * a * grids.in.cell_volume();
  }
  for (double v : diag.values) CHECK(v == doctest::Approx(mass * k.amp_out(x) * k.amp_out(x)).epsilon(1e-12));

  const auto off = kernel_envelope(GroupContext{}, k, lams, x, z, grids.in);
  CHECK(off.displacement == doctest::Approx(1.0));
  CHECK(off.non_increasing);
  CHECK(off.slope <= -1.0);

  GenericKernel zero = k;
  zero.amp_in = [](std::span<const double>) { return 0.0; };
  const auto nil = kernel_envelope(GroupContext{}, zero, lams, x, z, grids.in);
  for (double v : nil.values) CHECK(v == 0.0);

  SUBCASE("group displacement") {
    const OperatorGrids hg = generic_grids(kH1, {0, 0, 1}, {0.3, 0.3, 0.3}, 12);
    const GenericKernel hk = group_generic_kernel(1.0, kKoranyi, hg);
    const std::vector<double> p{0.05, 0.0, 1.0}, p2{-0.05, 0.05, 0.9};
    const std::vector<double> hl{4, 8, 16};
    const auto r = kernel_envelope(kH1, hk, hl, p, p2, hg.in);
    const GroupPoint d = relative(kH1, GroupPoint::from_coords(p2), GroupPoint::from_coords(p));
    CHECK(r.displacement == doctest::Approx(evaluate(QuasiNormSpec(NormKind::Rho1), d)));
    CHECK(r.values.size() == 3);
  }
}
