// Acceptance run: one PASS/FAIL line per criterion on stdout, details on stderr.
//
// Exit status is 0 when every criterion passes except those in kKnownLimits,
// whose failure is documented in the README. --strict makes any FAIL fatal;
// --only=K runs a single criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "heisosc/closed_forms.hpp"
#include "heisosc/degeneracy.hpp"
#include "heisosc/errors.hpp"
#include "heisosc/oscillatory.hpp"
#include "heisosc/sampling.hpp"

using namespace heisosc;

namespace {

const std::set<int> kKnownLimits{4, 5, 7};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// ------------------------------------------------------------ 1

Outcome closed_forms_match() {
  std::vector<ClosedFormCase> cases;
  for (const auto& info : all_cases()) cases.push_back(info.id);
  HessianCheckOptions opts;
  opts.samples = 200;
  opts.seed = 2024;
  const auto rows = hessian_check(cases, opts);
  double worst = 0.0;
  std::set<std::string> covered;
  for (const auto& r : rows) {
    worst = std::max(worst, r.max_rel_error);
    covered.insert(to_string(r.id) + "/n" + std::to_string(r.n));
  }
  // every case, Koranyi and Minkowski at n = 1 and 2
  const bool complete = covered.size() == 11;
  return {complete && worst <= 1e-8, std::to_string(rows.size()) + " parameter sets, " +
                                         std::to_string(covered.size()) + " case/dimension pairs, max rel err " +
                                         fmt(worst, 3)};
}

// ------------------------------------------------------------ 2

Outcome c_beta_boundary() {
  const bool limit = c_beta(0.0) == 9.0 && c_beta(1e-300) == 9.0;
  double worst = 0.0;
  for (int k = 1; k <= 20; ++k) {
    const double beta = 0.1 * k;
    const double a2 = c_beta(beta);
    const double scale = 4.0 * a2 * a2 + 4.0 * (beta + 2.0) * (2.0 * beta + 5.0) * a2 + 9.0 * (beta + 2.0) * (beta + 2.0);
    worst = std::max(worst, std::abs(discriminant(std::sqrt(a2), beta)) / scale);
  }
  cli::RunConfig c;
  c.subcommand = "scan-degeneracy";
  cli::resolve(c);
  const auto scan = cli::run(c);
  const auto& flip = scan.results["flip"];
  const bool flips = flip["found"].get<bool>() && flip["within_one_step"].get<bool>();
  std::string where = flips ? "flip in (" + fmt(flip["a2_below"].get<double>()) + ", " +
                                  fmt(flip["a2_above"].get<double>()) + "]"
                            : "no flip near C_beta";
  return {limit && worst <= 1e-10 && flips, "C_0 = " + fmt(c_beta(0.0), 17) + ", max rel discriminant " +
                                                fmt(worst, 3) + " over 20 betas, " + where +
                                                " vs C_1 = " + fmt(c_beta(1.0), 8)};
}

// ------------------------------------------------------------ 3

Outcome degeneracy_loci() {
  const double cb = c_beta(1.0);
  const auto crit = zero_scan(GroupContext(1, std::sqrt(cb)), QuasiNormSpec(NormKind::Rho1), 1.0, 30);
  double worst = crit.empty() ? INFINITY : 0.0;
  for (const auto& z : crit) {
    const double x2 = z.point.x(0) * z.point.x(0) + z.point.x(1) * z.point.x(1);
    worst = std::max(worst, rel_err(x2 * x2 / (z.point.t() * z.point.t()), critical_slope(1.0)));
  }

  const auto r3 = zero_scan(GroupContext(1, 1.0), QuasiNormSpec(NormKind::Rho3), 1.0, 30);
  auto near = [&](double x1, double x2, double t) {
    return std::any_of(r3.begin(), r3.end(), [&](const NearZero& z) {
      return std::hypot(z.point.x(0) - x1, z.point.x(1) - x2, z.point.t() - t) < 0.05;
    });
  };
  const bool lines = near(1, 0, 0) && near(-1, 0, 0) && near(0, 1, 0) && near(0, -1, 0);

  const auto pol = zero_scan(GroupContext(1, 1.0, Variant::Polarized), QuasiNormSpec(NormKind::Rho1), 1.0, 30);
  const bool t_axis = std::any_of(pol.begin(), pol.end(), [](const NearZero& z) {
    return std::hypot(z.point.x(0), z.point.x(1)) < 0.05;
  });
  return {worst <= 1e-3 && lines && t_axis,
          std::to_string(crit.size()) + " critical zeros, max slope rel err " + fmt(worst, 3) +
              "; rho3 coordinate lines " + (lines ? "found" : "missing") + "; polarized (0,t) line " +
              (t_axis ? "found" : "missing")};
}

// ------------------------------------------------------------ 4

Outcome generic_decay_exponent() {
  std::vector<double> lambdas{8.0, 16.0, 32.0};
  const auto oned = generic_decay(euclidean_product_setup(), std::vector<double>{8, 16, 32, 64}, 128);
  const bool oned_ok = oned.grid_converged && oned.slope >= -0.6 && oned.slope <= -0.4;

  const GroupContext ctx(1, 1.0);
  const auto setup = group_phase_setup(ctx, PhaseSpec(QuasiNormSpec(NormKind::Rho1), 1.0), {0, 0, 1}, {0.2, 0.2, 0.2});
  std::string heis;
  bool heis_ok = false;
  try {
    const auto s = generic_decay(setup, lambdas, 16);
    heis_ok = s.grid_converged && s.slope >= -1.7 && s.slope <= -1.3;
    heis = "Heisenberg slope " + fmt(s.slope, 4) + " (norms";
    for (const auto& p : s.points) heis += " " + fmt(p.norm, 5);
    heis += std::string(", grid ") + (s.grid_converged ? "converged" : "not converged") + ")";
  } catch (const NyquistError& e) {
    heis = "Heisenberg run infeasible, max lambda " + fmt(e.max_feasible());
  }
  return {oned_ok && heis_ok, heis + " target [-1.7, -1.3]; 1-D slope " + fmt(oned.slope, 4)};
}

// ------------------------------------------------------------ 5

std::string series_text(const DyadicSeries& s) {
  std::string t = "norms";
  for (const auto& p : s.points) t += " " + fmt(p.norm, 5);
  return t;
}

Outcome dyadic_uniformity() {
  const GroupContext ctx(1, 1.0);
  const QuasiNormSpec norm(NormKind::Rho1);
  const int grid = 12;
  std::string detail;
  bool pass = true;

  const int jmax = max_feasible_j(ctx, 1.5, 1.0, norm, grid);
  std::vector<int> js;
  for (int j = 0; j <= std::min(3, jmax); ++j) js.push_back(j);
  if (jmax < 3) {
    pass = false;
    detail += "j = 3 unresolved at grid " + std::to_string(grid) + " (max feasible j " + std::to_string(jmax) + "); ";
  }
  const auto crit = dyadic_series(ctx, 1.5, 1.0, norm, js, grid);
  pass = pass && crit.max_ratio_to_median <= 2.0;
  detail += "alpha 1.5: " + series_text(crit) + ", max ratio to median " + fmt(crit.max_ratio_to_median, 4);

  const int jmax2 = max_feasible_j(ctx, 2.0, 1.0, norm, grid);
  std::vector<int> js2;
  for (int j = 0; j <= std::min(3, jmax2); ++j) js2.push_back(j);
  const auto sup = dyadic_series(ctx, 2.0, 1.0, norm, js2, grid);
  bool incr_ok = !sup.log2_increments.empty();
  detail += "; alpha 2.0: increments";
  for (double d : sup.log2_increments) {
    incr_ok = incr_ok && std::abs(d - 0.5) <= 0.15;
    detail += " " + fmt(d, 4);
  }
  detail += " target 0.5";
  pass = pass && incr_ok && crit.grid_converged && sup.grid_converged;
  if (!crit.grid_converged || !sup.grid_converged) detail += "; refined grid exceeds capacity, not grid-converged";
  return {pass, detail};
}

// ------------------------------------------------------------ 6

Outcome property_suites() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ud(0.1, 3.0);
  auto random_point = [&](int n) {
    std::vector<double> x(static_cast<std::size_t>(2 * n));
    for (auto& v : x) v = u(rng);
    return GroupPoint(x, u(rng));
  };
  auto dist = [](const GroupPoint& p, const GroupPoint& q) {
    double m = 0.0;
    for (int i = 0; i < p.dim(); ++i) m = std::max(m, std::abs(p.coords()[i] - q.coords()[i]));
    return m;
  };
  double group = 0.0, dil = 0.0, homog = 0.0, phi = 0.0;
  for (int n : {1, 2}) {
    for (double a : {0.0, 0.5, 1.0, 3.0}) {
      for (Variant v : {Variant::Full, Variant::Polarized}) {
        const GroupContext ctx(n, a, v);
        for (int k = 0; k < 200; ++k) {
          const auto p = random_point(n), q = random_point(n), r = random_point(n);
          const double d = ud(rng);
          const auto e = GroupPoint::identity(n);
          group = std::max({group, dist(multiply(ctx, multiply(ctx, p, q), r), multiply(ctx, p, multiply(ctx, q, r))),
                            dist(multiply(ctx, p, e), p), dist(multiply(ctx, e, p), p),
                            dist(multiply(ctx, p, inverse(ctx, p)), e), dist(multiply(ctx, inverse(ctx, p), p), e)});
          dil = std::max(dil, dist(dilate(multiply(ctx, p, q), d), multiply(ctx, dilate(p, d), dilate(q, d))) /
                                  std::max(1.0, d * d));
        }
      }
    }
    for (int k = 0; k < 500; ++k) {
      const auto p = random_point(n);
      const double d = ud(rng);
      for (NormKind kind : {NormKind::Rho0, NormKind::Rho1, NormKind::Rho2, NormKind::Rho3}) {
        const QuasiNormSpec s(kind, 1.3);
        homog = std::max(homog, rel_err(evaluate(s, dilate(p, d)), d * evaluate(s, p)));
      }
      double x2 = 0.0;
      for (double v : p.x()) x2 += v * v;
      const double f = phi2(p);
      phi = std::max(phi, std::abs(f * f - x2 * f - p.t() * p.t()) / std::max(1.0, f * f));
    }
  }

  double pou = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double r = std::exp(std::log(1e-6) * std::uniform_real_distribution<double>(0.0, 1.0)(rng));
    double s = 0.0;
    for (int j = 0; j < 64; ++j) s += theta_partition(std::ldexp(r, j));
    pou = std::max(pou, std::abs(s - 1.0));
  }

  double adj = 0.0;
  auto defect = [&](const OscOperator& op, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> nd;
    GridFunction f(op.grids().in.size()), h(op.grids().out.size());
    for (auto& v : f) v = {nd(g), nd(g)};
    for (auto& v : h) v = {nd(g), nd(g)};
    const cplx lhs = inner_product(op.grids().out, op.apply(f), h);
    const cplx rhs = inner_product(op.grids().in, f, op.apply_adjoint(h));
    return std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);
  };
  const GroupContext h1(1, 1.0);
  const QuasiNormSpec kor(NormKind::Rho1);
  {
    const auto grids = generic_grids(h1, {0, 0, 1}, {0.3, 0.3, 0.3}, 6);
    adj = std::max(adj, defect(OscOperator(OscKernelSpec{h1, group_generic_kernel(9.0, PhaseSpec(kor, 1.0), grids)},
                                           grids), 1));
    auto [spec, g1] = euclidean_product_setup()(20.0, 40);
    adj = std::max(adj, defect(OscOperator(spec, g1), 2));
    adj = std::max(adj, defect(OscOperator(OscKernelSpec{h1, DyadicKernel{0, 1.5, 1.0, kor}}, dyadic_grids(h1, kor, 4)), 3));
  }

  double f2min = INFINITY;
  SamplerSpec annulus;
  annulus.seed = 5;
  annulus.count = 2000;
  annulus.region = Region::Annulus;
  for (int n : {1, 2}) {
    const auto pts = sample_points(annulus, n, kor);
    for (double a : {0.1, 0.5, 0.9, 1.0})
      for (double beta : {0.5, 1.0, 2.0})
        for (const auto& p : pts) f2min = std::min(f2min, f2(p, a, beta));
  }

  const bool pass = group <= 1e-12 && dil <= 1e-12 && homog <= 1e-12 && pou <= 1e-12 && phi <= 1e-12 &&
                    adj <= 1e-12 && f2min > 0.0;
  return {pass, "group " + fmt(group, 2) + ", dilation " + fmt(dil, 2) + ", homogeneity " + fmt(homog, 2) +
                    ", partition " + fmt(pou, 2) + ", phi2 residual " + fmt(phi, 2) + ", adjoint " + fmt(adj, 2) +
                    ", min f2 " + fmt(f2min, 3)};
}

// ------------------------------------------------------------ 7

Outcome almost_orthogonality() {
  const std::vector<int> gaps{0, 1, 2};
  const auto r = cross_check_almost_orthogonality(GroupContext(1, 1.0), 1.5, 1.0, QuasiNormSpec(NormKind::Rho1), 0, gaps,
                                                  12);
  std::string d = "norms";
  for (double v : r.norms) d += " " + fmt(v, 5);
  d += " for gaps 0,1,2; rate " + fmt(r.rate, 4) + " (not gated)";
  return {r.non_increasing, d};
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--strict") == 0) {
      strict = true;
    } else if (std::strncmp(argv[i], "--only=", 7) == 0) {
      only = std::atoi(argv[i] + 7);
    } else {
      std::cerr << "usage: acceptance [--strict] [--only=K]\n";
      return 64;
    }
  }

  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {1, "closed-form/AD equivalence", 60, closed_forms_match},
      {2, "C_beta boundary", 60, c_beta_boundary},
      {3, "degeneracy loci", 120, degeneracy_loci},
      {4, "generic decay exponent", 300, generic_decay_exponent},
      {5, "dyadic uniformity", 300, dyadic_uniformity},
      {6, "property suites", 60, property_suites},
      {7, "almost-orthogonality trend", 180, almost_orthogonality},
  };

  bool ok = true;
  for (const auto& c : all) {
    if (only && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    std::printf("criterion %d %s: %s [%s; %.1fs of %.0fs budget%s]%s\n", c.id, c.name, pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", over time",
                !pass && kKnownLimits.count(c.id) ? " (known limitation)" : "");
    std::fflush(stdout);
    if (!pass && (strict || !kKnownLimits.count(c.id))) ok = false;
  }
  return ok ? 0 : 1;
}
