#include "heisosc/degeneracy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "heisosc/fields.hpp"

namespace heisosc {

double c_beta(double beta) {
  if (beta < 0.0) throw DomainError("C_beta needs beta >= 0");
  const double k = 2.0 * beta + 5.0;
  return (beta + 2.0) / 2.0 * (k + std::sqrt(k * k - 9.0));
}

double discriminant(double a, double beta) {
  const double a2 = a * a;
  return 4.0 * a2 * a2 - 4.0 * (beta + 2.0) * (2.0 * beta + 5.0) * a2 + 9.0 * (beta + 2.0) * (beta + 2.0);
}

double critical_slope(double beta) {
  if (beta < 0.0) throw DomainError("critical slope needs beta >= 0");
  return (beta + 2.0) * ((beta + 1.0) + std::sqrt((beta + 1.0) * (beta + 4.0))) / (2.0 * (beta + 1.0));
}

std::vector<double> paraboloid_slopes(double a, double beta) {
  const double a2 = a * a;
  double delta = discriminant(a, beta);
  // rounding in a^2 = C_beta leaves |delta| at the level of its largest term times eps
  const double scale = 4.0 * a2 * a2 + 9.0 * (beta + 2.0) * (beta + 2.0);
  if (std::abs(delta) <= 1e-12 * scale) delta = 0.0;
  if (delta < 0.0) return {};
  const double base = 2.0 * a2 - 3.0 * (beta + 2.0);
  const double den = 4.0 * (beta + 1.0);
  std::vector<double> out;
  if (delta == 0.0) {
    if (base > 0.0) out.push_back(base / den);
    return out;
  }
  for (double s : {base - std::sqrt(delta), base + std::sqrt(delta)}) {
    if (s / den > 0.0) out.push_back(s / den);
  }
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Certified: return "certified";
    case Verdict::DegeneracyFound: return "degeneracy-found";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

struct Reduced {
  GroupContext ctx;
  PhaseSpec phase;
  QuasiNormSpec level;  // b = 1 norm used for level sets
  double b;
  DetNormalization mode;
};

Reduced reduce(const GroupContext& ctx, const QuasiNormSpec& spec, double beta, DetNormalization mode) {
  if (!is_smooth(spec.kind)) throw DomainError("rho0 is not smooth; no Hessian to certify");
  check_field_context(ctx);
  const QuasiNormSpec unit(spec.kind, 1.0);
  return {GroupContext(ctx.n, ctx.a / spec.b, ctx.variant), PhaseSpec(unit, beta), unit, spec.b, mode};
}

double nd(const Reduced& r, const GroupPoint& p) { return normalized_mixed_hessian_det(r.ctx, r.phase, p, r.mode); }

GroupPoint unscale(const GroupPoint& p, double b) {
  std::vector<double> c(p.coords().begin(), p.coords().end());
  for (auto& v : c) v /= b;
  return GroupPoint::from_coords(std::move(c));
}

double distance(const GroupPoint& p, const GroupPoint& q) {
  double s = 0.0;
  for (int i = 0; i < p.dim(); ++i) s += (p.coords()[i] - q.coords()[i]) * (p.coords()[i] - q.coords()[i]);
  return std::sqrt(s);
}

/// Zero of f on the level-set path between p and q, assuming opposite signs.
NearZero bisect(const Reduced& r, GroupPoint p, double fp, GroupPoint q, double /*fq*/) {
  const double rp = evaluate(r.level, p), rq = evaluate(r.level, q);
  auto at = [&](double s) {
    std::vector<double> c(static_cast<std::size_t>(p.dim()));
    for (int i = 0; i < p.dim(); ++i) c[i] = (1.0 - s) * p.coords()[i] + s * q.coords()[i];
    return project_to_level(r.level, GroupPoint::from_coords(std::move(c)), std::pow(rp, 1.0 - s) * std::pow(rq, s));
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = nd(r, at(mid));
    if (fm == 0.0) return {at(mid), 0.0};
    if ((fm < 0.0) == (fp < 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const auto a = at(lo), b = at(hi);
  const double fa = nd(r, a), fb = nd(r, b);
  return std::abs(fa) <= std::abs(fb) ? NearZero{a, fa} : NearZero{b, fb};
}

NearZero refine_reduced(const Reduced& r, const GroupPoint& start, int steps) {
  const double level = evaluate(r.level, start);
  GroupPoint best = start;
  double fbest = nd(r, best);
  double h = 0.05;
  const int d = start.dim();
  for (int it = 0; it < steps && fbest != 0.0; ++it) {
    bool improved = false;
    for (int i = 0; i < d; ++i) {
      // t scales like rho^2, the horizontal coordinates like rho
      const double step = h * (i == d - 1 ? level * level : level);
      for (double sgn : {1.0, -1.0}) {
        std::vector<double> c(best.coords().begin(), best.coords().end());
        c[i] += sgn * step;
        const auto cand = GroupPoint::from_coords(std::move(c));
        if (cand.is_identity()) continue;
        const auto proj = project_to_level(r.level, cand, level);
        const double f = nd(r, proj);
        if (std::abs(f) < std::abs(fbest)) {
          best = proj;
          fbest = f;
          improved = true;
          break;
        }
      }
    }
    if (!improved) h *= 0.5;
  }
  return {best, fbest};
}

bool coord_less(const NearZero& a, const NearZero& b) {
  return std::lexicographical_compare(a.point.coords().begin(), a.point.coords().end(), b.point.coords().begin(),
                                      b.point.coords().end());
}

/// Greedy clustering in a fixed order; each cluster keeps its smallest member.
std::vector<NearZero> cluster(std::vector<NearZero> pts, double radius) {
  std::sort(pts.begin(), pts.end(), [](const NearZero& a, const NearZero& b) {
    if (std::abs(a.normalized_det) != std::abs(b.normalized_det))
      return std::abs(a.normalized_det) < std::abs(b.normalized_det);
    return coord_less(a, b);
  });
  std::vector<NearZero> out;
  for (const auto& p : pts) {
    const bool near = std::any_of(out.begin(), out.end(), [&](const NearZero& q) { return distance(p.point, q.point) < radius; });
    if (!near) out.push_back(p);
  }
  std::sort(out.begin(), out.end(), coord_less);
  return out;
}

}  // namespace

NearZero refine_minimum(const GroupContext& ctx, const PhaseSpec& phase, const GroupPoint& start, int steps,
                        DetNormalization mode) {
  if (phase.norm.b != 1.0) throw DomainError("refine_minimum expects a b = 1 phase; reduce first");
  const Reduced r{ctx, phase, QuasiNormSpec(phase.norm.kind, 1.0), 1.0, mode};
  return refine_reduced(r, start, steps);
}

CertReport certify(const GroupContext& ctx, const QuasiNormSpec& spec, double beta, const SamplerSpec& sampler,
                   const CertOptions& opts) {
  sampler.validate();
  if (!(opts.tol > 0.0)) throw DomainError("tolerance must be positive");
  const Reduced r = reduce(ctx, spec, beta, opts.normalization);

  CertReport rep;
  rep.n = ctx.n;
  rep.a = ctx.a;
  rep.b = spec.b;
  rep.beta = beta;
  rep.norm = spec.kind;
  rep.variant = ctx.variant;

  const auto pts = sample_points(sampler, ctx.n, r.level);
  rep.sample_count = static_cast<int>(pts.size());
  std::vector<double> vals(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = nd(r, pts[i]);

  std::vector<NearZero> candidates;
  std::vector<std::size_t> order(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return std::abs(vals[i]) != std::abs(vals[j]) ? std::abs(vals[i]) < std::abs(vals[j]) : i < j;
  });
  for (std::size_t i = 0; i < order.size(); ++i) candidates.push_back({pts[order[i]], vals[order[i]]});
  candidates.resize(std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(opts.refine_starts)));
  if (sampler.refine) {
    for (auto& c : candidates) c = refine_reduced(r, c.point, opts.refine_steps);
  }

  // sign changes: bisect between each sample and its nearest opposite-signed neighbour
  const bool has_pos = std::any_of(vals.begin(), vals.end(), [](double v) { return v > 0.0; });
  const bool has_neg = std::any_of(vals.begin(), vals.end(), [](double v) { return v < 0.0; });
  rep.sign_change = has_pos && has_neg;
  if (rep.sign_change) {
    std::vector<std::pair<double, std::pair<std::size_t, std::size_t>>> pairs;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double best = 1e300;
      std::size_t bj = i;
      for (std::size_t j = 0; j < pts.size(); ++j) {
        if ((vals[i] < 0.0) == (vals[j] < 0.0)) continue;
        const double dd = distance(pts[i], pts[j]);
        if (dd < best) {
          best = dd;
          bj = j;
        }
      }
      if (bj != i) pairs.push_back({best, {std::min(i, bj), std::max(i, bj)}});
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    const std::size_t keep = std::min<std::size_t>(pairs.size(), static_cast<std::size_t>(4 * opts.refine_starts));
    for (std::size_t k = 0; k < keep; ++k) {
      const auto [i, j] = pairs[k].second;
      candidates.push_back(bisect(r, pts[i], vals[i], pts[j], vals[j]));
    }
  }

  auto best = std::min_element(candidates.begin(), candidates.end(), [](const NearZero& a, const NearZero& b) {
    return std::abs(a.normalized_det) < std::abs(b.normalized_det);
  });
  rep.min_abs_normalized_det = std::abs(best->normalized_det);
  rep.argmin = unscale(best->point, r.b);

  std::vector<NearZero> below;
  for (const auto& c : candidates) {
    if (std::abs(c.normalized_det) < opts.tol) below.push_back(c);
  }
  for (auto& z : cluster(below, 0.05)) rep.near_zero.push_back({unscale(z.point, r.b), z.normalized_det});

  if (rep.min_abs_normalized_det < opts.tol) {
    rep.verdict = Verdict::DegeneracyFound;
  } else if (rep.sign_change || rep.min_abs_normalized_det < opts.near_miss_factor * opts.tol) {
    rep.verdict = Verdict::Inconclusive;
  } else {
    rep.verdict = Verdict::Certified;
  }
  return rep;
}

std::vector<NearZero> zero_scan(const GroupContext& ctx, const QuasiNormSpec& spec, double beta, int resolution,
                                double tol, DetNormalization mode) {
  if (resolution < 2) throw DomainError("zero scan resolution must be >= 2");
  const Reduced r = reduce(ctx, spec, beta, mode);
  const int d = ctx.dim();
  const int angles = d - 1;
  // node-centred: polar angles include 0 and pi, so the t axis, the equator
  // and (for even resolution) the coordinate meridians are grid nodes
  std::vector<int> size(static_cast<std::size_t>(angles), resolution + 1);
  size.back() = 2 * resolution;
  std::size_t total = 1;
  for (int s : size) total *= static_cast<std::size_t>(s);

  auto point_of = [&](std::size_t flat) {
    std::vector<double> theta(static_cast<std::size_t>(angles));
    for (int k = angles - 1; k >= 0; --k) {
      const int idx = static_cast<int>(flat % static_cast<std::size_t>(size[k]));
      flat /= static_cast<std::size_t>(size[k]);
      theta[k] = std::numbers::pi * idx / resolution;
    }
    // t first so that the polar axis is the t axis
    std::vector<double> e(static_cast<std::size_t>(d));
    double sin_prod = 1.0;
    for (int k = 0; k < angles; ++k) {
      e[k] = sin_prod * std::cos(theta[k]);
      sin_prod *= std::sin(theta[k]);
    }
    e[angles] = sin_prod;
    std::vector<double> c(static_cast<std::size_t>(d));
    c[d - 1] = e[0];
    for (int i = 0; i < d - 1; ++i) c[i] = e[i + 1];
    return project_to_level(r.level, GroupPoint::from_coords(std::move(c)), 1.0);
  };

  std::vector<GroupPoint> pts;
  std::vector<double> vals;
  pts.reserve(total);
  vals.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    pts.push_back(point_of(i));
    vals.push_back(nd(r, pts.back()));
  }

  std::vector<std::size_t> stride(static_cast<std::size_t>(angles), 1);
  for (int k = angles - 2; k >= 0; --k) stride[k] = stride[k + 1] * static_cast<std::size_t>(size[k + 1]);
  auto neighbor = [&](std::size_t flat, int k, int dir) -> std::ptrdiff_t {
    const int idx = static_cast<int>((flat / stride[k]) % static_cast<std::size_t>(size[k]));
    int nidx = idx + dir;
    if (k == angles - 1) {
      nidx = (nidx + size[k]) % size[k];
    } else if (nidx < 0 || nidx >= size[k]) {
      return -1;
    }
    return static_cast<std::ptrdiff_t>(flat) + static_cast<std::ptrdiff_t>(nidx - idx) * static_cast<std::ptrdiff_t>(stride[k]);
  };

  std::vector<NearZero> found;
  for (std::size_t i = 0; i < total; ++i) {
    bool local_min = true;
    for (int k = 0; k < angles; ++k) {
      for (int dir : {-1, 1}) {
        const auto j = neighbor(i, k, dir);
        if (j < 0) continue;
        const auto ju = static_cast<std::size_t>(j);
        if (std::abs(vals[ju]) < std::abs(vals[i])) local_min = false;
        if (dir == 1 && (vals[i] < 0.0) != (vals[ju] < 0.0) && vals[i] != 0.0 && vals[ju] != 0.0) {
          found.push_back(bisect(r, pts[i], vals[i], pts[ju], vals[ju]));
        }
      }
    }
    if (std::abs(vals[i]) < tol) {
      found.push_back({pts[i], vals[i]});
    } else if (local_min) {
      found.push_back(refine_reduced(r, pts[i], 50));
    }
  }
  std::vector<NearZero> below;
  for (const auto& f : found) {
    if (std::abs(f.normalized_det) < tol) below.push_back(f);
  }
  auto clustered = cluster(std::move(below), 0.02);
  for (auto& z : clustered) z.point = unscale(z.point, r.b);
  return clustered;
}

SeparationReport gradient_separation(const GroupContext& ctx, const QuasiNormSpec& spec, double beta, double ratio,
                                     const SamplerSpec& sampler) {
  if (!(ratio > 1.0)) throw DomainError("separation ratio must be > 1");
  if (!is_smooth(spec.kind)) throw DomainError("rho0 is not smooth");
  sampler.validate();
  const PhaseSpec phase(spec, beta);
  SamplerSpec ys = sampler;
  ys.region = Region::Annulus;
  if (sampler.region == Region::UnitQuasiSphere) {
    ys.lo = 0.5;
    ys.hi = 2.0;
  }
  const auto yset = sample_points(ys, ctx.n, spec);
  SamplerSpec xs = ys;
  xs.seed = sampler.seed ^ 0x9e3779b97f4a7c15ULL;
  xs.lo = ys.hi;
  xs.hi = ys.hi * ratio * 64.0;
  const auto xset = sample_points(xs, ctx.n, spec);

  SeparationReport rep;
  rep.infimum = 1e300;
  const int d = ctx.dim();
  std::vector<Jet2> y(static_cast<std::size_t>(d)), xj(static_cast<std::size_t>(d)), prod(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < yset.size(); ++i) {
    const auto& yp = yset[i];
    // pair each y with a few x's, cycling deterministically through the x set
    for (std::size_t k = 0; k < 4; ++k) {
      const auto& xp = xset[(i * 4 + k) % xset.size()];
      if (evaluate(spec, multiply(ctx, xp, yp)) < ratio * evaluate(spec, yp)) continue;
      ++rep.admissible_pairs;
      for (int m = 0; m < d; ++m) xj[m] = Jet2(xp.coords()[m]);
      double g2 = 0.0;
      for (int m = 0; m < d; ++m) {
        for (int q = 0; q < d; ++q) y[q] = Jet2(yp.coords()[q], q == m ? 1.0 : 0.0, 0.0, 0.0);
        multiply_raw<Jet2>(ctx, xj, y, prod);
        const Jet2 f = phase_raw<Jet2>(phase, y) - phase_raw<Jet2>(phase, prod);
        g2 += f.d1 * f.d1;
      }
      const double g = std::sqrt(g2);
      if (g < rep.infimum) {
        rep.infimum = g;
        rep.arg_x = xp;
        rep.arg_y = yp;
      }
    }
  }
  if (rep.admissible_pairs == 0) rep.infimum = 0.0;
  return rep;
}

DichotomyReport annulus_dichotomy(const QuasiNormSpec& spec, int n, const SamplerSpec& sampler, double c) {
  if (!(c >= 1.0)) throw DomainError("annulus constant c must be >= 1");
  if (!is_smooth(spec.kind)) throw DomainError("rho0 is not smooth");
  SamplerSpec s = sampler;
  s.region = Region::Annulus;
  s.lo = 1.0 / c;
  s.hi = c;
  if (c == 1.0) s.region = Region::UnitQuasiSphere;
  const auto qs = sample_points(s, n, spec);
  std::mt19937_64 rng(sampler.seed + 1);
  DichotomyReport rep;
  const int d = 2 * n + 1;
  std::vector<Jet2> pj(static_cast<std::size_t>(d));
  for (const auto& q : qs) {
    const double delta = std::pow(10.0, -3.0 * uniform01(rng));  // log-uniform in (1e-3, 1]
    const auto p = dilate(q, 1.0 / delta);
    double horiz = 1e300;
    double vert = 1e300;
    for (int m = 0; m < d; ++m) {
      for (int k = 0; k < d; ++k) pj[k] = Jet2(p.coords()[k], k == m ? 1.0 : 0.0, 0.0, 0.0);
      double g = std::abs(norm_raw<Jet2>(spec, pj).d1);
      if (m == d - 1) g /= delta;
      const double need = g > 0.0 ? std::max(g, 1.0 / g) : 1e300;
      if (m < d - 1) {
        horiz = std::min(horiz, need);
      } else {
        vert = need;
      }
    }
    const double c0 = std::min(horiz, vert);
    if (horiz <= vert) {
      ++rep.horizontal_branch;
    } else {
      ++rep.vertical_branch;
    }
    if (c0 > rep.c0) {
      rep.c0 = c0;
      rep.worst = p;
      rep.worst_delta = delta;
    }
  }
  return rep;
}

RegionCheck theorem_region(NormKind kind, double a, double b, double beta) {
  const double r = (a / b) * (a / b);
  std::ostringstream os;
  os.precision(6);
  RegionCheck rc;
  if (kind == NormKind::Rho1) {
    const double cb = c_beta(beta);
    rc.inside = r > 0.0 && r < cb;
    os << (rc.inside ? "inside" : "outside") << " (a^2/b^2 = " << r << (rc.inside ? " < " : " >= ") << "C_beta = " << cb
       << ")";
    if (r == 0.0) os.str("outside (a = 0 is the Euclidean case)");
  } else if (kind == NormKind::Rho2) {
    rc.inside = r <= 1.0;
    os << (rc.inside ? "inside" : "outside") << " (a^2/b^2 = " << r << (rc.inside ? " <= 1" : " > 1") << ")";
  } else {
    os << "no theorem region for " << to_string(kind);
  }
  rc.description = os.str();
  return rc;
}

}  // namespace heisosc
