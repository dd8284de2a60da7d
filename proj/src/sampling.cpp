#include "heisosc/sampling.hpp"

#include <cmath>
#include <numbers>

namespace heisosc {

void SamplerSpec::validate() const {
  if (count < 1) throw DomainError("sample count must be >= 1");
  if (region == Region::Annulus && !(lo > 0.0 && lo < hi)) throw DomainError("annulus needs 0 < lo < hi");
}

double halton(std::uint64_t index, unsigned base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

std::vector<unsigned> first_primes(int count) {
  std::vector<unsigned> primes;
  for (unsigned c = 2; static_cast<int>(primes.size()) < count; ++c) {
    bool prime = true;
    for (unsigned p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

GroupPoint project_to_level(const QuasiNormSpec& norm, const GroupPoint& p, double r) {
  const double cur = evaluate(norm, p);
  if (!(cur > 0.0)) throw DomainError("cannot project the origin onto a quasi-sphere");
  return dilate(p, r / cur);
}

std::vector<GroupPoint> sample_points(const SamplerSpec& spec, int n, const QuasiNormSpec& norm) {
  spec.validate();
  const int d = 2 * n + 1;
  const int gauss_dims = d + (d % 2);
  const int dims = gauss_dims + 1;
  const auto primes = first_primes(dims);
  std::mt19937_64 rng(spec.seed);
  std::vector<double> shift(static_cast<std::size_t>(dims));
  for (auto& s : shift) s = uniform01(rng);

  std::vector<GroupPoint> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  std::vector<double> u(static_cast<std::size_t>(dims)), g(static_cast<std::size_t>(gauss_dims));
  for (std::uint64_t i = 1; static_cast<int>(out.size()) < spec.count; ++i) {
    for (int k = 0; k < dims; ++k) u[k] = std::fmod(halton(i, primes[k]) + shift[k], 1.0);
    for (int k = 0; k < gauss_dims; k += 2) {
      const double r = std::sqrt(-2.0 * std::log(1.0 - u[k]));  // 1-u in (0,1]
      g[k] = r * std::cos(2.0 * std::numbers::pi * u[k + 1]);
      g[k + 1] = r * std::sin(2.0 * std::numbers::pi * u[k + 1]);
    }
    std::vector<double> c(g.begin(), g.begin() + d);
    double s = 0.0;
    for (double v : c) s += v * v;
    if (s < 1e-24) continue;
    const auto p = GroupPoint::from_coords(std::move(c));
    double radius = 1.0;
    if (spec.region == Region::Annulus) {
      radius = spec.lo * std::pow(spec.hi / spec.lo, u[dims - 1]);
    }
    out.push_back(project_to_level(norm, p, radius));
  }
  return out;
}

}  // namespace heisosc
