#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "heisosc/group.hpp"
#include "heisosc/quasinorm.hpp"

namespace heisosc {

enum class Region { UnitQuasiSphere, Annulus };

struct SamplerSpec {
  std::uint64_t seed = 0;
  int count = 256;
  Region region = Region::UnitQuasiSphere;
  double lo = 0.5;  ///< annulus bounds, ignored on the sphere
  double hi = 2.0;
  bool refine = true;

  void validate() const;
};

/// Uniform double in [0, 1) from the top 53 bits; unlike
/// std::uniform_real_distribution this is identical across standard libraries.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Radical inverse of `index` in the given base.
double halton(std::uint64_t index, unsigned base);

/// First `count` primes.
std::vector<unsigned> first_primes(int count);

/// p dilated onto the level set rho = r of `norm` (p must not be the origin).
GroupPoint project_to_level(const QuasiNormSpec& norm, const GroupPoint& p, double r);

/// Deterministic point set for the region: Halton points with a seeded
/// Cranley-Patterson shift, Box-Muller to a Euclidean direction, dilation
/// onto the quasi-sphere of `norm`, and a log-uniform radius on the annulus.
std::vector<GroupPoint> sample_points(const SamplerSpec& spec, int n, const QuasiNormSpec& norm);

}  // namespace heisosc
