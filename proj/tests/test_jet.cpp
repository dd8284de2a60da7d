#include "doctest.h"
#include "heisosc/jet.hpp"

using namespace heisosc;

TEST_CASE("product rule on monomials") {
  // f(x, y) = x^2 y with x seeded along e1 and y along e2
  const Jet2 x(1.5, 1, 0, 0), y(-0.7, 0, 1, 0);
  const Jet2 f = x * x * y;
  CHECK(f.v == doctest::Approx(1.5 * 1.5 * -0.7));
  CHECK(f.d1 == doctest::Approx(2 * 1.5 * -0.7));
  CHECK(f.d2 == doctest::Approx(1.5 * 1.5));
  CHECK(f.d12 == doctest::Approx(2 * 1.5));
}

TEST_CASE("second derivative along a single direction") {
  const Jet2 x(0.8, 1, 1, 0);
  CHECK((x * x * x).d12 == doctest::Approx(6 * 0.8));
  CHECK(pow(x, 2.5).d12 == doctest::Approx(2.5 * 1.5 * std::pow(0.8, 0.5)));
  CHECK(sqrt(x).d12 == doctest::Approx(-0.25 * std::pow(0.8, -1.5)));
  CHECK(exp(x).d12 == doctest::Approx(std::exp(0.8)));
  CHECK(log(x).d12 == doctest::Approx(-1.0 / 0.64));
  CHECK(sin(x).d12 == doctest::Approx(-std::sin(0.8)));
  CHECK(cos(x).d12 == doctest::Approx(-std::cos(0.8)));
  CHECK((1.0 / x).d12 == doctest::Approx(2.0 / (0.8 * 0.8 * 0.8)));
}

TEST_CASE("seeded mixed term follows the chain rule") {
  // x = p + e1 v + e2 w + e1e2 c  =>  g(x).d12 = g' c + g'' v w
  const Jet2 x(0.3, 2.0, -1.0, 0.5);
  const Jet2 g = exp(x);
  CHECK(g.d12 == doctest::Approx(std::exp(0.3) * 0.5 + std::exp(0.3) * 2.0 * -1.0));
  const Jet2 s = x - x;
  CHECK(s.v == 0.0);
  CHECK(s.d12 == 0.0);
  CHECK((x / x).d1 == doctest::Approx(0.0));
}
