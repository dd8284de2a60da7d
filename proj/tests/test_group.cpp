#include "doctest.h"
#include "heisosc/group.hpp"
#include "test_support.hpp"

using namespace heisosc;
using testing_support::random_point;

namespace {

void check_equal(const GroupPoint& p, const GroupPoint& q, double tol = 1e-12) {
  REQUIRE(p.dim() == q.dim());
  for (int i = 0; i < p.dim(); ++i) CHECK(p.coords()[i] == doctest::Approx(q.coords()[i]).epsilon(tol));
}

}  // namespace

TEST_CASE("multiplication by the identity") {
  GroupContext ctx(1, 1.0);
  GroupPoint p({0.3, -0.7}, 1.1);
  check_equal(multiply(ctx, p, GroupPoint::identity(1)), p);
  check_equal(multiply(ctx, GroupPoint::identity(1), p), p);
}

TEST_CASE("product of the two horizontal unit vectors") {
  GroupContext ctx(1, 1.0);
  const auto r = multiply(ctx, GroupPoint({1, 0}, 0), GroupPoint({0, 1}, 0));
  check_equal(r, GroupPoint({1, 1}, -2));
}

TEST_CASE("inverse") {
  const GroupContext h1(1, 1.0);
  check_equal(inverse(h1, GroupPoint({1, 2}, 3)), GroupPoint({-1, -2}, -3));
  CHECK(inverse(h1, GroupPoint::identity(1)).is_identity());
  // polarized: (x,t)^{-1} = (-x, -t - 2a x_1 x_2)
  check_equal(inverse(GroupContext(1, 1.0, Variant::Polarized), GroupPoint({1, 2}, 3)), GroupPoint({-1, -2}, -7));
  std::mt19937_64 rng(3);
  for (Variant v : {Variant::Full, Variant::Polarized}) {
    GroupContext ctx(2, 0.7, v);
    for (int i = 0; i < 20; ++i) {
      const auto p = random_point(rng, 2);
      const auto e = GroupPoint::identity(2);
      check_equal(multiply(ctx, p, inverse(ctx, p)), e);
      check_equal(multiply(ctx, inverse(ctx, p), p), e);
      check_equal(inverse(ctx, inverse(ctx, p)), p);
    }
  }
}

TEST_CASE("dilation") {
  check_equal(dilate(GroupPoint({1, 1}, 1), 2.0), GroupPoint({2, 2}, 4));
  check_equal(dilate(GroupPoint({1, 1}, 1), 1.0), GroupPoint({1, 1}, 1));
  CHECK_THROWS_AS(dilate(GroupPoint({1, 1}, 1), 0.0), DomainError);
  CHECK_THROWS_AS(dilate(GroupPoint({1, 1}, 1), -1.0), DomainError);
}

TEST_CASE("relative displacement") {
  {
    const GroupContext pol(2, 0.7, Variant::Polarized);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 20; ++i) {
      const auto p = random_point(rng, 2), q = random_point(rng, 2);
      check_equal(multiply(pol, q, relative(pol, q, p)), p);
    }
  }
  GroupContext ctx(1, 1.0);
  GroupPoint p({1, 0}, 0), q({0, 1}, 0);
  check_equal(relative(ctx, q, p), GroupPoint({1, -1}, -2));
  CHECK(relative(ctx, p, p).is_identity());
  check_equal(relative(ctx, GroupPoint::identity(1), p), p);

  std::vector<double> out(3);
  relative_raw<double>(ctx, q.coords(), p.coords(), out);
  CHECK(out[2] == doctest::Approx(-2.0));
}

TEST_CASE("symplectic pairing") {
  GroupContext full(1, 1.0), pol(1, 1.0, Variant::Polarized);
  const std::vector<double> e1{1, 0}, e2{0, 1};
  CHECK(symplectic_pairing(full, e1, e2) == 1.0);
  CHECK(symplectic_pairing(pol, e1, e2) == 1.0);
  CHECK(symplectic_pairing(pol, e1, e1) == 0.0);
  CHECK(symplectic_pairing(pol, e2, e1) == 0.0);

  std::mt19937_64 rng(11);
  GroupContext full2(2, 1.0);
  for (int i = 0; i < 20; ++i) {
    const auto p = random_point(rng, 2), q = random_point(rng, 2);
    CHECK(symplectic_pairing(full2, p.x(), p.x()) == doctest::Approx(0.0));
    CHECK(symplectic_pairing(full2, p.x(), q.x()) == doctest::Approx(-symplectic_pairing(full2, q.x(), p.x())));
  }
  CHECK_THROWS_AS(symplectic_pairing(full2, e1, e2), DimensionError);
}

TEST_CASE("associativity and dilation automorphism, both variants") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ud(0.2, 3.0);
  for (Variant v : {Variant::Full, Variant::Polarized}) {
    for (int n : {1, 2, 3}) {
      GroupContext ctx(n, 1.3, v);
      for (int i = 0; i < 50; ++i) {
        const auto p = random_point(rng, n), q = random_point(rng, n), r = random_point(rng, n);
        check_equal(multiply(ctx, multiply(ctx, p, q), r), multiply(ctx, p, multiply(ctx, q, r)));
        const double d = ud(rng);
        check_equal(multiply(ctx, dilate(p, d), dilate(q, d)), dilate(multiply(ctx, p, q), d));
      }
    }
  }
}

TEST_CASE("dimension checks") {
  GroupContext ctx(2, 1.0);
  CHECK_THROWS_AS(multiply(ctx, GroupPoint({1, 0}, 0), GroupPoint({1, 0}, 0)), DimensionError);
  CHECK_THROWS_AS(GroupPoint({1, 0, 0}, 0), DimensionError);
  CHECK_THROWS_AS(GroupPoint::from_coords({1, 2}), DimensionError);
  CHECK_THROWS_AS(GroupContext(0, 1.0), DomainError);
  CHECK(GroupContext(1, 0.0).euclidean());
  CHECK(variant_from_string("polarized") == Variant::Polarized);
  CHECK_THROWS_AS(variant_from_string("other"), DomainError);
}
