#include <cmath>

#include "doctest.h"
#include "nspinn/irk.hpp"
#include "oracles.hpp"

using namespace nspinn;

TEST_CASE("one stage is the implicit midpoint rule") {
  const auto t = irk_coefficients(1);
  CHECK(t.a(0, 0) == doctest::Approx(0.5));
  CHECK(t.b(0) == doctest::Approx(1.0));
  CHECK(t.c(0) == doctest::Approx(0.5));
}

TEST_CASE("two stages match the closed-form Gauss tableau") {
  // By hand: Hammer-Hollingsworth coefficients.
  const auto t = irk_coefficients(2);
  const double s = std::sqrt(3.0) / 6.0;
  CHECK(t.c(0) == doctest::Approx(0.5 - s).epsilon(1e-15));
  CHECK(t.c(1) == doctest::Approx(0.5 + s).epsilon(1e-15));
  CHECK(t.a(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(t.a(0, 1) == doctest::Approx(0.25 - s).epsilon(1e-14));
  CHECK(t.a(1, 0) == doctest::Approx(0.25 + s).epsilon(1e-14));
  CHECK(t.a(1, 1) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(t.b(0) == doctest::Approx(0.5));
}

TEST_CASE("nodes are the shifted Legendre roots") {
  for (int R : {3, 5, 10}) {
    const auto t = irk_coefficients(R);
    for (int k = 0; k < R; ++k) CHECK(std::abs(oracle::legendre(R, 2.0 * t.c(k) - 1.0)) <= 1e-12);
    for (int k = 1; k < R; ++k) CHECK(t.c(k) > t.c(k - 1));
  }
}

TEST_CASE("property: simplifying conditions B(2R) and C(R)") {
  for (int R : {1, 2, 4, 10, 20, 40}) {
    CAPTURE(R);
    const auto t = irk_coefficients(R);
    CHECK(std::abs(t.b.sum() - 1.0) <= 1e-12);
    for (int p = 1; p <= 2 * R; ++p) {
      double q = 0.0;
      for (int k = 0; k < R; ++k) q += t.b(k) * std::pow(t.c(k), p - 1);
      CHECK(std::abs(q - 1.0 / p) <= 1e-11);
    }
    for (int i = 0; i < R; ++i) {
      CHECK(std::abs(t.a.row(i).sum() - t.c(i)) <= 1e-12);
      for (int p = 1; p <= R; ++p) {
        double q = 0.0;
        for (int k = 0; k < R; ++k) q += t.a(i, k) * std::pow(t.c(k), p - 1);
        CHECK(std::abs(q - std::pow(t.c(i), p) / p) <= 1e-10);
      }
    }
  }
}

TEST_CASE("stage count is bounded") {
  CHECK_THROWS_AS(irk_coefficients(0), std::invalid_argument);
  CHECK_THROWS_AS(irk_coefficients(101), std::invalid_argument);
  CHECK_NOTHROW(irk_coefficients(100));
}
