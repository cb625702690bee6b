#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "stocon/brent.hpp"

using namespace stocon;

TEST_CASE("quadratic minimum") {
  auto r = brent_minimize([](double a) { return (a - 0.3) * (a - 0.3); }, 0.0, 1.0, 1e-7, 10);
  CHECK(r.x == doctest::Approx(0.3).epsilon(1e-5));
  CHECK(r.fx == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("multistart escapes the wrong basin") {
  auto fn = [](double a) {
    return std::min((a - 0.1) * (a - 0.1), (a - 0.9) * (a - 0.9) + 0.01);
  };
  auto r = brent_minimize(fn, 0.0, 1.0, 1e-6, 10);
  CHECK(r.x == doctest::Approx(0.1).epsilon(1e-3));
  CHECK(std::abs(r.x - 0.1) < 1e-4);
}

TEST_CASE("constant function returns the lower bound") {
  auto r = brent_minimize([](double) { return 4.25; }, -2.0, 3.0, 1e-6, 10);
  CHECK(r.x == -2.0);
  CHECK(r.fx == 4.25);
}

TEST_CASE("degenerate interval") {
  auto r = brent_minimize([](double a) { return a * a; }, 2.0, 2.0, 1e-6, 10);
  CHECK(r.x == 2.0);
  CHECK(r.fx == 4.0);
}

TEST_CASE("steep edge minimum is found") {
  auto r = brent_minimize([](double a) { return -a; }, 0.0, 1.0, 1e-6, 10);
  CHECK(r.x == doctest::Approx(1.0).epsilon(1e-5));
}
