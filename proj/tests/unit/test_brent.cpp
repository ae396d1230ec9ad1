#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "valvest/brent.hpp"

using valvest::brent::brent_min;

TEST_CASE("smooth quadratic") {
  const auto m = brent_min([](double x) { return (x - 2.0) * (x - 2.0); }, 0.0, 5.0, 1e-8);
  CHECK(m.x == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(m.fx < 1e-14);
  CHECK(m.evaluations <= valvest::brent::kMaxEvaluations);
}

TEST_CASE("kink") {
  const auto m = brent_min([](double x) { return std::abs(x - 1.0); }, -3.0, 4.0, 1e-6);
  CHECK(m.x == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("minimum on the boundary") {
  const auto m = brent_min([](double x) { return x; }, 1.0, 2.0, 1e-6);
  CHECK(m.x == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("log-space bracket") {
  // Minimum at ln(0.008) of a function of ln V.
  const double target = std::log(0.008);
  const auto m = brent_min([&](double z) { return std::cosh(z - target); }, std::log(1e-5), std::log(1e-1), 1e-6);
  CHECK(std::exp(m.x) == doctest::Approx(0.008).epsilon(1e-5));
}

TEST_CASE("invalid arguments") {
  auto f = [](double x) { return x * x; };
  CHECK_THROWS_AS(brent_min(f, 1.0, 1.0, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(brent_min(f, 0.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("non-finite values are avoided") {
  const auto m = brent_min([](double x) { return x < 0.5 ? std::nan("") : (x - 0.7) * (x - 0.7); }, 0.0, 1.0, 1e-7);
  CHECK(m.x == doctest::Approx(0.7).epsilon(1e-5));
}
