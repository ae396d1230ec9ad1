#include <doctest.h>

#include <random>
#include <stdexcept>
#include <set>

#include "../support/kmeans_dp.hpp"
#include "valvest/errors.hpp"
#include "valvest/kmeans.hpp"

using namespace valvest::kmeans;

TEST_CASE("well separated groups") {
  const std::vector<double> v{1.0, 1.1, 0.9, 5.0, 5.2, 9.0};
  const auto c = kmeans_1d(v, 3, 1);
  REQUIRE(c.centers.size() == 3);
  CHECK(c.centers[0] == doctest::Approx(1.0));
  CHECK(c.centers[1] == doctest::Approx(5.1));
  CHECK(c.centers[2] == doctest::Approx(9.0));
  CHECK(c.assignment == std::vector<std::size_t>{0, 0, 0, 1, 1, 2});
  CHECK(c.sse == doctest::Approx(0.02 + 0.02));
  CHECK(c.sse == doctest::Approx(within_sse(v, c.assignment, 3)));
}

TEST_CASE("argument checks") {
  const std::vector<double> v{1.0, 1.0, 2.0};
  CHECK_THROWS_AS(kmeans_1d(v, 3, 1), valvest::KTooLarge);
  CHECK_THROWS_AS(kmeans_1d(v, 0, 1), std::invalid_argument);
  const auto c = kmeans_1d(v, 2, 1);
  CHECK(c.sse == 0.0);
  const auto one = kmeans_1d(v, 1, 1);
  CHECK(one.centers[0] == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("matches the exact optimum") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::lognormal_distribution<double> ln(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 5 + static_cast<std::size_t>(rep % 20);
    std::vector<double> v(n);
    for (auto& x : v) x = rep % 2 ? u(rng) : ln(rng);
    const std::size_t k = 1 + static_cast<std::size_t>(rep % 5);
    const auto c = kmeans_1d(v, k, static_cast<std::uint64_t>(rep));
    CHECK(c.sse == doctest::Approx(oracle::kmeans_dp_sse(v, k)).epsilon(1e-9).scale(1e-12));
    CHECK(std::is_sorted(c.centers.begin(), c.centers.end()));
    CHECK(std::set<std::size_t>(c.assignment.begin(), c.assignment.end()).size() == k);
  }
}

TEST_CASE("deterministic for a seed") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(30);
  for (auto& x : v) x = n(rng);
  const auto a = kmeans_1d(v, 4, 9);
  const auto b = kmeans_1d(v, 4, 9);
  CHECK(a.centers == b.centers);
  CHECK(a.assignment == b.assignment);
}
