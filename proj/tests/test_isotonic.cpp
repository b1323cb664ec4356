#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "calib/isotonic.hpp"

using calib::pava;
using doctest::Approx;

TEST_CASE("already monotone input is returned as is") {
  const auto fit = pava({1, 2, 3}, {1, 1, 1});
  CHECK(fit.fitted == std::vector<double>{1, 2, 3});
  CHECK(fit.block_boundaries == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("a decreasing pair is pooled") {
  const auto fit = pava({2, 1}, {1, 1});
  CHECK(fit.fitted[0] == 1.5);
  CHECK(fit.fitted[1] == 1.5);
  CHECK(fit.block_boundaries == std::vector<std::size_t>{0, 2});
}

TEST_CASE("weighted pooling") {
  const auto fit = pava({1, 3, 2, 4}, {1, 2, 1, 1});
  CHECK(fit.fitted[0] == Approx(1));
  CHECK(fit.fitted[1] == Approx(8.0 / 3));
  CHECK(fit.fitted[2] == Approx(8.0 / 3));
  CHECK(fit.fitted[3] == Approx(4));
}

TEST_CASE("fit is monotone and preserves the weighted total") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> wd(0.1, 5);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng() % 300;
    std::vector<double> y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = 0.01 * i + g(rng), w[i] = wd(rng);
    const auto fit = pava(y, w);
    double sy = 0, sf = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sy += w[i] * y[i];
      sf += w[i] * fit.fitted[i];
      if (i > 0) CHECK(fit.fitted[i] >= fit.fitted[i - 1]);
    }
    CHECK(sf == Approx(sy).epsilon(1e-12));
    CHECK(fit.block_boundaries.front() == 0);
    CHECK(fit.block_boundaries.back() == n);
  }
}

TEST_CASE("invalid input") {
  CHECK_THROWS_AS(pava({1, 2}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(pava({1, 2}, {1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(pava({}, {}), std::invalid_argument);
}
