#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/distributions/inverse_gaussian.hpp>
#include <algorithm>
#include <cmath>

#include "calib/bands.hpp"
#include "calib/simulate.hpp"

using namespace calib;
using doctest::Approx;

TEST_CASE("replication streams are reproducible and distinct") {
  auto a = replication_stream(7, 3), b = replication_stream(7, 3), c = replication_stream(7, 4);
  const auto x = a(), y = b(), z = c();
  CHECK(x == y);
  CHECK(x != z);
  CHECK(replication_stream(8, 3)() != x);
}

TEST_CASE("inverse Gaussian sampler matches the distribution") {
  // Kolmogorov distance of 20000 draws against the closed-form CDF.
  auto rng = replication_stream(1, 0);
  const double mu = 1.7, lambda = 0.8;
  std::vector<double> xs(20000);
  for (auto& x : xs) x = sample_inverse_gaussian(rng, mu, lambda);
  std::sort(xs.begin(), xs.end());
  const boost::math::inverse_gaussian_distribution<double> ig(mu, lambda);
  double d = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = boost::math::cdf(ig, xs[i]);
    d = std::max({d, std::fabs(f - double(i) / xs.size()), std::fabs(f - double(i + 1) / xs.size())});
  }
  CHECK(d < 1.63 / std::sqrt(double(xs.size())));  // 1% level
}

TEST_CASE("example 1 sample") {
  auto rng = replication_stream(2, 0);
  const auto ex = example1_sample(101, rng);
  CHECK(ex.sample.size() == 101);
  CHECK(ex.true_means.front() == Approx(1500));
  CHECK(ex.true_means.back() == Approx(2500));
  CHECK(std::is_sorted(ex.estimates.begin(), ex.estimates.end()));
  CHECK(ex.sample.obs[50].v == Approx(1 / std::pow(0.5 * ex.true_means[50], 2)));
}

TEST_CASE("example 5 rejections are seed-deterministic") {
  Example5Config cfg;
  cfg.n = 200;
  cfg.reps = 6;
  const Example5Scenario sc{false, -1, 1.0};
  CHECK(example5_rejections(cfg, sc, 5) == example5_rejections(cfg, sc, 5));
  CHECK(example5_scenarios(cfg).size() == 2 * 3 * 4 - 2 * 3);
}

TEST_CASE("example 5 without contamination rarely rejects") {
  Example5Config cfg;
  cfg.n = 1000;
  cfg.reps = 100;
  // expected false rejection count at most alpha * reps, plus 3 standard errors
  CHECK(example5_rejections(cfg, {false, -1, 0.0}, 123) <= 5 + 3);
}

TEST_CASE("edge gap") {
  Band a, b;
  a.lower = {1, 2, 3, 4};
  a.upper = {2, 3, 4, INFINITY};
  b = a;
  CHECK(max_relative_edge_gap(a, b, 1.0) == 0.0);
  b.lower[1] = 2.2;
  CHECK(max_relative_edge_gap(a, b, 1.0) == Approx(0.2 / 2.2));
  b.upper[3] = 10;
  CHECK(std::isinf(max_relative_edge_gap(a, b, 1.0)));
  CHECK(max_relative_edge_gap(a, b, 0.5) == Approx(0.2 / 2.2));
}

TEST_CASE("simulation metrics are deterministic") {
  Example1Config cfg;
  cfg.n = 60;
  cfg.reps = 3;
  cfg.alphas = {0.1};
  cfg.nbh = {5};
  cfg.dist = {50};
  cfg.bins = {10};
  const auto m1 = run_example1(cfg, 9), m2 = run_example1(cfg, 9);
  REQUIRE(m1.size() == m2.size());
  for (std::size_t i = 0; i < m1.size(); ++i) {
    CHECK(m1[i].name == m2[i].name);
    CHECK(m1[i].value == m2[i].value);
  }
}

TEST_CASE("example 1 bands nest across alpha") {
  auto rng = replication_stream(10, 0);
  const auto ex = example1_sample(150, rng);
  const PairSet pairs = make_pair_set(PairStrategy::Full, 0, ex.sample);
  const Band wide = build_band(ex.sample, pairs, 0.01);
  const Band narrow = build_band(ex.sample, pairs, 0.5);
  for (std::size_t i = 0; i < wide.size(); ++i) {
    CHECK(wide.lower[i] <= narrow.lower[i]);
    CHECK(narrow.upper[i] <= wide.upper[i]);
  }
}
