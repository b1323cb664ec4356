#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "../tests/support.hpp"
#include "calib/bounds.hpp"
#include "calib/edf.hpp"

using namespace calib;
using doctest::Approx;

namespace {

BoundQuery query(Family f, double z, double w, double delta) {
  return {EdfFamily::of(f), z, w, 1.0, delta};
}

}  // namespace

TEST_CASE("lower bound closed forms") {
  CHECK(lower_bound(query(Family::Normal, 0, 1, 0.05)) == Approx(-1.6448536269514722));
  CHECK(lower_bound(query(Family::Poisson, 0, 3, 0.05)) == 0.0);
  CHECK(lower_bound(query(Family::Binomial, 1, 1, 0.05)) == Approx(0.05).epsilon(1e-14));
  CHECK(lower_bound(query(Family::Gamma, 1, 1, 0.05)) == Approx(1 / -std::log(0.05)).epsilon(1e-13));
}

TEST_CASE("upper bound closed forms") {
  CHECK(upper_bound(query(Family::Normal, 0, 1, 0.05)) == Approx(1.6448536269514722));
  CHECK(upper_bound(query(Family::Poisson, 0, 1, 0.05)) == Approx(-std::log(0.05)).epsilon(1e-13));
  CHECK(upper_bound(query(Family::Binomial, 1, 1, 0.05)) == 1.0);
}

TEST_CASE("bounds meet the defining tail equations") {
  // F*(z; l) = 1 - delta and F(z; u) = delta wherever the bound is interior.
  std::mt19937_64 rng(31);
  for (Family f : testing::kFamilies) {
    const EdfFamily fam = EdfFamily::of(f);
    for (int t = 0; t < 100; ++t) {
      const double w = std::uniform_int_distribution<int>(1, 20)(rng);
      const double z = testing::draw(f, testing::random_mean(f, rng), w, 1.0, rng);
      const double d = std::uniform_real_distribution<double>(1e-4, 0.3)(rng);
      const BoundQuery q{fam, z, w, 1.0, d};
      const double l = lower_bound(q), u = upper_bound(q);
      if (fam.in_mean_space(l)) {
        CHECK_MESSAGE(survival_weak(fam, z, l, w) == Approx(d).epsilon(1e-8), to_string(f));
      }
      if (fam.in_mean_space(u)) {
        CHECK_MESSAGE(cdf(fam, z, u, w) == Approx(d).epsilon(1e-8), to_string(f));
      }
      CHECK(l <= u);
    }
  }
}

TEST_CASE("closed forms agree with bisection") {
  std::mt19937_64 rng(32);
  for (Family f : testing::kFamilies) {
    const EdfFamily fam = EdfFamily::of(f);
    for (int t = 0; t < 100; ++t) {
      const double w = std::uniform_int_distribution<int>(1, 60)(rng);
      const double z = testing::draw(f, testing::random_mean(f, rng), w, 1.0, rng);
      const double d = std::uniform_real_distribution<double>(1e-6, 0.49)(rng);
      const BoundQuery q{fam, z, w, 1.0, d};
      const double l = lower_bound(q), lb = lower_bound_bisection(q);
      const double u = upper_bound(q), ub = upper_bound_bisection(q);
      if (std::isfinite(l)) CHECK(std::fabs(l - lb) <= 1e-8 * std::max(1.0, std::fabs(l)));
      if (std::isfinite(u)) CHECK(std::fabs(u - ub) <= 1e-8 * std::max(1.0, std::fabs(u)));
      if (!std::isfinite(u)) CHECK(ub == u);
    }
  }
}

TEST_CASE("brute-force scan") {
  const BoundQuery nq = query(Family::Normal, 0, 1, 0.05);
  const GridBound g = brute_force_bound_detail(nq, Side::Lower, 100000);
  CHECK(std::fabs(g.value - -1.6448536269514722) <= g.step);

  const BoundQuery pq = query(Family::Poisson, 1.5, 2, 0.1);
  const GridBound gp = brute_force_bound_detail(pq, Side::Upper, 100000);
  CHECK(std::fabs(gp.value - upper_bound(pq)) <= gp.step);

  const BoundQuery gq = query(Family::Gamma, 1, 1, 0.05);
  const GridBound gg = brute_force_bound_detail(gq, Side::Lower, 100000);
  CHECK(std::fabs(gg.value - 0.333808) <= gg.step + 1e-6);
}

TEST_CASE("bounds widen as delta shrinks") {
  for (Family f : testing::kFamilies) {
    const EdfFamily fam = EdfFamily::of(f);
    const double z = f == Family::Binomial ? 0.4 : (f == Family::Normal ? -0.3 : 1.2);
    double prev_l = -INFINITY, prev_u = INFINITY;
    for (double d : {1e-6, 1e-4, 1e-2, 0.1, 0.3, 0.49}) {
      const BoundQuery q{fam, z, 5.0, 1.0, d};
      const double l = lower_bound(q), u = upper_bound(q);
      CHECK(l >= prev_l);
      CHECK(u <= prev_u);
      prev_l = l, prev_u = u;
    }
  }
}

TEST_CASE("inverse Gaussian upper bound reaches the mean-space edge") {
  // F(z; mu) stays above delta as mu grows when z is large against v / phi.
  const BoundQuery q{EdfFamily::of(Family::InverseGaussian), 5.0, 1.0, 1.0, 0.01};
  CHECK(std::isinf(upper_bound(q)));
  CHECK(std::isfinite(lower_bound(q)));
}

TEST_CASE("invalid queries") {
  CHECK_THROWS_AS(validate(query(Family::Normal, 0, 1, 0.0)), std::domain_error);
  CHECK_THROWS_AS(validate(query(Family::Normal, 0, -1, 0.1)), std::domain_error);
  CHECK_THROWS_AS(validate(query(Family::Poisson, 0.3, 1, 0.1)), std::domain_error);
  CHECK_THROWS_AS(validate(query(Family::Gamma, -1, 1, 0.1)), std::domain_error);
  CHECK_NOTHROW(validate(query(Family::Normal, 0, 1, 0.7)));
}

TEST_CASE("evaluator matches the free functions") {
  QuantileMemo memo;
  std::mt19937_64 rng(33);
  for (Family f : testing::kFamilies) {
    const EdfFamily fam = EdfFamily::of(f);
    BoundEvaluator ev(fam, 1.0, 0.01, &memo);
    for (int t = 0; t < 50; ++t) {
      const double w = std::uniform_int_distribution<int>(1, 10)(rng);
      const double z = testing::draw(f, testing::random_mean(f, rng), w, 1.0, rng);
      const BoundQuery q{fam, z, w, 1.0, 0.01};
      CHECK(ev.lower(z, w) == Approx(lower_bound(q)).epsilon(1e-12));
      const double u = upper_bound(q);
      if (std::isfinite(u)) CHECK(ev.upper(z, w) == Approx(u).epsilon(1e-12));
    }
  }
  CHECK(memo.size() > 0);
}
