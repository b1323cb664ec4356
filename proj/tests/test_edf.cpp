#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/inverse_gaussian.hpp>
#include <boost/math/distributions/negative_binomial.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <cmath>
#include <random>

#include "../tests/support.hpp"
#include "calib/edf.hpp"

using namespace calib;
using doctest::Approx;

namespace {

const EdfFamily kBin = EdfFamily::of(Family::Binomial);
const EdfFamily kPois = EdfFamily::of(Family::Poisson);
const EdfFamily kNb = EdfFamily::of(Family::NegBinomial);
const EdfFamily kGam = EdfFamily::of(Family::Gamma);
const EdfFamily kNorm = EdfFamily::of(Family::Normal);
const EdfFamily kIg = EdfFamily::of(Family::InverseGaussian);

// P(Y <= y) from boost, with counts N = w y for the additive members.
double oracle_cdf(Family f, double y, double mu, double w) {
  using namespace boost::math;
  switch (f) {
    case Family::Binomial:
      return cdf(binomial_distribution<double>(w, mu), std::round(w * y));
    case Family::Poisson:
      return cdf(poisson_distribution<double>(w * mu), std::round(w * y));
    case Family::NegBinomial:
      return cdf(negative_binomial_distribution<double>(w, 1 / (1 + mu)), std::round(w * y));
    case Family::Gamma:
      return cdf(gamma_distribution<double>(w, mu / w), y);
    case Family::Normal:
      return cdf(normal_distribution<double>(mu, 1 / std::sqrt(w)), y);
    case Family::InverseGaussian:
      return cdf(inverse_gaussian_distribution<double>(mu, w), y);
  }
  return 0;
}

}  // namespace

TEST_CASE("canonical link") {
  CHECK(canonical_link(kPois, 1.0) == 0.0);
  CHECK(canonical_link(kNorm, 3.5) == 3.5);
  CHECK(canonical_link(kBin, 0.25) == Approx(std::log(0.25 / 0.75)).epsilon(1e-15));
  CHECK(canonical_link(kGam, 2.0) == Approx(-0.5));
  CHECK(canonical_link(kIg, 2.0) == Approx(-1.0 / 8.0));
}

TEST_CASE("variance function") {
  CHECK(variance_function(kNorm, 7) == 1);
  CHECK(variance_function(kGam, 2) == 4);
  CHECK(variance_function(kIg, 2) == 8);
  CHECK(variance_function(kPois, 3) == 3);
  CHECK(variance_function(kBin, 0.25) == Approx(0.1875));
  CHECK(variance_function(kNb, 2) == 6);
}

TEST_CASE("distribution function values") {
  CHECK(cdf(kNorm, 0, 0, 1) == Approx(0.5).epsilon(1e-15));
  CHECK(cdf(kPois, 0, 1, 1) == Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(cdf(kBin, 0.5, 0.5, 2) == Approx(0.75).epsilon(1e-14));
  CHECK(cdf_strict(kGam, 1, 1, 1) == Approx(1 - std::exp(-1.0)).epsilon(1e-14));
  CHECK(cdf_strict(kPois, 0, 1, 1) == 0.0);
  CHECK(cdf_strict(kPois, 1, 1, 1) == Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("distribution functions agree with independent implementations") {
  std::mt19937_64 rng(21);
  for (Family f : testing::kFamilies) {
    const EdfFamily fam = EdfFamily::of(f);
    for (int t = 0; t < 300; ++t) {
      const double mu = testing::random_mean(f, rng);
      const double w = f == Family::Binomial ? std::uniform_int_distribution<int>(1, 40)(rng)
                                             : std::uniform_real_distribution<double>(0.2, 40)(rng);
      const double w_used = fam.discrete() && f != Family::Binomial ? std::round(w) + 1 : w;
      const double y = testing::draw(f, mu, w_used, 1.0, rng);
      const double ref = oracle_cdf(f, y, mu, w_used);
      const double ours = cdf(fam, y, mu, w_used);
      CHECK_MESSAGE(std::fabs(ours - ref) < 1e-11, to_string(f), " y=", y, " mu=", mu);
      CHECK(std::fabs(survival(fam, y, mu, w_used) - (1 - ref)) < 1e-11);
      if (fam.discrete()) {
        const double strict =
            std::round(w_used * y) == 0 ? 0.0 : oracle_cdf(f, y - 1 / w_used, mu, w_used);
        CHECK(std::fabs(cdf_strict(fam, y, mu, w_used) - strict) < 1e-11);
        CHECK(std::fabs(survival_weak(fam, y, mu, w_used) - (1 - strict)) < 1e-11);
      } else {
        CHECK(cdf_strict(fam, y, mu, w_used) == cdf(fam, y, mu, w_used));
      }
    }
  }
}

TEST_CASE("distribution functions are non-increasing in the mean") {
  std::mt19937_64 rng(22);
  for (Family f : testing::kFamilies) {
    const EdfFamily fam = EdfFamily::of(f);
    for (int t = 0; t < 200; ++t) {
      double m1 = testing::random_mean(f, rng), m2 = testing::random_mean(f, rng);
      if (m1 > m2) std::swap(m1, m2);
      const double y = testing::draw(f, 0.5 * (m1 + m2), 3.0, 1.0, rng);
      CHECK(cdf(fam, y, m1, 3.0) >= cdf(fam, y, m2, 3.0) - 1e-15);
    }
  }
}

TEST_CASE("family names") {
  CHECK(parse_family("negbin") == Family::NegBinomial);
  CHECK(parse_family("ig") == Family::InverseGaussian);
  CHECK(parse_family("inverse-gaussian") == Family::InverseGaussian);
  CHECK(parse_family(to_string(Family::Gamma)) == Family::Gamma);
  CHECK_THROWS_AS(parse_family("weibull"), std::invalid_argument);
}

TEST_CASE("response validation") {
  CHECK_NOTHROW(validate_response(kPois, 1.5, 2.0));
  CHECK_THROWS_AS(validate_response(kPois, 1.25, 2.0), std::domain_error);
  CHECK_THROWS_AS(validate_response(kPois, -1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(validate_response(kBin, 0.5, 2.5), std::domain_error);
  CHECK_THROWS_AS(validate_response(kBin, 1.5, 2.0), std::domain_error);
  CHECK_THROWS_AS(validate_response(kGam, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(validate_response(kNorm, std::nan(""), 1.0), std::domain_error);
  CHECK_NOTHROW(validate_response(kNorm, -4.0, 1.0));
}
