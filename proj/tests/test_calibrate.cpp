#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <random>

#include "../tests/support.hpp"
#include "calib/calibrate.hpp"

using namespace calib;
using doctest::Approx;

namespace {

Band band_of(std::vector<double> lo, std::vector<double> hi) {
  Band b;
  b.lower = std::move(lo);
  b.upper = std::move(hi);
  for (std::size_t i = 0; i < b.lower.size(); ++i) b.rank_values.push_back(double(i));
  return b;
}

}  // namespace

TEST_CASE("calibration test") {
  const Band b = band_of({0, 1, 2}, {2, 3, 4});
  const auto ok = test_calibration(b, {1, 2, 3}, {0, 1, 2});
  CHECK_FALSE(ok.rejected());
  CHECK(ok.offending.empty());
  const auto bad = test_calibration(b, {1, 3.5, 3}, {0, 1, 2});
  CHECK(bad.rejected());
  CHECK(bad.offending == std::vector<std::size_t>{1});
  // an estimate on the edge is inside
  CHECK_FALSE(test_calibration(b, {0, 3, 4}, {0, 1, 2}).rejected());
}

TEST_CASE("epsilon test") {
  const Band wide = band_of({0, 1}, {3, 4});
  CHECK_FALSE(test_epsilon(wide, {1.5, 2.5}, {0, 1}, 1.0).rejected());
  const Band degenerate = band_of({0, 2}, {3, 2});
  const auto r = test_epsilon(degenerate, {1.5, 2}, {0, 1}, 0.1);
  CHECK(r.rejected());
  CHECK(r.offending == std::vector<std::size_t>{1});
  CHECK(*r.epsilon == 0.1);

  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> lo(20), hi(20), mu(20), rk(20);
    for (int i = 0; i < 20; ++i) {
      mu[i] = u(rng);
      lo[i] = mu[i] - 0.2 * u(rng);
      hi[i] = mu[i] + 0.2 * u(rng);
      rk[i] = i;
    }
    const double eps = 0.1;
    std::vector<std::size_t> expected;
    for (std::size_t i = 0; i < 20; ++i) {
      if (mu[i] - eps <= lo[i] && hi[i] <= mu[i] + eps) expected.push_back(i);
    }
    const auto rep = test_epsilon(band_of(lo, hi), mu, rk, eps);
    CHECK(rep.offending == expected);
    CHECK(rep.rejected() == !expected.empty());
  }
}

TEST_CASE("unit deviance") {
  for (Family f : testing::kFamilies) {
    const EdfFamily fam = EdfFamily::of(f);
    const double mu = f == Family::Binomial ? 0.3 : 1.7;
    CHECK(unit_deviance(fam, mu, mu) == Approx(0.0).epsilon(1e-15));
  }
  const EdfFamily pois = EdfFamily::of(Family::Poisson);
  CHECK(unit_deviance(pois, 0, 2) == Approx(4.0));
  CHECK(unit_deviance(pois, 3, 2) == Approx(2 * (3 * std::log(1.5) - 1)));
  const EdfFamily gam = EdfFamily::of(Family::Gamma);
  CHECK(unit_deviance(gam, 2, 1) == Approx(2 * (-std::log(2.0) + 1)));
  const EdfFamily ig = EdfFamily::of(Family::InverseGaussian);
  CHECK(unit_deviance(ig, 2, 1) == Approx(0.5));
}

TEST_CASE("dispersion estimates") {
  const EdfFamily pois = EdfFamily::of(Family::Poisson);
  CHECK(pearson_dispersion(pois, {1, 1}, {1, 1}, {1, 1}) == 0.0);
  CHECK(pearson_dispersion(pois, {0, 2}, {1, 1}, {1, 1}) == Approx(1.0));
  CHECK(pearson_dispersion(pois, {0, 2}, {1, 1}, {1, 1}, 1) == Approx(2.0));
  CHECK(deviance_dispersion(pois, {1, 1}, {1, 1}, {1, 1}) == 0.0);
  CHECK(mle_dispersion_ig({2}, {1}, {1}) == Approx(0.5));
  CHECK_THROWS(pearson_dispersion(pois, {1}, {1}, {1}, 1));
}

TEST_CASE("inverse Gaussian MLE maximises the likelihood") {
  std::mt19937_64 rng(62);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 50;
    std::vector<double> y(n), mu(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      mu[i] = std::exp(std::uniform_real_distribution<double>(-1, 1)(rng));
      v[i] = 1 + rng() % 3;
      y[i] = sample_inverse_gaussian(rng, mu[i], v[i] / 1.26);
    }
    auto negloglik = [&](double phi) {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i) {
        s += 0.5 * std::log(2 * M_PI * phi * y[i] * y[i] * y[i] / v[i]) +
             v[i] * (y[i] - mu[i]) * (y[i] - mu[i]) / (2 * phi * mu[i] * mu[i] * y[i]);
      }
      return s;
    };
    const auto [phi_num, f_min] = boost::math::tools::brent_find_minima(negloglik, 1e-3, 1e3, 52);
    (void)f_min;
    // a minimiser is located to about the square root of machine precision
    CHECK(mle_dispersion_ig(y, mu, v) == Approx(phi_num).epsilon(1e-6));
  }
}

TEST_CASE("quantile binning") {
  const EdfFamily norm = EdfFamily::of(Family::Normal);
  const auto s = make_ranked_sample({{1, 1}, {2, 1}, {3, 1}, {4, 1}}, {0, 1, 2, 3}, 1.0, norm);
  const std::vector<double> est{1, 2, 3, 4};

  const auto id = quantile_bin(s, est, 4);
  CHECK(id.y_tilde == std::vector<double>{1, 2, 3, 4});
  CHECK(id.bin_edges == std::vector<std::size_t>{0, 1, 2, 3, 4});

  const auto one = quantile_bin(s, est, 1);
  REQUIRE(one.size() == 1);
  CHECK(one.y_tilde[0] == Approx(2.5));
  CHECK(one.v_tilde[0] == 4);
  CHECK(one.mu_tilde[0] == Approx(2.5));

  const auto two = quantile_bin(s, est, 2);
  CHECK(two.bin_edges == std::vector<std::size_t>{0, 2, 4});
  CHECK(two.y_tilde == std::vector<double>{1.5, 3.5});

  // Equal estimates always share a bin.
  const auto tied = quantile_bin(s, {1, 2, 2, 2}, 2);
  CHECK(tied.bin_edges == std::vector<std::size_t>{0, 1, 4});
  CHECK_THROWS(quantile_bin(s, est, 0));
}

TEST_CASE("binning preserves the volume-weighted totals") {
  std::mt19937_64 rng(63);
  for (int t = 0; t < 50; ++t) {
    const auto in = testing::random_instance(Family::Gamma, 200, rng);
    const std::size_t bins = 1 + rng() % 30;
    const auto b = quantile_bin(in.sample, in.means, static_cast<int>(bins));
    CHECK(b.size() <= bins);
    double vy = 0, v = 0, bvy = 0, bv = 0;
    for (const auto& o : in.sample.obs) vy += o.v * o.y, v += o.v;
    for (std::size_t l = 0; l < b.size(); ++l) bvy += b.v_tilde[l] * b.y_tilde[l], bv += b.v_tilde[l];
    CHECK(bv == Approx(v));
    CHECK(bvy == Approx(vy).epsilon(1e-12));
    for (std::size_t l = 1; l < b.size(); ++l) CHECK(b.mu_tilde[l] >= b.mu_tilde[l - 1]);
  }
}
