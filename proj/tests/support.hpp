#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "calib/bands.hpp"
#include "calib/simulate.hpp"

namespace calib::testing {

inline const Family kFamilies[] = {Family::Binomial, Family::Poisson, Family::NegBinomial,
                                   Family::Gamma,    Family::Normal,  Family::InverseGaussian};

/// A mean inside the mean space, spread over a range where every family is
/// well-behaved.
inline double random_mean(Family f, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (f) {
    case Family::Binomial:
      return 0.05 + 0.9 * u(rng);
    case Family::Normal:
      return -5.0 + 10.0 * u(rng);
    default:
      return std::exp(-1.0 + 3.0 * u(rng));
  }
}

/// Draws Y ~ EDF(mu, v, phi). Binomial uses v/phi trials.
inline double draw(Family f, double mu, double v, double phi, std::mt19937_64& rng) {
  const double w = v / phi;
  switch (f) {
    case Family::Binomial:
      return std::binomial_distribution<int>(static_cast<int>(std::lround(w)), mu)(rng) / w;
    case Family::Poisson:
      return std::poisson_distribution<long>(mu * w)(rng) / w;
    case Family::NegBinomial: {
      // N ~ NB(w, p) with mean w (1 - p) / p = w mu
      const double p = 1.0 / (1.0 + mu);
      return std::negative_binomial_distribution<long>(static_cast<long>(std::lround(w)), p)(rng) /
             w;
    }
    case Family::Gamma:
      return std::gamma_distribution<double>(w, mu / w)(rng);
    case Family::Normal:
      return std::normal_distribution<double>(mu, std::sqrt(1.0 / w))(rng);
    case Family::InverseGaussian:
      return sample_inverse_gaussian(rng, mu, w);
  }
  return mu;
}

struct Instance {
  RankedSample sample;
  std::vector<double> means;  // sorted with the sample
};

/// Random sample of size n with increasing true means and integer volumes,
/// ranked by the true means. Ties in the ranking occur with small probability.
inline Instance random_instance(Family f, std::size_t n, std::mt19937_64& rng) {
  std::vector<double> mu(n);
  for (auto& m : mu) m = random_mean(f, rng);
  std::sort(mu.begin(), mu.end());
  std::uniform_int_distribution<int> vol(1, 4);
  std::bernoulli_distribution tie(0.1);
  std::vector<DispersedObs> obs(n);
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = vol(rng);
    obs[i] = {draw(f, mu[i], v, 1.0, rng), v};
    ranks[i] = (i > 0 && tie(rng)) ? ranks[i - 1] : static_cast<double>(i);
  }
  Instance inst{make_ranked_sample(obs, ranks, 1.0, EdfFamily::of(f)), mu};
  return inst;
}

}  // namespace calib::testing
