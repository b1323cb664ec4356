#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "calib/bands.hpp"

namespace calib {

/// Independent stream for replication `rep` of a run seeded with `seed`;
/// identical whichever worker executes the replication.
std::mt19937_64 replication_stream(std::uint64_t seed, std::uint64_t rep);

/// Inverse Gaussian variate with mean mu and shape lambda.
double sample_inverse_gaussian(std::mt19937_64& rng, double mu, double lambda);

/// One line of a metrics table.
struct Metric {
  std::string preset;
  std::string scenario;
  double param;
  std::string name;
  double value;
};

/// Normal responses with means on an even grid over [1500, 2500] and
/// coefficient of variation 1/2; the band is ranked by the true means and the
/// estimates are the isotonic fit.
struct Example1Config {
  int n = 500;
  int reps = 20;
  double alpha = 0.05;
  std::vector<double> alphas{0.01, 0.05, 0.1, 0.25, 0.5};
  std::vector<double> nbh{50, 200, 500, 2000};
  std::vector<double> dist{10, 100, 500, 1500};
  std::vector<double> bins{50, 200, 500, 2000};
};

struct Example1Sample {
  RankedSample sample;
  std::vector<double> true_means;
  std::vector<double> estimates;
};

Example1Sample example1_sample(int n, std::mt19937_64& rng);

std::vector<Metric> run_example1(const Example1Config& cfg, std::uint64_t seed);

/// Inverse Gaussian responses with log-uniform true means, estimates equal
/// to the true means, bands under the true and three estimated dispersions.
struct Example3Config {
  int n = 1000;
  int reps = 1;
  double alpha = 0.05;
  double phi = 1.26;
  double mean_lo = 0.1;
  double mean_hi = 1.0;
};

struct Example3Run {
  std::vector<double> estimates;  // sorted
  double phi_pearson = 0.0;
  double phi_deviance = 0.0;
  double phi_mle = 0.0;
  Band band_true;
  Band band_pearson;
  Band band_deviance;
  Band band_mle;
};

Example3Run example3_run(const Example3Config& cfg, std::mt19937_64& rng);

/// Largest |a_i - b_i| / |b_i| over lower and upper edges on the middle
/// `fraction` of indices. Equal edges (including equal infinities) count as 0.
double max_relative_edge_gap(const Band& a, const Band& b, double fraction);

std::vector<Metric> run_example3(const Example3Config& cfg, std::uint64_t seed);

/// Gamma responses Y ~ Gamma(shape 3 mu, rate 3) with mu drawn from
/// {10, ..., 15}; estimates are the true means, responses are shifted
/// globally or at one level, and the calibration test is run on the raw and
/// on the binned data.
struct Example5Config {
  int n = 1000;
  int reps = 100;
  double alpha = 0.05;
  std::vector<double> shifts{0.0, 0.5, 1.0};
  std::vector<double> levels{10.0, 13.0, 15.0};
  bool raw = true;
  bool binned = true;
};

/// level < 0 means a global shift.
struct Example5Scenario {
  bool binned;
  double level;
  double shift;
};

std::vector<Example5Scenario> example5_scenarios(const Example5Config& cfg);

/// Number of replications in which calibration is rejected.
int example5_rejections(const Example5Config& cfg, const Example5Scenario& sc, std::uint64_t seed);

std::vector<Metric> run_example5(const Example5Config& cfg, std::uint64_t seed);

}  // namespace calib
