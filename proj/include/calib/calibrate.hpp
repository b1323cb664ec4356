#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "calib/bands.hpp"
#include "calib/edf.hpp"

namespace calib {

enum class Decision { Reject, FailToReject };

struct TestReport {
  Decision decision = Decision::FailToReject;
  std::vector<std::size_t> offending;
  double alpha = 0.0;
  std::optional<double> epsilon;

  bool rejected() const { return decision == Decision::Reject; }
};

/// Rejects calibration when some estimate leaves the band at its own rank.
TestReport test_calibration(const Band& band, const std::vector<double>& estimates,
                            const std::vector<double>& ranks);

/// Rejects eps-miscalibration when the band at some rank fits inside
/// [mu_hat - eps, mu_hat + eps].
TestReport test_epsilon(const Band& band, const std::vector<double>& estimates,
                        const std::vector<double>& ranks, double eps);

/// Unit deviance d(y, mu) of the family.
double unit_deviance(const EdfFamily& family, double y, double mu);

/// sum v (y - mu)^2 / V(mu) / (n - q).
double pearson_dispersion(const EdfFamily& family, const std::vector<double>& y,
                          const std::vector<double>& mu_hat, const std::vector<double>& v,
                          int q = 0);

/// sum v d(y, mu) / (n - q).
double deviance_dispersion(const EdfFamily& family, const std::vector<double>& y,
                           const std::vector<double>& mu_hat, const std::vector<double>& v,
                           int q = 0);

/// Closed-form maximum likelihood estimate for the inverse Gaussian,
/// (1/n) sum v (y - mu)^2 / (mu^2 y).
double mle_dispersion_ig(const std::vector<double>& y, const std::vector<double>& mu_hat,
                         const std::vector<double>& v);

struct BinnedSample {
  std::vector<double> y_tilde;
  std::vector<double> v_tilde;
  std::vector<double> mu_tilde;
  std::vector<double> rank_tilde;
  /// Sorted-sample index where each bin starts, followed by n.
  std::vector<std::size_t> bin_edges;

  std::size_t size() const { return y_tilde.size(); }
};

/// Weighted quantile binning along the sample order. A bin is closed at the
/// first boundary between distinct estimates where the cumulative volume
/// reaches l * total / L. Equal estimates always share a bin, so fewer than L
/// bins can result.
BinnedSample quantile_bin(const RankedSample& sample, const std::vector<double>& estimates,
                          int bins);

}  // namespace calib
