#include "calib/calibrate.hpp"

#include <cmath>
#include <stdexcept>

namespace calib {
namespace {

void require_aligned(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || a != c) throw std::invalid_argument("input vectors differ in length");
}

double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

}  // namespace

TestReport test_calibration(const Band& band, const std::vector<double>& estimates,
                            const std::vector<double>& ranks) {
  if (estimates.size() != ranks.size()) {
    throw std::invalid_argument("estimates and ranks differ in length");
  }
  TestReport r;
  r.alpha = band.alpha;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const auto [lo, hi] = band_at_rank(band, ranks[i]);
    if (estimates[i] < lo || estimates[i] > hi) r.offending.push_back(i);
  }
  r.decision = r.offending.empty() ? Decision::FailToReject : Decision::Reject;
  return r;
}

TestReport test_epsilon(const Band& band, const std::vector<double>& estimates,
                        const std::vector<double>& ranks, double eps) {
  if (!(eps > 0.0)) throw std::domain_error("epsilon must be positive");
  if (estimates.size() != ranks.size()) {
    throw std::invalid_argument("estimates and ranks differ in length");
  }
  TestReport r;
  r.alpha = band.alpha;
  r.epsilon = eps;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const auto [lo, hi] = band_at_rank(band, ranks[i]);
    if (lo >= estimates[i] - eps && hi <= estimates[i] + eps) r.offending.push_back(i);
  }
  r.decision = r.offending.empty() ? Decision::FailToReject : Decision::Reject;
  return r;
}

double unit_deviance(const EdfFamily& family, double y, double mu) {
  if (!family.in_mean_space(mu)) throw std::domain_error("mean outside the mean space");
  switch (family.name) {
    case Family::Normal:
      return (y - mu) * (y - mu);
    case Family::Poisson:
      if (y < 0.0) throw std::domain_error("negative response");
      return 2.0 * (xlogy(y, y / mu) - y + mu);
    case Family::Binomial:
      if (y < 0.0 || y > 1.0) throw std::domain_error("binomial response outside [0, 1]");
      return 2.0 * (xlogy(y, y / mu) + xlogy(1.0 - y, (1.0 - y) / (1.0 - mu)));
    case Family::NegBinomial:
      if (y < 0.0) throw std::domain_error("negative response");
      return 2.0 * (xlogy(y, y / mu) - (1.0 + y) * std::log((1.0 + y) / (1.0 + mu)));
    case Family::Gamma:
      if (!(y > 0.0)) throw std::domain_error("gamma response must be positive");
      return 2.0 * (-std::log(y / mu) + (y - mu) / mu);
    case Family::InverseGaussian:
      if (!(y > 0.0)) throw std::domain_error("inverse Gaussian response must be positive");
      return (y - mu) * (y - mu) / (mu * mu * y);
  }
  throw std::invalid_argument("unknown family");
}

double pearson_dispersion(const EdfFamily& family, const std::vector<double>& y,
                          const std::vector<double>& mu_hat, const std::vector<double>& v,
                          int q) {
  require_aligned(y.size(), mu_hat.size(), v.size());
  const auto n = static_cast<long>(y.size());
  if (q < 0 || n <= q) throw std::invalid_argument("need n > q >= 0");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double var = variance_function(family, mu_hat[i]);
    if (!(var > 0.0)) throw std::domain_error("variance function vanishes");
    s += v[i] * (y[i] - mu_hat[i]) * (y[i] - mu_hat[i]) / var;
  }
  return s / static_cast<double>(n - q);
}

double deviance_dispersion(const EdfFamily& family, const std::vector<double>& y,
                           const std::vector<double>& mu_hat, const std::vector<double>& v,
                           int q) {
  require_aligned(y.size(), mu_hat.size(), v.size());
  const auto n = static_cast<long>(y.size());
  if (q < 0 || n <= q) throw std::invalid_argument("need n > q >= 0");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += v[i] * unit_deviance(family, y[i], mu_hat[i]);
  return s / static_cast<double>(n - q);
}

double mle_dispersion_ig(const std::vector<double>& y, const std::vector<double>& mu_hat,
                         const std::vector<double>& v) {
  require_aligned(y.size(), mu_hat.size(), v.size());
  if (y.empty()) throw std::invalid_argument("empty sample");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) throw std::domain_error("inverse Gaussian response must be positive");
    const double d = y[i] - mu_hat[i];
    s += v[i] * d * d / (mu_hat[i] * mu_hat[i] * y[i]);
  }
  return s / static_cast<double>(y.size());
}

BinnedSample quantile_bin(const RankedSample& sample, const std::vector<double>& estimates,
                          int bins) {
  const std::size_t n = sample.size();
  if (estimates.size() != n) throw std::invalid_argument("estimates misaligned with sample");
  if (bins < 1 || static_cast<std::size_t>(bins) > n) {
    throw std::invalid_argument("number of bins must lie in [1, n]");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (estimates[i] < estimates[i - 1]) {
      throw std::invalid_argument("estimates must be sorted with the sample");
    }
  }
  // Groups of equal estimates.
  std::vector<std::size_t> group_start;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || estimates[i] != estimates[i - 1]) group_start.push_back(i);
  }
  const std::size_t groups = group_start.size();
  group_start.push_back(n);

  const double total = sample.volume(0, n - 1);
  const double target = total / bins;
  BinnedSample out;
  out.bin_edges.push_back(0);
  std::size_t closed = 0;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t end = group_start[g + 1];
    if (end == n) break;
    const double cum = sample.volume(0, end - 1);
    const std::size_t groups_left = groups - (g + 1);
    const std::size_t bins_left = static_cast<std::size_t>(bins) - (closed + 1);
    const bool reached = cum >= (static_cast<double>(closed) + 1.0) * target * (1.0 - 1e-12);
    if (bins_left > 0 && (reached || groups_left <= bins_left)) {
      out.bin_edges.push_back(end);
      ++closed;
    }
  }
  out.bin_edges.push_back(n);

  for (std::size_t b = 0; b + 1 < out.bin_edges.size(); ++b) {
    const std::size_t j = out.bin_edges[b];
    const std::size_t k = out.bin_edges[b + 1] - 1;
    const double vol = sample.volume(j, k);
    double mu = 0.0, rank = 0.0;
    for (std::size_t i = j; i <= k; ++i) {
      mu += sample.obs[i].v * estimates[i];
      rank += sample.obs[i].v * sample.rank_values[i];
    }
    out.y_tilde.push_back(sample.aggregate(j, k));
    out.v_tilde.push_back(vol);
    out.mu_tilde.push_back(mu / vol);
    out.rank_tilde.push_back(rank / vol);
  }
  return out;
}

}  // namespace calib
