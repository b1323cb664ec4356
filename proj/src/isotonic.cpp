#include "calib/isotonic.hpp"

#include <cmath>
#include <stdexcept>

namespace calib {

IsotonicFit pava(const std::vector<double>& y, const std::vector<double>& w) {
  const std::size_t n = y.size();
  if (n == 0) throw std::invalid_argument("pava needs at least one observation");
  if (w.size() != n) throw std::invalid_argument("pava: length mismatch");
  for (double wi : w) {
    if (!(wi > 0.0) || !std::isfinite(wi)) throw std::invalid_argument("pava: weights must be positive");
  }

  // Stack of blocks: start index, weight, weighted mean.
  std::vector<std::size_t> start;
  std::vector<double> weight;
  std::vector<double> mean;
  start.reserve(n);
  weight.reserve(n);
  mean.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    start.push_back(i);
    weight.push_back(w[i]);
    mean.push_back(y[i]);
    while (mean.size() > 1 && mean[mean.size() - 2] >= mean.back()) {
      const std::size_t b = mean.size() - 1;
      const double wt = weight[b - 1] + weight[b];
      mean[b - 1] = (weight[b - 1] * mean[b - 1] + weight[b] * mean[b]) / wt;
      weight[b - 1] = wt;
      start.pop_back();
      weight.pop_back();
      mean.pop_back();
    }
  }

  IsotonicFit fit;
  fit.fitted.resize(n);
  fit.block_boundaries = start;
  fit.block_boundaries.push_back(n);
  for (std::size_t b = 0; b < mean.size(); ++b) {
    for (std::size_t i = start[b]; i < fit.block_boundaries[b + 1]; ++i) fit.fitted[i] = mean[b];
  }
  return fit;
}

}  // namespace calib
