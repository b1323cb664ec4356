#pragma once

#include <cstddef>
#include <vector>

namespace calib {

struct IsotonicFit {
  std::vector<double> fitted;
  /// Start index of every constant block, followed by n.
  std::vector<std::size_t> block_boundaries;
};

/// Weighted least-squares fit under the constraint mu_1 <= ... <= mu_n, by
/// pool-adjacent-violators in O(n).
IsotonicFit pava(const std::vector<double>& y, const std::vector<double>& w);

}  // namespace calib
