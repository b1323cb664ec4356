#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "calib/bounds.hpp"
#include "calib/edf.hpp"

namespace calib {

/// Observations sorted by a ranking of their means, with prefix sums so that
/// Z_{j:k} and v_{j:k} are O(1). Indices are 0-based and inclusive.
struct RankedSample {
  std::vector<DispersedObs> obs;
  std::vector<double> rank_values;
  /// Input row of every sorted position (first member for merged rows).
  std::vector<std::size_t> source;
  double phi = 1.0;
  EdfFamily family = EdfFamily::of(Family::Normal);
  std::vector<long double> prefix_vy;
  std::vector<long double> prefix_v;

  std::size_t size() const { return obs.size(); }
  double volume(std::size_t j, std::size_t k) const {
    return static_cast<double>(prefix_v[k + 1] - prefix_v[j]);
  }
  double aggregate(std::size_t j, std::size_t k) const {
    return static_cast<double>((prefix_vy[k + 1] - prefix_vy[j]) / (prefix_v[k + 1] - prefix_v[j]));
  }
  bool has_ties() const;
};

/// Stable sort by rank_values, support validation, prefix sums.
RankedSample make_ranked_sample(const std::vector<DispersedObs>& obs,
                                const std::vector<double>& rank_values, double phi,
                                const EdfFamily& family);

/// Replaces each run of equal rank values by one observation with summed
/// volume and volume-weighted response.
RankedSample merge_ties(const RankedSample& sample);

enum class PairStrategy { Full, Distinct, Nbh, Dist };

/// Ordered pairs (j, k), j <= k, stored as one contiguous range
/// k in [j, k_last[j]] per j (possibly empty when k_last[j] < j).
struct PairSet {
  PairStrategy strategy = PairStrategy::Full;
  double param = 0.0;
  std::vector<std::size_t> k_last;
  std::uint64_t size = 0;

  bool contains(std::size_t j, std::size_t k) const { return j <= k && k <= k_last[j]; }
};

/// Dist(d) compares `estimates` (sorted with the sample); when empty the
/// isotonic fit of the responses is used. Throws std::invalid_argument for a
/// negative parameter, for Distinct on a sample with rank ties and for Dist
/// with unsorted estimates.
PairSet make_pair_set(PairStrategy strategy, double param, const RankedSample& sample,
                      const std::vector<double>& estimates = {});

/// Parses full | distinct | nbh:<s> | dist:<d>.
std::pair<PairStrategy, double> parse_pair_strategy(const std::string& text);

struct Band {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> rank_values;
  double alpha = 0.0;
  double delta = 0.0;
  bool crossed = false;
  EdfFamily family = EdfFamily::of(Family::Normal);

  std::size_t size() const { return lower.size(); }
};

/// The band of pairwise bounds at delta = alpha / (2 |J|). Rank ties are
/// treated as equal canonical parameters. With a memo the evaluation is serial
/// and reuses the memo; without one it fans out over pairs.
Band build_band(const RankedSample& sample, const PairSet& pairs, double alpha,
                QuantileMemo* memo = nullptr);

/// Direct double loop over (i, pair); O(n |J|).
Band build_band_reference(const RankedSample& sample, const PairSet& pairs, double alpha);

/// L~ = min(L, iso), U~ = max(U, iso) with iso the weighted isotonic fit.
Band repair_crossings(const Band& band, const RankedSample& sample);

/// Step-function value of the band at ranking value r.
std::pair<double, double> band_at_rank(const Band& band, double r);

/// Yang-Barber band for y sorted by the assumed mean order, unit volumes and
/// sub-Gaussian parameter sigma.
Band yang_barber_band(const std::vector<double>& y, double sigma, double alpha);

}  // namespace calib
