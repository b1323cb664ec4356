#include "calib/bands.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "calib/isotonic.hpp"

namespace calib {
namespace {

void fill_prefix(RankedSample& s) {
  const std::size_t n = s.size();
  s.prefix_v.assign(n + 1, 0.0L);
  s.prefix_vy.assign(n + 1, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    const long double v = s.obs[i].v;
    s.prefix_v[i + 1] = s.prefix_v[i] + v;
    s.prefix_vy[i + 1] = s.prefix_vy[i] + v * static_cast<long double>(s.obs[i].y);
  }
}

double delta_for(double alpha, std::uint64_t size) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0, 1)");
  if (size == 0) throw std::invalid_argument("pair set is empty");
  return alpha / (2.0 * static_cast<double>(size));
}

// L_i from the per-k maxima and U_i from the per-j minima, with tied ranks
// sharing their group's extremum.
void sweep(const std::vector<double>& ranks, const std::vector<double>& lmax_by_k,
           const std::vector<double>& umin_by_j, Band& band) {
  const std::size_t n = ranks.size();
  band.lower.assign(n, 0.0);
  band.upper.assign(n, 0.0);
  double running = band.family.mean_lo;
  for (std::size_t i = 0; i < n; ++i) {
    running = std::max(running, lmax_by_k[i]);
    band.lower[i] = running;
  }
  running = band.family.mean_hi;
  for (std::size_t i = n; i-- > 0;) {
    running = std::min(running, umin_by_j[i]);
    band.upper[i] = running;
  }
  std::size_t g = 0;
  while (g < n) {
    std::size_t e = g;
    while (e + 1 < n && ranks[e + 1] == ranks[g]) ++e;
    for (std::size_t i = g; i <= e; ++i) {
      band.lower[i] = band.lower[e];
      band.upper[i] = band.upper[g];
    }
    g = e + 1;
  }
  band.crossed = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (band.lower[i] > band.upper[i]) band.crossed = true;
  }
}

}  // namespace

bool RankedSample::has_ties() const {
  for (std::size_t i = 1; i < rank_values.size(); ++i) {
    if (rank_values[i] == rank_values[i - 1]) return true;
  }
  return false;
}

RankedSample make_ranked_sample(const std::vector<DispersedObs>& obs,
                                const std::vector<double>& rank_values, double phi,
                                const EdfFamily& family) {
  if (obs.size() != rank_values.size()) {
    throw std::invalid_argument("observations and ranking values differ in length");
  }
  if (!(phi > 0.0) || !std::isfinite(phi)) throw std::domain_error("dispersion must be positive");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (std::isnan(rank_values[i])) {
      throw std::invalid_argument("ranking value is NaN at row " + std::to_string(i + 1));
    }
    if (!(obs[i].v > 0.0) || !std::isfinite(obs[i].v)) {
      throw std::domain_error("volume must be positive at row " + std::to_string(i + 1));
    }
    try {
      validate_response(family, obs[i].y, obs[i].v / phi);
    } catch (const std::domain_error& e) {
      throw std::domain_error(std::string(e.what()) + " (row " + std::to_string(i + 1) + ")");
    }
  }
  std::vector<std::size_t> order(obs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rank_values[a] < rank_values[b]; });
  RankedSample s;
  s.phi = phi;
  s.family = family;
  s.source = order;
  s.obs.reserve(obs.size());
  s.rank_values.reserve(obs.size());
  for (std::size_t i : order) {
    s.obs.push_back(obs[i]);
    s.rank_values.push_back(rank_values[i]);
  }
  fill_prefix(s);
  return s;
}

RankedSample merge_ties(const RankedSample& sample) {
  RankedSample out;
  out.phi = sample.phi;
  out.family = sample.family;
  const std::size_t n = sample.size();
  std::size_t g = 0;
  while (g < n) {
    std::size_t e = g;
    while (e + 1 < n && sample.rank_values[e + 1] == sample.rank_values[g]) ++e;
    if (e == g) {
      out.obs.push_back(sample.obs[g]);
    } else {
      out.obs.push_back({sample.aggregate(g, e), sample.volume(g, e)});
    }
    out.rank_values.push_back(sample.rank_values[g]);
    out.source.push_back(sample.source[g]);
    g = e + 1;
  }
  fill_prefix(out);
  return out;
}

PairSet make_pair_set(PairStrategy strategy, double param, const RankedSample& sample,
                      const std::vector<double>& estimates) {
  const std::size_t n = sample.size();
  if (n == 0) throw std::invalid_argument("empty sample");
  PairSet p;
  p.strategy = strategy;
  p.param = param;
  p.k_last.resize(n);
  switch (strategy) {
    case PairStrategy::Distinct:
      if (sample.has_ties()) {
        throw std::invalid_argument("distinct pair set needs a sample with merged ties");
      }
      [[fallthrough]];
    case PairStrategy::Full:
      for (std::size_t j = 0; j < n; ++j) p.k_last[j] = n - 1;
      break;
    case PairStrategy::Nbh: {
      if (!(param >= 0.0)) throw std::invalid_argument("neighbourhood size must be >= 0");
      const auto s = static_cast<std::size_t>(std::floor(param));
      for (std::size_t j = 0; j < n; ++j) p.k_last[j] = std::min(n - 1, j + s);
      break;
    }
    case PairStrategy::Dist: {
      if (!(param >= 0.0)) throw std::invalid_argument("distance must be >= 0");
      std::vector<double> est = estimates;
      if (est.empty()) {
        std::vector<double> y(n), v(n);
        for (std::size_t i = 0; i < n; ++i) {
          y[i] = sample.obs[i].y;
          v[i] = sample.obs[i].v;
        }
        est = pava(y, v).fitted;
      }
      if (est.size() != n) throw std::invalid_argument("estimates misaligned with sample");
      for (std::size_t i = 1; i < n; ++i) {
        if (est[i] < est[i - 1]) {
          throw std::invalid_argument("dist pair set needs estimates sorted with the ranking");
        }
      }
      std::size_t k = 0;
      for (std::size_t j = 0; j < n; ++j) {
        k = std::max(k, j);
        while (k + 1 < n && est[k + 1] - est[j] <= param) ++k;
        p.k_last[j] = k;
      }
      break;
    }
  }
  p.size = 0;
  for (std::size_t j = 0; j < n; ++j) p.size += p.k_last[j] - j + 1;
  return p;
}

std::pair<PairStrategy, double> parse_pair_strategy(const std::string& text) {
  if (text == "full") return {PairStrategy::Full, 0.0};
  if (text == "distinct") return {PairStrategy::Distinct, 0.0};
  auto value = [&](std::size_t at) {
    std::size_t used = 0;
    const std::string tail = text.substr(at);
    const double x = std::stod(tail, &used);
    if (used != tail.size()) throw std::invalid_argument("bad pair strategy '" + text + "'");
    return x;
  };
  try {
    if (text.rfind("nbh:", 0) == 0) return {PairStrategy::Nbh, value(4)};
    if (text.rfind("dist:", 0) == 0) return {PairStrategy::Dist, value(5)};
  } catch (const std::logic_error&) {
    throw std::invalid_argument("bad pair strategy '" + text + "'");
  }
  throw std::invalid_argument("unknown pair strategy '" + text + "'");
}

Band build_band(const RankedSample& sample, const PairSet& pairs, double alpha,
                QuantileMemo* memo) {
  const std::size_t n = sample.size();
  if (pairs.k_last.size() != n) throw std::invalid_argument("pair set does not match sample");
  Band band;
  band.family = sample.family;
  band.alpha = alpha;
  band.delta = delta_for(alpha, pairs.size);
  band.rank_values = sample.rank_values;
  const EdfFamily fam = sample.family;

  std::vector<double> lmax(n, fam.mean_lo);
  std::vector<double> umin(n, fam.mean_hi);

  auto process_row = [&](BoundEvaluator& eval, std::size_t j, std::vector<double>& lm) {
    double u = fam.mean_hi;
    for (std::size_t k = j; k <= pairs.k_last[j] && k < n; ++k) {
      const double z = sample.aggregate(j, k);
      const double v = sample.volume(j, k);
      lm[k] = std::max(lm[k], eval.lower(z, v));
      u = std::min(u, eval.upper(z, v));
    }
    umin[j] = u;
  };

  if (memo) {
    BoundEvaluator eval(fam, sample.phi, band.delta, memo);
    for (std::size_t j = 0; j < n; ++j) process_row(eval, j, lmax);
  } else {
#pragma omp parallel
    {
      BoundEvaluator eval(fam, sample.phi, band.delta);
      std::vector<double> local(n, fam.mean_lo);
#pragma omp for schedule(dynamic, 8) nowait
      for (std::size_t j = 0; j < n; ++j) process_row(eval, j, local);
#pragma omp critical
      for (std::size_t k = 0; k < n; ++k) lmax[k] = std::max(lmax[k], local[k]);
    }
  }
  sweep(sample.rank_values, lmax, umin, band);
  return band;
}

Band build_band_reference(const RankedSample& sample, const PairSet& pairs, double alpha) {
  const std::size_t n = sample.size();
  Band band;
  band.family = sample.family;
  band.alpha = alpha;
  band.delta = delta_for(alpha, pairs.size);
  band.rank_values = sample.rank_values;

  struct PairBound {
    std::size_t j, k;
    double l, u;
  };
  std::vector<PairBound> all;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j; k < n; ++k) {
      if (!pairs.contains(j, k)) continue;
      const BoundQuery q{sample.family, sample.aggregate(j, k), sample.volume(j, k), sample.phi,
                         band.delta};
      all.push_back({j, k, lower_bound(q), upper_bound(q)});
    }
  }
  const auto& r = sample.rank_values;
  band.lower.assign(n, sample.family.mean_lo);
  band.upper.assign(n, sample.family.mean_hi);
  for (std::size_t i = 0; i < n; ++i) {
    for (const PairBound& p : all) {
      if (r[p.k] <= r[i]) band.lower[i] = std::max(band.lower[i], p.l);
      if (r[p.j] >= r[i]) band.upper[i] = std::min(band.upper[i], p.u);
    }
  }
  band.crossed = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (band.lower[i] > band.upper[i]) band.crossed = true;
  }
  return band;
}

Band repair_crossings(const Band& band, const RankedSample& sample) {
  const std::size_t n = band.size();
  if (sample.size() != n) throw std::invalid_argument("band and sample differ in length");
  std::vector<double> y(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = sample.obs[i].y;
    v[i] = sample.obs[i].v;
  }
  const std::vector<double> iso = pava(y, v).fitted;
  Band out = band;
  out.crossed = false;
  for (std::size_t i = 0; i < n; ++i) {
    out.lower[i] = std::min(band.lower[i], iso[i]);
    out.upper[i] = std::max(band.upper[i], iso[i]);
  }
  return out;
}

std::pair<double, double> band_at_rank(const Band& band, double r) {
  if (std::isnan(r)) throw std::invalid_argument("ranking value is NaN");
  const auto& rv = band.rank_values;
  // Last index with rank <= r, first index with rank >= r.
  const auto after = std::upper_bound(rv.begin(), rv.end(), r);
  const auto first = std::lower_bound(rv.begin(), rv.end(), r);
  const double lower =
      after == rv.begin() ? band.family.mean_lo : band.lower[static_cast<std::size_t>(after - rv.begin() - 1)];
  const double upper =
      first == rv.end() ? band.family.mean_hi : band.upper[static_cast<std::size_t>(first - rv.begin())];
  return {lower, upper};
}

Band yang_barber_band(const std::vector<double>& y, double sigma, double alpha) {
  if (!(sigma > 0.0)) throw std::domain_error("sigma must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0, 1)");
  const std::size_t n = y.size();
  if (n == 0) throw std::invalid_argument("empty sample");
  const std::vector<double> iso = pava(y, std::vector<double>(n, 1.0)).fitted;
  std::vector<long double> prefix(n + 1, 0.0L);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + iso[i];

  Band band;
  band.family = EdfFamily::of(Family::Normal);
  band.alpha = alpha;
  const double nn = static_cast<double>(n);
  band.delta = alpha / (nn * nn + nn);
  band.rank_values.resize(n);
  for (std::size_t i = 0; i < n; ++i) band.rank_values[i] = static_cast<double>(i + 1);
  const double tau = std::sqrt(2.0 * sigma * sigma * std::log(1.0 / band.delta));

  std::vector<double> lmax(n, band.family.mean_lo);
  std::vector<double> umin(n, band.family.mean_hi);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j; k < n; ++k) {
      const double len = static_cast<double>(k - j + 1);
      const double zi = static_cast<double>((prefix[k + 1] - prefix[j]) / len);
      const double r = tau / std::sqrt(len);
      lmax[k] = std::max(lmax[k], zi - r);
      umin[j] = std::min(umin[j], zi + r);
    }
  }
  sweep(band.rank_values, lmax, umin, band);
  return band;
}

}  // namespace calib
