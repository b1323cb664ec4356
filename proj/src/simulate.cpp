#include "calib/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "calib/calibrate.hpp"
#include "calib/isotonic.hpp"

namespace calib {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Tally {
  long covered = 0;
  long rejected = 0;
  double width = 0.0;
};

double mean_finite_width(const Band& b) {
  double s = 0.0;
  long m = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double w = b.upper[i] - b.lower[i];
    if (std::isfinite(w)) {
      s += w;
      ++m;
    }
  }
  return m ? s / static_cast<double>(m) : std::numeric_limits<double>::infinity();
}

bool covers(const Band& b, const std::vector<double>& truth) {
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < b.lower[i] || truth[i] > b.upper[i]) return false;
  }
  return true;
}

std::vector<double> responses(const RankedSample& s) {
  std::vector<double> y(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) y[i] = s.obs[i].y;
  return y;
}

std::vector<double> volumes(const RankedSample& s) {
  std::vector<double> v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) v[i] = s.obs[i].v;
  return v;
}

}  // namespace

std::mt19937_64 replication_stream(std::uint64_t seed, std::uint64_t rep) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(rep + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

double sample_inverse_gaussian(std::mt19937_64& rng, double mu, double lambda) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double nu = normal(rng);
  const double y = nu * nu;
  const double x = mu + mu * mu * y / (2.0 * lambda) -
                   mu / (2.0 * lambda) * std::sqrt(4.0 * mu * lambda * y + mu * mu * y * y);
  return unif(rng) <= mu / (mu + x) ? x : mu * mu / x;
}

// Example 1

Example1Sample example1_sample(int n, std::mt19937_64& rng) {
  if (n < 2) throw std::invalid_argument("example1 needs n >= 2");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<DispersedObs> obs(static_cast<std::size_t>(n));
  std::vector<double> mu(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double m = 1500.0 + static_cast<double>(i) / (n - 1) * 1000.0;
    const double sd = 0.5 * m;
    mu[static_cast<std::size_t>(i)] = m;
    obs[static_cast<std::size_t>(i)] = {m + sd * normal(rng), 1.0 / (sd * sd)};
  }
  Example1Sample out;
  out.sample = make_ranked_sample(obs, mu, 1.0, EdfFamily::of(Family::Normal));
  out.true_means = mu;
  out.estimates = pava(responses(out.sample), volumes(out.sample)).fitted;
  return out;
}

std::vector<Metric> run_example1(const Example1Config& cfg, std::uint64_t seed) {
  if (cfg.reps < 1) throw std::invalid_argument("reps must be positive");
  struct Scenario {
    std::string name;
    double param;
  };
  std::vector<Scenario> scenarios;
  for (double a : cfg.alphas) scenarios.push_back({"alpha", a});
  for (double s : cfg.nbh) scenarios.push_back({"nbh", s});
  for (double d : cfg.dist) scenarios.push_back({"dist", d});
  for (double l : cfg.bins) {
    if (l <= cfg.n) scenarios.push_back({"bins", l});
  }
  const std::size_t S = scenarios.size();
  std::vector<std::vector<Tally>> per_rep(static_cast<std::size_t>(cfg.reps), std::vector<Tally>(S));

#pragma omp parallel for schedule(dynamic, 1)
  for (int r = 0; r < cfg.reps; ++r) {
    auto rng = replication_stream(seed, static_cast<std::uint64_t>(r));
    const Example1Sample ex = example1_sample(cfg.n, rng);
    const RankedSample& s = ex.sample;
    QuantileMemo memo;
    for (std::size_t c = 0; c < S; ++c) {
      const Scenario& sc = scenarios[c];
      Tally& t = per_rep[static_cast<std::size_t>(r)][c];
      Band band;
      std::vector<double> truth = ex.true_means;
      std::vector<double> est = ex.estimates;
      std::vector<double> ranks = s.rank_values;
      if (sc.name == "bins") {
        const BinnedSample b = quantile_bin(s, ex.estimates, static_cast<int>(sc.param));
        std::vector<DispersedObs> obs;
        truth.clear();
        for (std::size_t l = 0; l < b.size(); ++l) {
          obs.push_back({b.y_tilde[l], b.v_tilde[l]});
          double m = 0.0;
          for (std::size_t i = b.bin_edges[l]; i < b.bin_edges[l + 1]; ++i) {
            m += s.obs[i].v * ex.true_means[i];
          }
          truth.push_back(m / b.v_tilde[l]);
        }
        const RankedSample bs = make_ranked_sample(obs, b.rank_tilde, s.phi, s.family);
        band = build_band(bs, make_pair_set(PairStrategy::Full, 0.0, bs), cfg.alpha, &memo);
        est = b.mu_tilde;
        ranks = b.rank_tilde;
      } else if (sc.name == "alpha") {
        band = build_band(s, make_pair_set(PairStrategy::Full, 0.0, s), sc.param, &memo);
      } else if (sc.name == "nbh") {
        band = build_band(s, make_pair_set(PairStrategy::Nbh, sc.param, s), cfg.alpha, &memo);
      } else {
        band = build_band(s, make_pair_set(PairStrategy::Dist, sc.param, s, ex.estimates),
                          cfg.alpha, &memo);
      }
      t.covered = covers(band, truth) ? 1 : 0;
      t.rejected = test_calibration(band, est, ranks).rejected() ? 1 : 0;
      t.width = mean_finite_width(band);
    }
  }

  std::vector<Metric> out;
  for (std::size_t c = 0; c < S; ++c) {
    Tally sum;
    for (const auto& rep : per_rep) {
      sum.covered += rep[c].covered;
      sum.rejected += rep[c].rejected;
      sum.width += rep[c].width;
    }
    const double R = cfg.reps;
    const std::string& name = scenarios[c].name;
    const double p = scenarios[c].param;
    out.push_back({"example1", name, p, "reps", R});
    out.push_back({"example1", name, p, "coverage_rate", sum.covered / R});
    out.push_back({"example1", name, p, "rejection_rate", sum.rejected / R});
    out.push_back({"example1", name, p, "mean_width", sum.width / R});
  }
  return out;
}

// Example 3

Example3Run example3_run(const Example3Config& cfg, std::mt19937_64& rng) {
  if (cfg.n < 2) throw std::invalid_argument("example3 needs n >= 2");
  if (!(cfg.mean_lo > 0.0 && cfg.mean_hi > cfg.mean_lo)) {
    throw std::invalid_argument("example3 needs 0 < mean_lo < mean_hi");
  }
  const auto n = static_cast<std::size_t>(cfg.n);
  std::uniform_real_distribution<double> unif(std::log(cfg.mean_lo), std::log(cfg.mean_hi));
  std::vector<double> mu(n);
  for (double& m : mu) m = std::exp(unif(rng));
  std::sort(mu.begin(), mu.end());
  std::vector<DispersedObs> obs(n);
  std::vector<double> y(n), v(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = sample_inverse_gaussian(rng, mu[i], 1.0 / cfg.phi);
    obs[i] = {y[i], 1.0};
  }
  const EdfFamily fam = EdfFamily::of(Family::InverseGaussian);
  Example3Run run;
  run.estimates = mu;
  run.phi_pearson = pearson_dispersion(fam, y, mu, v, 0);
  run.phi_deviance = deviance_dispersion(fam, y, mu, v, 0);
  run.phi_mle = mle_dispersion_ig(y, mu, v);
  auto band_for = [&](double phi) {
    const RankedSample s = make_ranked_sample(obs, mu, phi, fam);
    return build_band(s, make_pair_set(PairStrategy::Full, 0.0, s), cfg.alpha);
  };
  run.band_true = band_for(cfg.phi);
  run.band_pearson = band_for(run.phi_pearson);
  run.band_deviance = band_for(run.phi_deviance);
  run.band_mle = band_for(run.phi_mle);
  return run;
}

double max_relative_edge_gap(const Band& a, const Band& b, double fraction) {
  const std::size_t n = a.size();
  if (b.size() != n) throw std::invalid_argument("bands differ in length");
  const double trim = (1.0 - fraction) / 2.0;
  const auto lo = static_cast<std::size_t>(std::floor(trim * static_cast<double>(n)));
  const auto hi = n - lo;
  auto gap = [](double x, double ref) {
    if (x == ref) return 0.0;
    if (!std::isfinite(x) || !std::isfinite(ref)) return std::numeric_limits<double>::infinity();
    return std::fabs(x - ref) / std::fabs(ref);
  };
  double worst = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    worst = std::max(worst, gap(a.lower[i], b.lower[i]));
    worst = std::max(worst, gap(a.upper[i], b.upper[i]));
  }
  return worst;
}

std::vector<Metric> run_example3(const Example3Config& cfg, std::uint64_t seed) {
  if (cfg.reps < 1) throw std::invalid_argument("reps must be positive");
  struct Rep {
    double phi[3];
    double gap[3];
    int rejected[4];
  };
  std::vector<Rep> reps(static_cast<std::size_t>(cfg.reps));
#pragma omp parallel for schedule(dynamic, 1)
  for (int r = 0; r < cfg.reps; ++r) {
    auto rng = replication_stream(seed, static_cast<std::uint64_t>(r));
    const Example3Run run = example3_run(cfg, rng);
    Rep& out = reps[static_cast<std::size_t>(r)];
    out.phi[0] = run.phi_pearson;
    out.phi[1] = run.phi_deviance;
    out.phi[2] = run.phi_mle;
    const Band* bands[4] = {&run.band_true, &run.band_pearson, &run.band_deviance, &run.band_mle};
    for (int k = 0; k < 3; ++k) out.gap[k] = max_relative_edge_gap(*bands[k + 1], run.band_true, 0.9);
    for (int k = 0; k < 4; ++k) {
      out.rejected[k] = test_calibration(*bands[k], run.estimates, run.estimates).rejected();
    }
  }
  std::vector<Metric> m;
  const char* names[4] = {"true", "pearson", "deviance", "mle"};
  const double R = cfg.reps;
  for (int k = 0; k < 4; ++k) {
    double phi = 0.0, gap = 0.0, worst = 0.0, rej = 0.0;
    for (const Rep& rep : reps) {
      phi += k == 0 ? cfg.phi : rep.phi[k - 1];
      const double g = k == 0 ? 0.0 : rep.gap[k - 1];
      gap += g;
      worst = std::max(worst, g);
      rej += rep.rejected[k];
    }
    m.push_back({"example3", names[k], cfg.phi, "reps", R});
    m.push_back({"example3", names[k], cfg.phi, "mean_phi", phi / R});
    m.push_back({"example3", names[k], cfg.phi, "mean_max_rel_gap", gap / R});
    m.push_back({"example3", names[k], cfg.phi, "worst_max_rel_gap", worst});
    m.push_back({"example3", names[k], cfg.phi, "rejection_rate", rej / R});
  }
  return m;
}

// Example 5

std::vector<Example5Scenario> example5_scenarios(const Example5Config& cfg) {
  std::vector<Example5Scenario> out;
  for (bool binned : {false, true}) {
    if (binned ? !cfg.binned : !cfg.raw) continue;
    for (double d : cfg.shifts) out.push_back({binned, -1.0, d});
    for (double l : cfg.levels) {
      for (double d : cfg.shifts) {
        if (d != 0.0) out.push_back({binned, l, d});
      }
    }
  }
  return out;
}

int example5_rejections(const Example5Config& cfg, const Example5Scenario& sc,
                        std::uint64_t seed) {
  if (cfg.n < 1 || cfg.reps < 1) throw std::invalid_argument("n and reps must be positive");
  static const double levels[6] = {10, 11, 12, 13, 14, 15};
  static const double cum[6] = {0.1, 0.25, 0.5, 0.75, 0.9, 1.0};
  const auto n = static_cast<std::size_t>(cfg.n);
  const EdfFamily fam = EdfFamily::of(Family::Gamma);
  std::vector<int> rejected(static_cast<std::size_t>(cfg.reps), 0);

#pragma omp parallel
  {
    QuantileMemo memo;
#pragma omp for schedule(dynamic, 1)
    for (int r = 0; r < cfg.reps; ++r) {
      auto rng = replication_stream(seed, static_cast<std::uint64_t>(r));
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      std::vector<double> mu(n);
      for (double& m : mu) {
        const double u = unif(rng);
        int k = 0;
        while (k < 5 && u > cum[k]) ++k;
        m = levels[k];
      }
      std::sort(mu.begin(), mu.end());
      std::vector<DispersedObs> obs(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::gamma_distribution<double> g(3.0 * mu[i], 1.0 / 3.0);
        double y = g(rng);
        if (sc.level < 0.0 || mu[i] == sc.level) y += sc.shift;
        obs[i] = {y, 3.0 * mu[i]};
      }
      const RankedSample s = make_ranked_sample(obs, mu, 1.0, fam);
      bool reject;
      if (sc.binned) {
        const BinnedSample b = quantile_bin(s, mu, 6);
        std::vector<DispersedObs> bo;
        for (std::size_t l = 0; l < b.size(); ++l) bo.push_back({b.y_tilde[l], b.v_tilde[l]});
        const RankedSample bs = make_ranked_sample(bo, b.rank_tilde, 1.0, fam);
        const Band band =
            build_band(bs, make_pair_set(PairStrategy::Full, 0.0, bs), cfg.alpha, &memo);
        reject = test_calibration(band, b.mu_tilde, b.rank_tilde).rejected();
      } else {
        const Band band = build_band(s, make_pair_set(PairStrategy::Full, 0.0, s), cfg.alpha, &memo);
        reject = test_calibration(band, mu, mu).rejected();
      }
      rejected[static_cast<std::size_t>(r)] = reject ? 1 : 0;
    }
  }
  int total = 0;
  for (int x : rejected) total += x;
  return total;
}

std::vector<Metric> run_example5(const Example5Config& cfg, std::uint64_t seed) {
  std::vector<Metric> m;
  for (const Example5Scenario& sc : example5_scenarios(cfg)) {
    const int rej = example5_rejections(cfg, sc, seed);
    std::string name = sc.binned ? "binned/" : "raw/";
    name += sc.level < 0.0 ? "global" : "level" + std::to_string(static_cast<int>(sc.level));
    m.push_back({"example5", name, sc.shift, "reps", static_cast<double>(cfg.reps)});
    m.push_back({"example5", name, sc.shift, "rejections", static_cast<double>(rej)});
    m.push_back({"example5", name, sc.shift, "rejection_rate", rej / static_cast<double>(cfg.reps)});
  }
  return m;
}

}  // namespace calib
