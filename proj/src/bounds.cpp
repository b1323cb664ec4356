#include "calib/bounds.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "calib/special_functions.hpp"

namespace calib {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Memo = QuantileMemo;
using Kind = QuantileMemo::Kind;

double count_of(const BoundQuery& q) { return additive_count(q.z, q.v_over_phi()); }

// Closed forms. `memo` may be null.

double closed_lower(const EdfFamily& fam, double z, double w, double delta, double normal_q,
                    Memo* memo) {
  auto cached = [&](Kind kind, double a, double b, auto compute) {
    return memo ? memo->get(kind, delta, a, b, compute) : compute();
  };
  switch (fam.name) {
    case Family::Binomial: {
      const double n = additive_count(z, w);
      if (n <= 0.0) return 0.0;
      const double m = std::round(w);
      return cached(Kind::BetaLower, n, m - n + 1.0,
                    [&] { return special::quantile_beta(delta, n, m - n + 1.0); });
    }
    case Family::Poisson: {
      const double n = additive_count(z, w);
      if (n <= 0.0) return 0.0;
      return cached(Kind::GammaLower, n, 1.0,
                    [&] { return special::quantile_gamma(delta, n); }) /
             w;
    }
    case Family::NegBinomial: {
      const double n = additive_count(z, w);
      if (n <= 0.0) return 0.0;
      // mu = p / (1 - p); near p = 1 the mirrored quantile 1 - p is solved directly.
      const double p =
          cached(Kind::BetaLower, n, w, [&] { return special::quantile_beta(delta, n, w); });
      if (p <= 0.5) return p / (1.0 - p);
      const double q = cached(Kind::BetaUpper, w, n,
                              [&] { return special::quantile_beta_upper(delta, w, n); });
      return (1.0 - q) / q;
    }
    case Family::Gamma:
      return w * z /
             cached(Kind::GammaUpper, w, 1.0,
                    [&] { return special::quantile_gamma_upper(delta, w); });
    case Family::Normal:
      return z + normal_q / std::sqrt(w);
    case Family::InverseGaussian:
      break;
  }
  throw std::logic_error("no closed form");
}

double closed_upper(const EdfFamily& fam, double z, double w, double delta, double normal_q,
                    Memo* memo) {
  auto cached = [&](Kind kind, double a, double b, auto compute) {
    return memo ? memo->get(kind, delta, a, b, compute) : compute();
  };
  switch (fam.name) {
    case Family::Binomial: {
      const double n = additive_count(z, w);
      const double m = std::round(w);
      if (n >= m) return 1.0;
      return cached(Kind::BetaUpper, n + 1.0, m - n,
                    [&] { return special::quantile_beta_upper(delta, n + 1.0, m - n); });
    }
    case Family::Poisson: {
      const double n = additive_count(z, w);
      return cached(Kind::GammaUpper, n + 1.0, 1.0,
                    [&] { return special::quantile_gamma_upper(delta, n + 1.0); }) /
             w;
    }
    case Family::NegBinomial: {
      const double n = additive_count(z, w);
      const double p = cached(Kind::BetaUpper, n + 1.0, w,
                              [&] { return special::quantile_beta_upper(delta, n + 1.0, w); });
      if (p <= 0.5) return p / (1.0 - p);
      const double q = cached(Kind::BetaLower, w, n + 1.0,
                              [&] { return special::quantile_beta(delta, w, n + 1.0); });
      return q <= 0.0 ? kInf : (1.0 - q) / q;
    }
    case Family::Gamma:
      return w * z /
             cached(Kind::GammaLower, w, 1.0, [&] { return special::quantile_gamma(delta, w); });
    case Family::Normal:
      return z - normal_q / std::sqrt(w);
    case Family::InverseGaussian:
      break;
  }
  throw std::logic_error("no closed form");
}

// Bisection in a coordinate where the mean space is the whole line.

struct Coordinates {
  int kind;  // 0 identity, 1 log, 2 logit
  double t_lo;
  double t_hi;

  static Coordinates of(const EdfFamily& fam) {
    if (fam.name == Family::Normal) return {0, -1e300, 1e300};
    if (fam.name == Family::Binomial) return {2, -700.0, 36.0};
    return {1, -700.0, 700.0};
  }
  double to_mu(double t) const {
    if (kind == 0) return t;
    if (kind == 1) return std::exp(t);
    return 1.0 / (1.0 + std::exp(-t));
  }
  double to_t(double mu) const {
    if (kind == 0) return mu;
    if (kind == 1) return std::log(mu);
    return std::log(mu / (1.0 - mu));
  }
  double tolerance(double t) const {
    return kind == 0 ? 1e-14 * std::max(1.0, std::fabs(t)) : 1e-14;
  }
};

double start_point(const EdfFamily& fam, double z, double w) {
  switch (fam.name) {
    case Family::Normal:
      return z;
    case Family::Binomial: {
      const double m = std::round(w);
      return (additive_count(z, w) + 0.5) / (m + 1.0);
    }
    default:
      return z > 0.0 ? z : 1.0 / w;
  }
}

// Boundary of {mu : gap(mu) >= 0} for a gap that is continuous and monotone
// in mu (increasing when true_above, decreasing otherwise). The bracket is
// found by geometric expansion from mu0 and refined by TOMS 748, which keeps
// the root bracketed. Empty or full sets map to the mean-space endpoints.
double bisect(const EdfFamily& fam, double mu0, bool true_above,
              const std::function<double(double)>& gap) {
  const Coordinates c = Coordinates::of(fam);
  auto g = [&](double t) { return gap(c.to_mu(t)); };
  const double t0 = std::clamp(c.to_t(mu0), c.t_lo, c.t_hi);
  const double g0 = g(t0);
  const bool p0 = g0 >= 0.0;
  // Walk towards the side where the sign flips.
  const bool go_up = (p0 != true_above);
  double t_from = t0, g_from = g0;
  double t_to = t0, g_to = g0;
  double step = 1.0;
  bool found = false;
  for (int it = 0; it < 2100; ++it) {
    double t = go_up ? t_from + step : t_from - step;
    const bool at_limit = go_up ? t >= c.t_hi : t <= c.t_lo;
    if (at_limit) t = go_up ? c.t_hi : c.t_lo;
    const double gt = g(t);
    if ((gt >= 0.0) != p0) {
      t_to = t;
      g_to = gt;
      found = true;
      break;
    }
    if (at_limit) break;
    t_from = t;
    g_from = gt;
    step *= 2.0;
  }
  if (!found) {
    // The sign is constant up to the edge of the space.
    return go_up ? fam.mean_hi : fam.mean_lo;
  }
  double a = t_from, fa = g_from, b = t_to, fb = g_to;
  if (a > b) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  if (fa == 0.0) return c.to_mu(a);
  if (fb == 0.0) return c.to_mu(b);
  auto tol = [&](double x, double y) { return std::fabs(x - y) <= c.tolerance(std::max(std::fabs(x), std::fabs(y))); };
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(g, a, b, fa, fb, tol, iters);
  if (iters >= 200 && !tol(r.first, r.second)) {
    throw std::runtime_error("mean bound root search did not converge");
  }
  return c.to_mu(0.5 * (r.first + r.second));
}

// Independent CDF evaluation for the grid oracle.

double pmf_sum(const EdfFamily& fam, double k, double mu, double w) {
  if (k < 0.0) return 0.0;
  double total = 0.0;
  const long kmax = static_cast<long>(k);
  if (fam.name == Family::Binomial) {
    const double m = std::round(w);
    if (k >= m) return 1.0;
    const double lm = std::lgamma(m + 1.0);
    for (long i = 0; i <= kmax; ++i) {
      const double d = static_cast<double>(i);
      total += std::exp(lm - std::lgamma(d + 1.0) - std::lgamma(m - d + 1.0) + d * std::log(mu) +
                        (m - d) * std::log1p(-mu));
    }
  } else if (fam.name == Family::Poisson) {
    const double lambda = mu * w;
    for (long i = 0; i <= kmax; ++i) {
      const double d = static_cast<double>(i);
      total += std::exp(d * std::log(lambda) - lambda - std::lgamma(d + 1.0));
    }
  } else {
    const double lp = std::log(mu) - std::log1p(mu);
    const double lq = -std::log1p(mu);
    const double lg = std::lgamma(w);
    for (long i = 0; i <= kmax; ++i) {
      const double d = static_cast<double>(i);
      total += std::exp(std::lgamma(d + w) - lg - std::lgamma(d + 1.0) + d * lp + w * lq);
    }
  }
  return std::min(total, 1.0);
}

template <class F>
double integrate(F f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 10, 1e-12);
}

// Splits [a, b] at geometrically spaced offsets from a peak at m of width s so
// that no panel can step over the mass.
template <class F>
double integrate_around(F f, double a, double b, double m, double s) {
  std::vector<double> cuts{a, b};
  for (double k = 1.0; k <= 4096.0; k *= 4.0) {
    for (double c : {m - k * s, m + k * s, m}) {
      if (c > a && c < b) cuts.push_back(c);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += integrate(f, cuts[i], cuts[i + 1]);
  return total;
}

double gamma_cdf_quadrature(double z, double mu, double w) {
  const double x = w * z / mu;
  if (x <= 0.0) return 0.0;
  if (x > w + 60.0 * std::sqrt(w) + 200.0) return 1.0;
  if (w < 1.0) {
    // t = s^(1/w) removes the singularity at zero.
    const double inv = 1.0 / w;
    const double norm = std::exp(-std::lgamma(w + 1.0));
    auto f = [&](double s) { return std::exp(-std::pow(s, inv)) * norm; };
    return std::min(1.0, integrate(f, 0.0, std::pow(x, w)));
  }
  const double lg = std::lgamma(w);
  auto f = [&](double t) {
    return t <= 0.0 ? (w == 1.0 ? 1.0 : 0.0) : std::exp((w - 1.0) * std::log(t) - t - lg);
  };
  return std::min(1.0, integrate_around(f, 0.0, x, w - 1.0, std::sqrt(w)));
}

double ig_cdf_quadrature(double z, double mu, double lambda) {
  const double ratio = 1.5 * mu / lambda;
  const double mode = mu / (std::sqrt(1.0 + ratio * ratio) + ratio);
  const double y_min = 1e-3 * std::min(mode, z);
  // y = e^u; the peak has width about sqrt(mu / lambda) in u.
  auto f = [&](double u) {
    const double y = std::exp(u);
    const double e = -lambda * (y - mu) * (y - mu) / (2.0 * mu * mu * y);
    return std::sqrt(lambda / (2.0 * M_PI * y)) * std::exp(e);
  };
  const double width = std::min(1.0, std::sqrt(mu / lambda));
  return std::min(1.0, integrate_around(f, std::log(y_min), std::log(z), std::log(mode), width));
}

// P(Y <= z) when inclusive, P(Y < z) otherwise.
double oracle_cdf(const EdfFamily& fam, double z, double mu, double w, bool inclusive) {
  switch (fam.name) {
    case Family::Binomial:
    case Family::Poisson:
    case Family::NegBinomial: {
      const double n = additive_count(z, w);
      return pmf_sum(fam, inclusive ? n : n - 1.0, mu, w);
    }
    case Family::Normal:
      return 0.5 * std::erfc(-(z - mu) * std::sqrt(w) / std::sqrt(2.0));
    case Family::Gamma:
      return gamma_cdf_quadrature(z, mu, w);
    case Family::InverseGaussian:
      return ig_cdf_quadrature(z, mu, w);
  }
  return 0.0;
}

std::vector<double> oracle_grid(const BoundQuery& q, int size) {
  std::vector<double> g(static_cast<std::size_t>(size));
  const double w = q.v_over_phi();
  const double last = static_cast<double>(size - 1);
  for (int i = 0; i < size; ++i) {
    const double s = static_cast<double>(i) / last;
    double mu;
    if (q.family.name == Family::Normal) {
      const double r = 40.0 / std::sqrt(w);
      mu = q.z - r + 2.0 * r * s;
    } else if (q.family.name == Family::Binomial) {
      mu = 1.0 / (1.0 + std::exp(-(-30.0 + 60.0 * s)));
    } else {
      const double c = std::max(q.z, 1.0 / w);
      mu = c * std::pow(10.0, -8.0 + 16.0 * s);
    }
    g[static_cast<std::size_t>(i)] = mu;
  }
  return g;
}

}  // namespace

void validate(const BoundQuery& q) {
  if (!(q.delta > 0.0 && q.delta < 1.0)) throw std::domain_error("delta must lie in (0, 1)");
  if (!(q.v > 0.0) || !std::isfinite(q.v)) throw std::domain_error("volume must be positive");
  if (!(q.phi > 0.0) || !std::isfinite(q.phi)) {
    throw std::domain_error("dispersion must be positive");
  }
  validate_response(q.family, q.z, q.v_over_phi());
}

double lower_bound(const BoundQuery& q) {
  validate(q);
  if (q.family.name == Family::InverseGaussian) return lower_bound_bisection(q);
  return closed_lower(q.family, q.z, q.v_over_phi(), q.delta,
                      special::quantile_std_normal(q.delta), nullptr);
}

double upper_bound(const BoundQuery& q) {
  validate(q);
  if (q.family.name == Family::InverseGaussian) return upper_bound_bisection(q);
  return closed_upper(q.family, q.z, q.v_over_phi(), q.delta,
                      special::quantile_std_normal(q.delta), nullptr);
}

double lower_bound_bisection(const BoundQuery& q) {
  validate(q);
  const double w = q.v_over_phi();
  if (q.family.discrete() && count_of(q) <= 0.0) return q.family.mean_lo;
  const double log_delta = std::log(q.delta);
  auto gap = [&](double mu) {
    return std::max(std::log(survival_weak(q.family, q.z, mu, w)), -800.0) - log_delta;
  };
  return bisect(q.family, start_point(q.family, q.z, w), true, gap);
}

double upper_bound_bisection(const BoundQuery& q) {
  validate(q);
  const double w = q.v_over_phi();
  if (q.family.name == Family::Binomial && count_of(q) >= std::round(w)) return 1.0;
  const double log_delta = std::log(q.delta);
  auto gap = [&](double mu) {
    return std::max(std::log(cdf(q.family, q.z, mu, w)), -800.0) - log_delta;
  };
  return bisect(q.family, start_point(q.family, q.z, w), false, gap);
}

GridBound brute_force_bound_detail(const BoundQuery& q, Side side, int grid_size) {
  validate(q);
  if (grid_size < 1000) throw std::domain_error("grid_size must be at least 1000");
  const double w = q.v_over_phi();
  const std::vector<double> g = oracle_grid(q, grid_size);
  const int n = grid_size;
  if (side == Side::Lower) {
    // Smallest grid index where F*(z) <= 1 - delta.
    auto pred = [&](int i) {
      return oracle_cdf(q.family, q.z, g[static_cast<std::size_t>(i)], w, false) <= 1.0 - q.delta;
    };
    if (pred(0)) return {q.family.mean_lo, std::fabs(g[0] - q.family.mean_lo)};
    if (!pred(n - 1)) return {q.family.mean_hi, kInf};
    int lo = 0, hi = n - 1;  // pred(lo) false, pred(hi) true
    while (hi - lo > 1) {
      const int mid = lo + (hi - lo) / 2;
      (pred(mid) ? hi : lo) = mid;
    }
    return {g[static_cast<std::size_t>(hi)],
            g[static_cast<std::size_t>(hi)] - g[static_cast<std::size_t>(lo)]};
  }
  // Largest grid index where F(z) >= delta.
  auto pred = [&](int i) {
    return oracle_cdf(q.family, q.z, g[static_cast<std::size_t>(i)], w, true) >= q.delta;
  };
  if (pred(n - 1)) {
    return {q.family.mean_hi, std::fabs(q.family.mean_hi - g[static_cast<std::size_t>(n - 1)])};
  }
  if (!pred(0)) return {q.family.mean_lo, kInf};
  int lo = 0, hi = n - 1;  // pred(lo) true, pred(hi) false
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    (pred(mid) ? lo : hi) = mid;
  }
  return {g[static_cast<std::size_t>(lo)],
          g[static_cast<std::size_t>(hi)] - g[static_cast<std::size_t>(lo)]};
}

std::size_t QuantileMemo::KeyHash::operator()(const Key& k) const noexcept {
  auto mix = [](std::uint64_t h, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    h ^= bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  };
  std::uint64_t h = static_cast<std::uint64_t>(k.kind);
  h = mix(h, k.p);
  h = mix(h, k.a);
  h = mix(h, k.b);
  return static_cast<std::size_t>(h);
}

BoundEvaluator::BoundEvaluator(const EdfFamily& family, double phi, double delta,
                               QuantileMemo* shared)
    : family_(family),
      phi_(phi),
      delta_(delta),
      normal_q_(0.0),
      memo_(shared ? shared : &own_) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("delta must lie in (0, 1)");
  if (!(phi > 0.0)) throw std::domain_error("dispersion must be positive");
  normal_q_ = special::quantile_std_normal(delta);
}

double BoundEvaluator::lower(double z, double v) {
  const double w = v / phi_;
  if (family_.name == Family::InverseGaussian) {
    return lower_bound_bisection({family_, z, v, phi_, delta_});
  }
  return closed_lower(family_, z, w, delta_, normal_q_, memo_);
}

double BoundEvaluator::upper(double z, double v) {
  const double w = v / phi_;
  if (family_.name == Family::InverseGaussian) {
    return upper_bound_bisection({family_, z, v, phi_, delta_});
  }
  return closed_upper(family_, z, w, delta_, normal_q_, memo_);
}

}  // namespace calib
