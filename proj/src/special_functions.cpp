#include "calib/special_functions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace calib::special {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // log(2 pi) / 2
constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
  if (!ok) throw std::domain_error(what);
}

// x^a e^{-x} / Gamma(a + 1), the leading factor of both incomplete gamma
// representations.
double gamma_prefactor(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (a < 10.0) return std::exp(a * std::log(x) - x - log_gamma(a + 1.0));
  return std::exp(-stirling_error(a) - deviance_term(a, x)) /
         std::sqrt(2.0 * std::numbers::pi * a);
}

// x^a (1 - x)^b / B(a, b).
double beta_prefactor(double a, double b, double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  if (a >= 1.0 && b >= 1.0) {
    const double n = a + b;
    const double log_binom = stirling_error(n) - stirling_error(a) - stirling_error(b) -
                             deviance_term(a, n * x) - deviance_term(b, n * (1.0 - x));
    return (a * b / n) * std::exp(log_binom) * std::sqrt(n / (2.0 * std::numbers::pi * a * b));
  }
  const double log_beta = log_gamma(a) + log_gamma(b) - log_gamma(a + b);
  return std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta);
}

// sum_{n >= 0} x^n / ((a + 1) ... (a + n))
double gamma_series(double a, double x) {
  double sum = 1.0;
  double term = 1.0;
  const long cap = 1000 + static_cast<long>(50.0 * std::sqrt(a + x));
  for (long n = 1; n < cap; ++n) {
    term *= x / (a + static_cast<double>(n));
    sum += term;
    if (term < sum * kEps) break;
  }
  return sum;
}

// Continued fraction for Q(a, x) / (x^a e^{-x} / Gamma(a)), modified Lentz.
double gamma_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  const long cap = 1000 + static_cast<long>(50.0 * std::sqrt(a + x));
  for (long i = 1; i < cap; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

// Continued fraction for I_x(a, b) * a / prefactor, modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  const long cap = 1000 + static_cast<long>(50.0 * std::sqrt(std::max(a, b)));
  for (long m = 1; m < cap; ++m) {
    const double dm = static_cast<double>(m);
    const double m2 = 2.0 * dm;
    double aa = dm * (b - dm) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + dm) * (qab + dm) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

struct TailPair {
  double lower;  // P or I
  double upper;  // Q or 1 - I
};

TailPair gamma_tails(double a, double x) {
  require(a > 0.0 && std::isfinite(a), "incomplete gamma: shape must be positive");
  require(!std::isnan(x), "incomplete gamma: NaN argument");
  if (x <= 0.0) return {0.0, 1.0};
  if (x == kInf) return {1.0, 0.0};
  if (x < a + 1.0) {
    const double p = gamma_prefactor(a, x) * gamma_series(a, x);
    return {p, 1.0 - p};
  }
  const double q = a * gamma_prefactor(a, x) * gamma_continued_fraction(a, x);
  return {1.0 - q, q};
}

TailPair beta_tails(double a, double b, double x) {
  require(a > 0.0 && b > 0.0, "incomplete beta: parameters must be positive");
  require(!std::isnan(x), "incomplete beta: NaN argument");
  if (x <= 0.0) return {0.0, 1.0};
  if (x >= 1.0) return {1.0, 0.0};
  const double front = beta_prefactor(a, b, x);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    const double i = front * beta_continued_fraction(a, b, x) / a;
    return {i, 1.0 - i};
  }
  const double j = front * beta_continued_fraction(b, a, 1.0 - x) / b;
  return {1.0 - j, j};
}

// Newton iteration on log(tail(x)) - log(target) inside a shrinking bracket.
// `tail(x)` returns the tail probability being matched and `density(x)` its
// derivative magnitude; `increasing` tells the direction of the tail in x.
template <class Tail, class Density>
double solve_tail(double target, double x0, double lo, double hi, bool increasing, Tail tail,
                  Density density) {
  const bool unit_interval = (hi == 1.0);
  const double log_target = std::log(target);
  double x = x0;
  for (int it = 0; it < 400; ++it) {
    const double t = tail(x);
    const double g = (t > 0.0) ? std::log(t) - log_target : -kInf;
    if (g == 0.0) return x;
    const bool too_far = increasing ? (g > 0.0) : (g < 0.0);
    if (too_far) {
      hi = x;
    } else {
      lo = x;
    }
    double next = std::numeric_limits<double>::quiet_NaN();
    if (t > 0.0) {
      const double slope = (increasing ? 1.0 : -1.0) * density(x) / t;
      if (slope != 0.0 && std::isfinite(slope)) next = x - g / slope;
    }
    if (!(next > lo && next < hi)) {
      if (hi == kInf) {
        next = 2.0 * x + 1.0;
      } else if (lo <= 0.0) {
        next = hi / 16.0;
      } else if (unit_interval && hi == 1.0) {
        next = 1.0 - (1.0 - lo) / 16.0;
      } else {
        next = 0.5 * (lo + hi);
      }
    }
    if (std::fabs(next - x) <= 4.0 * kEps * std::fabs(next) || next == x) return next;
    x = next;
  }
  return x;
}

double gamma_initial_guess(double a, double lower_p, double upper_q) {
  const double z = (lower_p <= 0.5) ? quantile_std_normal(lower_p) : -quantile_std_normal(upper_q);
  if (a >= 1.0) {
    const double c = 1.0 / (9.0 * a);
    const double w = 1.0 - c + z * std::sqrt(c);
    if (w > 0.0) return a * w * w * w;
  }
  if (lower_p <= 0.5) {
    const double guess = std::exp((std::log(lower_p) + log_gamma(a + 1.0)) / a);
    if (guess > 0.0 && std::isfinite(guess)) return guess;
  }
  return std::max(a, -std::log(upper_q) + (a - 1.0) * std::log(std::max(a, 1.0)));
}

double gamma_solve(double shape, double lower_p, double upper_q) {
  const double x0 = gamma_initial_guess(shape, lower_p, upper_q);
  auto density = [shape](double x) { return gamma_pdf(shape, x); };
  if (lower_p <= 0.5) {
    return solve_tail(lower_p, x0, 0.0, kInf, true,
                      [shape](double x) { return gamma_tails(shape, x).lower; }, density);
  }
  return solve_tail(upper_q, x0, 0.0, kInf, false,
                    [shape](double x) { return gamma_tails(shape, x).upper; }, density);
}

double beta_initial_guess(double a, double b, double lower_p, double upper_q) {
  const double mean = a / (a + b);
  if (a >= 1.0 && b >= 1.0) {
    const double z =
        (lower_p <= 0.5) ? quantile_std_normal(lower_p) : -quantile_std_normal(upper_q);
    const double sd = std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1.0)));
    const double guess = mean + z * sd;
    if (guess > 0.0 && guess < 1.0) return guess;
  }
  const double log_beta = log_gamma(a) + log_gamma(b) - log_gamma(a + b);
  if (lower_p <= 0.5) {
    const double guess = std::exp((std::log(lower_p * a) + log_beta) / a);
    if (guess > 0.0 && guess < 1.0) return std::min(guess, mean);
  } else {
    const double guess = -std::expm1((std::log(upper_q * b) + log_beta) / b);
    if (guess > 0.0 && guess < 1.0) return std::max(guess, mean);
  }
  return mean;
}

double beta_solve(double a, double b, double lower_p, double upper_q) {
  const double x0 = beta_initial_guess(a, b, lower_p, upper_q);
  auto density = [a, b](double x) { return beta_pdf(a, b, x); };
  if (lower_p <= 0.5) {
    return solve_tail(lower_p, x0, 0.0, 1.0, true,
                      [a, b](double x) { return beta_tails(a, b, x).lower; }, density);
  }
  return solve_tail(upper_q, x0, 0.0, 1.0, false,
                    [a, b](double x) { return beta_tails(a, b, x).upper; }, density);
}

void require_probability(double p, const char* what) {
  require(p > 0.0 && p < 1.0, what);
}

}  // namespace

double log_gamma(double x) {
  require(x > 0.0, "log_gamma: argument must be positive");
  if (x == kInf) return kInf;
  if (x < 0.5) {
    // reflection keeps the Lanczos sum away from its pole
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
  }
  static constexpr std::array<double, 9> c = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  const double xm = x - 1.0;
  double sum = c[0];
  for (std::size_t i = 1; i < c.size(); ++i) sum += c[i] / (xm + static_cast<double>(i));
  const double t = xm + 7.5;
  return kHalfLog2Pi + (xm + 0.5) * std::log(t) - t + std::log(sum);
}

double stirling_error(double x) {
  if (x > 15.0) {
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    return inv *
           (1.0 / 12.0 -
            inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
  }
  return log_gamma(x + 1.0) - (x + 0.5) * std::log(x) + x - kHalfLog2Pi;
}

double deviance_term(double x, double m) {
  if (x == 0.0) return m;
  if (std::fabs(x - m) < 0.1 * (x + m)) {
    const double v = (x - m) / (x + m);
    double s = (x - m) * v;
    double ej = 2.0 * x * v;
    const double v2 = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v2;
      const double s1 = s + ej / static_cast<double>(2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / m) + m - x;
}

double gamma_p(double a, double x) { return gamma_tails(a, x).lower; }
double gamma_q(double a, double x) { return gamma_tails(a, x).upper; }

double gamma_pdf(double a, double x) {
  require(a > 0.0, "gamma_pdf: shape must be positive");
  if (x < 0.0) return 0.0;
  if (x == 0.0) return a < 1.0 ? kInf : (a == 1.0 ? 1.0 : 0.0);
  return a * gamma_prefactor(a, x) / x;
}

double beta_inc(double a, double b, double x) { return beta_tails(a, b, x).lower; }
double beta_inc_complement(double a, double b, double x) { return beta_tails(a, b, x).upper; }

double beta_pdf(double a, double b, double x) {
  require(a > 0.0 && b > 0.0, "beta_pdf: parameters must be positive");
  if (x < 0.0 || x > 1.0) return 0.0;
  if (x == 0.0) return a < 1.0 ? kInf : (a == 1.0 ? b : 0.0);
  if (x == 1.0) return b < 1.0 ? kInf : (b == 1.0 ? a : 0.0);
  return beta_prefactor(a, b, x) / (x * (1.0 - x));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double log_normal_cdf(double x) {
  if (x > 5.0) return std::log1p(-normal_sf(x));
  if (x > -35.0) return std::log(normal_cdf(x));
  const double inv2 = 1.0 / (x * x);
  const double series = 1.0 - inv2 * (1.0 - inv2 * (3.0 - inv2 * (15.0 - 105.0 * inv2)));
  return -0.5 * x * x - std::log(-x) - kHalfLog2Pi + std::log(series);
}

double quantile_std_normal(double p) {
  require_probability(p, "quantile_std_normal: p must lie in (0, 1)");
  // Wichura's AS 241 (PPND16)
  const double q = p - 0.5;
  double x;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    x = q *
        (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r + 67265.770927008700853) *
                 r +
             45921.953931549871457) *
                r +
            13731.693765509461125) *
               r +
           1971.5909503065514427) *
              r +
          133.14166789178437745) *
             r +
         3.387132872796366608) /
        (((((((r * 5226.495278852545925 + 28729.085735721942674) * r + 39307.89580009271061) *
                 r +
             21213.794301586595867) *
                r +
            5394.1960214247511077) *
               r +
           687.1870074920579083) *
              r +
          42.313330701600911252) *
             r +
         1.0);
  } else {
    double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
    if (r <= 5.0) {
      r -= 1.6;
      x = (((((((r * 7.7454501427834140764e-4 + .0227238449892691845833) * r +
                .24178072517745061177) *
                   r +
               1.27045825245236838258) *
                  r +
              3.64784832476320460504) *
                 r +
             5.7694972214606914055) *
                r +
            4.6303378461565452959) *
               r +
           1.42343711074968357734) /
          (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                .0151986665636164571966) *
                   r +
               .14810397642748007459) *
                  r +
              .68976733498510000455) *
                 r +
             1.6763848301838038494) *
                r +
            2.05319162663775882187) *
               r +
           1.0);
    } else {
      r -= 5.0;
      x = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                .0012426609473880784386) *
                   r +
               .026532189526576123093) *
                  r +
              .29656057182850489123) *
                 r +
             1.7848265399172913358) *
                r +
            5.4637849111641143699) *
               r +
           6.6579046435011037772) /
          (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) *
                   r +
               7.868691311456132591e-4) *
                  r +
              .0148753612908506148525) *
                 r +
             .13692988092273580531) *
                r +
            .59983220655588793769) *
               r +
           1.0);
    }
    if (q < 0.0) x = -x;
  }
  // one Halley step against the erfc-based CDF
  if (std::fabs(x) < 37.0) {
    const double e = (p < 0.5) ? normal_cdf(x) - p : (1.0 - p) - normal_sf(x);
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double quantile_gamma(double p, double shape, double scale) {
  require_probability(p, "quantile_gamma: p must lie in (0, 1)");
  require(shape > 0.0 && scale > 0.0, "quantile_gamma: shape and scale must be positive");
  return scale * gamma_solve(shape, p, 1.0 - p);
}

double quantile_gamma_upper(double q, double shape, double scale) {
  require_probability(q, "quantile_gamma_upper: q must lie in (0, 1)");
  require(shape > 0.0 && scale > 0.0, "quantile_gamma_upper: shape and scale must be positive");
  return scale * gamma_solve(shape, 1.0 - q, q);
}

double quantile_beta(double p, double a, double b) {
  require_probability(p, "quantile_beta: p must lie in (0, 1)");
  require(a > 0.0 && b > 0.0, "quantile_beta: parameters must be positive");
  return beta_solve(a, b, p, 1.0 - p);
}

double quantile_beta_upper(double q, double a, double b) {
  require_probability(q, "quantile_beta_upper: q must lie in (0, 1)");
  require(a > 0.0 && b > 0.0, "quantile_beta_upper: parameters must be positive");
  return beta_solve(a, b, 1.0 - q, q);
}

}  // namespace calib::special
