#include "calib/edf.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "calib/special_functions.hpp"

namespace calib {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAtomTolerance = 1e-9;

void require_mean(const EdfFamily& family, double mu) {
  if (!family.in_mean_space(mu)) {
    throw std::domain_error("mean " + std::to_string(mu) + " outside the mean space of " +
                            std::string(to_string(family.name)));
  }
}

void require_weight(double v_over_phi) {
  if (!(v_over_phi > 0.0) || !std::isfinite(v_over_phi)) {
    throw std::domain_error("v/phi must be positive and finite");
  }
}

bool is_integer(double x) { return std::fabs(x - std::round(x)) <= kAtomTolerance; }

// Largest integer count k with k <= n (inclusive) or k < n (strict), where n
// is the continuous count v y / phi.
double count_floor(double n, bool strict) {
  const double r = std::round(n);
  if (std::fabs(n - r) <= kAtomTolerance) return strict ? r - 1.0 : r;
  return std::floor(n);
}

// Tail pair {P(N <= k), P(N > k)} of the additive count.
struct CountTails {
  double le;
  double gt;
};

CountTails count_tails(const EdfFamily& family, double k, double mu, double w) {
  using namespace special;
  if (k < 0.0) return {0.0, 1.0};
  switch (family.name) {
    case Family::Binomial: {
      if (k >= w) return {1.0, 0.0};
      return {beta_inc_complement(k + 1.0, w - k, mu), beta_inc(k + 1.0, w - k, mu)};
    }
    case Family::Poisson: {
      const double lambda = mu * w;
      return {gamma_q(k + 1.0, lambda), gamma_p(k + 1.0, lambda)};
    }
    case Family::NegBinomial: {
      const double p = mu / (1.0 + mu);
      return {beta_inc_complement(k + 1.0, w, p), beta_inc(k + 1.0, w, p)};
    }
    default:
      break;
  }
  throw std::logic_error("count_tails called for a continuous family");
}

struct ContinuousTails {
  double cdf;
  double sf;
};

ContinuousTails inverse_gaussian_tails(double y, double mu, double lambda) {
  if (y <= 0.0) return {0.0, 1.0};
  const double r = std::sqrt(lambda / y);
  const double a = r * (y / mu - 1.0);
  const double b = -r * (y / mu + 1.0);
  const double reflected = std::exp(2.0 * lambda / mu + special::log_normal_cdf(b));
  const double cdf = special::normal_cdf(a) + reflected;
  const double sf = special::normal_sf(a) - reflected;
  return {std::min(cdf, 1.0), std::max(sf, 0.0)};
}

ContinuousTails continuous_tails(const EdfFamily& family, double y, double mu, double w) {
  using namespace special;
  switch (family.name) {
    case Family::Normal: {
      const double t = (y - mu) * std::sqrt(w);
      return {normal_cdf(t), normal_sf(t)};
    }
    case Family::Gamma: {
      if (y <= 0.0) return {0.0, 1.0};
      const double x = w * y / mu;
      return {gamma_p(w, x), gamma_q(w, x)};
    }
    case Family::InverseGaussian:
      return inverse_gaussian_tails(y, mu, w);
    default:
      break;
  }
  throw std::logic_error("continuous_tails called for a discrete family");
}

}  // namespace

EdfFamily EdfFamily::of(Family f) {
  switch (f) {
    case Family::Binomial:
      return {f, 0.0, 1.0, Form::Additive};
    case Family::Poisson:
    case Family::NegBinomial:
      return {f, 0.0, kInf, Form::Additive};
    case Family::Gamma:
    case Family::InverseGaussian:
      return {f, 0.0, kInf, Form::Reproductive};
    case Family::Normal:
      return {f, -kInf, kInf, Form::Reproductive};
  }
  throw std::invalid_argument("unknown family");
}

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Binomial:
      return "binomial";
    case Family::Poisson:
      return "poisson";
    case Family::NegBinomial:
      return "negbin";
    case Family::Gamma:
      return "gamma";
    case Family::Normal:
      return "normal";
    case Family::InverseGaussian:
      return "inverse-gaussian";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "binomial") return Family::Binomial;
  if (name == "poisson") return Family::Poisson;
  if (name == "negbin" || name == "negative-binomial") return Family::NegBinomial;
  if (name == "gamma") return Family::Gamma;
  if (name == "normal" || name == "gaussian") return Family::Normal;
  if (name == "inverse-gaussian" || name == "ig") return Family::InverseGaussian;
  throw std::invalid_argument("unsupported family '" + std::string(name) + "'");
}

double canonical_link(const EdfFamily& family, double mu) {
  require_mean(family, mu);
  switch (family.name) {
    case Family::Binomial:
      return std::log(mu / (1.0 - mu));
    case Family::Poisson:
      return std::log(mu);
    case Family::NegBinomial:
      return std::log(mu / (1.0 + mu));
    case Family::Gamma:
      return -1.0 / mu;
    case Family::Normal:
      return mu;
    case Family::InverseGaussian:
      return -0.5 / (mu * mu);
  }
  throw std::invalid_argument("unknown family");
}

double variance_function(const EdfFamily& family, double mu) {
  require_mean(family, mu);
  switch (family.name) {
    case Family::Binomial:
      return mu * (1.0 - mu);
    case Family::Poisson:
      return mu;
    case Family::NegBinomial:
      return mu * (1.0 + mu);
    case Family::Gamma:
      return mu * mu;
    case Family::Normal:
      return 1.0;
    case Family::InverseGaussian:
      return mu * mu * mu;
  }
  throw std::invalid_argument("unknown family");
}

double additive_count(double y, double v_over_phi) {
  const double n = y * v_over_phi;
  const double r = std::round(n);
  return std::fabs(n - r) <= kAtomTolerance ? r : n;
}

void validate_response(const EdfFamily& family, double y, double v_over_phi) {
  require_weight(v_over_phi);
  if (!std::isfinite(y)) throw std::domain_error("response must be finite");
  switch (family.name) {
    case Family::Binomial: {
      if (!is_integer(v_over_phi)) {
        throw std::domain_error("binomial responses need an integer number of trials v/phi");
      }
      const double n = y * v_over_phi;
      if (!is_integer(n) || n < -kAtomTolerance || n > std::round(v_over_phi) + kAtomTolerance) {
        throw std::domain_error("binomial response y*v/phi must be an integer in [0, v/phi]");
      }
      return;
    }
    case Family::Poisson:
    case Family::NegBinomial: {
      const double n = y * v_over_phi;
      if (!is_integer(n) || n < -kAtomTolerance) {
        throw std::domain_error("count response y*v/phi must be a non-negative integer");
      }
      return;
    }
    case Family::Gamma:
    case Family::InverseGaussian:
      if (!(y > 0.0)) throw std::domain_error("response must be positive");
      return;
    case Family::Normal:
      return;
  }
}

double cdf(const EdfFamily& family, double y, double mu, double v_over_phi) {
  require_mean(family, mu);
  require_weight(v_over_phi);
  if (family.discrete()) {
    return count_tails(family, count_floor(y * v_over_phi, false), mu, v_over_phi).le;
  }
  return continuous_tails(family, y, mu, v_over_phi).cdf;
}

double cdf_strict(const EdfFamily& family, double y, double mu, double v_over_phi) {
  require_mean(family, mu);
  require_weight(v_over_phi);
  if (family.discrete()) {
    return count_tails(family, count_floor(y * v_over_phi, true), mu, v_over_phi).le;
  }
  return continuous_tails(family, y, mu, v_over_phi).cdf;
}

double survival(const EdfFamily& family, double y, double mu, double v_over_phi) {
  require_mean(family, mu);
  require_weight(v_over_phi);
  if (family.discrete()) {
    return count_tails(family, count_floor(y * v_over_phi, false), mu, v_over_phi).gt;
  }
  return continuous_tails(family, y, mu, v_over_phi).sf;
}

double survival_weak(const EdfFamily& family, double y, double mu, double v_over_phi) {
  require_mean(family, mu);
  require_weight(v_over_phi);
  if (family.discrete()) {
    return count_tails(family, count_floor(y * v_over_phi, true), mu, v_over_phi).gt;
  }
  return continuous_tails(family, y, mu, v_over_phi).sf;
}

}  // namespace calib
