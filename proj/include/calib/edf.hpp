#pragma once

#include <string>
#include <string_view>

namespace calib {

enum class Family { Binomial, Poisson, NegBinomial, Gamma, Normal, InverseGaussian };

/// Additive members carry their counts as N = v Y / phi.
enum class Form { Reproductive, Additive };

/// Descriptor of an exponential dispersion family member.
///
/// The mean space is the open interval (mean_lo, mean_hi) = kappa'(int Theta);
/// its endpoints double as the empty-set conventions of a calibration band.
struct EdfFamily {
  Family name;
  double mean_lo;
  double mean_hi;
  Form form;

  static EdfFamily of(Family f);

  bool discrete() const { return form == Form::Additive; }
  bool in_mean_space(double mu) const { return mu > mean_lo && mu < mean_hi; }
};

std::string_view to_string(Family f);

/// Accepts the CLI spellings: binomial, poisson, negbin, gamma, normal,
/// inverse-gaussian (or ig). Throws std::invalid_argument otherwise.
Family parse_family(std::string_view name);

/// A response on the reproductive scale together with its volume.
struct DispersedObs {
  double y;
  double v;
};

/// theta = h(mu), the canonical link.
double canonical_link(const EdfFamily& family, double mu);

/// V(mu) with unit constant.
double variance_function(const EdfFamily& family, double mu);

/// Throws std::domain_error when y is not in the support closure of
/// EDF(., v, phi) with v / phi = v_over_phi. Discrete families require
/// v_over_phi * y to be an integer (within 1e-9) and binomial requires
/// v_over_phi itself to be the integer number of trials.
void validate_response(const EdfFamily& family, double y, double v_over_phi);

/// Count N = v y / phi snapped to the nearest integer for additive families.
double additive_count(double y, double v_over_phi);

/// F(y) = P(Y <= y) for Y ~ EDF(h(mu), v, phi).
double cdf(const EdfFamily& family, double y, double mu, double v_over_phi);

/// F*(y) = P(Y < y).
double cdf_strict(const EdfFamily& family, double y, double mu, double v_over_phi);

/// P(Y > y) = 1 - F(y), computed from the upper-tail identity.
double survival(const EdfFamily& family, double y, double mu, double v_over_phi);

/// P(Y >= y) = 1 - F*(y), computed from the upper-tail identity.
double survival_weak(const EdfFamily& family, double y, double mu, double v_over_phi);

}  // namespace calib
