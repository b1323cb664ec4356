#pragma once

#include <cstdint>
#include <unordered_map>

#include "calib/edf.hpp"

namespace calib {

enum class Side { Lower, Upper };

/// Aggregate Z_{j:k} with aggregated volume v_{j:k}, dispersion phi and tail
/// level delta.
struct BoundQuery {
  EdfFamily family;
  double z;
  double v;
  double phi;
  double delta;

  double v_over_phi() const { return v / phi; }
};

/// Throws std::domain_error on an invalid query.
void validate(const BoundQuery& q);

/// l^delta = inf{ mu : F*(z; mu) <= 1 - delta }. Closed forms for every family
/// except the inverse Gaussian, which is bisected.
double lower_bound(const BoundQuery& q);

/// u^delta = sup{ mu : F(z; mu) >= delta }.
double upper_bound(const BoundQuery& q);

/// The same quantities by bisection on the defining inequality, for any family.
double lower_bound_bisection(const BoundQuery& q);
double upper_bound_bisection(const BoundQuery& q);

struct GridBound {
  double value;
  double step;  // spacing of the grid around value
};

/// Grid scan of the defining inequality with CDFs evaluated from first
/// principles (pmf sums, erfc, numerical integration of the density).
/// The grid is log-spaced on (0, inf), logit-spaced on (0, 1) and linear for
/// the normal. Values beyond the grid are reported as the mean-space boundary.
GridBound brute_force_bound_detail(const BoundQuery& q, Side side, int grid_size);

inline double brute_force_bound(const BoundQuery& q, Side side, int grid_size) {
  return brute_force_bound_detail(q, side, grid_size).value;
}

/// Cache of quantiles keyed by their exact arguments. Within one band delta is
/// fixed, so the gamma-type quantiles depend on the aggregated volume (and the
/// count for discrete families) only and repeat heavily.
class QuantileMemo {
 public:
  enum class Kind : std::uint8_t { BetaLower, BetaUpper, GammaLower, GammaUpper };

  template <class F>
  double get(Kind kind, double p, double a, double b, F&& compute) {
    const Key key{kind, p, a, b};
    auto it = table_.find(key);
    if (it != table_.end()) return it->second;
    const double x = compute();
    table_.emplace(key, x);
    return x;
  }

  std::size_t size() const { return table_.size(); }
  void clear() { table_.clear(); }

 private:
  struct Key {
    Kind kind;
    double p, a, b;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };
  std::unordered_map<Key, double, KeyHash> table_;
};

/// Evaluates l^delta and u^delta for a fixed family, phi and delta, reusing
/// quantiles through a memo. Not thread-safe; use one per worker. When a
/// shared memo is given it must outlive the evaluator.
class BoundEvaluator {
 public:
  BoundEvaluator(const EdfFamily& family, double phi, double delta,
                 QuantileMemo* shared = nullptr);
  BoundEvaluator(const BoundEvaluator&) = delete;
  BoundEvaluator& operator=(const BoundEvaluator&) = delete;

  double lower(double z, double v);
  double upper(double z, double v);

  const EdfFamily& family() const { return family_; }
  double delta() const { return delta_; }

 private:
  EdfFamily family_;
  double phi_;
  double delta_;
  double normal_q_;  // Phi^{-1}(delta)
  QuantileMemo own_;
  QuantileMemo* memo_;
};

}  // namespace calib
