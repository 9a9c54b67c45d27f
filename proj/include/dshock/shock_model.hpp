#pragma once

#include <cstdint>

#include "dshock/distributions.hpp"

namespace dshock {

/// Generalized delta-shock model: shocks arrive with i.i.d. gaps Z ~ F, a gap
/// is lethal when Z <= delta for a fresh delta ~ G, and the system fails at
/// the k-th lethal gap. The gap from start-up to the first shock is
/// classified like every other gap.
class ShockModel {
 public:
  /// Throws ModelError when k < 1 or the lethal probability is 0.
  ShockModel(int k, ArrivalLaw arrivals, ThresholdLaw threshold);

  int k() const { return k_; }
  const ArrivalLaw& arrivals() const { return arrivals_; }
  const ThresholdLaw& threshold() const { return threshold_; }

  /// p = P(Z <= delta).
  double lethal_prob() const { return lethal_prob_; }
  /// q = 1 - p, computed directly rather than by subtraction.
  double safe_prob() const { return safe_prob_; }

  ShockModel with_k(int k) const;

  bool operator==(const ShockModel& other) const {
    return k_ == other.k_ && arrivals_ == other.arrivals_ && threshold_ == other.threshold_;
  }

 private:
  int k_;
  ArrivalLaw arrivals_;
  ThresholdLaw threshold_;
  double lethal_prob_;
  double safe_prob_;
};

struct MomentSummary {
  double mean;              // E(W) = k * segment_mean
  double variance;          // Var(W) = k * segment_variance
  double segment_mean;      // mean time between successive lethal shocks
  double segment_variance;
};

double lethal_prob(const ShockModel& model);

/// Density of a gap conditioned on being non-lethal, f(t) G(t) / q.
/// Throws ModelError when q = 0.
double alpha_density(const ShockModel& model, double t);
/// Density of a gap conditioned on being lethal, f(t) (1 - G(t)) / p.
double beta_density(const ShockModel& model, double t);

double alpha_cdf(const ShockModel& model, double t);
double beta_cdf(const ShockModel& model, double t);

/// E(Z | Z > delta). Throws ModelError when q = 0.
double safe_gap_mean(const ShockModel& model);

/// Negative binomial probability that the k-th lethal gap is gap number n.
/// Returns 0 for n < k.
double shock_count_pmf(int k, double p, std::int64_t n);
double shock_count_pmf(const ShockModel& model, std::int64_t n);

/// Mean and variance of the failure time W from the raw moments of Z.
MomentSummary failure_moments(const ShockModel& model);

}  // namespace dshock
