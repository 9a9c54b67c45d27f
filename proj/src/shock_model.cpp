#include "dshock/shock_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dshock/errors.hpp"

namespace dshock {

ShockModel::ShockModel(int k, ArrivalLaw arrivals, ThresholdLaw threshold)
    : k_(k), arrivals_(std::move(arrivals)), threshold_(std::move(threshold)) {
  if (k_ < 1) {
    throw ModelError("number of lethal shocks to failure must be >= 1 (got " + std::to_string(k_) +
                     ")");
  }
  lethal_prob_ = weighted_moment(arrivals_, threshold_, 0, Weight::survival);
  safe_prob_ = weighted_moment(arrivals_, threshold_, 0, Weight::cdf);
  if (!(lethal_prob_ > 0.0)) {
    throw ModelError(
        "unrealizable model: lethal probability P(Z <= delta) is 0, the threshold lies below the "
        "support of the arrival law");
  }
  // Quadrature can leave the two halves a few ulps away from summing to one.
  lethal_prob_ = std::min(lethal_prob_, 1.0);
  safe_prob_ = std::max(safe_prob_, 0.0);
}

ShockModel ShockModel::with_k(int k) const { return ShockModel(k, arrivals_, threshold_); }

double lethal_prob(const ShockModel& model) { return model.lethal_prob(); }

namespace {

void require_safe_mass(const ShockModel& model) {
  if (!(model.safe_prob() > 0.0)) {
    throw ModelError("non-lethal gap law is undefined: every gap is lethal (q = 0)");
  }
}

}  // namespace

double alpha_density(const ShockModel& model, double t) {
  require_safe_mass(model);
  return model.arrivals().density(t) * model.threshold().cdf(t) / model.safe_prob();
}

double beta_density(const ShockModel& model, double t) {
  return model.arrivals().density(t) * model.threshold().survival(t) / model.lethal_prob();
}

double alpha_cdf(const ShockModel& model, double t) {
  require_safe_mass(model);
  if (t <= 0.0) return 0.0;
  const double mass = weighted_moment(model.arrivals(), model.threshold(), 0, Weight::cdf, t);
  return std::min(mass / model.safe_prob(), 1.0);
}

double beta_cdf(const ShockModel& model, double t) {
  if (t <= 0.0) return 0.0;
  const double mass = weighted_moment(model.arrivals(), model.threshold(), 0, Weight::survival, t);
  return std::min(mass / model.lethal_prob(), 1.0);
}

double safe_gap_mean(const ShockModel& model) {
  require_safe_mass(model);
  return weighted_moment(model.arrivals(), model.threshold(), 1, Weight::cdf) / model.safe_prob();
}

double shock_count_pmf(int k, double p, std::int64_t n) {
  if (k < 1) throw ModelError("k must be >= 1");
  if (!(p > 0.0 && p <= 1.0)) throw ModelError("lethal probability must lie in (0, 1]");
  if (n < k) return 0.0;
  const auto failures = static_cast<double>(n - k);
  if (p == 1.0) return n == k ? 1.0 : 0.0;
  // log C(n-1, k-1) + k log p + (n-k) log q
  const double log_binom = std::lgamma(static_cast<double>(n)) - std::lgamma(static_cast<double>(k)) -
                           std::lgamma(failures + 1.0);
  return std::exp(log_binom + k * std::log(p) + failures * std::log1p(-p));
}

double shock_count_pmf(const ShockModel& model, std::int64_t n) {
  return shock_count_pmf(model.k(), model.lethal_prob(), n);
}

MomentSummary failure_moments(const ShockModel& model) {
  const double p = model.lethal_prob();
  const double m1 = model.arrivals().raw_moment(1);
  const double m2 = model.arrivals().raw_moment(2);
  // E(Z | Z > delta) * q, i.e. the integral of t f(t) G(t); 0 when q = 0.
  const double safe_first = weighted_moment(model.arrivals(), model.threshold(), 1, Weight::cdf);

  MomentSummary out{};
  out.segment_mean = m1 / p;
  out.segment_variance = m2 / p + (2.0 * m1 * safe_first - m1 * m1) / (p * p);
  out.mean = model.k() * out.segment_mean;
  out.variance = model.k() * out.segment_variance;
  return out;
}

}  // namespace dshock
