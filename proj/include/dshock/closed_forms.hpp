#pragma once

#include <optional>

#include "dshock/shock_model.hpp"

namespace dshock {

/// Exponential arrivals with a constant threshold. The threshold may be
/// infinite, in which case every gap is lethal and W is Erlang(k, rate).
struct ExpConstParams {
  double rate;
  double threshold;
  int k;

  void validate() const;
};

/// Uniform arrivals on (lower, upper) with a constant threshold strictly
/// inside the support.
struct UnifConstParams {
  double lower;
  double upper;
  double threshold;
  int k;

  void validate() const;
};

std::optional<ExpConstParams> as_exp_const(const ShockModel& model);
std::optional<UnifConstParams> as_unif_const(const ShockModel& model);

/// Failure-time density as a finite double sum of shifted gamma kernels,
///
///   h(t) = rate^k e^{-rate t} / (k-1)!  sum_{j>=0} sum_{i=0..k} (-1)^i C(k,i)
///          rate^j / j!  [(t - (j+i) tau)_+]^{j+k-1},
///
/// with [x_+]^0 read as the unit step U(x) = 1{x >= 0}. Terms with
/// (j+i) tau > t vanish, so the j-sum stops at floor(t / tau). Each term is
/// formed in log space and accumulated with compensated summation. Returns 0
/// for t <= 0.
double exp_const_pdf(const ExpConstParams& params, double t);

/// Integral of exp_const_pdf over [0, t], summed term by term as shifted
/// regularized incomplete gamma functions.
double exp_const_cdf(const ExpConstParams& params, double t);

MomentSummary exp_const_moments(const ExpConstParams& params);

double unif_const_mean(const UnifConstParams& params);

/// Var(W) through the general raw-moment formula of the shock model.
double unif_const_variance_general(const UnifConstParams& params);

/// The uniform-arrival variance expression exactly as it was published,
///
///   k [2 mu2 (tau - a) + mu1 (b^2 - 2 tau^2 + a^2)] / (2 mu1 (tau - a)),
///
/// with mu1, mu2 the raw moments of the arrival law. It does not reproduce
/// Var(W) (simulation and the general formula disagree with it) and is kept
/// only to report the discrepancy.
double unif_const_variance_verbatim(const UnifConstParams& params);

struct VarianceAudit {
  double general;
  double verbatim;
  double abs_difference;
};

VarianceAudit unif_const_variance_audit(const UnifConstParams& params);

/// Density of the sum of k i.i.d. Uniform(lower, upper) gaps, the failure
/// time when every gap is lethal.
double uniform_sum_pdf(double lower, double upper, int k, double t);

/// Closed-form failure-time density when one is known for the model:
/// exponential arrivals with a constant threshold, or uniform arrivals whose
/// every gap is lethal.
std::optional<double> closed_form_pdf(const ShockModel& model, double t);
bool has_closed_form_pdf(const ShockModel& model);

}  // namespace dshock
