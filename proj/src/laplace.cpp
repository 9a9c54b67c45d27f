#include "dshock/laplace.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "dshock/errors.hpp"

namespace dshock {

namespace {

Complex integer_power(Complex base, int exponent) {
  Complex result = 1.0;
  while (exponent > 0) {
    if (exponent & 1) result *= base;
    base *= base;
    exponent >>= 1;
  }
  return result;
}

void require_positive_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    std::ostringstream msg;
    msg << "inversion point must be positive and finite (got " << t << ")";
    throw DomainError(msg.str());
  }
}

}  // namespace

Complex TransformEvaluator::segment(Complex s) const {
  const auto& f = model_.arrivals();
  const auto& g = model_.threshold();
  const Complex lethal = weighted_laplace(f, g, s, Weight::survival);
  const Complex denom = 1.0 - weighted_laplace(f, g, s, Weight::cdf);
  if (std::abs(denom) < 1e-14) {
    std::ostringstream msg;
    msg << "transform pole: 1 - L_fG(s) vanishes at s = " << s;
    throw NumericError(msg.str());
  }
  return lethal / denom;
}

Complex TransformEvaluator::operator()(Complex s) const {
  return integer_power(segment(s), model_.k());
}

Complex laplace_h(const ShockModel& model, Complex s) { return TransformEvaluator(model)(s); }

void InversionConfig::validate() const {
  if (!(target_error > 0.0)) throw ModelError("inversion target error must be positive");
  if (euler_depth < 8) throw ModelError("Euler averaging depth must be >= 8");
  if (initial_terms < 1 || max_terms < initial_terms) {
    throw ModelError("inversion term counts must satisfy 1 <= initial_terms <= max_terms");
  }
  if (discretization < 0.0) throw ModelError("discretization parameter must be >= 0");
}

InversionResult euler_inversion(const std::function<Complex(Complex)>& transform, double t,
                                const InversionConfig& config, double bound) {
  require_positive_time(t);
  config.validate();

  const double half_target = 0.5 * config.target_error;
  const double damping = config.discretization > 0.0
                             ? config.discretization
                             : std::max(std::log(std::max(bound, 1.0) / half_target), 8.0);
  const double aliasing = std::max(bound, 1.0) * std::exp(-damping) / -std::expm1(-damping);
  const double scale = std::exp(0.5 * damping) / t;

  // partial[j] = 0.5 Re F(A/2t) + sum_{l=1..j} (-1)^l Re F((A + 2 pi i l) / 2t)
  std::vector<double> partial;
  partial.reserve(static_cast<std::size_t>(2 * (config.initial_terms + config.euler_depth) + 2));
  partial.push_back(0.5 * transform(Complex(damping / (2.0 * t), 0.0)).real());
  const auto extend_to = [&](int last) {
    for (int j = static_cast<int>(partial.size()); j <= last; ++j) {
      const Complex s(damping, 2.0 * std::numbers::pi * j);
      const double term = transform(s / (2.0 * t)).real();
      partial.push_back(partial.back() + ((j & 1) ? -term : term));
    }
  };
  // Binomial average of partial[n .. n+m].
  const auto averaged = [&](int n, int m) {
    extend_to(n + m);
    double sum = 0.0;
    for (int i = 0; i <= m; ++i) {
      const double log_weight = std::lgamma(m + 1.0) - std::lgamma(i + 1.0) -
                                std::lgamma(m - i + 1.0) - m * std::numbers::ln2;
      sum += std::exp(log_weight) * partial[n + i];
    }
    return sum;
  };

  // Jumps and kinks of f away from 0 and 2t leave partial sums that rotate
  // rather than alternate; a deeper average damps them, so the depth grows
  // with the term count. The error estimate is the larger of the last two
  // changes between successive refinements: a single change can be small by
  // accident when the refinements straddle the limit.
  //
  // A kink of f exactly at t is different: its terms no longer alternate and
  // decay like 1/j^2, so the averages approach the limit like C/n. Doubling n
  // halves that error, and 2 A(2n) - A(n) removes it. This second sequence is
  // tracked alongside and only used when the first one has not settled. A
  // jump at t gives 1/j terms whose sums grow like log n, which neither
  // sequence hides.
  int n = config.initial_terms;
  int m = config.euler_depth;
  double previous = averaged(n, m);
  double plain_last = kInfinity;
  double plain_error = kInfinity;
  double previous_extrapolated = std::numeric_limits<double>::quiet_NaN();
  double extrapolated_last = kInfinity;
  double extrapolated_error = kInfinity;
  const auto accept = [&](double value, double tail_error) {
    InversionResult out;
    out.value = scale * value;
    out.error_estimate = tail_error + aliasing;
    out.terms = n + m;
    return out;
  };
  while (2 * n <= config.max_terms) {
    n *= 2;
    m *= 2;
    const double current = averaged(n, m);
    const double change = scale * std::abs(current - previous);
    plain_error = std::max(change, plain_last);
    plain_last = change;
    if (plain_error <= half_target) return accept(current, plain_error);

    const double extrapolated = 2.0 * current - previous;
    if (!std::isnan(previous_extrapolated)) {
      const double e_change = scale * std::abs(extrapolated - previous_extrapolated);
      extrapolated_error = std::max(e_change, extrapolated_last);
      extrapolated_last = e_change;
      if (extrapolated_error <= half_target) return accept(extrapolated, extrapolated_error);
    }
    previous_extrapolated = extrapolated;
    previous = current;
  }
  const double tail_error = std::min(plain_error, extrapolated_error);

  std::ostringstream msg;
  msg << "Laplace inversion at t = " << t << " did not converge: Euler tail estimate "
      << tail_error << " exceeds half the target error " << config.target_error;
  throw InversionError(msg.str(), tail_error + aliasing);
}

InversionResult invert_density(const TransformEvaluator& evaluator, double t,
                               const InversionConfig& config) {
  const auto& model = evaluator.model();
  // h is a mixture of convolutions that each contain at least one lethal-gap
  // density, so sup h <= sup f / p.
  const double bound = model.arrivals().density_bound() / model.lethal_prob();
  auto out = euler_inversion([&evaluator](Complex s) { return evaluator(s); }, t, config, bound);
  if (out.value < config.clamp_below) {
    out.value = 0.0;
    out.clamped = true;
  }
  return out;
}

InversionResult invert_density(const ShockModel& model, double t, const InversionConfig& config) {
  return invert_density(TransformEvaluator(model), t, config);
}

InversionResult invert_cdf(const TransformEvaluator& evaluator, double t,
                           const InversionConfig& config) {
  auto out = euler_inversion([&evaluator](Complex s) { return evaluator(s) / s; }, t, config, 1.0);
  if (out.value < config.clamp_below) {
    out.value = 0.0;
    out.clamped = true;
  } else if (out.value > 1.0) {
    out.value = 1.0;
  }
  return out;
}

InversionResult invert_cdf(const ShockModel& model, double t, const InversionConfig& config) {
  return invert_cdf(TransformEvaluator(model), t, config);
}

InversionResult invert_relaxed(const std::function<InversionResult(const InversionConfig&)>& invert,
                               const InversionConfig& config, double loosest, bool* relaxed) {
  InversionConfig attempt = config;
  if (relaxed) *relaxed = false;
  for (;;) {
    try {
      return invert(attempt);
    } catch (const InversionError&) {
      if (attempt.target_error * 10.0 > loosest * (1.0 + 1e-9)) throw;
      attempt.target_error *= 10.0;
      if (relaxed) *relaxed = true;
    }
  }
}

MomentSummary moments_from_transform(const ShockModel& model, const DifferentiationConfig& config) {
  if (!(config.relative_step > 0.0) || config.richardson_levels < 1) {
    throw ModelError("differentiation step must be positive with at least one Richardson level");
  }
  const TransformEvaluator evaluator(model);
  const auto cumulant = [&evaluator](double eta) {
    return std::log(evaluator.segment(Complex(0.0, eta)));
  };

  // Coarse segment mean, only used to put the step on the right time scale.
  const double coarse_eta = 1e-3 / model.arrivals().raw_moment(1);
  const double coarse_mean = -cumulant(coarse_eta).imag() / coarse_eta;
  const double eta0 = config.relative_step / coarse_mean;

  const int levels = config.richardson_levels;
  std::vector<std::vector<double>> first(levels), second(levels);
  for (int i = 0; i < levels; ++i) {
    const double eta = std::ldexp(eta0, -i);
    const Complex value = cumulant(eta);
    first[i].push_back(-value.imag() / eta);
    second[i].push_back(-2.0 * value.real() / (eta * eta));
    double factor = 1.0;
    for (int j = 1; j <= i; ++j) {
      factor *= 4.0;
      first[i].push_back(first[i][j - 1] + (first[i][j - 1] - first[i - 1][j - 1]) / (factor - 1.0));
      second[i].push_back(second[i][j - 1] +
                          (second[i][j - 1] - second[i - 1][j - 1]) / (factor - 1.0));
    }
  }

  MomentSummary out{};
  out.segment_mean = first.back().back();
  out.segment_variance = second.back().back();
  out.mean = model.k() * out.segment_mean;
  out.variance = model.k() * out.segment_variance;
  return out;
}

}  // namespace dshock
