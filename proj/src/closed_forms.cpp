#include "dshock/closed_forms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "dshock/errors.hpp"

namespace dshock {

namespace {

double log_choose(double n, double r) {
  return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
}

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

// Shift (j + i) * tau of a series term; the only finite shift when tau is
// infinite is the j = i = 0 one.
double shift(int j, int i, double tau) {
  if (j == 0 && i == 0) return 0.0;
  return std::isinf(tau) ? kInfinity : (j + i) * tau;
}

int max_outer_index(double t, double tau) {
  if (std::isinf(tau)) return 0;
  return static_cast<int>(std::floor(t / tau));
}

// The alternating series cancels: its largest term can exceed the result by
// 10^13 at k = 50 and 10^29 at k = 100, far beyond double precision however
// the sum is ordered. log10 of the largest term decides whether the
// log-space double evaluation is safe or how many digits an extended one
// needs.
double log10_largest_pdf_term(const ExpConstParams& p, double t) {
  const double log_rate = std::log(p.rate);
  const double log_prefix = p.k * log_rate - p.rate * t - std::lgamma(static_cast<double>(p.k));
  double largest = -kInfinity;
  const int outer = max_outer_index(t, p.threshold);
  for (int j = 0; j <= outer; ++j) {
    for (int i = 0; i <= p.k; ++i) {
      const double x = t - shift(j, i, p.threshold);
      if (!(x > 0.0)) break;
      largest = std::max(largest, log_prefix + log_choose(p.k, i) + j * log_rate - std::lgamma(j + 1.0) +
                                      (j + p.k - 1) * std::log(x));
    }
  }
  return largest / std::numbers::ln10;
}

double log10_largest_cdf_term(const ExpConstParams& p, double t) {
  double largest = -kInfinity;
  const int outer = max_outer_index(t, p.threshold);
  for (int j = 0; j <= outer; ++j) {
    for (int i = 0; i <= p.k; ++i) {
      const double c = shift(j, i, p.threshold);
      if (!(t - c > 0.0)) break;
      largest = std::max(largest, log_choose(p.k, i) + log_choose(j + p.k - 1.0, j) - p.rate * c);
    }
  }
  return largest / std::numbers::ln10;
}

// Terms up to 10^2 leave double rounding near 1e-12 absolute.
constexpr double kDoubleSafeLog10 = 2.0;

// Same series with terms grouped by shift c = j + i, so each group shares
// x = t - c tau and needs one power; within a group (lambda x)^j / j! and the
// binomials follow by recurrence.
template <class Real>
double extended_pdf(const ExpConstParams& p, double t) {
  using std::exp;
  using std::log;
  const int k = p.k;
  const Real rate = p.rate;
  Real log_factorial_k1 = 0;  // log (k-1)!
  for (int m = 2; m < k; ++m) log_factorial_k1 += log(Real(m));
  const Real prefix = exp(Real(k) * log(rate) - rate * Real(t) - log_factorial_k1);
  // signed C(k, i), built once; divisions are the expensive part
  std::vector<Real> binom(static_cast<std::size_t>(k) + 1);
  binom[0] = 1;
  for (int i = 0; i < k; ++i) binom[i + 1] = -binom[i] * (k - i) / (i + 1);

  Real sum = 0;
  Real log_factorial_c = 0;  // log c!
  for (int c = 0;; ++c) {
    if (c > 0) log_factorial_c += log(Real(c));
    if (c > 0 && std::isinf(p.threshold)) break;
    const Real x = Real(t) - (c > 0 ? Real(c) * Real(p.threshold) : Real(0));
    if (x < 0) break;
    const int top = std::min(k, c);
    if (x == 0) {
      // only [x U(x)]^0 = 1 survives, which needs j = 0 and k = 1
      if (k == 1 && c <= 1) sum += (c & 1) ? -1 : 1;
      continue;
    }
    const Real y = rate * x;
    const Real inv_y = 1 / y;
    Real w = exp(Real(c) * log(y) - log_factorial_c);  // y^(c-i) / (c-i)! at i = 0
    Real inner = 0;
    for (int i = 0; i <= top; ++i) {
      inner += binom[static_cast<std::size_t>(i)] * w;
      if (i == top) break;
      w *= inv_y;
      w *= c - i;
    }
    sum += (k > 1 ? exp(Real(k - 1) * log(x)) : Real(1)) * inner;
  }
  return static_cast<double>(prefix * sum);
}

template <class Real>
double extended_cdf(const ExpConstParams& p, double t) {
  using std::exp;
  const int k = p.k;
  const Real rate = p.rate;
  const int last_c = std::isinf(p.threshold) ? 0 : static_cast<int>(std::floor(t / p.threshold)) + 1;
  // 1/m, shared by every shift
  std::vector<Real> reciprocal(static_cast<std::size_t>(last_c + k) + 1);
  for (std::size_t m = 1; m < reciprocal.size(); ++m) reciprocal[m] = Real(1) / static_cast<unsigned>(m);
  std::vector<Real> binom_k(static_cast<std::size_t>(k) + 1);  // signed C(k, i)
  binom_k[0] = 1;
  for (int i = 0; i < k; ++i) binom_k[i + 1] = -binom_k[i] * (k - i) * reciprocal[i + 1];

  Real sum = 0;
  Real leading_binom = 1;  // C(c + k - 1, k - 1)
  std::vector<Real> partial;
  for (int c = 0;; ++c) {
    if (c > 0) leading_binom *= Real(c + k - 1) * reciprocal[static_cast<std::size_t>(c)];
    if (c > 0 && std::isinf(p.threshold)) break;
    const Real x = Real(t) - (c > 0 ? Real(c) * Real(p.threshold) : Real(0));
    if (!(x > 0)) break;
    const Real y = rate * x;
    const Real decay = c > 0 ? Real(exp(-rate * Real(c) * Real(p.threshold))) : Real(1);
    // partial[m] = sum_{l <= m} y^l / l!, up to m = c + k - 1
    partial.resize(static_cast<std::size_t>(c + k));
    Real power = 1;
    Real running = 0;
    for (int m = 0; m < c + k; ++m) {
      if (m > 0) {
        power *= y;
        power *= reciprocal[static_cast<std::size_t>(m)];
      }
      running += power;
      partial[static_cast<std::size_t>(m)] = running;
    }
    const Real exp_y = exp(-y);
    const int top = std::min(k, c);
    Real binom_j = leading_binom;  // C(j + k - 1, j) with j = c - i
    Real inner = 0;
    for (int i = 0; i <= top; ++i) {
      const int n = c - i + k;  // P(n, y) = 1 - e^-y sum_{l < n} y^l / l!
      const Real gamma_p = 1 - exp_y * partial[static_cast<std::size_t>(n - 1)];
      inner += binom_k[static_cast<std::size_t>(i)] * binom_j * gamma_p;
      if (i == top) break;
      binom_j *= c - i;
      binom_j /= c - i + k - 1;
    }
    sum += decay * inner;
  }
  return static_cast<double>(sum);
}

template <template <class> class Eval>
double with_digits(double log10_largest, const ExpConstParams& p, double t) {
  namespace mp = boost::multiprecision;
  // ~25 digits survive the cancellation
  const double digits = std::max(log10_largest, 0.0) + 25.0;
  if (digits <= 50) return Eval<mp::cpp_bin_float_50>{}(p, t);
  if (digits <= 100) return Eval<mp::cpp_bin_float_100>{}(p, t);
  if (digits <= 250) return Eval<mp::number<mp::cpp_bin_float<250>>>{}(p, t);
  std::ostringstream msg;
  msg << "exponential series at t = " << t << " with k = " << p.k
      << " cancels beyond 250 digits; use transform inversion";
  throw NumericError(msg.str());
}

template <class Real>
struct ExtendedPdf {
  double operator()(const ExpConstParams& p, double t) const { return extended_pdf<Real>(p, t); }
};
template <class Real>
struct ExtendedCdf {
  double operator()(const ExpConstParams& p, double t) const { return extended_cdf<Real>(p, t); }
};

}  // namespace

void ExpConstParams::validate() const {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw ModelError("rate must be positive and finite");
  if (!(threshold > 0.0)) throw ModelError("threshold must be positive");
  if (k < 1) throw ModelError("k must be >= 1");
}

void UnifConstParams::validate() const {
  if (!(lower >= 0.0) || !(upper > lower) || !std::isfinite(upper)) {
    throw ModelError("uniform bounds must satisfy 0 <= lower < upper < inf");
  }
  if (!(threshold > lower && threshold < upper)) {
    std::ostringstream msg;
    msg << "threshold " << threshold << " must lie strictly inside (" << lower << ", " << upper
        << ")";
    throw ModelError(msg.str());
  }
  if (k < 1) throw ModelError("k must be >= 1");
}

std::optional<ExpConstParams> as_exp_const(const ShockModel& model) {
  const auto* e = std::get_if<ExponentialArrival>(&model.arrivals().params());
  const auto* c = std::get_if<ConstantThreshold>(&model.threshold().params());
  if (!e || !c) return std::nullopt;
  return ExpConstParams{e->rate, c->value, model.k()};
}

std::optional<UnifConstParams> as_unif_const(const ShockModel& model) {
  const auto* u = std::get_if<UniformArrival>(&model.arrivals().params());
  const auto* c = std::get_if<ConstantThreshold>(&model.threshold().params());
  if (!u || !c || !(c->value > u->lower && c->value < u->upper)) return std::nullopt;
  return UnifConstParams{u->lower, u->upper, c->value, model.k()};
}

double exp_const_pdf(const ExpConstParams& params, double t) {
  params.validate();
  if (!(t > 0.0)) return 0.0;
  if (const double largest = log10_largest_pdf_term(params, t); largest > kDoubleSafeLog10) {
    return std::max(with_digits<ExtendedPdf>(largest, params, t), 0.0);
  }
  const double rate = params.rate;
  const double tau = params.threshold;
  const int k = params.k;
  const double log_rate = std::log(rate);
  const double log_prefix = k * log_rate - rate * t - std::lgamma(static_cast<double>(k));

  CompensatedSum sum;
  const int outer = max_outer_index(t, tau);
  for (int j = 0; j <= outer; ++j) {
    const double log_outer = j * log_rate - std::lgamma(j + 1.0);
    const int power = j + k - 1;
    for (int i = 0; i <= k; ++i) {
      const double x = t - shift(j, i, tau);
      if (x < 0.0) break;
      double log_power = 0.0;  // [x U(x)]^0 = U(x) = 1 here
      if (power > 0) {
        if (x == 0.0) continue;
        log_power = power * std::log(x);
      }
      const double term = std::exp(log_prefix + log_choose(k, i) + log_outer + log_power);
      sum.add((i & 1) ? -term : term);
    }
  }
  return std::max(sum.value(), 0.0);
}

double exp_const_cdf(const ExpConstParams& params, double t) {
  params.validate();
  if (!(t > 0.0)) return 0.0;
  if (const double largest = log10_largest_cdf_term(params, t); largest > kDoubleSafeLog10) {
    return std::clamp(with_digits<ExtendedCdf>(largest, params, t), 0.0, 1.0);
  }
  const double rate = params.rate;
  const double tau = params.threshold;
  const int k = params.k;

  CompensatedSum sum;
  const int outer = max_outer_index(t, tau);
  for (int j = 0; j <= outer; ++j) {
    for (int i = 0; i <= k; ++i) {
      const double c = shift(j, i, tau);
      const double x = t - c;
      if (x <= 0.0) break;
      const double log_coeff = log_choose(k, i) + log_choose(j + k - 1.0, j) - rate * c;
      const double term = std::exp(log_coeff) * boost::math::gamma_p(j + k, rate * x);
      sum.add((i & 1) ? -term : term);
    }
  }
  return std::clamp(sum.value(), 0.0, 1.0);
}

MomentSummary exp_const_moments(const ExpConstParams& params) {
  params.validate();
  const double rate = params.rate;
  const double tau = params.threshold;
  const double p = std::isinf(tau) ? 1.0 : -std::expm1(-rate * tau);
  const double tail = std::isinf(tau) ? 0.0 : rate * tau * std::exp(-rate * tau);

  MomentSummary out{};
  out.segment_mean = 1.0 / (rate * p);
  out.segment_variance = (1.0 + 2.0 * tail) / (rate * rate * p * p);
  out.mean = params.k * out.segment_mean;
  out.variance = params.k * out.segment_variance;
  return out;
}

double unif_const_mean(const UnifConstParams& params) {
  params.validate();
  const double a = params.lower;
  const double b = params.upper;
  return params.k * (b * b - a * a) / (2.0 * (params.threshold - a));
}

double unif_const_variance_general(const UnifConstParams& params) {
  params.validate();
  const ShockModel model(params.k, ArrivalLaw::uniform(params.lower, params.upper),
                         ThresholdLaw::constant(params.threshold));
  return failure_moments(model).variance;
}

double unif_const_variance_verbatim(const UnifConstParams& params) {
  params.validate();
  const double a = params.lower;
  const double b = params.upper;
  const double tau = params.threshold;
  const double mu1 = 0.5 * (a + b);
  const double mu2 = (a * a + a * b + b * b) / 3.0;
  return params.k * (2.0 * mu2 * (tau - a) + mu1 * (b * b - 2.0 * tau * tau + a * a)) /
         (2.0 * mu1 * (tau - a));
}

VarianceAudit unif_const_variance_audit(const UnifConstParams& params) {
  VarianceAudit out{};
  out.general = unif_const_variance_general(params);
  out.verbatim = unif_const_variance_verbatim(params);
  out.abs_difference = std::abs(out.general - out.verbatim);
  return out;
}

double uniform_sum_pdf(double lower, double upper, int k, double t) {
  if (!(upper > lower) || k < 1) throw ModelError("uniform sum needs lower < upper and k >= 1");
  const double width = upper - lower;
  const double x = (t - k * lower) / width;
  if (x < 0.0 || x > k) return 0.0;
  CompensatedSum sum;
  const int top = static_cast<int>(std::floor(x));
  for (int j = 0; j <= top && j <= k; ++j) {
    const double y = x - j;
    const double power = (k == 1) ? 1.0 : std::pow(y, k - 1);
    const double term = std::exp(log_choose(k, j)) * power;
    sum.add((j & 1) ? -term : term);
  }
  return std::max(sum.value(), 0.0) / (std::exp(std::lgamma(static_cast<double>(k))) * width);
}

bool has_closed_form_pdf(const ShockModel& model) {
  if (as_exp_const(model)) return true;
  // Every gap lethal: W is a plain k-fold sum of uniform gaps.
  return std::holds_alternative<UniformArrival>(model.arrivals().params()) &&
         model.safe_prob() == 0.0;
}

std::optional<double> closed_form_pdf(const ShockModel& model, double t) {
  if (const auto params = as_exp_const(model)) return exp_const_pdf(*params, t);
  if (!has_closed_form_pdf(model)) return std::nullopt;
  const auto& u = std::get<UniformArrival>(model.arrivals().params());
  return uniform_sum_pdf(u.lower, u.upper, model.k(), t);
}

}  // namespace dshock
