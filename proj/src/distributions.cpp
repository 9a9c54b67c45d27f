#include "dshock/distributions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>

#include "dshock/errors.hpp"
#include "dshock/quadrature.hpp"

namespace dshock {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const char* what, double value) {
  if (!ok) {
    std::ostringstream msg;
    msg << what << " (got " << value << ")";
    throw ModelError(msg.str());
  }
}

void require_nonnegative_time(double t) {
  if (t < 0.0 || std::isnan(t)) {
    std::ostringstream msg;
    msg << "time argument must be nonnegative (got " << t << ")";
    throw DomainError(msg.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// ArrivalLaw

ArrivalLaw ArrivalLaw::exponential(double rate) {
  require(rate > 0.0 && std::isfinite(rate), "exponential arrival rate must be positive and finite",
          rate);
  return ArrivalLaw(ExponentialArrival{rate});
}

ArrivalLaw ArrivalLaw::uniform(double lower, double upper) {
  require(lower >= 0.0 && std::isfinite(lower), "uniform arrival lower bound must be >= 0", lower);
  require(upper > lower && std::isfinite(upper),
          "uniform arrival upper bound must be finite and exceed the lower bound", upper);
  return ArrivalLaw(UniformArrival{lower, upper});
}

double ArrivalLaw::density(double t) const {
  require_nonnegative_time(t);
  return std::visit(Overloaded{
                        [t](const ExponentialArrival& e) { return e.rate * std::exp(-e.rate * t); },
                        [t](const UniformArrival& u) {
                          return (t >= u.lower && t <= u.upper) ? 1.0 / (u.upper - u.lower) : 0.0;
                        },
                    },
                    law_);
}

double ArrivalLaw::cdf(double t) const {
  if (t <= 0.0) return 0.0;
  return std::visit(Overloaded{
                        [t](const ExponentialArrival& e) { return -std::expm1(-e.rate * t); },
                        [t](const UniformArrival& u) {
                          return std::clamp((t - u.lower) / (u.upper - u.lower), 0.0, 1.0);
                        },
                    },
                    law_);
}

double ArrivalLaw::survival(double t) const { return 1.0 - cdf(t); }

double ArrivalLaw::raw_moment(int order) const {
  if (order != 1 && order != 2) {
    throw DomainError("raw_moment supports orders 1 and 2 only (got " + std::to_string(order) + ")");
  }
  return std::visit(Overloaded{
                        [order](const ExponentialArrival& e) {
                          return order == 1 ? 1.0 / e.rate : 2.0 / (e.rate * e.rate);
                        },
                        [order](const UniformArrival& u) {
                          const double a = u.lower;
                          const double b = u.upper;
                          return order == 1 ? 0.5 * (a + b) : (a * a + a * b + b * b) / 3.0;
                        },
                    },
                    law_);
}

Complex ArrivalLaw::laplace(Complex s) const {
  return std::visit(Overloaded{
                        [s](const ExponentialArrival& e) { return e.rate / (s + e.rate); },
                        [s](const UniformArrival& u) {
                          return std::exp(-s * u.lower) * unit_moment(0, s * (u.upper - u.lower));
                        },
                    },
                    law_);
}

double ArrivalLaw::sample(Stream& stream) const {
  return std::visit(Overloaded{
                        [&stream](const ExponentialArrival& e) {
                          return -std::log(stream.uniform_open()) / e.rate;
                        },
                        [&stream](const UniformArrival& u) {
                          const double x = u.lower + (u.upper - u.lower) * stream.uniform_open();
                          // Rounding can land on an endpoint when the width is tiny
                          // relative to the lower bound.
                          if (x >= u.upper) return std::nextafter(u.upper, u.lower);
                          if (x <= u.lower) return std::nextafter(u.lower, u.upper);
                          return x;
                        },
                    },
                    law_);
}

double ArrivalLaw::support_lower() const {
  return std::visit(Overloaded{
                        [](const ExponentialArrival&) { return 0.0; },
                        [](const UniformArrival& u) { return u.lower; },
                    },
                    law_);
}

double ArrivalLaw::support_upper() const {
  return std::visit(Overloaded{
                        [](const ExponentialArrival&) { return kInfinity; },
                        [](const UniformArrival& u) { return u.upper; },
                    },
                    law_);
}

double ArrivalLaw::integration_cutoff() const {
  return std::visit(Overloaded{
                        [](const ExponentialArrival& e) { return 12.0 * std::log(10.0) / e.rate; },
                        [](const UniformArrival& u) { return u.upper; },
                    },
                    law_);
}

double ArrivalLaw::density_bound() const {
  return std::visit(Overloaded{
                        [](const ExponentialArrival& e) { return e.rate; },
                        [](const UniformArrival& u) { return 1.0 / (u.upper - u.lower); },
                    },
                    law_);
}

std::vector<double> ArrivalLaw::breakpoints() const {
  return std::visit(Overloaded{
                        [](const ExponentialArrival&) { return std::vector<double>{}; },
                        [](const UniformArrival& u) { return std::vector<double>{u.lower, u.upper}; },
                    },
                    law_);
}

// ---------------------------------------------------------------------------
// ThresholdLaw

ThresholdLaw ThresholdLaw::constant(double value) {
  require(value > 0.0, "constant threshold must be positive", value);
  return ThresholdLaw(ConstantThreshold{value});
}

ThresholdLaw ThresholdLaw::exponential(double rate) {
  require(rate > 0.0 && std::isfinite(rate), "exponential threshold rate must be positive and finite",
          rate);
  return ThresholdLaw(ExponentialThreshold{rate});
}

ThresholdLaw ThresholdLaw::uniform(double lower, double upper) {
  require(lower >= 0.0 && std::isfinite(lower), "uniform threshold lower bound must be >= 0", lower);
  require(upper > lower && std::isfinite(upper),
          "uniform threshold upper bound must be finite and exceed the lower bound", upper);
  return ThresholdLaw(UniformThreshold{lower, upper});
}

double ThresholdLaw::cdf(double t) const {
  return std::visit(Overloaded{
                        [t](const ConstantThreshold& c) { return t >= c.value ? 1.0 : 0.0; },
                        [t](const ExponentialThreshold& e) {
                          return t <= 0.0 ? 0.0 : -std::expm1(-e.rate * t);
                        },
                        [t](const UniformThreshold& u) {
                          return std::clamp((t - u.lower) / (u.upper - u.lower), 0.0, 1.0);
                        },
                    },
                    law_);
}

double ThresholdLaw::survival(double t) const { return 1.0 - cdf(t); }

double ThresholdLaw::sample(Stream& stream) const {
  return std::visit(Overloaded{
                        [](const ConstantThreshold& c) { return c.value; },
                        [&stream](const ExponentialThreshold& e) {
                          return -std::log(stream.uniform_open()) / e.rate;
                        },
                        [&stream](const UniformThreshold& u) {
                          return u.lower + (u.upper - u.lower) * stream.uniform_open();
                        },
                    },
                    law_);
}

std::vector<double> ThresholdLaw::breakpoints() const {
  return std::visit(Overloaded{
                        [](const ConstantThreshold& c) {
                          return std::isfinite(c.value) ? std::vector<double>{c.value}
                                                        : std::vector<double>{};
                        },
                        [](const ExponentialThreshold&) { return std::vector<double>{}; },
                        [](const UniformThreshold& u) { return std::vector<double>{u.lower, u.upper}; },
                    },
                    law_);
}

// ---------------------------------------------------------------------------
// Weighted integrals
//
// Every built-in pair has an integrand f(t) w(t) that is, piece by piece, a
// constant times e^{-rate t} times a polynomial of degree <= 2 in (t - lo).
// Those pieces integrate exactly against e^{-st}; quadrature is the fallback
// for pairs without such a form.

namespace {

struct Piece {
  double lo = 0.0;
  double hi = kInfinity;
  double rate = 0.0;
  // Integrand on [lo, hi): e^{-rate t} (poly[0] + poly[1] (t - lo) + poly[2] (t - lo)^2).
  std::array<double, 3> poly{};
};

// Linear weight on [lo, hi): value + slope (t - lo), times e^{-rate t}.
struct WeightPiece {
  double lo;
  double hi;
  double rate;
  double value;
  double slope;
};

std::vector<WeightPiece> weight_pieces(const ThresholdLaw& threshold, Weight weight) {
  const bool lethal = weight == Weight::survival;
  return std::visit(
      Overloaded{
          [lethal](const ConstantThreshold& c) {
            if (lethal) return std::vector<WeightPiece>{{0.0, c.value, 0.0, 1.0, 0.0}};
            if (std::isinf(c.value)) return std::vector<WeightPiece>{};
            return std::vector<WeightPiece>{{c.value, kInfinity, 0.0, 1.0, 0.0}};
          },
          [lethal](const ExponentialThreshold& e) {
            if (lethal) return std::vector<WeightPiece>{{0.0, kInfinity, e.rate, 1.0, 0.0}};
            return std::vector<WeightPiece>{{0.0, kInfinity, 0.0, 1.0, 0.0},
                                            {0.0, kInfinity, e.rate, -1.0, 0.0}};
          },
          [lethal](const UniformThreshold& u) {
            const double slope = 1.0 / (u.upper - u.lower);
            if (lethal) {
              return std::vector<WeightPiece>{{0.0, u.lower, 0.0, 1.0, 0.0},
                                              {u.lower, u.upper, 0.0, 1.0, -slope}};
            }
            return std::vector<WeightPiece>{{u.lower, u.upper, 0.0, 0.0, slope},
                                            {u.upper, kInfinity, 0.0, 1.0, 0.0}};
          },
      },
      threshold.params());
}

// Pieces of t^order f(t) w(t) on [0, upper].
std::optional<std::vector<Piece>> integrand_pieces(const ArrivalLaw& arrivals,
                                                   const ThresholdLaw& threshold, Weight weight,
                                                   int order, double upper) {
  double lo = 0.0, hi = kInfinity, scale = 0.0, rate = 0.0;
  if (const auto* e = std::get_if<ExponentialArrival>(&arrivals.params())) {
    scale = e->rate;
    rate = e->rate;
  } else if (const auto* u = std::get_if<UniformArrival>(&arrivals.params())) {
    lo = u->lower;
    hi = u->upper;
    scale = 1.0 / (u->upper - u->lower);
  } else {
    return std::nullopt;
  }
  hi = std::min(hi, upper);

  std::vector<Piece> out;
  for (const auto& w : weight_pieces(threshold, weight)) {
    Piece p;
    p.lo = std::max(w.lo, lo);
    p.hi = std::min(w.hi, hi);
    if (!(p.hi > p.lo)) continue;
    p.rate = rate + w.rate;
    const double value = scale * (w.value + w.slope * (p.lo - w.lo));
    const double slope = scale * w.slope;
    if (order == 0) {
      p.poly = {value, slope, 0.0};
    } else {
      // t = lo + (t - lo)
      p.poly = {p.lo * value, value + p.lo * slope, slope};
    }
    out.push_back(p);
  }
  return out;
}

// psi_n(w) = integral over [0, 1] of x^n e^{-wx}, n = 0, 1, 2, for Re w >= 0.
std::array<Complex, 3> unit_moments(Complex w) {
  std::array<Complex, 3> out;
  if (std::abs(w) < 1.0) {
    // sum_m (-w)^m / (m! (n + m + 1))
    for (int n = 0; n < 3; ++n) {
      Complex power = 1.0;
      Complex sum = 1.0 / (n + 1.0);
      for (int m = 1; m < 40; ++m) {
        power *= -w / static_cast<double>(m);
        const Complex term = power / static_cast<double>(n + m + 1);
        sum += term;
        if (std::abs(term) < 1e-18) break;
      }
      out[n] = sum;
    }
    return out;
  }
  const Complex decay = std::exp(-w);
  out[0] = (1.0 - decay) / w;
  out[1] = (out[0] - decay) / w;
  out[2] = (2.0 * out[1] - decay) / w;
  return out;
}

Complex piece_laplace(const Piece& p, Complex s) {
  const Complex z = s + p.rate;
  const Complex front = std::exp(-z * p.lo);
  if (std::isinf(p.hi)) {
    // integral over [0, inf) of x^n e^{-zx} = n! / z^{n+1}
    return front * (p.poly[0] / z + p.poly[1] / (z * z) + 2.0 * p.poly[2] / (z * z * z));
  }
  const double len = p.hi - p.lo;
  const auto psi = unit_moments(z * len);
  return front * len * (p.poly[0] * psi[0] + p.poly[1] * len * psi[1] + p.poly[2] * len * len * psi[2]);
}

double threshold_weight(const ThresholdLaw& threshold, Weight weight, double t) {
  return weight == Weight::cdf ? threshold.cdf(t) : threshold.survival(t);
}

std::vector<double> joint_breakpoints(const ArrivalLaw& arrivals, const ThresholdLaw& threshold) {
  auto points = arrivals.breakpoints();
  for (double x : threshold.breakpoints()) points.push_back(x);
  return points;
}

void require_right_half_plane(Complex s) {
  if (s.real() < 0.0) {
    std::ostringstream msg;
    msg << "weighted Laplace transform requires Re s >= 0 (got " << s << ")";
    throw DomainError(msg.str());
  }
}

void require_moment_order(int order) {
  if (order != 0 && order != 1) {
    throw DomainError("weighted_moment supports orders 0 and 1 only (got " + std::to_string(order) +
                      ")");
  }
}

}  // namespace

Complex unit_moment(int order, Complex w) { return unit_moments(w).at(static_cast<std::size_t>(order)); }

Complex weighted_laplace(const ArrivalLaw& arrivals, const ThresholdLaw& threshold, Complex s,
                         Weight weight) {
  require_right_half_plane(s);
  const auto pieces = integrand_pieces(arrivals, threshold, weight, 0, kInfinity);
  if (!pieces) return weighted_laplace_quadrature(arrivals, threshold, s, weight);
  Complex sum = 0.0;
  for (const auto& p : *pieces) sum += piece_laplace(p, s);
  return sum;
}

Complex weighted_laplace_quadrature(const ArrivalLaw& arrivals, const ThresholdLaw& threshold,
                                    Complex s, Weight weight) {
  require_right_half_plane(s);
  const auto integrand = [&](double t) -> Complex {
    return std::exp(-s * t) * arrivals.density(t) * threshold_weight(threshold, weight, t);
  };
  quadrature::Options opt;
  opt.oscillation = std::abs(s.imag());
  return quadrature::integrate(integrand, arrivals.support_lower(), arrivals.integration_cutoff(),
                               joint_breakpoints(arrivals, threshold), opt);
}

double weighted_moment(const ArrivalLaw& arrivals, const ThresholdLaw& threshold, int order,
                       Weight weight, double upper) {
  require_moment_order(order);
  if (upper <= 0.0) return 0.0;
  const auto pieces = integrand_pieces(arrivals, threshold, weight, order, upper);
  if (!pieces) return weighted_moment_quadrature(arrivals, threshold, order, weight, upper);
  double sum = 0.0;
  for (const auto& p : *pieces) sum += piece_laplace(p, 0.0).real();
  return sum;
}

double weighted_moment_quadrature(const ArrivalLaw& arrivals, const ThresholdLaw& threshold,
                                  int order, Weight weight, double upper) {
  require_moment_order(order);
  if (upper <= 0.0) return 0.0;
  const auto integrand = [&](double t) {
    const double power = order == 0 ? 1.0 : t;
    return power * arrivals.density(t) * threshold_weight(threshold, weight, t);
  };
  const double hi = std::min(upper, arrivals.integration_cutoff());
  return quadrature::integrate(integrand, arrivals.support_lower(), hi,
                               joint_breakpoints(arrivals, threshold));
}

}  // namespace dshock
