#pragma once

#include <complex>
#include <limits>
#include <variant>
#include <vector>

#include "dshock/rng.hpp"

namespace dshock {

using Complex = std::complex<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Inter-shock gap law F
// ---------------------------------------------------------------------------

struct ExponentialArrival {
  double rate;
  bool operator==(const ExponentialArrival&) const = default;
};

struct UniformArrival {
  double lower;
  double upper;
  bool operator==(const UniformArrival&) const = default;
};

/// Distribution of the time Z between successive shocks.
///
/// New laws are added as another alternative of the variant; every member
/// function dispatches on it.
class ArrivalLaw {
 public:
  using Variant = std::variant<ExponentialArrival, UniformArrival>;

  static ArrivalLaw exponential(double rate);
  static ArrivalLaw uniform(double lower, double upper);

  /// f(t); 0 outside the support. Throws DomainError for t < 0.
  double density(double t) const;
  double cdf(double t) const;
  double survival(double t) const;

  /// E[Z^order] for order 1 or 2.
  double raw_moment(int order) const;

  /// Plain Laplace transform of f.
  Complex laplace(Complex s) const;

  double sample(Stream& stream) const;

  double support_lower() const;
  /// Upper end of the support, possibly infinite.
  double support_upper() const;
  /// Point beyond which the survival function is below 1e-12.
  double integration_cutoff() const;
  /// sup_t f(t).
  double density_bound() const;
  /// Points where f has a jump.
  std::vector<double> breakpoints() const;

  const Variant& params() const { return law_; }
  bool operator==(const ArrivalLaw&) const = default;

 private:
  explicit ArrivalLaw(Variant law) : law_(law) {}
  Variant law_;
};

// ---------------------------------------------------------------------------
// Threshold law G for delta
// ---------------------------------------------------------------------------

/// Degenerate threshold at a fixed value; the value may be +infinity.
struct ConstantThreshold {
  double value;
  bool operator==(const ConstantThreshold&) const = default;
};

struct ExponentialThreshold {
  double rate;
  bool operator==(const ExponentialThreshold&) const = default;
};

struct UniformThreshold {
  double lower;
  double upper;
  bool operator==(const UniformThreshold&) const = default;
};

class ThresholdLaw {
 public:
  using Variant = std::variant<ConstantThreshold, ExponentialThreshold, UniformThreshold>;

  static ThresholdLaw constant(double value);
  static ThresholdLaw exponential(double rate);
  static ThresholdLaw uniform(double lower, double upper);

  /// G(t) = P(delta <= t). For a constant threshold G jumps to 1 at t = value.
  double cdf(double t) const;
  /// 1 - G(t).
  double survival(double t) const;
  double sample(Stream& stream) const;
  /// Points where G has a jump or a kink.
  std::vector<double> breakpoints() const;

  const Variant& params() const { return law_; }
  bool operator==(const ThresholdLaw&) const = default;

 private:
  explicit ThresholdLaw(Variant law) : law_(law) {}
  Variant law_;
};

// ---------------------------------------------------------------------------
// Weighted integrals of f against G or its survival function
// ---------------------------------------------------------------------------

enum class Weight {
  cdf,       // G(t): the gap outlives the threshold, non-lethal
  survival,  // 1 - G(t): the gap is at most the threshold, lethal
};

/// Integral over [0, inf) of e^{-st} f(t) w(t), w = G or 1 - G, for Re s >= 0.
///
/// Built-in pairs are integrated exactly piece by piece; other laws fall back
/// to adaptive quadrature.
Complex weighted_laplace(const ArrivalLaw& arrivals, const ThresholdLaw& threshold, Complex s,
                         Weight weight);

/// Same integral by adaptive quadrature on [support lower, cutoff].
Complex weighted_laplace_quadrature(const ArrivalLaw& arrivals, const ThresholdLaw& threshold,
                                    Complex s, Weight weight);

/// Integral over [0, upper] of t^order f(t) w(t) for order 0 or 1; upper may
/// be infinite.
double weighted_moment(const ArrivalLaw& arrivals, const ThresholdLaw& threshold, int order,
                       Weight weight, double upper = kInfinity);

double weighted_moment_quadrature(const ArrivalLaw& arrivals, const ThresholdLaw& threshold,
                                  int order, Weight weight, double upper = kInfinity);

/// Integral over [0, 1] of x^order e^{-wx} for order 0..2 and Re w >= 0,
/// accurate near w = 0.
Complex unit_moment(int order, Complex w);

}  // namespace dshock
