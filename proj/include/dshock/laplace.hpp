#pragma once

#include <functional>

#include "dshock/distributions.hpp"
#include "dshock/shock_model.hpp"

namespace dshock {

/// Evaluates the Laplace transform of the failure-time density,
///
///   L_h(s) = ( L_{f(1-G)}(s) / (1 - L_{fG}(s)) )^k,
///
/// where the ratio inside the power is the transform of one segment between
/// successive lethal shocks.
class TransformEvaluator {
 public:
  explicit TransformEvaluator(ShockModel model) : model_(std::move(model)) {}

  /// Transform of a single inter-lethal segment. Throws NumericError at a pole.
  Complex segment(Complex s) const;
  Complex operator()(Complex s) const;

  const ShockModel& model() const { return model_; }

 private:
  ShockModel model_;
};

Complex laplace_h(const ShockModel& model, Complex s);

struct InversionConfig {
  double target_error = 1e-8;  // absolute
  int euler_depth = 11;        // binomial averaging depth, >= 8
  int initial_terms = 15;      // series terms before averaging starts
  int max_terms = 1 << 15;
  // Damping abscissa A of the Fourier series; 0 sizes it from target_error so
  // the aliasing bound is at most half the target.
  double discretization = 0.0;
  double clamp_below = 1e-10;

  /// Throws ModelError for an invalid configuration.
  void validate() const;
};

struct InversionResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int terms = 0;
  bool clamped = false;  // value was below clamp_below and set to 0
};

/// Fourier-series inversion with Euler (binomial) averaging of the alternating
/// tail. `bound` is an upper bound on |f| used to size the discretization
/// error. Throws InversionError when the averaged tail does not settle below
/// half the target error within max_terms.
InversionResult euler_inversion(const std::function<Complex(Complex)>& transform, double t,
                                const InversionConfig& config = {}, double bound = 1.0);

InversionResult invert_density(const TransformEvaluator& evaluator, double t,
                               const InversionConfig& config = {});
InversionResult invert_density(const ShockModel& model, double t, const InversionConfig& config = {});

InversionResult invert_cdf(const TransformEvaluator& evaluator, double t,
                           const InversionConfig& config = {});
InversionResult invert_cdf(const ShockModel& model, double t, const InversionConfig& config = {});

/// Runs `invert` at the configured target and, when that cannot be met, at
/// ten times the previous target until `loosest`. `relaxed` reports whether a
/// looser target was used. The last InversionError propagates.
InversionResult invert_relaxed(const std::function<InversionResult(const InversionConfig&)>& invert,
                               const InversionConfig& config, double loosest = 1e-5,
                               bool* relaxed = nullptr);

struct DifferentiationConfig {
  // First step times the segment mean; later steps halve it.
  double relative_step = 5e-2;
  int richardson_levels = 4;
};

/// Moments of W by differentiating the transform at the origin.
///
/// The cumulant function log L_h(s) is sampled along the imaginary axis,
/// s = i*eta, where Im gives the odd cumulants and Re the even ones; the
/// difference quotients are Richardson-extrapolated in eta^2.
MomentSummary moments_from_transform(const ShockModel& model,
                                     const DifferentiationConfig& config = {});

}  // namespace dshock
