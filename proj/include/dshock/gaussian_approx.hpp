#pragma once

#include <cstddef>
#include <functional>
#include <optional>

#include "dshock/laplace.hpp"
#include "dshock/shock_model.hpp"
#include "dshock/simulator.hpp"

namespace dshock {

/// Gaussian stand-in for the failure-time law with mean k*mu and variance
/// k*sigma^2, justified by W being a sum of k i.i.d. inter-lethal segments.
class NormalApprox {
 public:
  NormalApprox(double center, double scale);
  static NormalApprox from_moments(const MomentSummary& moments);

  double center() const { return center_; }
  double scale() const { return scale_; }

  double pdf(double t) const;
  double cdf(double t) const;

 private:
  double center_;
  double scale_;
};

double normal_pdf(const NormalApprox& approx, double t);

enum class ReferenceKind { closed_form, inversion, simulation };

struct ApproxErrorReport {
  // Largest |pdf difference| on the grid; absent for a simulation reference.
  std::optional<double> sup_norm;
  // Largest |cdf difference|: on the grid for analytic references, over the
  // sorted samples for a simulation reference.
  double ks = 0.0;
  double grid_min = 0.0;
  double grid_max = 0.0;
  std::size_t grid_points = 0;
  // Grid points where the reference pdf was unavailable and left out of
  // sup_norm, and points the inversion reference only met at a looser target.
  std::size_t skipped_pdf_points = 0;
  std::size_t relaxed_points = 0;
};

struct CurveReference {
  // nullopt: no reference density value at this point
  std::function<std::optional<double>(double)> pdf;
  std::function<double(double)> cdf;
};

inline constexpr std::size_t kApproxGridPoints = 400;

/// Compares the approximation against a reference curve on an evenly spaced
/// grid over center +/- 5 scale. The reference is only evaluated at t > 0; it
/// is taken as 0 elsewhere.
ApproxErrorReport approx_error(const NormalApprox& approx, const CurveReference& reference,
                               std::size_t points = kApproxGridPoints);

/// Reference chosen by kind. closed_form needs exponential arrivals with a
/// constant threshold; simulation needs a report. Throws ModelError when the
/// requested reference is unavailable for the model.
///
/// The inversion reference retries points that miss the configured target at
/// looser ones, down to 1e-5. Density points that still fail (close to a jump
/// of h) are skipped; a cdf point that still fails throws InversionError.
ApproxErrorReport approx_error(const ShockModel& model, const NormalApprox& approx,
                               ReferenceKind reference, const InversionConfig& inversion = {},
                               const SimulationReport* simulation = nullptr);

}  // namespace dshock
