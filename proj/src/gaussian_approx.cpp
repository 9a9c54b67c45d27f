#include "dshock/gaussian_approx.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dshock/closed_forms.hpp"
#include "dshock/errors.hpp"

namespace dshock {

namespace {
constexpr double kLoosestReferenceTarget = 1e-5;
}  // namespace

NormalApprox::NormalApprox(double center, double scale) : center_(center), scale_(scale) {
  if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(center)) {
    throw ModelError("normal approximation needs a finite center and a positive finite scale");
  }
}

NormalApprox NormalApprox::from_moments(const MomentSummary& moments) {
  if (!(moments.variance > 0.0)) throw ModelError("normal approximation needs a positive variance");
  return NormalApprox(moments.mean, std::sqrt(moments.variance));
}

double NormalApprox::pdf(double t) const {
  const double z = (t - center_) / scale_;
  return std::exp(-0.5 * z * z) / (scale_ * std::sqrt(2.0 * std::numbers::pi));
}

double NormalApprox::cdf(double t) const {
  return 0.5 * std::erfc(-(t - center_) / (scale_ * std::numbers::sqrt2));
}

double normal_pdf(const NormalApprox& approx, double t) { return approx.pdf(t); }

ApproxErrorReport approx_error(const NormalApprox& approx, const CurveReference& reference,
                               std::size_t points) {
  ApproxErrorReport out;
  out.grid_points = std::max<std::size_t>(points, 2);
  out.grid_min = approx.center() - 5.0 * approx.scale();
  out.grid_max = approx.center() + 5.0 * approx.scale();
  const double step = (out.grid_max - out.grid_min) / static_cast<double>(out.grid_points - 1);

  double sup = 0.0;
  double ks = 0.0;
  for (std::size_t i = 0; i < out.grid_points; ++i) {
    const double t = out.grid_min + step * static_cast<double>(i);
    const std::optional<double> ref_pdf = t > 0.0 ? reference.pdf(t) : 0.0;
    const double ref_cdf = t > 0.0 ? reference.cdf(t) : 0.0;
    if (ref_pdf) {
      sup = std::max(sup, std::abs(approx.pdf(t) - *ref_pdf));
    } else {
      ++out.skipped_pdf_points;
    }
    ks = std::max(ks, std::abs(approx.cdf(t) - ref_cdf));
  }
  out.sup_norm = sup;
  out.ks = ks;
  return out;
}

ApproxErrorReport approx_error(const ShockModel& model, const NormalApprox& approx,
                               ReferenceKind reference, const InversionConfig& inversion,
                               const SimulationReport* simulation) {
  switch (reference) {
    case ReferenceKind::closed_form: {
      const auto params = as_exp_const(model);
      if (!params) {
        throw ModelError("closed-form reference needs exponential arrivals and a constant threshold");
      }
      return approx_error(approx, CurveReference{
                                      [p = *params](double t) { return exp_const_pdf(p, t); },
                                      [p = *params](double t) { return exp_const_cdf(p, t); },
                                  });
    }
    case ReferenceKind::inversion: {
      const TransformEvaluator evaluator(model);
      std::size_t relaxed_points = 0;
      const auto pdf = [&](double t) -> std::optional<double> {
        bool relaxed = false;
        try {
          const auto r = invert_relaxed(
              [&](const InversionConfig& c) { return invert_density(evaluator, t, c); }, inversion,
              kLoosestReferenceTarget, &relaxed);
          relaxed_points += relaxed;
          return r.value;
        } catch (const InversionError&) {
          return std::nullopt;
        }
      };
      const auto cdf = [&](double t) {
        bool relaxed = false;
        const auto r = invert_relaxed(
            [&](const InversionConfig& c) { return invert_cdf(evaluator, t, c); }, inversion,
            kLoosestReferenceTarget, &relaxed);
        relaxed_points += relaxed;
        return r.value;
      };
      auto out = approx_error(approx, CurveReference{pdf, cdf});
      out.relaxed_points = relaxed_points;
      return out;
    }
    case ReferenceKind::simulation: {
      if (simulation == nullptr || simulation->samples.empty()) {
        throw ModelError("simulation reference needs a non-empty simulation report");
      }
      ApproxErrorReport out;
      out.ks = ks_statistic(*simulation, [&approx](double t) { return approx.cdf(t); });
      out.grid_min = simulation->samples.front();
      out.grid_max = simulation->samples.back();
      out.grid_points = simulation->samples.size();
      return out;
    }
  }
  throw ModelError("unknown reference kind");
}

}  // namespace dshock
