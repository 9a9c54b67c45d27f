#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dshock/errors.hpp"

namespace dshock::quadrature {

struct Options {
  double rel_tol = 1e-10;
  unsigned max_depth = 20;
  // Angular frequency of an e^{-i w t} factor in the integrand; panels are
  // sized so each one spans at most a few periods.
  double oscillation = 0.0;
};

/// Adaptive Gauss-Kronrod (7/15) integral of f over [a, b].
///
/// The interval is cut at every breakpoint strictly inside (a, b) so that
/// jumps and kinks of the integrand sit on panel edges. Works for real and
/// complex valued integrands. Throws NumericError when the accumulated error
/// estimate exceeds rel_tol times the L1 norm of the integrand.
template <class F>
auto integrate(F&& f, double a, double b, std::span<const double> breakpoints = {},
               const Options& opt = {}) -> decltype(f(a)) {
  using Value = decltype(f(a));
  using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;

  Value total{};
  if (!(b > a)) return total;

  std::vector<double> edges{a, b};
  for (double x : breakpoints) {
    if (x > a && x < b) edges.push_back(x);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  constexpr double periods_per_panel = 4.0;
  constexpr double max_panels = 1 << 16;

  double error = 0.0;
  double l1 = 0.0;
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double lo = edges[e];
    const double len = edges[e + 1] - lo;
    double panels = 1.0;
    if (opt.oscillation > 0.0) {
      panels = std::ceil(len * opt.oscillation / (2.0 * std::numbers::pi * periods_per_panel));
      panels = std::clamp(panels, 1.0, max_panels);
    }
    const auto count = static_cast<std::size_t>(panels);
    for (std::size_t i = 0; i < count; ++i) {
      const double x0 = lo + len * static_cast<double>(i) / panels;
      const double x1 = (i + 1 == count) ? edges[e + 1] : lo + len * static_cast<double>(i + 1) / panels;
      double panel_error = 0.0;
      double panel_l1 = 0.0;
      total += Rule::integrate(f, x0, x1, opt.max_depth, opt.rel_tol, &panel_error, &panel_l1);
      error += panel_error;
      l1 += panel_l1;
    }
  }

  if (!(error <= opt.rel_tol * l1) && error > 1e-300) {
    std::ostringstream msg;
    msg << "non-convergent integral on [" << a << ", " << b << "]: error estimate " << error
        << " against L1 norm " << l1;
    throw NumericError(msg.str());
  }
  return total;
}

}  // namespace dshock::quadrature
