#pragma once

// Reference computations for the tests. None of these call into the library:
// they are deliberately plain (composite Simpson, direct sums, brute-force
// enumeration) so they fail differently from the code under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

// Composite Simpson on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double sum = f(a) + f(b);
  for (int i = 1; i < panels; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// Simpson over consecutive breakpoints, so jumps sit on panel edges. Each
// piece samples its end points from the inside: at a jump the value that
// belongs to the piece is the one-sided limit, not whatever f returns there.
inline double simpson_pieces(const std::function<double(double)>& f, std::vector<double> edges,
                             int panels_per_piece) {
  double sum = 0.0;
  for (std::size_t i = 1; i < edges.size(); ++i) {
    const double a = edges[i - 1], b = edges[i];
    if (!(b > a)) continue;
    const double nudge = (b - a) * 1e-12;
    const auto inside = [&](double x) { return f(std::clamp(x, a + nudge, b - nudge)); };
    sum += simpson(inside, a, b, panels_per_piece);
  }
  return sum;
}

// Central difference of g at x.
inline double derivative(const std::function<double(double)>& g, double x, double h = 1e-5) {
  return (g(x + h) - g(x - h)) / (2.0 * h);
}

// The exponential/constant failure-time density as the plain double sum, in
// ordinary floating point with no rescaling or compensation.
inline double naive_exp_const_pdf(double rate, double tau, int k, double t) {
  if (t <= 0.0) return 0.0;
  double sum = 0.0;
  for (int j = 0; j * tau <= t; ++j) {
    for (int i = 0; i <= k; ++i) {
      const double x = t - (j + i) * tau;
      if (x < 0.0) continue;
      const int power = j + k - 1;
      const double binom = std::tgamma(k + 1.0) / (std::tgamma(i + 1.0) * std::tgamma(k - i + 1.0));
      const double term = binom * std::pow(rate, j) / std::tgamma(j + 1.0) *
                          (power == 0 ? 1.0 : std::pow(x, power));
      sum += (i % 2 ? -term : term);
    }
  }
  return std::pow(rate, k) * std::exp(-rate * t) / std::tgamma(static_cast<double>(k)) * sum;
}

inline double erlang_pdf(double rate, int k, double t) {
  if (t <= 0.0) return 0.0;
  return std::exp(k * std::log(rate) + (k - 1) * std::log(t) - rate * t - std::lgamma(k));
}

// P(k-th success happens on trial n) by walking every success/failure
// sequence of length n.
inline double enumerate_count_pmf(int k, double p, int n) {
  double total = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    int successes = 0;
    for (int i = 0; i < n; ++i) successes += (mask >> i) & 1u;
    const bool last_is_success = (mask >> (n - 1)) & 1u;
    if (successes != k || !last_is_success) continue;
    total += std::pow(p, successes) * std::pow(1.0 - p, n - successes);
  }
  return total;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace oracle
