#pragma once

#include <cstdint>
#include <optional>

namespace dshock {

/// Single-pass accumulator for the first four central moments.
///
/// Updates use the Welford/Terriberry recurrences; merge() combines two
/// accumulators with the pairwise formulas of Chan and Pebay, so partial
/// results from independent chunks can be folded together in a fixed order.
class RunningMoments {
 public:
  void push(double x);
  void merge(const RunningMoments& other);

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double min() const { return min_; }
  double max() const { return max_; }

  /// Unbiased sample variance; empty below two observations.
  std::optional<double> variance() const;
  std::optional<double> mean_standard_error() const;
  /// Large-sample standard error of the sample variance from the fourth
  /// central moment; empty below four observations.
  std::optional<double> variance_standard_error() const;

  bool operator==(const RunningMoments&) const = default;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double m3_ = 0.0;
  double m4_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
};

}  // namespace dshock
