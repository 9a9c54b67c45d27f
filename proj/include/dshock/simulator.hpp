#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <sstream>
#include <vector>

#include "dshock/errors.hpp"
#include "dshock/rng.hpp"
#include "dshock/running_moments.hpp"
#include "dshock/shock_model.hpp"

namespace dshock {

inline constexpr std::uint64_t kDefaultGapCap = 1'000'000'000;
inline constexpr std::uint64_t kChunkSize = std::uint64_t{1} << 16;
// Shock counts n = k .. k + kTrackedCounts - 1 are tallied individually.
inline constexpr std::size_t kTrackedCounts = 128;

struct HistogramPolicy {
  std::size_t bins = 256;
  // Upper edge of the last bin; 0 places it at mean + 12 sd of W.
  double upper = 0.0;
};

struct SimulationConfig {
  std::uint64_t runs = 100'000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  HistogramPolicy histogram;
  std::uint64_t gap_cap = kDefaultGapCap;
  // Failure times of the first sample_limit runs are kept for the empirical cdf.
  std::size_t sample_limit = 1'000'000;

  void validate() const;
};

struct PathSummary {
  double failure_time = 0.0;
  std::uint64_t shock_count = 0;
};

/// Walks one system from start-up to failure. Each gap Z ~ F is compared
/// against a fresh delta ~ G and is lethal when Z <= delta; the walk stops at
/// the k-th lethal gap. on_gap(gap, lethal) sees every gap in order.
template <class OnGap>
PathSummary simulate_path(const ShockModel& model, Stream& stream, std::uint64_t gap_cap,
                          OnGap&& on_gap) {
  PathSummary out;
  int lethal_seen = 0;
  while (lethal_seen < model.k()) {
    if (out.shock_count >= gap_cap) {
      std::ostringstream msg;
      msg << "simulation cap exceeded: " << gap_cap << " gaps without reaching lethal shock "
          << model.k();
      throw SimulationCapExceeded(msg.str());
    }
    const double gap = model.arrivals().sample(stream);
    const double delta = model.threshold().sample(stream);
    const bool lethal = gap <= delta;
    out.failure_time += gap;
    ++out.shock_count;
    if (lethal) ++lethal_seen;
    on_gap(gap, lethal);
  }
  return out;
}

struct Trajectory {
  double failure_time = 0.0;
  std::uint64_t shock_count = 0;
  // 1-based indices of the lethal gaps; the last one equals shock_count.
  std::vector<std::uint64_t> lethal_positions;
};

Trajectory simulate_one(const ShockModel& model, Stream& stream,
                        std::uint64_t gap_cap = kDefaultGapCap);

struct Histogram {
  double upper = 0.0;  // bins cover [0, upper)
  std::vector<std::uint64_t> counts;
  std::uint64_t overflow = 0;

  bool operator==(const Histogram&) const = default;
};

struct SimulationReport {
  std::uint64_t runs = 0;
  std::uint64_t seed = 0;
  int k = 0;
  RunningMoments failure_time;
  RunningMoments shock_count;
  // Sorted failure times of the first min(runs, sample_limit) runs.
  std::vector<double> samples;
  // count_frequency[i] = number of runs with N = k + i.
  std::vector<std::uint64_t> count_frequency;
  std::uint64_t count_overflow = 0;
  Histogram histogram;

  /// Empirical cdf of the retained samples.
  double ecdf(double t) const;
  /// Empirical P(N = n).
  double count_probability(std::int64_t n) const;

  bool operator==(const SimulationReport&) const = default;
};

/// Runs config.runs independent trajectories. Run r belongs to chunk
/// r / kChunkSize and every chunk draws from Stream(seed, chunk), so the
/// report is a function of (model, seed, runs) alone; workers only change
/// wall-clock time. Chunk partials are merged in chunk order.
SimulationReport run_batch(const ShockModel& model, const SimulationConfig& config);

/// sup_t |F_n(t) - F(t)| for sorted samples.
double ks_statistic(std::span<const double> sorted_samples, const std::function<double(double)>& cdf);
double ks_statistic(const SimulationReport& report, const std::function<double(double)>& cdf);

/// Asymptotic one-sample Kolmogorov-Smirnov critical value sqrt(-ln(alpha/2)/2) / sqrt(n).
double ks_critical_value(std::size_t n, double alpha = 0.01);

}  // namespace dshock
