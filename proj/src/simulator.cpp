#include "dshock/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace dshock {

void SimulationConfig::validate() const {
  if (runs < 1) throw ModelError("simulation needs at least one run");
  if (workers < 1) throw ModelError("simulation needs at least one worker");
  if (histogram.bins < 1) throw ModelError("histogram needs at least one bin");
  if (histogram.upper < 0.0) throw ModelError("histogram upper edge must be >= 0");
  if (gap_cap < 1) throw ModelError("gap cap must be >= 1");
}

Trajectory simulate_one(const ShockModel& model, Stream& stream, std::uint64_t gap_cap) {
  Trajectory out;
  out.lethal_positions.reserve(static_cast<std::size_t>(model.k()));
  std::uint64_t index = 0;
  const auto path = simulate_path(model, stream, gap_cap, [&](double, bool lethal) {
    ++index;
    if (lethal) out.lethal_positions.push_back(index);
  });
  out.failure_time = path.failure_time;
  out.shock_count = path.shock_count;
  return out;
}

double SimulationReport::ecdf(double t) const {
  if (samples.empty()) return 0.0;
  const auto it = std::upper_bound(samples.begin(), samples.end(), t);
  return static_cast<double>(it - samples.begin()) / static_cast<double>(samples.size());
}

double SimulationReport::count_probability(std::int64_t n) const {
  if (runs == 0 || n < k) return 0.0;
  const auto index = static_cast<std::size_t>(n - k);
  if (index >= count_frequency.size()) return 0.0;
  return static_cast<double>(count_frequency[index]) / static_cast<double>(runs);
}

namespace {

struct ChunkResult {
  RunningMoments failure_time;
  RunningMoments shock_count;
  std::vector<double> samples;
  std::vector<std::uint64_t> count_frequency = std::vector<std::uint64_t>(kTrackedCounts, 0);
  std::uint64_t count_overflow = 0;
  std::vector<std::uint64_t> bins;
  std::uint64_t overflow = 0;
};

double histogram_upper(const ShockModel& model, const HistogramPolicy& policy) {
  if (policy.upper > 0.0) return policy.upper;
  const auto moments = failure_moments(model);
  return moments.mean + 12.0 * std::sqrt(std::max(moments.variance, 0.0));
}

}  // namespace

SimulationReport run_batch(const ShockModel& model, const SimulationConfig& config) {
  config.validate();

  const std::uint64_t chunks = (config.runs + kChunkSize - 1) / kChunkSize;
  const double upper = histogram_upper(model, config.histogram);
  const std::size_t bins = config.histogram.bins;
  const double bin_width = upper / static_cast<double>(bins);

  std::vector<ChunkResult> results(chunks);
  std::vector<std::exception_ptr> errors(chunks);

  const auto run_chunk = [&](std::uint64_t c) {
    ChunkResult& out = results[c];
    out.bins.assign(bins, 0);
    Stream stream(config.seed, c);
    const std::uint64_t first = c * kChunkSize;
    const std::uint64_t last = std::min(config.runs, first + kChunkSize);
    for (std::uint64_t r = first; r < last; ++r) {
      const auto path = simulate_path(model, stream, config.gap_cap, [](double, bool) {});
      out.failure_time.push(path.failure_time);
      out.shock_count.push(static_cast<double>(path.shock_count));
      const std::uint64_t excess = path.shock_count - static_cast<std::uint64_t>(model.k());
      if (excess < kTrackedCounts) {
        ++out.count_frequency[excess];
      } else {
        ++out.count_overflow;
      }
      const double slot = path.failure_time / bin_width;
      if (slot < static_cast<double>(bins)) {
        ++out.bins[static_cast<std::size_t>(slot)];
      } else {
        ++out.overflow;
      }
      if (r < config.sample_limit) out.samples.push_back(path.failure_time);
    }
  };

  std::atomic<std::uint64_t> next{0};
  const auto worker = [&]() {
    for (std::uint64_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
      try {
        run_chunk(c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<unsigned>(std::min<std::uint64_t>(config.workers, chunks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SimulationReport report;
  report.runs = config.runs;
  report.seed = config.seed;
  report.k = model.k();
  report.count_frequency.assign(kTrackedCounts, 0);
  report.histogram.upper = upper;
  report.histogram.counts.assign(bins, 0);
  for (auto& chunk : results) {
    report.failure_time.merge(chunk.failure_time);
    report.shock_count.merge(chunk.shock_count);
    report.samples.insert(report.samples.end(), chunk.samples.begin(), chunk.samples.end());
    for (std::size_t i = 0; i < kTrackedCounts; ++i) report.count_frequency[i] += chunk.count_frequency[i];
    report.count_overflow += chunk.count_overflow;
    for (std::size_t i = 0; i < bins; ++i) report.histogram.counts[i] += chunk.bins[i];
    report.histogram.overflow += chunk.overflow;
    chunk = ChunkResult{};
  }
  std::sort(report.samples.begin(), report.samples.end());
  return report;
}

double ks_statistic(std::span<const double> sorted_samples,
                    const std::function<double(double)>& cdf) {
  const auto n = static_cast<double>(sorted_samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted_samples.size(); ++i) {
    const double f = cdf(sorted_samples[i]);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  return d;
}

double ks_statistic(const SimulationReport& report, const std::function<double(double)>& cdf) {
  return ks_statistic(std::span<const double>(report.samples), cdf);
}

double ks_critical_value(std::size_t n, double alpha) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

}  // namespace dshock
