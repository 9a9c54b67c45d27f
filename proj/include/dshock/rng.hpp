#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace dshock {

/// Random stream keyed by (seed, stream index).
///
/// Two streams with different keys are seeded through std::seed_seq from the
/// four 32-bit halves of the key, so a batch split into chunks can give every
/// chunk its own stream and stay reproducible regardless of scheduling. The
/// engine and seeding algorithm are fully specified by the standard, so the
/// raw bit sequence is identical across platforms.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, std::uint64_t index);

  static constexpr result_type min() { return std::numeric_limits<result_type>::min(); }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return engine_(); }

  /// Uniform draw on the open interval (0, 1) with 53 bits of resolution.
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dshock
