#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace mpw {

/// A caller-owned random stream. Independent streams are derived from a
/// (master seed, stream index) pair so that replica k of an experiment sees
/// the same draws regardless of how replicas are scheduled onto threads.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed);

  static RandomStream derive(std::uint64_t master_seed, std::uint64_t stream_index);

  static constexpr result_type min() { return std::numeric_limits<result_type>::min(); }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_positive() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  explicit RandomStream(std::mt19937_64 engine) : engine_(engine) {}
  std::mt19937_64 engine_;
};

}  // namespace mpw
