#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace selfex {

/// Seeded random stream. The integer sequence is std::mt19937_64, whose output
/// is fixed by the standard; every floating-point transform below is written
/// out here so draws do not depend on the standard library's distributions.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  /// Stream `index` of the family identified by `master_seed`.
  explicit RandomStream(std::uint64_t master_seed, std::uint64_t index = 0);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exponential with the given rate (> 0).
  double exponential(double rate);

  /// Standard normal, Marsaglia polar method (second variate is cached).
  double normal();

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t index() const noexcept { return index_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t master_seed_;
  std::uint64_t index_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace selfex
