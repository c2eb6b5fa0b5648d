#pragma once

// Reproducible random streams.
//
// Every stochastic step draws from a stream derived from the master seed and
// a key (household id, category, week, purpose), so results never depend on
// how work is scheduled across threads.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace ecd {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Folds keys into a seed; order-sensitive.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys);

enum class StreamPurpose : std::uint64_t {
  Adoption = 1,
  Orders = 2,
  Packages = 3,
  Population = 4,
  Replication = 5,
  Dataset = 6,
};

class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed) : engine_(mix64(seed)) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t uniform_index(std::uint64_t n);
  std::uint64_t poisson(double mean);

 private:
  std::mt19937_64 engine_;
};

RngStream household_stream(std::uint64_t master, std::string_view household_id,
                            StreamPurpose purpose, std::uint64_t category = 0,
                            std::uint64_t week = 0);

}  // namespace ecd
