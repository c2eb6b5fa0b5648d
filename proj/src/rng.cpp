#include "ecd/rng.hpp"

#include "ecd/error.hpp"

namespace ecd {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = mix64(master);
  for (auto k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw InvalidInput("uniform_index over an empty range");
  // Lemire-style rejection keeps the result unbiased and platform independent.
  const std::uint64_t limit = max() - (max() % n + 1) % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x > limit);
  return x % n;
}

std::uint64_t RngStream::poisson(double mean) {
  if (!(mean >= 0.0)) throw InvalidInput("poisson mean must be non-negative");
  if (mean == 0.0) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(engine_);
}

RngStream household_stream(std::uint64_t master, std::string_view household_id,
                           StreamPurpose purpose, std::uint64_t category, std::uint64_t week) {
  return RngStream(derive_seed(master, {fnv1a64(household_id),
                                        static_cast<std::uint64_t>(purpose), category, week}));
}

}  // namespace ecd
