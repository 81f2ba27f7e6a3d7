#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace lmd {

// Derives independent, platform-stable seeds from a master seed and a path of
// tags/indices, e.g. SeedPath(master).with("alice").with("split").with(j).
class SeedPath {
 public:
  explicit SeedPath(std::uint64_t master);

  SeedPath with(std::string_view tag) const;
  SeedPath with(std::uint64_t index) const;

  std::uint64_t seed() const { return state_; }

 private:
  explicit SeedPath(std::uint64_t state, int) : state_(state) {}
  std::uint64_t state_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Seeded generator with distribution helpers that do not depend on the
// standard library's implementation-defined distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n); n must be > 0.
  std::size_t uniform_index(std::size_t n);

  // Uniform in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Uniform in [0, 1).
  double uniform01();

  bool bernoulli(double p) { return uniform01() < p; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lmd
