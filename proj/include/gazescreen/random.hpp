#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <utility>

namespace gazescreen {

// Hash a root seed with a path of stream indices into an independent seed.
// Every random stream in the project is derived this way so that a result
// depends only on (root seed, position), never on execution order.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path);

// mt19937_64 is bit-specified by the standard but <random> distributions are
// not, so the distributions used here are written out explicitly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer on [0, n); n > 0.
  std::size_t index(std::size_t n);
  double normal(double mean = 0.0, double sd = 1.0);
  double exponential(double mean);
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gazescreen
