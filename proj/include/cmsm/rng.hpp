#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace cmsm {

// 64-bit avalanche mix (splitmix64 finalizer). Used to derive independent
// stream seeds from (master, tag, index) triples.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stream purposes. Keeping these distinct guarantees that, e.g., the weights
// for bootstrap replicate b never overlap the multiplier draws for b.
enum class StreamTag : std::uint64_t {
  Dataset = 1,
  Analysis = 2,
  Multiplier = 3,
  BootstrapWeights = 4,
  Oracle = 5,
  ArmAssignment = 6,
  Generic = 7,
};

// Seed policy: every random quantity is produced by a stream addressed as
// (master, tag, index). Derivation is pure, so results never depend on
// scheduling or thread count.
struct SeedSpec {
  std::uint64_t master = 0;

  std::uint64_t stream(StreamTag tag, std::uint64_t index) const {
    std::uint64_t s = mix64(master ^ mix64(static_cast<std::uint64_t>(tag)));
    return mix64(s ^ mix64(index));
  }
  SeedSpec derived(StreamTag tag, std::uint64_t index) const {
    return SeedSpec{stream(tag, index)};
  }
};

// Deterministic draw primitives on top of mt19937_64. The engine is fully
// specified by the standard; the transforms below avoid std::*_distribution,
// whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  Rng(const SeedSpec& spec, StreamTag tag, std::uint64_t index)
      : eng_(spec.stream(tag, index)) {}

  std::uint64_t bits() { return eng_(); }

  // in [0, 1)
  double u01() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  // in (0, 1); safe under log()
  double u01_open() {
    return (static_cast<double>(bits() >> 12) + 0.5) * 0x1.0p-52;
  }

  // uniform on {lo, ..., hi}, rejection sampled so the law is exact
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(bits());  // full range
    std::uint64_t mask = span - 1;
    mask |= mask >> 1; mask |= mask >> 2; mask |= mask >> 4;
    mask |= mask >> 8; mask |= mask >> 16; mask |= mask >> 32;
    std::uint64_t draw;
    do { draw = bits() & mask; } while (draw >= span);
    return lo + static_cast<std::int64_t>(draw);
  }

  double exponential(double rate) { return -std::log(u01_open()) / rate; }

  // Box-Muller with one cached spare; branch structure is deterministic.
  double normal() {
    if (has_spare_) { has_spare_ = false; return spare_; }
    const double u1 = u01_open();
    const double u2 = u01_open();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Marsaglia-Tsang for shape >= 1, boosted for shape < 1.
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      const double u = u01_open();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = u01_open();
      if (u < 1.0 - 0.0331 * x * x * x * x) return scale * d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
        return scale * d * v;
      }
    }
  }

  // counts ~ Multinomial(trials; 1/cells, ..., 1/cells)
  std::vector<double> multinomial_uniform(std::int64_t trials,
                                          std::int64_t cells) {
    std::vector<double> counts(static_cast<std::size_t>(cells), 0.0);
    for (std::int64_t t = 0; t < trials; ++t) {
      counts[static_cast<std::size_t>(uniform_int(0, cells - 1))] += 1.0;
    }
    return counts;
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cmsm
