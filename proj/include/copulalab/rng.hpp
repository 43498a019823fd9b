#pragma once

#include <cstdint>
#include <random>

namespace copulalab {

// Stateless mixer used to derive independent substream seeds from
// (base seed, structural indices). Replicate streams never depend on
// scheduling order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0);

// Deterministic generator: mt19937_64 underneath (bit-exact across
// platforms), with all real-valued draws built from explicit bit
// manipulation so no implementation-defined distributions are involved.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();      // open interval (0,1)
  double normal();       // inverse-CDF method
  double exponential();  // rate 1
  double gamma(double shape);              // Marsaglia-Tsang, any shape > 0
  double stable_positive(double alpha);    // one-sided stable, Laplace exp(-t^alpha)
  std::uint64_t log_series(double p);      // logarithmic distribution, p in (0,1)

 private:
  std::mt19937_64 gen_;
};

}  // namespace copulalab
