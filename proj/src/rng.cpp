#include "copulalab/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "copulalab/normal.hpp"

namespace copulalab {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  std::uint64_t state = base;
  std::uint64_t h = splitmix64(state);
  state ^= a * 0xA24BAED4963EE407ULL;
  h ^= splitmix64(state);
  state ^= b * 0x9FB21C651E98DF25ULL;
  h ^= splitmix64(state);
  state ^= c * 0xD6E8FEB86659FD93ULL;
  h ^= splitmix64(state);
  return h;
}

Rng::Rng(std::uint64_t seed) : gen_(seed) {}

std::uint64_t Rng::next_u64() { return gen_(); }

double Rng::uniform() {
  // 53 random bits mapped to the open interval (0,1).
  return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return normal_quantile(uniform()); }

double Rng::exponential() { return -std::log(uniform()); }

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw std::domain_error("gamma: shape must be > 0");
  if (shape < 1.0) {
    const double u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
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
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::stable_positive(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("stable_positive: alpha must lie in (0,1)");
  const double theta = kPi * uniform();
  const double w = exponential();
  const double st = std::sin(theta);
  return std::sin(alpha * theta) / std::pow(st, 1.0 / alpha) *
         std::pow(std::sin((1.0 - alpha) * theta) / w, (1.0 - alpha) / alpha);
}

std::uint64_t Rng::log_series(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("log_series: p must lie in (0,1)");
  // Kemp's second accelerated generator.
  const double u = uniform();
  if (u > p) return 1;
  const double v = uniform();
  const double q = 1.0 - std::exp(v * std::log1p(-p));
  if (u < q * q) {
    const double x = 1.0 + std::log(u) / std::log(q);
    return static_cast<std::uint64_t>(x);
  }
  return u > q ? 1 : 2;
}

}  // namespace copulalab
