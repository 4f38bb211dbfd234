#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace deconvband {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Counter-based substream derivation: (master, index) -> seed. Streams are
// order-independent, so replications can run on any thread in any order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master ^ (0xd1b54a32d192ed03ull * (index + 1));
  std::uint64_t z = splitmix64(s);
  return z ^ splitmix64(s);
}

// mt19937_64 (fully specified by the standard, so streams are portable)
// with explicit transforms on top: uniforms from the high 53 bits,
// normals by Box-Muller, Laplace by inverse CDF.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // strictly inside (0,1)
  double uniform01() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  double laplace(double scale) {
    const double u = uniform01();
    return u < 0.5 ? scale * std::log(2.0 * u) : -scale * std::log(2.0 * (1.0 - u));
  }

  std::uint64_t raw() { return gen_(); }

private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace deconvband
