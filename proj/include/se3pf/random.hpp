// Seeded random stream used across the library. All randomness flows through
// an explicit Rng argument; no global or wall-clock entropy anywhere.

#ifndef SE3PF_RANDOM_HPP
#define SE3PF_RANDOM_HPP

#include <cstdint>
#include <random>

namespace se3pf {

using Rng = std::mt19937_64;

inline double uniform_in(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Zero-mean Gaussian draw. A zero sigma consumes no randomness and returns
/// exactly zero.
inline double gaussian(Rng& rng, double sigma) {
  if (sigma == 0.0) {
    return 0.0;
  }
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

}  // namespace se3pf

#endif  // SE3PF_RANDOM_HPP
