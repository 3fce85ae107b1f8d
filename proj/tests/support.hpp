#pragma once

#include <cmath>
#include <random>

#include "gradflow/basis.hpp"

namespace testing {

inline Eigen::VectorXd random_vector(int n, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

// sqrt(2/pi) sin(k x), evaluated directly.
inline double sine_mode(int k, double x) { return std::sqrt(2.0 / M_PI) * std::sin(k * x); }

}  // namespace testing
