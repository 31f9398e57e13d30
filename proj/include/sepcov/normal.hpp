#pragma once

#include <cmath>
#include <numbers>

#include "sepcov/errors.hpp"

namespace sepcov {

/// Standard normal cdf.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Upper tail 1 - Phi(z), computed without cancellation.
inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// Phi^{-1}(prob) by Newton iteration on Phi. Phi is concave on the right
/// half-line and convex on the left, so iterating from 0 converges
/// monotonically for either tail.
inline double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw InputError("normal quantile needs 0 < prob < 1");
  // Iterate on the smaller tail probability so nothing is lost to 1 - prob.
  const bool lower = prob < 0.5;
  const double target = lower ? prob : 1.0 - prob;
  double x = 0.0;  // tracks -|quantile|
  for (int it = 0; it < 500; ++it) {
    const double step = (normal_cdf(x) - target) / normal_pdf(x);
    x -= step;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(x))) break;
  }
  x = lower ? x : -x;
  return x;
}

}  // namespace sepcov
