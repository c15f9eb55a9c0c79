#pragma once

#include <algorithm>
#include <stdexcept>

namespace udr {

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

/// Clamp x to [a, b]. Requires a < b.
inline double truncate(double x, double a, double b) {
  if (!(a < b)) throw std::invalid_argument("truncate: need a < b");
  if (x < a) return a;
  if (x > b) return b;
  return x;
}

/// Truncation written as a relu network, valid for a < 0 < b:
/// relu(-relu(-x + b) + b) - relu(-relu(x - a) - a).
inline double truncate_relu_straddle(double x, double a, double b) {
  if (!(a < 0.0 && 0.0 < b)) throw std::invalid_argument("truncate_relu_straddle: need a < 0 < b");
  return relu(-relu(-x + b) + b) - relu(-relu(x - a) - a);
}

/// Truncation written as a relu network, valid for 0 <= a < b:
/// relu(-relu(-x + b) + b - a) + a.
inline double truncate_relu_nonneg(double x, double a, double b) {
  if (!(0.0 <= a && a < b)) throw std::invalid_argument("truncate_relu_nonneg: need 0 <= a < b");
  return relu(-relu(-x + b) + b - a) + a;
}

}  // namespace udr
