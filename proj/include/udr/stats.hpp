#pragma once

#include <span>

namespace udr {

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // n - 1 denominator
};

/// Sample mean and standard deviation. Requires at least two values.
Summary summary(std::span<const double> values);

double mean(std::span<const double> values);

}  // namespace udr
