#include "udr/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace udr {

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean: empty input");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

Summary summary(std::span<const double> values) {
  if (values.size() < 2) {
    throw std::invalid_argument("summary: need at least 2 values, got " +
                                std::to_string(values.size()));
  }
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

}  // namespace udr
